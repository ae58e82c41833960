//! One function per experiment id. Each validates its parameters by building
//! the owning module's objects before any expensive work.

pub mod ellipsoid;
pub mod polygon;
pub mod tube;
