//! Existence and non-existence of half-geodesics: closed geodesics that
//! minimize on every subinterval of half their length.
//!
//! Three surface backends share one verifier ([`metric`]):
//!
//! - [`polygon`]: the doubled regular n-gon, with exact distances by
//!   unfolding, closed-geodesic enumeration through the billiard
//!   correspondence, and half-geodesic classification.
//! - [`tube`]: the boundary of the ε-tubular neighborhood of a doubled
//!   polygon, meshed, with curve shortening and Gromov-Hausdorff distortion
//!   measurements against the flat model.
//! - [`ellipsoid`]: triaxial ellipsoids, with geodesic integration, shooting
//!   distances and classification of the coordinate-plane sections.
//!
//! The guide in `book/` walks through each of these; its code listings are
//! compiled and run as doc-tests of this crate.

pub mod ellipsoid;
pub mod error;
pub mod geom;
pub mod metric;
pub mod polygon;
pub mod svg;
pub mod tube;

#[cfg(doctest)]
mod book;

pub use error::{Error, Result};
pub use metric::{
    curve_length, diameter_cutoff, metric_axiom_check, verify_one_over_k, ClosedCurve, CurveSpace,
    DistanceOracle, ToleranceConfig, Verdict, VerificationReport,
};
