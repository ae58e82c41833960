//! Guide chapters, compiled so their listings run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/verifier.md")]
pub mod verifier {}
#[doc = include_str!("../../../book/src/polygons.md")]
pub mod polygons {}
#[doc = include_str!("../../../book/src/ellipse.md")]
pub mod ellipse {}
#[doc = include_str!("../../../book/src/tubes.md")]
pub mod tubes {}
#[doc = include_str!("../../../book/src/ellipsoids.md")]
pub mod ellipsoids {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
