//! The doubled regular n-gon X_n: two copies of a regular polygon glued along
//! their boundaries.
//!
//! X_n is a flat convex length space with n cone points (the vertices), each
//! of total angle `2(n−2)π/n < 2π`. Points are either interior to one of the
//! two faces or on an edge, where they are shared by both faces.
//!
//! The reference polygon has its centroid at the origin and the midpoint of
//! edge 0 on the positive x-axis. Edge `e` runs from vertex `e` to vertex
//! `e + 1` counterclockwise, so the face interior lies to the left of every
//! edge.

mod classify;
mod distance;
mod ellipse;
mod enumerate;
mod mesh;

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geom::Vec2;
use crate::metric::{Breakpoint, ClosedCurve, CurveSpace};

pub use classify::{
    approximate_diameter, classify_half_geodesics, CandidateReport, Classification, ClassifyConfig, DiameterEstimate,
};
pub(crate) use distance::Affine;
pub use distance::{Crossing, GeodesicPath, PolygonOracle, SearchLimits};
pub use ellipse::{edge_minimum, ellipse_clearance_check, EdgeMinimum, EllipseCheck};
pub use enumerate::{
    edge_sequence, enumerate_closed_geodesics, meridians, same_curve, ClosedGeodesic, Enumeration,
    EnumerationCertificate, EnumerationLimits, GeodesicFamily, GeodesicTag,
};
pub use mesh::MeshOracle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Face {
    Top,
    Bottom,
}

impl Face {
    pub fn other(self) -> Face {
        match self {
            Face::Top => Face::Bottom,
            Face::Bottom => Face::Top,
        }
    }
}

/// A point of X_n. Vertices are deliberately not representable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PolygonPoint {
    Interior { face: Face, x: f64, y: f64 },
    Edge { edge: usize, u: f64 },
}

impl PolygonPoint {
    pub fn face(&self) -> Option<Face> {
        match *self {
            PolygonPoint::Interior { face, .. } => Some(face),
            PolygonPoint::Edge { .. } => None,
        }
    }

    pub fn is_edge(&self) -> bool {
        matches!(self, PolygonPoint::Edge { .. })
    }
}

/// Regular n-gon doubled along its boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubledNgon {
    n: usize,
    side: f64,
    vertices: Vec<Vec2>,
    apothem: f64,
    circumradius: f64,
}

impl DoubledNgon {
    pub fn new(n: usize, side: f64) -> Result<Self> {
        if n < 3 {
            return Err(invalid(format!("a doubled polygon needs n >= 3 sides, got {n}")));
        }
        if !(side > 0.0) || !side.is_finite() {
            return Err(invalid(format!("side length must be positive, got {side}")));
        }
        let half = PI / n as f64;
        let circumradius = side / (2.0 * half.sin());
        let apothem = 0.5 * side * snap(half.cos() / half.sin());
        // Vertex i sits at the start of edge i, whose outward normal has angle 2πi/n.
        let vertices = (0..n)
            .map(|i| {
                let (s, c) = (2.0 * half * i as f64).sin_cos();
                let normal = Vec2::new(snap(c), snap(s));
                normal * apothem - normal.perp() * (0.5 * side)
            })
            .collect();
        Ok(DoubledNgon { n, side, vertices, apothem, circumradius })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn apothem(&self) -> f64 {
        self.apothem
    }

    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    pub fn perimeter(&self) -> f64 {
        self.n as f64 * self.side
    }

    /// Area of one face.
    pub fn face_area(&self) -> f64 {
        0.5 * self.perimeter() * self.apothem
    }

    /// Distance between a pair of parallel edges; only even n has them.
    pub fn width_across_flats(&self) -> Option<f64> {
        (self.n % 2 == 0).then(|| 2.0 * self.apothem)
    }

    pub fn interior_angle(&self) -> f64 {
        (self.n as f64 - 2.0) * PI / self.n as f64
    }

    /// Total angle around a vertex of the doubled polygon.
    pub fn cone_angle(&self) -> f64 {
        2.0 * self.interior_angle()
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Vec2 {
        self.vertices[i % self.n]
    }

    pub fn edge(&self, e: usize) -> (Vec2, Vec2) {
        (self.vertex(e), self.vertex(e + 1))
    }

    pub fn edge_position(&self, e: usize, u: f64) -> Vec2 {
        let (a, b) = self.edge(e);
        a.lerp(b, u)
    }

    /// Outward unit normal of edge `e`.
    pub fn edge_normal(&self, e: usize) -> Vec2 {
        let (s, c) = (2.0 * PI * (e % self.n) as f64 / self.n as f64).sin_cos();
        Vec2::new(snap(c), snap(s))
    }

    pub fn opposite_edge(&self, e: usize) -> Option<usize> {
        (self.n % 2 == 0).then(|| (e + self.n / 2) % self.n)
    }

    /// Signed distance from `p` to the line of edge `e`, positive inside.
    pub fn inset(&self, e: usize, p: Vec2) -> f64 {
        self.apothem - p.dot(self.edge_normal(e))
    }

    /// Smallest distance from `p` to the boundary lines, positive inside.
    pub fn min_inset(&self, p: Vec2) -> f64 {
        (0..self.n).map(|e| self.inset(e, p)).fold(f64::INFINITY, f64::min)
    }

    pub fn contains_strictly(&self, p: Vec2) -> bool {
        self.min_inset(p) > 0.0
    }

    pub fn interior_point(&self, face: Face, x: f64, y: f64) -> Result<PolygonPoint> {
        let p = Vec2::new(x, y);
        if !self.contains_strictly(p) {
            return Err(invalid(format!("({x}, {y}) is not strictly inside the {}-gon", self.n)));
        }
        Ok(PolygonPoint::Interior { face, x, y })
    }

    pub fn edge_point(&self, edge: usize, u: f64) -> Result<PolygonPoint> {
        if edge >= self.n {
            return Err(invalid(format!("edge {edge} out of range for n = {}", self.n)));
        }
        if !(u > 0.0 && u < 1.0) {
            return Err(invalid(format!("edge parameter must lie in (0, 1), got {u} (vertices are excluded)")));
        }
        Ok(PolygonPoint::Edge { edge, u })
    }

    /// Validates an arbitrary point handle against this polygon.
    pub fn check_point(&self, p: &PolygonPoint) -> Result<()> {
        match *p {
            PolygonPoint::Interior { face, x, y } => self.interior_point(face, x, y).map(|_| ()),
            PolygonPoint::Edge { edge, u } => self.edge_point(edge, u).map(|_| ()),
        }
    }

    /// Position in the plane of the single-sided reference polygon.
    pub fn planar(&self, p: &PolygonPoint) -> Vec2 {
        match *p {
            PolygonPoint::Interior { x, y, .. } => Vec2::new(x, y),
            PolygonPoint::Edge { edge, u } => self.edge_position(edge, u),
        }
    }

    /// Classifies a planar position on a face: boundary points (within
    /// `tol` of an edge line) become edge points.
    pub fn locate(&self, face: Face, p: Vec2, tol: f64) -> PolygonPoint {
        for e in 0..self.n {
            if self.inset(e, p).abs() <= tol {
                let (a, b) = self.edge(e);
                let u = (p - a).dot(b - a) / (b - a).dot(b - a);
                if u > 0.0 && u < 1.0 {
                    return PolygonPoint::Edge { edge: e, u };
                }
            }
        }
        PolygonPoint::Interior { face, x: p.x, y: p.y }
    }

    /// Rotation by `r` steps of the dihedral group (edge e goes to e + r).
    pub fn rotate_point(&self, p: &PolygonPoint, r: usize) -> PolygonPoint {
        let angle = 2.0 * PI * (r % self.n) as f64 / self.n as f64;
        match *p {
            PolygonPoint::Interior { face, x, y } => {
                let q = Vec2::new(x, y).rotated(angle);
                PolygonPoint::Interior { face, x: q.x, y: q.y }
            }
            PolygonPoint::Edge { edge, u } => PolygonPoint::Edge { edge: (edge + r) % self.n, u },
        }
    }

    /// Reflection across the x-axis (edge e goes to −e, orientation flips).
    pub fn mirror_point(&self, p: &PolygonPoint) -> PolygonPoint {
        match *p {
            PolygonPoint::Interior { face, x, y } => PolygonPoint::Interior { face, x, y: -y },
            PolygonPoint::Edge { edge, u } => PolygonPoint::Edge { edge: (self.n - edge) % self.n, u: 1.0 - u },
        }
    }

    /// The isometry exchanging the two faces.
    pub fn swap_faces(&self, p: &PolygonPoint) -> PolygonPoint {
        match *p {
            PolygonPoint::Interior { face, x, y } => PolygonPoint::Interior { face: face.other(), x, y },
            e => e,
        }
    }

    pub fn surface_id(&self) -> String {
        format!("doubled-{}-gon(side={})", self.n, self.side)
    }

    /// Uniform point of one face (chosen at random), by rejection from the
    /// circumscribed disk.
    pub fn random_interior<R: Rng + ?Sized>(&self, rng: &mut R) -> PolygonPoint {
        let face = if rng.gen_bool(0.5) { Face::Top } else { Face::Bottom };
        loop {
            let x = rng.gen_range(-self.circumradius..self.circumradius);
            let y = rng.gen_range(-self.circumradius..self.circumradius);
            if self.min_inset(Vec2::new(x, y)) > 1e-9 * self.side {
                return PolygonPoint::Interior { face, x, y };
            }
        }
    }

    /// Interior point with probability `1 − edge_fraction`, edge point otherwise.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R, edge_fraction: f64) -> PolygonPoint {
        if rng.gen_bool(edge_fraction) {
            PolygonPoint::Edge { edge: rng.gen_range(0..self.n), u: rng.gen_range(0.01..0.99) }
        } else {
            self.random_interior(rng)
        }
    }
}

/// An element of the dihedral symmetry group of the n-gon: optional mirror
/// across the x-axis followed by `rotation` steps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Symmetry {
    pub rotation: usize,
    pub mirror: bool,
}

impl Symmetry {
    /// All 2n elements, identity first.
    pub fn all(n: usize) -> Vec<Symmetry> {
        let mut out: Vec<Symmetry> = (0..n).map(|rotation| Symmetry { rotation, mirror: false }).collect();
        out.extend((0..n).map(|rotation| Symmetry { rotation, mirror: true }));
        out
    }
}

impl DoubledNgon {
    pub fn apply_symmetry(&self, p: &PolygonPoint, g: Symmetry) -> PolygonPoint {
        let p = if g.mirror { self.mirror_point(p) } else { *p };
        self.rotate_point(&p, g.rotation)
    }

    pub fn apply_symmetry_to_curve(&self, curve: &ClosedCurve<PolygonPoint>, g: Symmetry) -> ClosedCurve<PolygonPoint> {
        ClosedCurve {
            breakpoints: curve
                .breakpoints
                .iter()
                .map(|b| Breakpoint { t: b.t, point: self.apply_symmetry(&b.point, g) })
                .collect(),
            total_length: curve.total_length,
            surface_id: curve.surface_id.clone(),
        }
    }

    /// Whether two handles denote the same point of X_n within `tol`.
    pub fn same_point(&self, a: &PolygonPoint, b: &PolygonPoint, tol: f64) -> bool {
        match (a.face(), b.face()) {
            (Some(fa), Some(fb)) if fa != fb => false,
            _ => a.is_edge() == b.is_edge() && self.planar(a).dist(self.planar(b)) <= tol,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRecord {
    pub n: usize,
    pub side: f64,
}

/// One breakpoint in the JSON form `{t, face, coords}` or `{t, edge, u}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakpointRecord {
    pub t: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub face: Option<Face>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coords: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub edge: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub u: Option<f64>,
}

/// Serialized form of a curve on X_n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub surface: SurfaceRecord,
    pub breakpoints: Vec<BreakpointRecord>,
    pub length: f64,
}

impl CurveRecord {
    pub fn new(ngon: &DoubledNgon, curve: &ClosedCurve<PolygonPoint>) -> Self {
        let breakpoints = curve
            .breakpoints
            .iter()
            .map(|b| match b.point {
                PolygonPoint::Interior { face, x, y } => {
                    BreakpointRecord { t: b.t, face: Some(face), coords: Some([x, y]), edge: None, u: None }
                }
                PolygonPoint::Edge { edge, u } => {
                    BreakpointRecord { t: b.t, face: None, coords: None, edge: Some(edge), u: Some(u) }
                }
            })
            .collect();
        CurveRecord {
            surface: SurfaceRecord { n: ngon.n(), side: ngon.side() },
            breakpoints,
            length: curve.total_length,
        }
    }
}

/// Rounds values within a few ulps of 0, ±1/2 or ±1 onto them, so that the
/// square and hexagon get exactly representable edges where possible.
fn snap(x: f64) -> f64 {
    for t in [0.0, 0.5, -0.5, 1.0, -1.0] {
        if (x - t).abs() <= 4.0 * f64::EPSILON {
            return t;
        }
    }
    x
}

/// Segments of curves on X_n are straight in one face. A segment joining two
/// edge points on different edges has no recorded face; curves built by this
/// crate always insert an interior breakpoint on such segments, and
/// interpolation falls back to the top face otherwise.
impl CurveSpace for DoubledNgon {
    type Point = PolygonPoint;

    fn surface_id(&self) -> String {
        DoubledNgon::surface_id(self)
    }

    fn segment_length(&self, a: &PolygonPoint, b: &PolygonPoint) -> f64 {
        self.planar(a).dist(self.planar(b))
    }

    fn interpolate(&self, a: &PolygonPoint, b: &PolygonPoint, s: f64) -> PolygonPoint {
        if s <= 0.0 {
            return *a;
        }
        if s >= 1.0 {
            return *b;
        }
        if let (PolygonPoint::Edge { edge: ea, u: ua }, PolygonPoint::Edge { edge: eb, u: ub }) = (a, b) {
            if ea == eb {
                return PolygonPoint::Edge { edge: *ea, u: ua + (ub - ua) * s };
            }
        }
        let face = a.face().or(b.face()).unwrap_or(Face::Top);
        let p = self.planar(a).lerp(self.planar(b), s);
        PolygonPoint::Interior { face, x: p.x, y: p.y }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_quantities() {
        let sq = DoubledNgon::new(4, 1.0).unwrap();
        assert!((sq.apothem() - 0.5).abs() < 1e-15);
        assert!((sq.perimeter() - 4.0).abs() < 1e-15);
        assert!((sq.face_area() - 1.0).abs() < 1e-15);
        assert_eq!(sq.width_across_flats(), Some(1.0));
        // edge 0 midpoint on +x axis
        let m = sq.edge_position(0, 0.5);
        assert!((m.x - 0.5).abs() < 1e-15 && m.y.abs() < 1e-15);
    }

    #[test]
    fn hexagon_quantities() {
        let hx = DoubledNgon::new(6, 1.0).unwrap();
        assert!((hx.apothem() - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((hx.width_across_flats().unwrap() - 3f64.sqrt()).abs() < 1e-14);
        assert!((hx.interior_angle() - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!(hx.cone_angle() < 2.0 * PI);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(DoubledNgon::new(2, 1.0).is_err());
        assert!(DoubledNgon::new(5, 0.0).is_err());
        let sq = DoubledNgon::new(4, 1.0).unwrap();
        assert!(sq.edge_point(0, 0.0).is_err());
        assert!(sq.edge_point(0, 1.0).is_err());
        assert!(sq.edge_point(4, 0.5).is_err());
        assert!(sq.interior_point(Face::Top, 0.5, 0.0).is_err());
        assert!(sq.interior_point(Face::Top, 0.49, 0.0).is_ok());
    }

    #[test]
    fn vertices_are_ccw_and_edge_normals_point_out() {
        for n in 3..9 {
            let g = DoubledNgon::new(n, 1.3).unwrap();
            for e in 0..n {
                let (a, b) = g.edge(e);
                assert!(((b - a).norm() - 1.3).abs() < 1e-12);
                assert!((b - a).cross(-a) > 0.0, "interior left of edge");
                let mid = a.lerp(b, 0.5);
                assert!((mid.dot(g.edge_normal(e)) - g.apothem()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symmetries_preserve_positions() {
        let g = DoubledNgon::new(5, 1.0).unwrap();
        let p = g.edge_point(2, 0.3).unwrap();
        let m = g.mirror_point(&p);
        let (a, b) = (g.planar(&p), g.planar(&m));
        assert!((a.x - b.x).abs() < 1e-12 && (a.y + b.y).abs() < 1e-12);
        let r = g.rotate_point(&p, 4);
        let c = g.planar(&r);
        let expect = a.rotated(8.0 * PI / 5.0);
        assert!(c.dist(expect) < 1e-12);
    }
}
