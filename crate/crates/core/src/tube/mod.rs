//! The boundary Y_{n,ε} of the ε-neighborhood of X_n in R³.
//!
//! The doubled polygon sits in the plane z = 0. Its ε-neighborhood boundary
//! consists of two flat faces at z = ±ε, a half-cylinder of radius ε along
//! every edge and a spherical lune of radius ε and opening angle 2π/n at
//! every vertex. The lunes together make up one sphere.
//!
//! Charts:
//! - face: planar coordinates `(x, y)` inside the polygon;
//! - cylinder along edge `e`: arc length `s ∈ [0, side]` from vertex `e` and
//!   the angle `φ ∈ [0, π]` from the top face (`φ = π/2` is the equator);
//! - lune at vertex `v`: horizontal angle `θ ∈ [0, 2π/n]` measured from the
//!   outward normal of edge `v − 1`, and polar angle `φ ∈ [0, π]`.
//!
//! Every chart region is convex in its own geometry (flat polygon, flat
//! rectangle once unrolled, and a lune of angle < π on a sphere), which is
//! what the distance backend in [`graph`] relies on.

mod distortion;
mod graph;
mod mesh;
mod probe;
mod shorten;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geom::{Vec2, Vec3};
use crate::metric::{ClosedCurve, CurveSpace, DistanceOracle};
use crate::polygon::{DiameterEstimate, DoubledNgon, Face, PolygonPoint};

pub use distortion::{gh_distortion, DistortionReport};
pub use graph::{mesh_distance_oracle, TubeGraphOracle, TubePath};
pub use mesh::{build_mesh, MeshStats, Region, TubeMesh};
pub use probe::{closed_geodesic_probe, LoopSource, ProbeConfig, ProbeReport, Survivor};
pub use shorten::{birkhoff_shorten, random_loop, ShortenConfig, ShortenOutcome, ShortenReport};

/// Boundary tolerance for chart membership.
const CHART_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "chart", rename_all = "lowercase")]
pub enum TubePoint {
    Face { face: Face, x: f64, y: f64 },
    Cylinder { edge: usize, s: f64, phi: f64 },
    Sphere { vertex: usize, theta: f64, phi: f64 },
}

/// Convex pieces of Y, each with its own intrinsic geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cell {
    Face(Face),
    Cylinder(usize),
    Lune(usize),
}

/// Coordinates of a point within one cell: planar position for faces and
/// unrolled cylinders, unit direction from the vertex for lunes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Local {
    Flat(Vec2),
    Round(Vec3),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TubeSurface {
    base: DoubledNgon,
    eps: f64,
}

impl TubeSurface {
    /// Requires `0 < eps < apothem/2`.
    pub fn new(base: &DoubledNgon, eps: f64) -> Result<Self> {
        let bound = base.apothem() / 2.0;
        if !(eps > 0.0 && eps < bound) {
            return Err(invalid(format!("tube radius must satisfy 0 < eps < apothem/2 = {bound}, got {eps}")));
        }
        Ok(TubeSurface { base: base.clone(), eps })
    }

    pub fn base(&self) -> &DoubledNgon {
        &self.base
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// Opening angle of each lune.
    pub fn lune_angle(&self) -> f64 {
        2.0 * PI / self.n() as f64
    }

    /// `2A + πεP + 4πε²`.
    pub fn area(&self) -> f64 {
        let e = self.eps;
        2.0 * self.base.face_area() + PI * e * self.base.perimeter() + 4.0 * PI * e * e
    }

    fn tangent(&self, e: usize) -> Vec2 {
        let (a, b) = self.base.edge(e);
        (b - a).normalized()
    }

    /// Horizontal unit direction at angle `θ` within lune `v`.
    fn lune_direction(&self, v: usize, theta: f64) -> Vec2 {
        let n = self.n();
        let start = self.base.edge_normal((v + n - 1) % n);
        start.rotated(theta)
    }

    pub fn embed(&self, p: &TubePoint) -> Vec3 {
        let e = self.eps;
        match *p {
            TubePoint::Face { face, x, y } => Vec3::new(x, y, if face == Face::Top { e } else { -e }),
            TubePoint::Cylinder { edge, s, phi } => {
                let base = self.base.vertex(edge) + self.tangent(edge) * s;
                let nu = self.base.edge_normal(edge);
                Vec3::new(base.x + e * phi.sin() * nu.x, base.y + e * phi.sin() * nu.y, e * phi.cos())
            }
            TubePoint::Sphere { vertex, theta, phi } => {
                let v = self.base.vertex(vertex);
                let d = self.lune_direction(vertex, theta);
                Vec3::new(v.x + e * phi.sin() * d.x, v.y + e * phi.sin() * d.y, e * phi.cos())
            }
        }
    }

    /// Rejects chart coordinates outside their ranges.
    pub fn check_point(&self, p: &TubePoint) -> Result<()> {
        let ok = match *p {
            TubePoint::Face { x, y, .. } => self.base.min_inset(Vec2::new(x, y)) >= -CHART_TOL,
            TubePoint::Cylinder { edge, s, phi } => {
                edge < self.n() && (-CHART_TOL..=self.base.side() + CHART_TOL).contains(&s) && (-CHART_TOL..=PI + CHART_TOL).contains(&phi)
            }
            TubePoint::Sphere { vertex, theta, phi } => {
                vertex < self.n()
                    && (-CHART_TOL..=self.lune_angle() + CHART_TOL).contains(&theta)
                    && (-CHART_TOL..=PI + CHART_TOL).contains(&phi)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("{p:?} is outside its chart")))
        }
    }

    /// Nearest point of Y to an ambient point away from the base polygon.
    pub fn project(&self, r: Vec3) -> TubePoint {
        let ngon = &self.base;
        let q = r.xy();
        // Nearest point of the planar polygon.
        let mut best: Option<(f64, usize, f64)> = None;
        for e in 0..self.n() {
            if ngon.inset(e, q) < 0.0 {
                let (a, b) = ngon.edge(e);
                let (c, u) = crate::geom::closest_on_segment(q, a, b);
                let d = c.dist(q);
                if best.map_or(true, |(bd, _, _)| d < bd) {
                    best = Some((d, e, u));
                }
            }
        }
        let Some((_, e, u)) = best else {
            let face = if r.z >= 0.0 { Face::Top } else { Face::Bottom };
            return TubePoint::Face { face, x: q.x, y: q.y };
        };
        let n = self.n();
        let (vertex, at_vertex) = if u <= 0.0 {
            (e, true)
        } else if u >= 1.0 {
            ((e + 1) % n, true)
        } else {
            (e, false)
        };
        if at_vertex {
            let v = ngon.vertex(vertex);
            let d = Vec3::new(r.x - v.x, r.y - v.y, r.z);
            let horiz = d.xy();
            let phi = horiz.norm().atan2(d.z);
            let start = ngon.edge_normal((vertex + n - 1) % n);
            let theta = if horiz.norm() > 0.0 { start.cross(horiz).atan2(start.dot(horiz)).clamp(0.0, self.lune_angle()) } else { 0.0 };
            TubePoint::Sphere { vertex, theta, phi }
        } else {
            let (a, b) = ngon.edge(e);
            let base = a.lerp(b, u);
            let out = (q - base).dot(ngon.edge_normal(e));
            TubePoint::Cylinder { edge: e, s: u * ngon.side(), phi: out.atan2(r.z) }
        }
    }

    /// Cells containing `p`, boundary points belonging to every adjacent cell.
    pub fn cells_of(&self, p: &TubePoint) -> Vec<Cell> {
        let n = self.n();
        let side = self.base.side();
        let mut out = Vec::with_capacity(3);
        match *p {
            TubePoint::Face { face, x, y } => {
                out.push(Cell::Face(face));
                let q = Vec2::new(x, y);
                for e in 0..n {
                    if self.base.inset(e, q).abs() <= CHART_TOL {
                        out.push(Cell::Cylinder(e));
                    }
                }
                for v in 0..n {
                    if self.base.vertex(v).dist(q) <= CHART_TOL {
                        out.push(Cell::Lune(v));
                    }
                }
            }
            TubePoint::Cylinder { edge, s, phi } => {
                out.push(Cell::Cylinder(edge));
                if phi <= CHART_TOL {
                    out.push(Cell::Face(Face::Top));
                }
                if phi >= PI - CHART_TOL {
                    out.push(Cell::Face(Face::Bottom));
                }
                if s <= CHART_TOL {
                    out.push(Cell::Lune(edge));
                }
                if s >= side - CHART_TOL {
                    out.push(Cell::Lune((edge + 1) % n));
                }
            }
            TubePoint::Sphere { vertex, theta, phi } => {
                out.push(Cell::Lune(vertex));
                if theta <= CHART_TOL {
                    out.push(Cell::Cylinder((vertex + n - 1) % n));
                }
                if theta >= self.lune_angle() - CHART_TOL {
                    out.push(Cell::Cylinder(vertex));
                }
                if phi <= CHART_TOL {
                    out.push(Cell::Face(Face::Top));
                }
                if phi >= PI - CHART_TOL {
                    out.push(Cell::Face(Face::Bottom));
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Coordinates of an ambient point of Y inside `cell`.
    pub(crate) fn local(&self, cell: Cell, r: Vec3) -> Local {
        match cell {
            Cell::Face(_) => Local::Flat(r.xy()),
            Cell::Cylinder(e) => {
                let a = self.base.vertex(e);
                let t = self.tangent(e);
                let rel = r.xy() - a;
                let s = rel.dot(t);
                let out = rel.dot(self.base.edge_normal(e));
                // Rim points may land a rounding error outside.
                Local::Flat(Vec2::new(s, self.eps * out.max(0.0).atan2(r.z)))
            }
            Cell::Lune(v) => {
                let a = self.base.vertex(v);
                Local::Round(Vec3::new(r.x - a.x, r.y - a.y, r.z).normalized())
            }
        }
    }

    pub(crate) fn local_distance(&self, a: &Local, b: &Local) -> f64 {
        match (a, b) {
            (Local::Flat(a), Local::Flat(b)) => a.dist(*b),
            (Local::Round(a), Local::Round(b)) => self.eps * a.angle_to(*b),
            _ => f64::INFINITY,
        }
    }

    /// Point at fraction `s` along the in-cell geodesic from `a` to `b`.
    pub(crate) fn local_interpolate(&self, cell: Cell, a: &Local, b: &Local, s: f64) -> TubePoint {
        match (cell, a, b) {
            (Cell::Face(face), Local::Flat(a), Local::Flat(b)) => {
                let p = a.lerp(*b, s);
                TubePoint::Face { face, x: p.x, y: p.y }
            }
            (Cell::Cylinder(edge), Local::Flat(a), Local::Flat(b)) => {
                let p = a.lerp(*b, s);
                TubePoint::Cylinder { edge, s: p.x, phi: p.y / self.eps }
            }
            (Cell::Lune(vertex), Local::Round(a), Local::Round(b)) => {
                let omega = a.angle_to(*b);
                let d = if omega < 1e-15 {
                    *a
                } else {
                    let (w0, w1) = (((1.0 - s) * omega).sin(), (s * omega).sin());
                    ((*a * w0) + (*b * w1)) * (1.0 / omega.sin())
                };
                self.sphere_point(vertex, d)
            }
            _ => unreachable!("local coordinates always match their cell"),
        }
    }

    fn sphere_point(&self, vertex: usize, d: Vec3) -> TubePoint {
        let horiz = d.xy();
        let phi = horiz.norm().atan2(d.z);
        let n = self.n();
        let start = self.base.edge_normal((vertex + n - 1) % n);
        let theta = if horiz.norm() > 1e-300 {
            start.cross(horiz).atan2(start.dot(horiz)).clamp(0.0, self.lune_angle())
        } else {
            0.0
        };
        TubePoint::Sphere { vertex, theta, phi }
    }

    /// A cell containing both points, preferring flat ones.
    pub fn common_cell(&self, a: &TubePoint, b: &TubePoint) -> Option<Cell> {
        let ca = self.cells_of(a);
        let cb = self.cells_of(b);
        ca.into_iter().find(|c| cb.contains(c))
    }

    /// The point of X_n a point of Y collapses to, together with the ambient
    /// position of that collapse target (the polygon in z = 0). Lune points
    /// collapse to their vertex; since vertices are not points of X_n, the
    /// handle returned for them is the edge point at `u = 1e-6` next to it.
    pub fn collapse(&self, p: &TubePoint) -> (PolygonPoint, Vec3) {
        let ngon = &self.base;
        const NEAR_VERTEX: f64 = 1e-6;
        match *p {
            TubePoint::Face { face, x, y } => {
                let q = Vec2::new(x, y);
                let handle = if ngon.contains_strictly(q) {
                    PolygonPoint::Interior { face, x, y }
                } else {
                    let e = (0..ngon.n()).min_by(|&a, &b| ngon.inset(a, q).total_cmp(&ngon.inset(b, q))).expect("polygons have edges");
                    let (a, b) = ngon.edge(e);
                    let u = (q - a).dot(b - a) / (b - a).dot(b - a);
                    PolygonPoint::Edge { edge: e, u: u.clamp(NEAR_VERTEX, 1.0 - NEAR_VERTEX) }
                };
                (handle, Vec3::new(x, y, 0.0))
            }
            TubePoint::Cylinder { edge, s, .. } => {
                let u = (s / ngon.side()).clamp(NEAR_VERTEX, 1.0 - NEAR_VERTEX);
                let at = ngon.vertex(edge) + self.tangent(edge) * s.clamp(0.0, ngon.side());
                (PolygonPoint::Edge { edge, u }, Vec3::new(at.x, at.y, 0.0))
            }
            TubePoint::Sphere { vertex, .. } => {
                let v = ngon.vertex(vertex);
                (PolygonPoint::Edge { edge: vertex, u: NEAR_VERTEX }, Vec3::new(v.x, v.y, 0.0))
            }
        }
    }

    /// CheegerInputs plus the area. `diam_upper` pads the base diameter
    /// bound by πε: a shortest path of X_n crosses at most one edge, and
    /// lifting it to Y costs at most one half-cylinder traverse.
    pub fn geometry_summary(&self, base_diameter: &DiameterEstimate) -> GeometrySummary {
        GeometrySummary {
            eps: self.eps,
            area: self.area(),
            cheeger: CheegerInputs {
                diam_upper: base_diameter.upper() + PI * self.eps,
                vol_lower: self.area(),
                curvature_lower: 0.0,
            },
        }
    }

    pub fn surface_id(&self) -> String {
        format!("tube({}, eps={})", self.base.surface_id(), self.eps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheegerInputs {
    pub diam_upper: f64,
    pub vol_lower: f64,
    pub curvature_lower: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub eps: f64,
    pub area: f64,
    pub cheeger: CheegerInputs,
}

/// Map from mesh vertices to X_n by collapsing cylinders onto edges and
/// lunes onto vertices.
#[derive(Clone, Debug)]
pub struct Correspondence {
    pub targets: Vec<(PolygonPoint, Vec3)>,
    /// Largest ambient distance between a vertex and its target.
    pub max_displacement: f64,
}

impl Correspondence {
    pub fn new(tube: &TubeSurface, points: &[TubePoint]) -> Self {
        let mut max_displacement = 0.0f64;
        let targets = points
            .iter()
            .map(|p| {
                let (h, at) = tube.collapse(p);
                max_displacement = max_displacement.max(tube.embed(p).dist(at));
                (h, at)
            })
            .collect();
        Correspondence { targets, max_displacement }
    }
}

/// Segments are in-cell geodesics between consecutive breakpoints; every
/// curve built here keeps consecutive breakpoints inside a common cell.
/// Pairs without one fall back to the ambient chord.
impl CurveSpace for TubeSurface {
    type Point = TubePoint;

    fn surface_id(&self) -> String {
        TubeSurface::surface_id(self)
    }

    fn segment_length(&self, a: &TubePoint, b: &TubePoint) -> f64 {
        let (ra, rb) = (self.embed(a), self.embed(b));
        match self.common_cell(a, b) {
            Some(c) => self.local_distance(&self.local(c, ra), &self.local(c, rb)),
            None => ra.dist(rb),
        }
    }

    fn interpolate(&self, a: &TubePoint, b: &TubePoint, s: f64) -> TubePoint {
        if s <= 0.0 {
            return *a;
        }
        if s >= 1.0 {
            return *b;
        }
        let (ra, rb) = (self.embed(a), self.embed(b));
        match self.common_cell(a, b) {
            Some(c) => self.local_interpolate(c, &self.local(c, ra), &self.local(c, rb), s),
            None => self.project(ra + (rb - ra) * s),
        }
    }
}

/// The meridian through the face centers crossing the cylinders of edges
/// `j` and `j + n/2` perpendicularly, starting on the equator of cylinder
/// `j`. Length `2w + 2πε`.
pub fn meridian_on_tube(tube: &TubeSurface, j: usize) -> Result<ClosedCurve<TubePoint>> {
    let n = tube.n();
    if n % 2 == 1 {
        return Err(invalid(format!("meridians need an even base polygon, got n = {n}")));
    }
    if j >= n / 2 {
        return Err(invalid(format!("meridian index must be below n/2 = {}, got {j}", n / 2)));
    }
    let mid = tube.base.side() / 2.0;
    let k = j + n / 2;
    let cyl = |edge, phi| TubePoint::Cylinder { edge, s: mid, phi };
    let pts = vec![
        cyl(j, PI / 2.0),
        cyl(j, 0.0),
        TubePoint::Face { face: Face::Top, x: 0.0, y: 0.0 },
        cyl(k, 0.0),
        cyl(k, PI / 2.0),
        cyl(k, PI),
        TubePoint::Face { face: Face::Bottom, x: 0.0, y: 0.0 },
        cyl(j, PI),
    ];
    ClosedCurve::from_points(tube, pts)
}

/// Anchors for a tube loop following a closed curve of X_n: face points
/// stay on their face, and every edge crossing becomes a pass over the
/// cylinder from the rim of the face before it to the rim of the face after.
pub fn lift_curve(tube: &TubeSurface, curve: &ClosedCurve<PolygonPoint>) -> Vec<TubePoint> {
    let bps = &curve.breakpoints;
    let m = bps.len();
    let side = tube.base().side();
    let rim = |f: Face| if f == Face::Top { 0.0 } else { PI };
    let mut out = Vec::with_capacity(2 * m);
    for i in 0..m {
        match bps[i].point {
            PolygonPoint::Interior { face, x, y } => out.push(TubePoint::Face { face, x, y }),
            PolygonPoint::Edge { edge, u } => {
                let before = bps[(i + m - 1) % m].point.face().unwrap_or(Face::Top);
                let after = bps[(i + 1) % m].point.face().unwrap_or(before.other());
                out.push(TubePoint::Cylinder { edge, s: u * side, phi: rim(before) });
                if after != before {
                    out.push(TubePoint::Cylinder { edge, s: u * side, phi: PI / 2.0 });
                    out.push(TubePoint::Cylinder { edge, s: u * side, phi: rim(after) });
                }
            }
        }
    }
    out
}

/// Largest X_n distance between the collapsed tube meridian and the X_n
/// meridian through the same edges, compared at equal curve parameters on
/// the breakpoints of both curves.
pub fn meridian_convergence<O>(tube: &TubeSurface, j: usize, base_oracle: &O) -> Result<f64>
where
    O: DistanceOracle<Point = PolygonPoint>,
{
    let y = meridian_on_tube(tube, j)?;
    let ngon = tube.base();
    let k = j + ngon.n() / 2;
    let x = ClosedCurve::from_points(
        ngon,
        vec![
            ngon.edge_point(j, 0.5)?,
            ngon.interior_point(Face::Top, 0.0, 0.0)?,
            ngon.edge_point(k, 0.5)?,
            ngon.interior_point(Face::Bottom, 0.0, 0.0)?,
        ],
    )?;
    let mut worst = 0.0f64;
    for t in y.breakpoints.iter().map(|b| b.t).chain(x.breakpoints.iter().map(|b| b.t)) {
        let (p, _) = tube.collapse(&y.point_at(tube, t));
        worst = worst.max(base_oracle.distance(&p, &x.point_at(ngon, t))?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::curve_length;

    fn square_tube(eps: f64) -> TubeSurface {
        TubeSurface::new(&DoubledNgon::new(4, 1.0).unwrap(), eps).unwrap()
    }

    #[test]
    fn area_and_guard() {
        let t = square_tube(0.1);
        assert!((t.area() - (2.0 + 0.4 * PI + 0.04 * PI)).abs() < 1e-12);
        assert!((t.area() - 3.3823006).abs() < 1e-6);
        let sq = DoubledNgon::new(4, 1.0).unwrap();
        assert!(TubeSurface::new(&sq, 0.4).is_err());
        assert!(TubeSurface::new(&sq, 0.25).is_err());
        assert!(TubeSurface::new(&sq, 0.0).is_err());
        let tiny = TubeSurface::new(&sq, 1e-9).unwrap();
        assert!((tiny.area() - 2.0).abs() < 1e-7);
    }

    #[test]
    fn charts_agree_on_shared_boundaries() {
        let t = TubeSurface::new(&DoubledNgon::new(6, 1.0).unwrap(), 0.1).unwrap();
        for e in 0..6 {
            // cylinder start meets lune e at its far meridian
            for phi in [0.0, 0.7, PI / 2.0, 2.5, PI] {
                let c = t.embed(&TubePoint::Cylinder { edge: e, s: 0.0, phi });
                let l = t.embed(&TubePoint::Sphere { vertex: e, theta: t.lune_angle(), phi });
                assert!(c.dist(l) < 1e-14);
                let c2 = t.embed(&TubePoint::Cylinder { edge: e, s: 1.0, phi });
                let l2 = t.embed(&TubePoint::Sphere { vertex: (e + 1) % 6, theta: 0.0, phi });
                assert!(c2.dist(l2) < 1e-14);
            }
            let top = t.embed(&TubePoint::Cylinder { edge: e, s: 0.3, phi: 0.0 });
            let p = t.base.edge_position(e, 0.3);
            assert!(top.dist(Vec3::new(p.x, p.y, 0.1)) < 1e-14);
        }
    }

    #[test]
    fn projection_inverts_embedding() {
        let t = TubeSurface::new(&DoubledNgon::new(5, 1.0).unwrap(), 0.08).unwrap();
        let pts = [
            TubePoint::Face { face: Face::Bottom, x: 0.1, y: -0.2 },
            TubePoint::Cylinder { edge: 2, s: 0.4, phi: 1.1 },
            TubePoint::Sphere { vertex: 3, theta: 0.5, phi: 2.0 },
        ];
        for p in pts {
            let r = t.embed(&p);
            let q = t.project(r);
            assert!(t.embed(&q).dist(r) < 1e-12, "{p:?} -> {q:?}");
            // Scaling the offset from the core keeps the projection.
            let (_, core) = t.collapse(&p);
            let far = core + (r - core) * 3.0;
            assert!(t.embed(&t.project(far)).dist(r) < 1e-12);
        }
    }

    #[test]
    fn meridian_length() {
        let t = square_tube(0.1);
        let m = meridian_on_tube(&t, 0).unwrap();
        assert!((curve_length(&t, &m).unwrap() - (2.0 + 0.2 * PI)).abs() < 1e-12);
        assert!((m.total_length - 2.6283185).abs() < 1e-6);
        m.check_constant_speed(&t, 1e-12).unwrap();
        assert!(meridian_on_tube(&t, 2).is_err());
        let tri = TubeSurface::new(&DoubledNgon::new(3, 1.0).unwrap(), 0.05).unwrap();
        assert!(meridian_on_tube(&tri, 0).is_err());
    }

    #[test]
    fn meridians_converge_to_the_flat_meridian() {
        let sq = DoubledNgon::new(4, 1.0).unwrap();
        let exact = crate::polygon::PolygonOracle::new(&sq);
        let mut last = f64::INFINITY;
        for eps in [0.1, 0.05, 0.025] {
            let d = meridian_convergence(&TubeSurface::new(&sq, eps).unwrap(), 1, &exact).unwrap();
            assert!(d <= 2.0 * eps && d < last, "eps={eps}: {d}");
            last = d;
        }
    }

    #[test]
    fn collapse_moves_points_by_eps() {
        let t = square_tube(0.1);
        let pts = [
            TubePoint::Face { face: Face::Top, x: 0.2, y: 0.3 },
            TubePoint::Cylinder { edge: 1, s: 0.5, phi: 0.3 },
            TubePoint::Sphere { vertex: 2, theta: 0.2, phi: 1.3 },
        ];
        let c = Correspondence::new(&t, &pts);
        assert!((c.max_displacement - 0.1).abs() < 1e-12);
    }
}
