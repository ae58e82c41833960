//! Triaxial ellipsoids `x²/a² + y²/b² + z²/c² = 1` with `a ≤ b ≤ c`.
//!
//! Points are ambient coordinates on the surface. Geodesics are integrated
//! numerically; distances come from shooting. The three coordinate-plane
//! sections are closed geodesics and are the only candidates the classifier
//! looks at.

mod classify;
mod integrate;
mod search;
mod shooting;

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geom::Vec3;
use crate::metric::{ClosedCurve, CurveSpace};

pub use classify::{classify_section_half_geodesics, ClassificationReport, SectionVerdict};
pub use integrate::{integrate_geodesic, trace_csv, GeodesicPath, IntegratorConfig};
pub use search::{search_short_closed_geodesics, ClosedGeodesicFound, SearchConfig, SearchReport};
pub use shooting::{two_point_distance, ShootingConfig, ShootingOracle, ShotDistance};

/// Residual allowed on the constraint, tangency and unit speed of a state.
pub const STATE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    a: f64,
    b: f64,
    c: f64,
}

/// A coordinate plane, named by the two semi-axes it contains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Plane {
    /// z = 0
    AB,
    /// y = 0
    AC,
    /// x = 0
    BC,
}

impl Plane {
    pub const ALL: [Plane; 3] = [Plane::AB, Plane::AC, Plane::BC];

    /// Indices of the two in-plane coordinates.
    pub fn axes(self) -> (usize, usize) {
        match self {
            Plane::AB => (0, 1),
            Plane::AC => (0, 2),
            Plane::BC => (1, 2),
        }
    }

    pub fn normal_axis(self) -> usize {
        3 - self.axes().0 - self.axes().1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub position: Vec3,
    pub tangent: Vec3,
}

pub(crate) fn axis(i: usize) -> Vec3 {
    let mut v = [0.0; 3];
    v[i] = 1.0;
    Vec3::from_array(v)
}

impl Ellipsoid {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(invalid(format!("semi-axes must be positive and finite, got ({a}, {b}, {c})")));
        }
        if !(a <= b && b <= c) {
            return Err(invalid(format!("semi-axes must satisfy a <= b <= c, got ({a}, {b}, {c})")));
        }
        Ok(Ellipsoid { a, b, c })
    }

    pub fn sphere(r: f64) -> Result<Self> {
        Self::new(r, r, r)
    }

    pub fn axes(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn is_sphere(&self) -> bool {
        self.a == self.c
    }

    /// Strictly triaxial: `a < b < c`.
    pub fn is_triaxial(&self) -> bool {
        self.a < self.b && self.b < self.c
    }

    pub(crate) fn inv2(&self) -> [f64; 3] {
        [1.0 / (self.a * self.a), 1.0 / (self.b * self.b), 1.0 / (self.c * self.c)]
    }

    /// `x²/a² + y²/b² + z²/c² − 1`
    pub fn constraint(&self, x: Vec3) -> f64 {
        let k = self.inv2();
        x.x * x.x * k[0] + x.y * x.y * k[1] + x.z * x.z * k[2] - 1.0
    }

    /// Half the gradient of the constraint.
    pub(crate) fn half_gradient(&self, x: Vec3) -> Vec3 {
        let k = self.inv2();
        Vec3::new(x.x * k[0], x.y * k[1], x.z * k[2])
    }

    pub fn normal(&self, x: Vec3) -> Vec3 {
        self.half_gradient(x).normalized()
    }

    /// The surface point on the ray through `dir`.
    pub fn radial_point(&self, dir: Vec3) -> Vec3 {
        let k = self.inv2();
        let q = dir.x * dir.x * k[0] + dir.y * dir.y * k[1] + dir.z * dir.z * k[2];
        dir * (1.0 / q.sqrt())
    }

    /// Newton steps along the gradient back onto the surface.
    pub fn project(&self, mut x: Vec3) -> Vec3 {
        for _ in 0..50 {
            let f = self.constraint(x);
            if f.abs() < 1e-15 {
                break;
            }
            let g = self.half_gradient(x);
            x = x - g * (0.5 * f / g.dot(g));
        }
        x
    }

    /// Removes the normal component of `v` at `x` and rescales to unit length.
    pub fn tangent_unit(&self, x: Vec3, v: Vec3) -> Vec3 {
        let n = self.normal(x);
        (v - n * v.dot(n)).normalized()
    }

    pub fn state(&self, position: Vec3, direction: Vec3) -> GeodesicState {
        let position = self.project(position);
        GeodesicState { position, tangent: self.tangent_unit(position, direction) }
    }

    /// Largest of the constraint, tangency and unit-speed residuals.
    pub fn residual(&self, s: &GeodesicState) -> f64 {
        let g = self.half_gradient(s.position);
        let tangency = s.tangent.dot(g) / g.norm();
        self.constraint(s.position).abs().max(tangency.abs()).max((s.tangent.norm() - 1.0).abs())
    }

    pub fn check_state(&self, s: &GeodesicState) -> Result<()> {
        let r = self.residual(s);
        if !(r <= STATE_TOL) {
            return Err(invalid(format!("state residual {r:e} exceeds {STATE_TOL:e}")));
        }
        Ok(())
    }

    /// An orthonormal tangent frame at `x`.
    pub fn tangent_frame(&self, x: Vec3) -> (Vec3, Vec3) {
        let n = self.normal(x);
        let helper = [axis(0), axis(1), axis(2)]
            .into_iter()
            .min_by(|u, v| u.dot(n).abs().total_cmp(&v.dot(n).abs()))
            .unwrap();
        let e1 = (helper - n * helper.dot(n)).normalized();
        (e1, n.cross(e1))
    }

    /// Point and tangent at angle `phi` around the planar ellipse of a
    /// coordinate section, starting from the first in-plane axis.
    pub fn section_point(&self, plane: Plane, phi: f64) -> GeodesicState {
        let ax = self.axes();
        let (i, j) = plane.axes();
        let (s, c) = phi.sin_cos();
        let position = axis(i) * (ax[i] * c) + axis(j) * (ax[j] * s);
        let tangent = (axis(i) * (-ax[i] * s) + axis(j) * (ax[j] * c)).normalized();
        GeodesicState { position, tangent }
    }

    pub fn surface_id(&self) -> String {
        format!("ellipsoid({}, {}, {})", self.a, self.b, self.c)
    }
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if hi == lo {
        return 0.0;
    }
    // Split first so a symmetric integrand cannot fool the first estimate.
    let pieces = 8;
    let w = (hi - lo) / pieces as f64;
    (0..pieces)
        .map(|k| {
            let (a, b) = (lo + k as f64 * w, lo + (k + 1) as f64 * w);
            let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
            rec(f, a, b, fa, fm, fb, w / 6.0 * (fa + 4.0 * fm + fb), tol / pieces as f64, 40)
        })
        .sum()
}

const QUAD_TOL: f64 = 1e-13;

/// Perimeter of the planar ellipse with semi-axes `p` and `q`.
pub fn ellipse_perimeter(p: f64, q: f64) -> f64 {
    4.0 * integrate(&|t: f64| (p * p * t.sin().powi(2) + q * q * t.cos().powi(2)).sqrt(), 0.0, FRAC_PI_2, QUAD_TOL)
}

/// A central plane section through two surface points, parameterized by the
/// polar angle from the first.
struct CentralArc {
    e1: Vec3,
    e2: Vec3,
    k: [f64; 3],
    span: f64,
}

impl CentralArc {
    fn new(ell: &Ellipsoid, p: Vec3, q: Vec3) -> Self {
        let e1 = p.normalized();
        let mut w = q - e1 * q.dot(e1);
        if w.norm() < 1e-14 * q.norm() {
            // Antipodal or equal: any plane through p will do.
            let (t, _) = ell.tangent_frame(p);
            w = t;
        }
        let e2 = w.normalized();
        CentralArc { e1, e2, k: ell.inv2(), span: p.angle_to(q) }
    }

    fn dir(&self, phi: f64) -> (Vec3, Vec3) {
        let (s, c) = phi.sin_cos();
        (self.e1 * c + self.e2 * s, self.e2 * c - self.e1 * s)
    }

    fn quad(&self, u: Vec3, w: Vec3) -> f64 {
        u.x * w.x * self.k[0] + u.y * w.y * self.k[1] + u.z * w.z * self.k[2]
    }

    fn point(&self, phi: f64) -> Vec3 {
        let (u, _) = self.dir(phi);
        u * (1.0 / self.quad(u, u).sqrt())
    }

    fn speed(&self, phi: f64) -> f64 {
        let (u, du) = self.dir(phi);
        let q = self.quad(u, u);
        let rho = 1.0 / q.sqrt();
        let drho = -self.quad(u, du) / (q * q.sqrt());
        (rho * rho + drho * drho).sqrt()
    }

    fn length_to(&self, phi: f64) -> f64 {
        integrate(&|t| self.speed(t), 0.0, phi, QUAD_TOL)
    }

    /// Angle at which the arc length from the start equals `target`.
    fn angle_at(&self, target: f64, total: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, self.span);
        let mut phi = self.span * target / total;
        for _ in 0..60 {
            let g = self.length_to(phi) - target;
            if g.abs() < 1e-14 {
                break;
            }
            if g > 0.0 {
                hi = phi;
            } else {
                lo = phi;
            }
            let next = phi - g / self.speed(phi);
            phi = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        }
        phi
    }
}

/// Segments are arcs of central plane sections. For two points on a common
/// coordinate plane they are arcs of that section, which is a geodesic.
impl CurveSpace for Ellipsoid {
    type Point = Vec3;

    fn surface_id(&self) -> String {
        Ellipsoid::surface_id(self)
    }

    fn segment_length(&self, a: &Vec3, b: &Vec3) -> f64 {
        let arc = CentralArc::new(self, *a, *b);
        arc.length_to(arc.span)
    }

    fn interpolate(&self, a: &Vec3, b: &Vec3, s: f64) -> Vec3 {
        if s <= 0.0 {
            return *a;
        }
        if s >= 1.0 {
            return *b;
        }
        let arc = CentralArc::new(self, *a, *b);
        let total = arc.length_to(arc.span);
        arc.point(arc.angle_at(s * total, total))
    }
}

/// A coordinate-plane section as a closed curve.
#[derive(Clone, Debug, Serialize)]
pub struct SectionGeodesic {
    pub plane: Plane,
    /// Semi-axes of the planar ellipse, in-plane coordinate order.
    pub semi_axes: [f64; 2],
    pub perimeter: f64,
    /// Largest residual seen integrating the section once around: distance
    /// from its plane, constraint and tangency residuals, and closure.
    pub geodesic_residual: f64,
    /// Breakpoints at the four axis points, starting on the first in-plane
    /// axis.
    pub curve: ClosedCurve<Vec3>,
}

impl SectionGeodesic {
    /// Half the perimeter: the length of each arc between antipodes.
    pub fn half_perimeter(&self) -> f64 {
        0.5 * self.perimeter
    }
}

/// The three coordinate sections, in the order AB, AC, BC.
pub fn coordinate_sections(ell: &Ellipsoid) -> Result<Vec<SectionGeodesic>> {
    let ax = ell.axes();
    Plane::ALL
        .into_iter()
        .map(|plane| {
            let (i, j) = plane.axes();
            let perimeter = ellipse_perimeter(ax[i], ax[j]);
            let pts: Vec<Vec3> = (0..4).map(|m| ell.section_point(plane, m as f64 * FRAC_PI_2).position).collect();
            let curve = ClosedCurve::from_points(ell, pts)?;
            let start = ell.section_point(plane, 0.0);
            let path = integrate_geodesic(ell, &start, perimeter, &IntegratorConfig::default())?;
            let off_plane = path.states.iter().map(|s| s.position.to_array()[plane.normal_axis()].abs()).fold(0.0, f64::max);
            let closure = path.end().position.dist(start.position).max(path.end().tangent.dist(start.tangent));
            let geodesic_residual = off_plane.max(path.max_residual).max(closure);
            Ok(SectionGeodesic { plane, semi_axes: [ax[i], ax[j]], perimeter, geodesic_residual, curve })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{PI, TAU};

    use super::*;
    use crate::metric::curve_length;

    /// Ellipse perimeter from the arithmetic-geometric mean, independent of
    /// the quadrature.
    fn agm_perimeter(p: f64, q: f64) -> f64 {
        let (mut a, mut b) = (p.max(q), p.min(q));
        let mut sum = 0.5 * (a * a - b * b);
        let mut pow = 0.5;
        while a - b > 1e-15 * a {
            let c = 0.5 * (a - b);
            let (na, nb) = (0.5 * (a + b), (a * b).sqrt());
            pow *= 2.0;
            sum += pow * c * c;
            a = na;
            b = nb;
        }
        TAU * (p.max(q).powi(2) - sum) / a
    }

    #[test]
    fn perimeters_match_the_agm() {
        for (p, q) in [(1.0, 1.0), (1.0, 1.005), (1.0, 1.01), (1.005, 1.01), (1.0, 1.4), (0.3, 2.0)] {
            let quad = ellipse_perimeter(p, q);
            assert!((quad - agm_perimeter(p, q)).abs() < 1e-11, "{p} {q}: {quad} vs {}", agm_perimeter(p, q));
        }
        assert!((agm_perimeter(1.0, 1.0) - TAU).abs() < 1e-14);
    }

    #[test]
    fn sections_of_a_sphere_and_an_oblate_spheroid() {
        for s in coordinate_sections(&Ellipsoid::sphere(1.0).unwrap()).unwrap() {
            assert!((s.perimeter - TAU).abs() < 1e-12);
            assert!((s.curve.total_length - TAU).abs() < 1e-12);
        }
        let oblate = coordinate_sections(&Ellipsoid::new(1.0, 1.0, 1.3).unwrap()).unwrap();
        assert!((oblate[0].perimeter - TAU).abs() < 1e-12);
    }

    #[test]
    fn section_perimeters_are_ordered_and_sections_are_geodesics() {
        let ell = Ellipsoid::new(1.0, 1.005, 1.01).unwrap();
        let s = coordinate_sections(&ell).unwrap();
        assert!(s[0].perimeter < s[1].perimeter && s[1].perimeter < s[2].perimeter);
        for sec in &s {
            assert!(sec.geodesic_residual < 1e-7, "{:?} {}", sec.plane, sec.geodesic_residual);
            // The polyline through the axis points measures the full section.
            assert!((curve_length(&ell, &sec.curve).unwrap() - sec.perimeter).abs() < 1e-11);
        }
    }

    #[test]
    fn enlarging_an_axis_lengthens_the_sections_containing_it() {
        let base = coordinate_sections(&Ellipsoid::new(1.0, 1.1, 1.2).unwrap()).unwrap();
        let grown = coordinate_sections(&Ellipsoid::new(1.0, 1.15, 1.2).unwrap()).unwrap();
        assert!(grown[0].perimeter > base[0].perimeter);
        assert!((grown[1].perimeter - base[1].perimeter).abs() < 1e-12);
        assert!(grown[2].perimeter > base[2].perimeter);
    }

    #[test]
    fn interpolation_walks_at_constant_speed() {
        let ell = Ellipsoid::new(1.0, 1.2, 1.5).unwrap();
        let p = ell.radial_point(Vec3::new(1.0, 0.2, 0.1));
        let q = ell.radial_point(Vec3::new(-0.1, 1.0, 0.7));
        let total = ell.segment_length(&p, &q);
        let mid = ell.interpolate(&p, &q, 0.3);
        assert!(ell.constraint(mid).abs() < 1e-13);
        assert!((ell.segment_length(&p, &mid) - 0.3 * total).abs() < 1e-10);
        assert!((ell.segment_length(&mid, &q) - 0.7 * total).abs() < 1e-10);
        let unit = Ellipsoid::sphere(1.0).unwrap();
        let (x, y) = (Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0));
        assert!((unit.segment_length(&x, &y) - PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn construction_guards() {
        assert!(Ellipsoid::new(1.0, 0.9, 1.2).is_err());
        assert!(Ellipsoid::new(0.0, 1.0, 1.0).is_err());
        assert!(Ellipsoid::new(1.0, 1.0, f64::NAN).is_err());
        assert!(Ellipsoid::sphere(1.0).unwrap().is_sphere());
    }

    #[test]
    fn projection_and_frames() {
        let ell = Ellipsoid::new(1.0, 1.3, 1.7).unwrap();
        let x = ell.project(Vec3::new(0.6, 0.9, 0.8));
        assert!(ell.constraint(x).abs() < 1e-15);
        let (e1, e2) = ell.tangent_frame(x);
        let n = ell.normal(x);
        assert!(e1.dot(n).abs() < 1e-15 && e2.dot(n).abs() < 1e-15 && e1.dot(e2).abs() < 1e-15);
        ell.check_state(&ell.state(x, Vec3::new(1.0, 2.0, 3.0))).unwrap();
        assert!(ell.check_state(&GeodesicState { position: x * 1.01, tangent: e1 }).is_err());
    }
}
