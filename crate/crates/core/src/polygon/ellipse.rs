//! The inscribed-ellipse test for pairs of points on opposite faces.
//!
//! A path between opposite faces of X_n crosses the boundary, and the
//! shortest one crossing edge `e` has length `m(e) = min_{x ∈ e} |x − p| +
//! |x − q|` in the single-sided polygon. The pair is at distance at least
//! `L_half` exactly when the ellipse with foci `p`, `q` and major axis
//! `L_half` meets no edge in its interior, i.e. every `m(e) ≥ L_half`.
//! Edges where equality holds touch the ellipse.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geom::Vec2;

use super::{DoubledNgon, PolygonPoint};

const GOLDEN_ITERATIONS: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeMinimum {
    pub edge: usize,
    pub u: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipseCheck {
    pub clear: bool,
    pub l_half: f64,
    pub tol: f64,
    /// `m(e)` and its minimizer for every edge.
    pub edges: Vec<EdgeMinimum>,
    /// The overall minimizer: where the shortest crossing path meets the boundary.
    pub witness: EdgeMinimum,
    /// Edges with `m(e)` within `tol` of `L_half`.
    pub tangent_edges: Vec<usize>,
    pub foci: (Vec2, Vec2),
}

impl EllipseCheck {
    /// `min_e m(e)`, the length of the shortest boundary-crossing path.
    pub fn shortest_crossing(&self) -> f64 {
        self.witness.value
    }
}

/// Minimizes `|x − p| + |x − q|` over edge `e`, by golden-section search on
/// the convex restriction to the edge.
pub fn edge_minimum(ngon: &DoubledNgon, e: usize, p: Vec2, q: Vec2) -> EdgeMinimum {
    let f = |u: f64| {
        let x = ngon.edge_position(e, u);
        x.dist(p) + x.dist(q)
    };
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_ITERATIONS {
        if hi - lo < 1e-15 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    let mut best = EdgeMinimum { edge: e, u: 0.5 * (lo + hi), value: f(0.5 * (lo + hi)) };
    for u in [0.0, 1.0, x1, x2] {
        let v = f(u);
        if v < best.value {
            best = EdgeMinimum { edge: e, u, value: v };
        }
    }
    best
}

/// Checks whether the ellipse with foci `p`, `q` (projected to the single
/// polygon) and major axis `l_half` stays inside the polygon, touching the
/// boundary only within `tol`.
///
/// The pair must not be two interior points of the same face, where no
/// crossing is needed. Coincident foci give the circle of radius `l_half/2`.
pub fn ellipse_clearance_check(
    ngon: &DoubledNgon,
    p: &PolygonPoint,
    q: &PolygonPoint,
    l_half: f64,
    tol: f64,
) -> Result<EllipseCheck> {
    ngon.check_point(p)?;
    ngon.check_point(q)?;
    if let (Some(a), Some(b)) = (p.face(), q.face()) {
        if a == b {
            return Err(invalid("ellipse check needs points on opposite faces or on an edge"));
        }
    }
    if !(tol >= 0.0) {
        return Err(invalid(format!("tolerance must be nonnegative, got {tol}")));
    }
    let (pp, qq) = (ngon.planar(p), ngon.planar(q));
    if !(l_half >= pp.dist(qq) - tol) {
        return Err(invalid(format!(
            "major axis {l_half} is shorter than the focal distance {}",
            pp.dist(qq)
        )));
    }
    let edges: Vec<EdgeMinimum> = (0..ngon.n()).map(|e| edge_minimum(ngon, e, pp, qq)).collect();
    let witness = edges
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .cloned()
        .expect("polygons have edges");
    let clear = edges.iter().all(|m| m.value >= l_half - tol);
    let tangent_edges = edges.iter().filter(|m| (m.value - l_half).abs() <= tol).map(|m| m.edge).collect();
    Ok(EllipseCheck { clear, l_half, tol, edges, witness, tangent_edges, foci: (pp, qq) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polygon::Face;

    /// m(e) by reflecting q across the edge line.
    fn reflection_minimum(ngon: &DoubledNgon, e: usize, p: Vec2, q: Vec2) -> f64 {
        let (a, b) = ngon.edge(e);
        let q2 = q.reflect_across(a, b);
        let d = b - a;
        let r = q2 - p;
        let denom = d.cross(r);
        if denom.abs() > 1e-15 {
            let u = (p - a).cross(r) / denom;
            if (0.0..=1.0).contains(&u) {
                return p.dist(q2);
            }
        }
        (a.dist(p) + a.dist(q)).min(b.dist(p) + b.dist(q))
    }

    #[test]
    fn matches_reflection_oracle() {
        let hex = DoubledNgon::new(6, 1.0).unwrap();
        let pts = [Vec2::new(0.1, 0.2), Vec2::new(-0.4, 0.3), Vec2::new(0.0, -0.7), Vec2::new(0.6, 0.0)];
        for &p in &pts {
            for &q in &pts {
                for e in 0..6 {
                    let m = edge_minimum(&hex, e, p, q).value;
                    let r = reflection_minimum(&hex, e, p, q);
                    assert!((m - r).abs() < 1e-12, "e={e} {p:?} {q:?}: {m} vs {r}");
                }
            }
        }
    }

    #[test]
    fn degenerate_ellipse_between_edge_midpoints() {
        let sq = DoubledNgon::new(4, 1.0).unwrap();
        let p = sq.edge_point(0, 0.5).unwrap();
        let q = sq.edge_point(2, 0.5).unwrap();
        let c = ellipse_clearance_check(&sq, &p, &q, 1.0, 1e-9).unwrap();
        assert!(c.clear);
        assert_eq!(c.tangent_edges, vec![0, 2]);
    }

    #[test]
    fn symmetric_meridian_pair_is_clear() {
        let sq = DoubledNgon::new(4, 1.0).unwrap();
        let p = sq.interior_point(Face::Top, 0.0, 0.2).unwrap();
        let q = sq.interior_point(Face::Bottom, 0.0, -0.2).unwrap();
        // Half of the meridian through both points.
        assert!(ellipse_clearance_check(&sq, &p, &q, 1.0, 1e-9).unwrap().clear);
    }

    #[test]
    fn off_center_pair_fails_through_a_third_edge() {
        let sq = DoubledNgon::new(4, 1.0).unwrap();
        let p = sq.interior_point(Face::Top, 0.2, 0.0).unwrap();
        let q = sq.interior_point(Face::Bottom, 0.2, 0.0).unwrap();
        let c = ellipse_clearance_check(&sq, &p, &q, 1.0, 1e-9).unwrap();
        assert!(!c.clear);
        // Edge 0 is x = 1/2; its reflection puts q at (0.8, 0).
        assert_eq!(c.witness.edge, 0);
        assert!((c.witness.value - 0.6).abs() < 1e-12);
        assert!((c.witness.u - 0.5).abs() < 1e-6);
    }

    #[test]
    fn circle_case_and_guards() {
        let sq = DoubledNgon::new(4, 1.0).unwrap();
        let p = sq.interior_point(Face::Top, 0.0, 0.0).unwrap();
        let q = sq.interior_point(Face::Bottom, 0.0, 0.0).unwrap();
        let c = ellipse_clearance_check(&sq, &p, &q, 1.0, 1e-9).unwrap();
        assert!(c.clear);
        assert_eq!(c.tangent_edges.len(), 4);
        let same = sq.interior_point(Face::Top, 0.1, 0.0).unwrap();
        assert!(ellipse_clearance_check(&sq, &p, &same, 1.0, 1e-9).is_err());
        assert!(ellipse_clearance_check(&sq, &sq.edge_point(0, 0.5).unwrap(), &sq.edge_point(2, 0.5).unwrap(), 0.5, 1e-9).is_err());
    }
}
