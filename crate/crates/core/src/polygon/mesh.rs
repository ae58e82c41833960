//! Brute-force distances on X_n by Dijkstra over Steiner points.
//!
//! Each face is flat and convex, so the fan triangulation of a face together
//! with all chords between its boundary Steiner points is exact inside the
//! face. The only error comes from snapping edge crossings to the Steiner
//! grid: moving a crossing by at most h/2 along the boundary changes the two
//! adjacent chords by at most h/2 each. A geodesic between points on
//! opposite faces crosses the boundary once, so the declared error is
//! `1 · h`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{invalid, Error, Result};
use crate::geom::Vec2;
use crate::metric::DistanceOracle;

use super::{DoubledNgon, PolygonPoint};

/// Additive error per boundary crossing, in units of h.
pub const MESH_ERROR_PER_H: f64 = 1.0;

pub const DEFAULT_NODE_CAP: usize = 200_000;

#[derive(Clone, Debug)]
pub struct MeshOracle {
    ngon: DoubledNgon,
    h: f64,
    /// Boundary nodes: vertices plus Steiner points, `per_edge` per edge.
    nodes: Vec<Vec2>,
    per_edge: usize,
}

impl MeshOracle {
    pub fn new(ngon: &DoubledNgon, h: f64) -> Result<Self> {
        Self::with_cap(ngon, h, DEFAULT_NODE_CAP)
    }

    pub fn with_cap(ngon: &DoubledNgon, h: f64, cap: usize) -> Result<Self> {
        if !(h > 0.0 && h < ngon.side() / 4.0) {
            return Err(invalid(format!("mesh spacing must satisfy 0 < h < side/4 = {}, got {h}", ngon.side() / 4.0)));
        }
        let per_edge = (ngon.side() / h).ceil() as usize;
        let count = per_edge * ngon.n();
        if count > cap {
            return Err(Error::MeshTooLarge { vertices: count, cap });
        }
        let mut nodes = Vec::with_capacity(count);
        for e in 0..ngon.n() {
            for j in 0..per_edge {
                nodes.push(ngon.edge_position(e, j as f64 / per_edge as f64));
            }
        }
        Ok(MeshOracle { ngon: ngon.clone(), h, nodes, per_edge })
    }

    /// Unchecked variant for internal seeding; `h` only needs to be positive.
    pub(crate) fn coarse(ngon: &DoubledNgon, per_edge: usize) -> Self {
        let mut nodes = Vec::with_capacity(per_edge * ngon.n());
        for e in 0..ngon.n() {
            for j in 0..per_edge {
                nodes.push(ngon.edge_position(e, j as f64 / per_edge as f64));
            }
        }
        MeshOracle { ngon: ngon.clone(), h: ngon.side() / per_edge as f64, nodes, per_edge }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn steiner_per_edge(&self) -> usize {
        self.per_edge
    }

    fn shares_face(p: &PolygonPoint, q: &PolygonPoint) -> bool {
        match (p.face(), q.face()) {
            (Some(a), Some(b)) => a == b,
            _ => true,
        }
    }

    /// Dijkstra from `p` to `q`. Graph: a virtual source and target joined
    /// to every boundary node of their face(s), and complete chord graphs on
    /// both faces (identical lengths, so one dense layer suffices).
    fn dijkstra(&self, p: &PolygonPoint, q: &PolygonPoint) -> f64 {
        let pp = self.ngon.planar(p);
        let qp = self.ngon.planar(q);
        let direct = if Self::shares_face(p, q) { pp.dist(qp) } else { f64::INFINITY };
        let n = self.nodes.len();
        let mut dist: Vec<f64> = self.nodes.iter().map(|x| pp.dist(*x)).collect();
        let mut done = vec![false; n];
        let mut heap: BinaryHeap<Entry> = dist.iter().enumerate().map(|(i, &d)| Entry(d, i)).collect();
        let mut best = direct;
        while let Some(Entry(d, i)) = heap.pop() {
            if done[i] || d > dist[i] {
                continue;
            }
            if d >= best {
                break;
            }
            done[i] = true;
            let xi = self.nodes[i];
            best = best.min(d + xi.dist(qp));
            for j in 0..n {
                if !done[j] {
                    let nd = d + xi.dist(self.nodes[j]);
                    if nd < dist[j] {
                        dist[j] = nd;
                        heap.push(Entry(nd, j));
                    }
                }
            }
        }
        best
    }
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal).then_with(|| other.1.cmp(&self.1))
    }
}

impl DistanceOracle for MeshOracle {
    type Point = PolygonPoint;

    fn surface_id(&self) -> String {
        self.ngon.surface_id()
    }

    fn error_bound(&self) -> f64 {
        MESH_ERROR_PER_H * self.h
    }

    fn distance(&self, p: &PolygonPoint, q: &PolygonPoint) -> Result<f64> {
        self.ngon.check_point(p)?;
        self.ngon.check_point(q)?;
        if p == q {
            return Ok(0.0);
        }
        Ok(self.dijkstra(p, q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polygon::Face;

    #[test]
    fn center_to_center_within_error() {
        let sq = DoubledNgon::new(4, 1.0).unwrap();
        let m = MeshOracle::new(&sq, 0.02).unwrap();
        let a = sq.interior_point(Face::Top, 0.0, 0.0).unwrap();
        let b = sq.interior_point(Face::Bottom, 0.0, 0.0).unwrap();
        let d = m.distance(&a, &b).unwrap();
        assert!(d >= 1.0 - 1e-12 && d <= 1.0 + m.error_bound(), "{d}");
        assert_eq!(m.distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn same_face_is_a_straight_chord() {
        let sq = DoubledNgon::new(4, 1.0).unwrap();
        let m = MeshOracle::new(&sq, 0.05).unwrap();
        let a = sq.interior_point(Face::Top, -0.3, 0.2).unwrap();
        let b = sq.interior_point(Face::Top, 0.4, -0.1).unwrap();
        let d = m.distance(&a, &b).unwrap();
        assert!((d - 0.7f64.hypot(0.3)).abs() < 1e-12);
    }

    #[test]
    fn guards() {
        let sq = DoubledNgon::new(4, 1.0).unwrap();
        assert!(MeshOracle::new(&sq, 0.25).is_err());
        assert!(MeshOracle::new(&sq, 0.0).is_err());
        assert!(matches!(MeshOracle::with_cap(&sq, 0.001, 100), Err(Error::MeshTooLarge { .. })));
    }

    #[test]
    fn error_bound_is_linear_in_h() {
        let sq = DoubledNgon::new(4, 1.0).unwrap();
        let a = MeshOracle::new(&sq, 0.02).unwrap().error_bound();
        let b = MeshOracle::new(&sq, 0.01).unwrap().error_bound();
        assert!((a / b - 2.0).abs() < 0.1 * 2.0);
    }
}
