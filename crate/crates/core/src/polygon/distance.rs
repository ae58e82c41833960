//! Exact distances on X_n by unfolding.
//!
//! A geodesic from `p` leaves its face, crosses a sequence of edges and
//! arrives at `q`. Reflecting the polygon across each crossed edge in turn
//! develops the path into one straight planar segment, so the distance is the
//! shortest straight chord over all admissible edge sequences. The search is
//! best-first over sequences: each node carries the unfolded copy, the face
//! it stands for, and the window (the part of the entry edge visible from `p`
//! through every earlier window). The distance from `p` to the window bounds
//! every continuation from below, and a coarse Steiner-point Dijkstra seeds
//! the incumbent.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{segment_distance, Vec2};
use crate::metric::DistanceOracle;

use super::mesh::MeshOracle;
use super::{DoubledNgon, Face, PolygonPoint};

/// Accepting a target on the boundary of a wedge, in units of side².
const WEDGE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchLimits {
    /// Longest edge sequence explored.
    pub max_depth: usize,
    /// Search nodes expanded before giving up.
    pub node_budget: usize,
    /// Steiner points per edge for the seeding mesh.
    pub coarse_per_edge: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_depth: 64, node_budget: 500_000, coarse_per_edge: 8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub edge: usize,
    /// Position along the edge, measured from vertex `edge`.
    pub u: f64,
}

/// A shortest path on X_n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub start: PolygonPoint,
    pub end: PolygonPoint,
    /// Face the first segment runs in.
    pub start_face: Face,
    pub crossings: Vec<Crossing>,
    pub length: f64,
    /// Smallest `min(u, 1 − u)` over the crossings; `None` without crossings.
    pub vertex_margin: Option<f64>,
}

impl GeodesicPath {
    pub fn edges(&self) -> Vec<usize> {
        self.crossings.iter().map(|c| c.edge).collect()
    }

    /// Start, crossing points and end, as points of X_n.
    pub fn waypoints(&self) -> Vec<PolygonPoint> {
        let mut out = vec![self.start];
        out.extend(self.crossings.iter().map(|c| PolygonPoint::Edge { edge: c.edge, u: c.u }));
        out.push(self.end);
        out
    }

    /// Face of segment `i` (between waypoints `i` and `i + 1`).
    pub fn segment_face(&self, i: usize) -> Face {
        if i % 2 == 0 {
            self.start_face
        } else {
            self.start_face.other()
        }
    }

    /// The waypoints developed into the plane of the starting face.
    pub fn unfolded(&self, ngon: &DoubledNgon) -> Vec<Vec2> {
        let mut t = Affine::identity();
        let mut out = vec![ngon.planar(&self.start)];
        for c in &self.crossings {
            out.push(t.apply(ngon.edge_position(c.edge, c.u)));
            let (a, b) = ngon.edge(c.edge);
            t = t.reflected(t.apply(a), t.apply(b));
        }
        out.push(t.apply(ngon.planar(&self.end)));
        out
    }
}

/// Affine isometry `x ↦ M x + t`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Affine {
    m: [f64; 4],
    t: Vec2,
}

impl Affine {
    pub(crate) fn identity() -> Self {
        Affine { m: [1.0, 0.0, 0.0, 1.0], t: Vec2::default() }
    }

    pub(crate) fn apply(&self, x: Vec2) -> Vec2 {
        Vec2::new(self.m[0] * x.x + self.m[1] * x.y, self.m[2] * x.x + self.m[3] * x.y) + self.t
    }

    /// Post-composition with the reflection across the line through `a`, `b`.
    pub(crate) fn reflected(&self, a: Vec2, b: Vec2) -> Self {
        let d = (b - a).normalized();
        let r = [2.0 * d.x * d.x - 1.0, 2.0 * d.x * d.y, 2.0 * d.x * d.y, 2.0 * d.y * d.y - 1.0];
        let m = [
            r[0] * self.m[0] + r[1] * self.m[2],
            r[0] * self.m[1] + r[1] * self.m[3],
            r[2] * self.m[0] + r[3] * self.m[2],
            r[2] * self.m[1] + r[3] * self.m[3],
        ];
        let v = self.t - a;
        let t = a + Vec2::new(r[0] * v.x + r[1] * v.y, r[2] * v.x + r[3] * v.y);
        Affine { m, t }
    }

    /// Translation part, meaningful when the linear part is the identity.
    pub(crate) fn offset(&self) -> Vec2 {
        self.t
    }

    pub(crate) fn is_translation(&self, tol: f64) -> bool {
        (self.m[0] - 1.0).abs() <= tol && self.m[1].abs() <= tol && self.m[2].abs() <= tol && (self.m[3] - 1.0).abs() <= tol
    }
}

struct Node {
    parent: Option<usize>,
    /// Edge crossed to enter this copy, or the edge carrying `p` at a root.
    entry: Option<usize>,
    crossed: bool,
    transform: Affine,
    face: Face,
    /// Visible part of the entry edge, ordered so that `cross(a − P, b − P) > 0`.
    window: Option<(Vec2, Vec2)>,
    depth: usize,
}

#[derive(PartialEq)]
struct Queued(f64, usize);

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal).then_with(|| other.1.cmp(&self.1))
    }
}

/// Exact distance backend for X_n.
#[derive(Clone, Debug)]
pub struct PolygonOracle {
    ngon: DoubledNgon,
    limits: SearchLimits,
    seed: MeshOracle,
}

impl PolygonOracle {
    pub fn new(ngon: &DoubledNgon) -> Self {
        Self::with_limits(ngon, SearchLimits::default())
    }

    pub fn with_limits(ngon: &DoubledNgon, limits: SearchLimits) -> Self {
        let seed = MeshOracle::coarse(ngon, limits.coarse_per_edge.max(1));
        PolygonOracle { ngon: ngon.clone(), limits, seed }
    }

    pub fn ngon(&self) -> &DoubledNgon {
        &self.ngon
    }

    pub fn limits(&self) -> SearchLimits {
        self.limits
    }

    /// Shortest path from `p` to `q` with its length.
    pub fn exact_distance(&self, p: &PolygonPoint, q: &PolygonPoint) -> Result<GeodesicPath> {
        let ngon = &self.ngon;
        ngon.check_point(p)?;
        ngon.check_point(q)?;
        let start_face = p.face().or(q.face()).unwrap_or(Face::Top);
        if p == q {
            return Ok(GeodesicPath {
                start: *p,
                end: *q,
                start_face,
                crossings: Vec::new(),
                length: 0.0,
                vertex_margin: None,
            });
        }
        let pp = ngon.planar(p);
        let qq = ngon.planar(q);
        let incumbent = self.seed.distance(p, q)?;
        let mut best_len = incumbent * (1.0 + 1e-9) + 1e-12;
        let mut best: Option<(usize, Vec2)> = None;

        let p_edge = match *p {
            PolygonPoint::Edge { edge, .. } => Some(edge),
            PolygonPoint::Interior { .. } => None,
        };
        let roots: Vec<Face> = match (p.face(), q.face()) {
            (Some(f), _) => vec![f],
            (None, Some(_)) => vec![Face::Top, Face::Bottom],
            (None, None) => vec![Face::Top],
        };
        let mut arena: Vec<Node> = Vec::new();
        let mut heap = BinaryHeap::new();
        for face in roots {
            arena.push(Node {
                parent: None,
                entry: p_edge,
                crossed: false,
                transform: Affine::identity(),
                face,
                window: None,
                depth: 0,
            });
            heap.push(Queued(0.0, arena.len() - 1));
        }

        let tol = WEDGE_TOL * ngon.side() * ngon.side();
        let mut expanded = 0usize;
        while let Some(Queued(lb, idx)) = heap.pop() {
            if lb >= best_len {
                break;
            }
            expanded += 1;
            if expanded > self.limits.node_budget {
                return Err(Error::BudgetExhausted(format!(
                    "exact distance search expanded {} nodes without closing the gap (lower bound {lb}, incumbent {best_len})",
                    self.limits.node_budget
                )));
            }
            let (transform, face, window, entry, depth, crossed) = {
                let n = &arena[idx];
                (n.transform, n.face, n.window, n.entry, n.depth, n.crossed)
            };

            // Target reachable inside this copy?
            let reachable = match *q {
                PolygonPoint::Interior { face: fq, .. } => fq == face,
                PolygonPoint::Edge { edge, .. } => !crossed || Some(edge) != entry,
            };
            if reachable {
                let target = transform.apply(qq);
                let inside = match window {
                    None => true,
                    Some((a, b)) => (a - pp).cross(target - pp) >= -tol && (target - pp).cross(b - pp) >= -tol,
                };
                let len = pp.dist(target);
                if inside && len < best_len {
                    best_len = len;
                    best = Some((idx, target));
                }
            }

            if depth >= self.limits.max_depth {
                // Anything left in this subtree could still beat the incumbent.
                if arena[idx].window.map_or(0.0, |(a, b)| segment_distance(pp, a, b)) < best_len {
                    return Err(Error::BudgetExhausted(format!(
                        "exact distance search reached depth {} with open branches",
                        self.limits.max_depth
                    )));
                }
                continue;
            }

            for e in 0..ngon.n() {
                if Some(e) == entry {
                    continue;
                }
                let (va, vb) = ngon.edge(e);
                let (ea, eb) = (transform.apply(va), transform.apply(vb));
                let clipped = match window {
                    None => Some((ea, eb)),
                    Some((a, b)) => clip_to_wedge(pp, a, b, ea, eb),
                };
                let Some((ca, cb)) = clipped else { continue };
                if ca.dist(cb) <= 1e-14 * ngon.side() {
                    continue;
                }
                let lower = segment_distance(pp, ca, cb);
                if lower >= best_len {
                    continue;
                }
                let ordered = if (ca - pp).cross(cb - pp) >= 0.0 { (ca, cb) } else { (cb, ca) };
                arena.push(Node {
                    parent: Some(idx),
                    entry: Some(e),
                    crossed: true,
                    transform: transform.reflected(ea, eb),
                    face: face.other(),
                    window: Some(ordered),
                    depth: depth + 1,
                });
                heap.push(Queued(lower, arena.len() - 1));
            }
        }

        let Some((leaf, target)) = best else {
            return Err(Error::BudgetExhausted(format!(
                "no admissible edge sequence reached the target below the seeded bound {incumbent}"
            )));
        };
        // Walk back up to recover the edge sequence and crossing parameters.
        let mut chain = Vec::new();
        let mut cur = leaf;
        while let Some(parent) = arena[cur].parent {
            chain.push((parent, arena[cur].entry.expect("non-root nodes record their entry edge")));
            cur = parent;
        }
        chain.reverse();
        let root_face = arena[cur].face;
        let mut crossings = Vec::with_capacity(chain.len());
        for (parent, e) in chain {
            let t = arena[parent].transform;
            let (va, vb) = ngon.edge(e);
            let u = line_parameter(pp, target, t.apply(va), t.apply(vb));
            crossings.push(Crossing { edge: e, u });
        }
        let vertex_margin = crossings.iter().map(|c| c.u.min(1.0 - c.u)).reduce(f64::min);
        if let Some(m) = vertex_margin {
            if !(m > 0.0) {
                return Err(Error::InvalidInput(format!("shortest path met a vertex (margin {m})")));
            }
        }
        Ok(GeodesicPath { start: *p, end: *q, start_face: root_face, crossings, length: best_len, vertex_margin })
    }
}

/// Part of the segment `[ea, eb]` inside the wedge at `p` spanned by `a`, `b`.
fn clip_to_wedge(p: Vec2, a: Vec2, b: Vec2, ea: Vec2, eb: Vec2) -> Option<(Vec2, Vec2)> {
    let d = eb - ea;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    // Each constraint reads c0 + c1·s ≥ 0.
    for (c0, c1) in [((a - p).cross(ea - p), (a - p).cross(d)), ((ea - p).cross(b - p), d.cross(b - p))] {
        if c1 == 0.0 {
            if c0 < 0.0 {
                return None;
            }
        } else if c1 > 0.0 {
            lo = lo.max(-c0 / c1);
        } else {
            hi = hi.min(-c0 / c1);
        }
    }
    (lo < hi).then(|| (ea + d * lo, ea + d * hi))
}

/// Parameter along `[a, b]` where the line through `p` and `q` meets it.
pub(crate) fn line_parameter(p: Vec2, q: Vec2, a: Vec2, b: Vec2) -> f64 {
    let r = q - p;
    let d = b - a;
    (p - a).cross(r) / d.cross(r)
}

impl DistanceOracle for PolygonOracle {
    type Point = PolygonPoint;

    fn surface_id(&self) -> String {
        self.ngon.surface_id()
    }

    fn error_bound(&self) -> f64 {
        0.0
    }

    fn distance(&self, p: &PolygonPoint, q: &PolygonPoint) -> Result<f64> {
        Ok(self.exact_distance(p, q)?.length)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> DoubledNgon {
        DoubledNgon::new(4, 1.0).unwrap()
    }

    #[test]
    fn centers_of_the_square() {
        let sq = square();
        let o = PolygonOracle::new(&sq);
        let a = sq.interior_point(Face::Top, 0.0, 0.0).unwrap();
        let b = sq.interior_point(Face::Bottom, 0.0, 0.0).unwrap();
        let path = o.exact_distance(&a, &b).unwrap();
        assert!((path.length - 1.0).abs() < 1e-12);
        assert_eq!(path.crossings.len(), 1);
        assert!((path.crossings[0].u - 0.5).abs() < 1e-12);
        assert!((path.vertex_margin.unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(o.distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn off_center_pair_is_shorter_than_half_the_meridian() {
        let sq = square();
        let o = PolygonOracle::new(&sq);
        let a = sq.interior_point(Face::Top, 0.2, 0.0).unwrap();
        let b = sq.interior_point(Face::Bottom, 0.2, 0.0).unwrap();
        let d = o.distance(&a, &b).unwrap();
        // Reflection across the edge x = 1/2 gives the image (0.8, 0).
        assert!((d - 0.6).abs() < 1e-12, "{d}");
    }

    #[test]
    fn same_face_is_direct() {
        let sq = square();
        let o = PolygonOracle::new(&sq);
        let a = sq.interior_point(Face::Top, -0.3, 0.2).unwrap();
        let b = sq.interior_point(Face::Top, 0.4, -0.1).unwrap();
        let path = o.exact_distance(&a, &b).unwrap();
        assert!(path.crossings.is_empty());
        assert!((path.length - 0.7f64.hypot(0.3)).abs() < 1e-15);
    }

    #[test]
    fn edge_points() {
        let sq = square();
        let o = PolygonOracle::new(&sq);
        let a = sq.edge_point(0, 0.5).unwrap();
        let b = sq.edge_point(2, 0.5).unwrap();
        assert!((o.distance(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        let c = sq.edge_point(0, 0.2).unwrap();
        assert!((o.distance(&a, &c).unwrap() - 0.3).abs() < 1e-12);
        let d = sq.interior_point(Face::Bottom, 0.1, 0.1).unwrap();
        let direct = sq.planar(&a).dist(Vec2::new(0.1, 0.1));
        assert!((o.distance(&a, &d).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn unfolding_is_straight() {
        let hex = DoubledNgon::new(6, 1.0).unwrap();
        let o = PolygonOracle::new(&hex);
        let a = hex.interior_point(Face::Top, 0.3, -0.4).unwrap();
        let b = hex.interior_point(Face::Bottom, -0.5, 0.2).unwrap();
        let path = o.exact_distance(&a, &b).unwrap();
        let pts = path.unfolded(&hex);
        let (s, e) = (pts[0], *pts.last().unwrap());
        assert!((s.dist(e) - path.length).abs() < 1e-12);
        for x in &pts {
            assert!(segment_distance(*x, s, e) < 1e-12);
        }
    }

    #[test]
    fn agrees_with_the_mesh_oracle() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 3..=8 {
            let ngon = DoubledNgon::new(n, 1.0).unwrap();
            let exact = PolygonOracle::new(&ngon);
            let mesh = MeshOracle::new(&ngon, 0.05).unwrap();
            for _ in 0..100 {
                let a = ngon.random_point(&mut rng, 0.2);
                let b = ngon.random_point(&mut rng, 0.2);
                let d = exact.exact_distance(&a, &b).unwrap();
                let m = mesh.distance(&a, &b).unwrap();
                assert!(d.length <= m + 1e-12 && m <= d.length + mesh.error_bound(), "n={n} {a:?} {b:?}: {} vs {m}", d.length);
                assert!(d.vertex_margin.map_or(true, |v| v > 0.0));
            }
        }
    }

    #[test]
    fn rejects_invalid_points() {
        let sq = square();
        let o = PolygonOracle::new(&sq);
        let bad = PolygonPoint::Edge { edge: 0, u: 0.0 };
        let ok = sq.edge_point(1, 0.5).unwrap();
        assert!(o.exact_distance(&bad, &ok).is_err());
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let sq = square();
        let o = PolygonOracle::with_limits(&sq, SearchLimits { max_depth: 64, node_budget: 1, coarse_per_edge: 8 });
        let a = sq.interior_point(Face::Top, 0.1, 0.0).unwrap();
        let b = sq.interior_point(Face::Bottom, -0.1, 0.3).unwrap();
        assert!(matches!(o.exact_distance(&a, &b), Err(Error::BudgetExhausted(_))));
    }
}
