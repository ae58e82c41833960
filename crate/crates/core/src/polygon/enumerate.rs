//! Closed geodesics on X_n through the billiard correspondence.
//!
//! Every closed geodesic crosses some edge, and after a dihedral rotation it
//! crosses edge 0 heading into the top face. Develop it from there: each
//! crossing reflects the current polygon copy across the crossed edge, and
//! the geodesic is closed exactly when, after an even number `k` of
//! crossings ending on edge 0, the accumulated isometry is a translation `τ`
//! and the line from the start point in direction `τ` passes through the
//! interior of every crossed edge. Such lines come in parallel families
//! (cylinders) parameterized by an open interval of start positions `u` on
//! edge 0; the interval ends where a line first hits a vertex.
//!
//! The search is depth-first over edge sequences. A prefix is kept only if
//! some line from edge 0 still stabs every crossed edge so far, which is a
//! set of linear constraints in `u` (the directions towards each edge must
//! overlap). A prefix is dropped once its last edge is farther than `L_max`
//! from edge 0, since the closing line passes through it before returning.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geom::{segment_segment_distance, Vec2};
use crate::metric::ClosedCurve;

use super::distance::{line_parameter, Affine};
use super::{CurveRecord, DoubledNgon, Face, PolygonPoint, Symmetry};

/// Narrowest corridor, in units of edge parameter, counted as a family.
const CORRIDOR_MIN: f64 = 1e-9;
const FEASIBLE_MIN: f64 = 1e-12;
const TRANSLATION_TOL: f64 = 1e-9;
/// Breakpoint tolerance when comparing curves for identity.
const SAME_CURVE_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationLimits {
    pub max_depth: usize,
    pub node_budget: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits { max_depth: 48, node_budget: 50_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GeodesicTag {
    Meridian,
    Other,
}

/// A maximal parallel family of closed geodesics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicFamily {
    /// Crossing sequence of the untransformed family, starting after edge 0.
    pub base_sequence: Vec<usize>,
    /// Start positions on edge 0 covered by the untransformed family.
    pub u_range: (f64, f64),
    pub translation: Vec2,
    pub length: f64,
    /// Number of edge crossings.
    pub period: usize,
    /// Perpendicular width of the family.
    pub width: f64,
    /// Symmetry carrying the untransformed family to this one.
    pub symmetry: Symmetry,
    /// Index of the dihedral orbit this family belongs to.
    pub orbit: usize,
}

impl GeodesicFamily {
    /// The member at `fraction ∈ (0, 1)` across the family; 1/2 is the midline.
    pub fn member(&self, ngon: &DoubledNgon, fraction: f64) -> Result<ClosedCurve<PolygonPoint>> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(invalid(format!("family fraction must lie in (0, 1), got {fraction}")));
        }
        let u = self.u_range.0 + (self.u_range.1 - self.u_range.0) * fraction;
        let base = base_member(ngon, &self.base_sequence, u)?;
        Ok(ngon.apply_symmetry_to_curve(&base, self.symmetry))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedGeodesic {
    #[serde(flatten)]
    pub record: CurveRecord,
    #[serde(skip)]
    pub curve: ClosedCurve<PolygonPoint>,
    pub length: f64,
    pub period: usize,
    pub edge_sequence: Vec<usize>,
    pub tag: GeodesicTag,
    /// Marks one member of each dihedral orbit.
    pub representative: bool,
    /// Index into the enumeration's families, if it came from one.
    pub family: Option<usize>,
    /// Position across the family; 1/2 is the midline.
    pub offset: f64,
}

impl ClosedGeodesic {
    pub fn new(ngon: &DoubledNgon, curve: ClosedCurve<PolygonPoint>) -> Self {
        let edge_sequence = edge_sequence(&curve);
        let period = edge_sequence.len();
        let meridian = period == 2 && ngon.opposite_edge(edge_sequence[0]) == Some(edge_sequence[1]) && {
            let face_points: Vec<_> = curve.breakpoints.iter().filter(|b| !b.point.is_edge()).collect();
            face_points.iter().all(|b| ngon.planar(&b.point).norm() < SAME_CURVE_TOL)
        };
        ClosedGeodesic {
            record: CurveRecord::new(ngon, &curve),
            length: curve.total_length,
            period,
            edge_sequence,
            tag: if meridian { GeodesicTag::Meridian } else { GeodesicTag::Other },
            representative: true,
            family: None,
            offset: 0.5,
            curve,
        }
    }

    /// Same point set up to parameter rotation and reversal.
    pub fn same_curve(&self, other: &ClosedGeodesic, ngon: &DoubledNgon, tol: f64) -> bool {
        same_curve(ngon, &self.curve, &other.curve, tol)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnumerationCertificate {
    pub l_max: f64,
    pub max_depth: usize,
    pub node_budget: usize,
    pub nodes_expanded: usize,
    pub pruned_by_length: usize,
    pub pruned_infeasible: usize,
    pub closing_sequences: usize,
    pub non_primitive: usize,
    pub deepest: usize,
    /// True when the pruned search tree was exhausted.
    pub exhausted: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Enumeration {
    pub l_max: f64,
    pub families: Vec<GeodesicFamily>,
    /// Midline of each family, index-aligned with `families`.
    pub geodesics: Vec<ClosedGeodesic>,
    pub certificate: EnumerationCertificate,
}

impl Enumeration {
    pub fn representatives(&self) -> impl Iterator<Item = &ClosedGeodesic> {
        self.geodesics.iter().filter(|g| g.representative)
    }
}

/// Crossing edges in breakpoint order.
pub fn edge_sequence(curve: &ClosedCurve<PolygonPoint>) -> Vec<usize> {
    curve
        .breakpoints
        .iter()
        .filter_map(|b| match b.point {
            PolygonPoint::Edge { edge, .. } => Some(edge),
            PolygonPoint::Interior { .. } => None,
        })
        .collect()
}

/// Same breakpoints up to cyclic shift and reversal.
pub fn same_curve(ngon: &DoubledNgon, a: &ClosedCurve<PolygonPoint>, b: &ClosedCurve<PolygonPoint>, tol: f64) -> bool {
    let m = a.breakpoints.len();
    if m != b.breakpoints.len() || (a.total_length - b.total_length).abs() > tol {
        return false;
    }
    let pa: Vec<_> = a.breakpoints.iter().map(|x| x.point).collect();
    let pb: Vec<_> = b.breakpoints.iter().map(|x| x.point).collect();
    (0..m).any(|s| {
        (0..m).all(|i| ngon.same_point(&pa[i], &pb[(s + i) % m], tol))
            || (0..m).all(|i| ngon.same_point(&pa[i], &pb[(s + m - i) % m], tol))
    })
}

/// The `n/2` meridians of an even doubled polygon, built directly: through
/// the midpoint of edge `j`, the top center, the midpoint of the opposite
/// edge and the bottom center. Empty for odd n.
pub fn meridians(ngon: &DoubledNgon) -> Vec<ClosedGeodesic> {
    let n = ngon.n();
    if n % 2 == 1 {
        return Vec::new();
    }
    (0..n / 2)
        .map(|j| {
            let pts = vec![
                PolygonPoint::Edge { edge: j, u: 0.5 },
                PolygonPoint::Interior { face: Face::Top, x: 0.0, y: 0.0 },
                PolygonPoint::Edge { edge: j + n / 2, u: 0.5 },
                PolygonPoint::Interior { face: Face::Bottom, x: 0.0, y: 0.0 },
            ];
            let curve = ClosedCurve::from_points(ngon, pts).expect("meridian breakpoints are valid");
            ClosedGeodesic::new(ngon, curve)
        })
        .collect()
}

/// Smallest period of the cyclic word, doubled when odd (an odd billiard
/// orbit closes on the doubled polygon only after two turns).
fn closing_period(seq: &[usize]) -> usize {
    let k = seq.len();
    let d = (1..=k).find(|&d| k % d == 0 && (0..k).all(|i| seq[i] == seq[i % d])).unwrap_or(k);
    if d % 2 == 0 {
        d
    } else {
        2 * d
    }
}

/// Closed geodesic of the untransformed family through `u` on edge 0.
fn base_member(ngon: &DoubledNgon, seq: &[usize], u: f64) -> Result<ClosedCurve<PolygonPoint>> {
    let k = seq.len();
    let mut copies = vec![Affine::identity()];
    for &e in seq {
        let (va, vb) = ngon.edge(e);
        let c = copies[copies.len() - 1];
        copies.push(c.reflected(c.apply(va), c.apply(vb)));
    }
    let tau = copies[k].offset();
    let x = ngon.edge_position(0, u);
    let mut crossing = vec![(0usize, u)];
    for i in 0..k - 1 {
        let (va, vb) = ngon.edge(seq[i]);
        let c = copies[i];
        let ui = line_parameter(x, x + tau, c.apply(va), c.apply(vb));
        if !(ui > 0.0 && ui < 1.0) {
            return Err(invalid(format!("start {u} leaves the family of {seq:?}")));
        }
        crossing.push((seq[i], ui));
    }
    let mut pts = Vec::with_capacity(2 * k);
    for i in 0..k {
        let (e, ue) = crossing[i];
        let (e2, ue2) = crossing[(i + 1) % k];
        pts.push(PolygonPoint::Edge { edge: e, u: ue });
        let mid = ngon.edge_position(e, ue).lerp(ngon.edge_position(e2, ue2), 0.5);
        let face = if i % 2 == 0 { Face::Top } else { Face::Bottom };
        pts.push(PolygonPoint::Interior { face, x: mid.x, y: mid.y });
    }
    ClosedCurve::from_points(ngon, pts)
}

struct RawFamily {
    seq: Vec<usize>,
    range: (f64, f64),
    tau: Vec2,
}

#[derive(Default)]
struct Stats {
    nodes: usize,
    pruned_length: usize,
    pruned_infeasible: usize,
    closing: usize,
    non_primitive: usize,
    deepest: usize,
}

struct Search<'a> {
    ngon: &'a DoubledNgon,
    l_max: f64,
    limits: EnumerationLimits,
    a0: Vec2,
    d0: Vec2,
    inward: Vec2,
    counter: &'a AtomicUsize,
}

/// Tightens the open interval `(lo, hi)` by `c0 + c1·u > 0`.
fn constrain(lo: &mut f64, hi: &mut f64, c0: f64, c1: f64) {
    if c1 > 0.0 {
        *lo = lo.max(-c0 / c1);
    } else if c1 < 0.0 {
        *hi = hi.min(-c0 / c1);
    } else if c0 <= 0.0 {
        *hi = *lo;
    }
}

impl Search<'_> {
    /// `cross(P − X(u), Q − X(u)) > 0` with `X(u)` on edge 0.
    fn wedge(&self, lo: &mut f64, hi: &mut f64, p: Vec2, q: Vec2) {
        let (a, b) = (p - self.a0, q - self.a0);
        constrain(lo, hi, a.cross(b), -self.d0.cross(b - a));
    }

    /// Extends `seq` by one edge (only `only` at the root) and recurses.
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        only: Option<usize>,
        seq: &mut Vec<usize>,
        segs: &mut Vec<(Vec2, Vec2)>,
        copy: Affine,
        range: (f64, f64),
        out: &mut Vec<RawFamily>,
        stats: &mut Stats,
    ) -> Result<()> {
        let ngon = self.ngon;
        let last = seq.last().copied().unwrap_or(0);
        let centroid = copy.apply(Vec2::default());
        for e in 0..ngon.n() {
            if e == last || only.is_some_and(|o| o != e) {
                continue;
            }
            if self.counter.fetch_add(1, Ordering::Relaxed) >= self.limits.node_budget {
                return Err(Error::BudgetExhausted(format!(
                    "closed-geodesic search exceeded {} nodes at L_max = {}",
                    self.limits.node_budget, self.l_max
                )));
            }
            stats.nodes += 1;
            let (va, vb) = ngon.edge(e);
            let (ea, eb) = (copy.apply(va), copy.apply(vb));
            // Orient so the current copy sees the edge counterclockwise.
            let (mut p, mut q) = if (eb - ea).cross(centroid - ea) > 0.0 { (ea, eb) } else { (eb, ea) };
            // Only the part ahead of edge 0 can be reached.
            let (hp, hq) = ((p - self.a0).dot(self.inward), (q - self.a0).dot(self.inward));
            if hp <= 0.0 && hq <= 0.0 {
                stats.pruned_infeasible += 1;
                continue;
            }
            if hp < 0.0 {
                p = p.lerp(q, hp / (hp - hq));
            } else if hq < 0.0 {
                q = q.lerp(p, hq / (hq - hp));
            }
            let (mut lo, mut hi) = range;
            self.wedge(&mut lo, &mut hi, p, q);
            for &(sp, sq) in segs.iter() {
                self.wedge(&mut lo, &mut hi, sp, q);
                self.wedge(&mut lo, &mut hi, p, sq);
            }
            if hi - lo <= FEASIBLE_MIN {
                stats.pruned_infeasible += 1;
                continue;
            }
            let reach = segment_segment_distance(self.a0 + self.d0 * lo, self.a0 + self.d0 * hi, p, q);
            if reach > self.l_max {
                stats.pruned_length += 1;
                continue;
            }
            let next = copy.reflected(ea, eb);
            seq.push(e);
            segs.push((p, q));
            stats.deepest = stats.deepest.max(seq.len());
            if e == 0 && seq.len() % 2 == 0 && next.is_translation(TRANSLATION_TOL) {
                self.close(seq, segs, next.offset(), (lo, hi), out, stats);
            }
            let result = if seq.len() < self.limits.max_depth {
                self.dfs(None, seq, segs, next, (lo, hi), out, stats)
            } else {
                Err(Error::BudgetExhausted(format!(
                    "closed-geodesic search reached depth {} with feasible prefixes left at L_max = {}",
                    self.limits.max_depth, self.l_max
                )))
            };
            seq.pop();
            segs.pop();
            result?;
        }
        Ok(())
    }

    fn close(
        &self,
        seq: &[usize],
        segs: &[(Vec2, Vec2)],
        tau: Vec2,
        range: (f64, f64),
        out: &mut Vec<RawFamily>,
        stats: &mut Stats,
    ) {
        // Lines along edge 0 itself are not transversal to it.
        if tau.norm() > self.l_max || tau.dot(self.inward) <= TRANSLATION_TOL * tau.norm() {
            return;
        }
        let (mut lo, mut hi) = range;
        for &(p, q) in segs {
            // The direction τ lies inside the wedge towards every crossed edge.
            constrain(&mut lo, &mut hi, (p - self.a0).cross(tau), -self.d0.cross(tau));
            constrain(&mut lo, &mut hi, tau.cross(q - self.a0), -tau.cross(self.d0));
        }
        if hi - lo <= CORRIDOR_MIN {
            return;
        }
        stats.closing += 1;
        if closing_period(seq) < seq.len() {
            stats.non_primitive += 1;
            return;
        }
        out.push(RawFamily { seq: seq.to_vec(), range: (lo, hi), tau });
    }
}

/// All closed geodesics of X_n of length at most `l_max`, one parallel
/// family at a time, together with their dihedral images.
pub fn enumerate_closed_geodesics(ngon: &DoubledNgon, l_max: f64, limits: EnumerationLimits) -> Result<Enumeration> {
    if !(l_max > 0.0) || !l_max.is_finite() {
        return Err(invalid(format!("L_max must be positive, got {l_max}")));
    }
    let (a0, b0) = ngon.edge(0);
    let counter = AtomicUsize::new(0);
    let search = Search {
        ngon,
        l_max,
        limits,
        a0,
        d0: b0 - a0,
        inward: -ngon.edge_normal(0),
        counter: &counter,
    };
    let results: Vec<Result<(Vec<RawFamily>, Stats)>> = (1..ngon.n())
        .into_par_iter()
        .map(|first| {
            let mut out = Vec::new();
            let mut stats = Stats::default();
            let mut seq = Vec::new();
            let mut segs = Vec::new();
            search.dfs(Some(first), &mut seq, &mut segs, Affine::identity(), (0.0, 1.0), &mut out, &mut stats)?;
            Ok((out, stats))
        })
        .collect();

    let mut raw = Vec::new();
    let mut cert = EnumerationCertificate {
        l_max,
        max_depth: limits.max_depth,
        node_budget: limits.node_budget,
        exhausted: true,
        ..Default::default()
    };
    for r in results {
        let (out, s) = r?;
        raw.extend(out);
        cert.nodes_expanded += s.nodes;
        cert.pruned_by_length += s.pruned_length;
        cert.pruned_infeasible += s.pruned_infeasible;
        cert.closing_sequences += s.closing;
        cert.non_primitive += s.non_primitive;
        cert.deepest = cert.deepest.max(s.deepest);
    }
    raw.sort_by(|a, b| a.tau.norm().total_cmp(&b.tau.norm()).then_with(|| a.seq.cmp(&b.seq)));

    // Expand each new family into its dihedral orbit.
    let mut families: Vec<GeodesicFamily> = Vec::new();
    let mut geodesics: Vec<ClosedGeodesic> = Vec::new();
    let mut by_edges: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    let mut orbit = 0;
    for r in raw {
        let (lo, hi) = r.range;
        let base = GeodesicFamily {
            base_sequence: r.seq.clone(),
            u_range: r.range,
            translation: r.tau,
            length: r.tau.norm(),
            period: r.seq.len(),
            width: (hi - lo) * ngon.side() * (b0 - a0).normalized().cross(r.tau.normalized()).abs(),
            symmetry: Symmetry::default(),
            orbit,
        };
        let midline = base.member(ngon, 0.5)?;
        if find_curve(ngon, &by_edges, &geodesics, &midline).is_some() {
            continue;
        }
        let mut first = true;
        for g in Symmetry::all(ngon.n()) {
            let image = ngon.apply_symmetry_to_curve(&midline, g);
            if find_curve(ngon, &by_edges, &geodesics, &image).is_some() {
                continue;
            }
            let idx = families.len();
            let mut geo = ClosedGeodesic::new(ngon, image);
            geo.representative = first;
            geo.family = Some(idx);
            first = false;
            let mut key = geo.edge_sequence.clone();
            key.sort_unstable();
            by_edges.entry(key).or_default().push(idx);
            families.push(GeodesicFamily { symmetry: g, ..base.clone() });
            geodesics.push(geo);
        }
        orbit += 1;
    }
    Ok(Enumeration { l_max, families, geodesics, certificate: cert })
}

fn find_curve(
    ngon: &DoubledNgon,
    by_edges: &BTreeMap<Vec<usize>, Vec<usize>>,
    geodesics: &[ClosedGeodesic],
    curve: &ClosedCurve<PolygonPoint>,
) -> Option<usize> {
    let mut key = edge_sequence(curve);
    key.sort_unstable();
    by_edges
        .get(&key)?
        .iter()
        .copied()
        .find(|&i| same_curve(ngon, &geodesics[i].curve, curve, SAME_CURVE_TOL))
}
