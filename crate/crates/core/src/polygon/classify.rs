//! Half-geodesics of X_n: closed geodesics that minimize between every pair
//! of points half a length apart.
//!
//! A half-geodesic of length L has points at distance L/2, so L ≤ 2·diam.
//! Classification therefore enumerates every closed geodesic up to twice a
//! certified upper bound on the diameter and runs the k = 2 check on each.
//! Closed geodesics come in parallel families, so each family is tested at
//! its midline and at a fixed set of offsets across its width. Members of
//! one dihedral orbit share verdicts, so only one family per orbit is run.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geom::Vec2;
use crate::metric::{verify_one_over_k, DistanceOracle, ToleranceConfig, Verdict};

use super::distance::{PolygonOracle, SearchLimits};
use super::enumerate::{enumerate_closed_geodesics, ClosedGeodesic, EnumerationCertificate, EnumerationLimits};
use super::{DoubledNgon, Face, PolygonPoint};

/// Sampled lower estimate of diam(X_n) with an additive bound: the true
/// diameter lies in `[value, value + error_bound]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiameterEstimate {
    pub value: f64,
    pub error_bound: f64,
    pub grid: usize,
    /// Sample points on both faces and edges.
    pub samples: usize,
    /// Points standing in for the first argument, after symmetry reduction.
    pub reduced_samples: usize,
    pub argmax: (PolygonPoint, PolygonPoint),
}

impl DiameterEstimate {
    pub fn upper(&self) -> f64 {
        self.value + self.error_bound
    }
}

/// Distance from `x` to the sector between the rays at angles 0 and π/n.
fn distance_to_sector(x: Vec2, n: usize) -> f64 {
    let angle = x.y.atan2(x.x);
    let top = std::f64::consts::PI / n as f64;
    if (0.0..=top).contains(&angle) {
        return 0.0;
    }
    let ray = |theta: f64| {
        let d = Vec2::new(theta.cos(), theta.sin());
        let s = x.dot(d).max(0.0);
        x.dist(d * s)
    };
    ray(0.0).min(ray(top))
}

/// Length of some path from `p` to `q`: the straight chord when they share
/// a face, otherwise the best path crossing a single edge (reflect `q`
/// across the edge line and clamp the crossing to the edge).
fn path_upper_bound(ngon: &DoubledNgon, p: &PolygonPoint, q: &PolygonPoint) -> f64 {
    let (pp, qq) = (ngon.planar(p), ngon.planar(q));
    match (p.face(), q.face()) {
        (Some(a), Some(b)) if a != b => (0..ngon.n())
            .map(|e| {
                let (a, b) = ngon.edge(e);
                let r = qq.reflect_across(a, b);
                let (x, _) = closest_on_segment_towards(pp, r, a, b);
                pp.dist(x) + x.dist(qq)
            })
            .fold(f64::INFINITY, f64::min),
        _ => pp.dist(qq),
    }
}

/// Where the segment `p → r` meets `[a, b]`, clamped to the segment.
fn closest_on_segment_towards(p: Vec2, r: Vec2, a: Vec2, b: Vec2) -> (Vec2, f64) {
    let d = b - a;
    let w = r - p;
    let denom = d.cross(w);
    let u = if denom.abs() < f64::MIN_POSITIVE { 0.5 } else { ((p - a).cross(w) / denom).clamp(0.0, 1.0) };
    (a + d * u, u)
}

/// Samples on a lattice of step `h/2`, `h = 2R/grid`, on both faces, plus
/// edge points at `u = j/(2·grid)`. Doubling `grid` refines both sets.
///
/// Every point of a face lies within `h` of a sample: interior points whose
/// lattice cell fits inside are within `h/(2√2)`, and a point closer than
/// `h/√2` to the boundary is within `√(h²/2 + h²/4)` of an edge sample. By
/// the triangle inequality the maximum over samples is within `2h` of the
/// diameter. The first point is restricted to top-face samples within `h`
/// of a fundamental sector of the dihedral group, which still covers it.
pub fn approximate_diameter<O>(ngon: &DoubledNgon, grid: usize, oracle: &O) -> Result<DiameterEstimate>
where
    O: DistanceOracle<Point = PolygonPoint>,
{
    if grid < 8 {
        return Err(invalid(format!("diameter grid must be at least 8, got {grid}")));
    }
    let h = 2.0 * ngon.circumradius() / grid as f64;
    let step = h / 2.0;
    let half = grid as i64;
    let mut face_points = Vec::new();
    for i in -half..=half {
        for j in -half..=half {
            let p = Vec2::new(i as f64 * step, j as f64 * step);
            if ngon.contains_strictly(p) && ngon.min_inset(p) > 1e-12 * ngon.side() {
                face_points.push(p);
            }
        }
    }
    let mut edge_points = Vec::new();
    for e in 0..ngon.n() {
        for j in 1..2 * grid {
            edge_points.push(PolygonPoint::Edge { edge: e, u: j as f64 / (2 * grid) as f64 });
        }
    }
    let mut all: Vec<PolygonPoint> = Vec::with_capacity(2 * face_points.len() + edge_points.len());
    for face in [Face::Top, Face::Bottom] {
        all.extend(face_points.iter().map(|p| PolygonPoint::Interior { face, x: p.x, y: p.y }));
    }
    all.extend(edge_points.iter().copied());
    let reduced: Vec<PolygonPoint> = all
        .iter()
        .filter(|p| p.face() != Some(Face::Bottom) && distance_to_sector(ngon.planar(p), ngon.n()) <= h)
        .copied()
        .collect();

    let best = reduced
        .par_iter()
        .map(|p| {
            let mut best = (f64::NEG_INFINITY, *p, *p);
            for q in &all {
                // A pair that cannot beat the running maximum needs no exact query.
                if path_upper_bound(ngon, p, q) <= best.0 - oracle.error_bound() {
                    continue;
                }
                let d = oracle.distance(p, q)?;
                if d > best.0 {
                    best = (d, *p, *q);
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((f64::NEG_INFINITY, all[0], all[0]), |a, b| if b.0 > a.0 { b } else { a });
    Ok(DiameterEstimate {
        value: best.0,
        error_bound: 2.0 * h + oracle.error_bound() * 2.0,
        grid,
        samples: all.len(),
        reduced_samples: reduced.len(),
        argmax: (best.1, best.2),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub diameter_grid: usize,
    /// Relative margin on the length cutoff `2·diam`.
    pub margin: f64,
    pub tolerance: ToleranceConfig,
    /// Positions across each family that are tested; 1/2 is the midline.
    pub offsets: Vec<f64>,
    pub enumeration: EnumerationLimits,
    pub search: SearchLimits,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            diameter_grid: 16,
            margin: 0.01,
            tolerance: ToleranceConfig::default(),
            offsets: vec![0.5, 0.375, 0.625, 0.25, 0.75, 0.125, 0.875, 0.05, 0.95],
            enumeration: EnumerationLimits::default(),
            search: SearchLimits::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub orbit: usize,
    pub family: usize,
    pub offset: f64,
    pub length: f64,
    pub period: usize,
    pub verdict: Verdict,
    pub max_deviation: f64,
    pub orbit_size: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub n: usize,
    pub side: f64,
    pub diameter: DiameterEstimate,
    pub l_max: f64,
    /// Every passing curve, dihedral images included.
    pub half_geodesics: Vec<ClosedGeodesic>,
    /// One row per tested orbit and offset.
    pub candidates: Vec<CandidateReport>,
    pub certificate: EnumerationCertificate,
    pub offsets: Vec<f64>,
}

/// All half-geodesics of X_n among the sampled members of every family.
pub fn classify_half_geodesics(ngon: &DoubledNgon, cfg: &ClassifyConfig) -> Result<Classification> {
    cfg.tolerance.validate()?;
    if !(cfg.margin >= 0.0) {
        return Err(invalid(format!("margin must be nonnegative, got {}", cfg.margin)));
    }
    if cfg.offsets.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
        return Err(invalid("family offsets must lie in (0, 1)"));
    }
    let oracle = PolygonOracle::with_limits(ngon, cfg.search);
    let diameter = approximate_diameter(ngon, cfg.diameter_grid, &oracle)?;
    let l_max = 2.0 * diameter.upper() * (1.0 + cfg.margin);
    let enumeration = enumerate_closed_geodesics(ngon, l_max, cfg.enumeration)?;

    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for (i, f) in enumeration.families.iter().enumerate() {
        if f.orbit >= orbits.len() {
            orbits.resize(f.orbit + 1, Vec::new());
        }
        orbits[f.orbit].push(i);
    }
    let jobs: Vec<(usize, f64)> =
        (0..orbits.len()).flat_map(|o| cfg.offsets.iter().map(move |&f| (o, f))).collect();
    let candidates = jobs
        .par_iter()
        .map(|&(orbit, offset)| {
            let fi = orbits[orbit][0];
            let family = &enumeration.families[fi];
            let curve = family.member(ngon, offset)?;
            let report = verify_one_over_k(ngon, &curve, &oracle, 2, &cfg.tolerance)?;
            Ok(CandidateReport {
                orbit,
                family: fi,
                offset,
                length: family.length,
                period: family.period,
                verdict: report.verdict,
                max_deviation: report.max_deviation,
                orbit_size: orbits[orbit].len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut half_geodesics = Vec::new();
    for c in candidates.iter().filter(|c| c.verdict == Verdict::Pass) {
        for (j, &fi) in orbits[c.orbit].iter().enumerate() {
            let curve = enumeration.families[fi].member(ngon, c.offset)?;
            let mut g = ClosedGeodesic::new(ngon, curve);
            g.family = Some(fi);
            g.offset = c.offset;
            g.representative = j == 0;
            half_geodesics.push(g);
        }
    }
    Ok(Classification {
        n: ngon.n(),
        side: ngon.side(),
        diameter,
        l_max,
        half_geodesics,
        candidates,
        certificate: enumeration.certificate,
        offsets: cfg.offsets.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polygon::{meridians, GeodesicTag};

    #[test]
    fn square_diameter_bracket() {
        let sq = DoubledNgon::new(4, 1.0).unwrap();
        let o = PolygonOracle::new(&sq);
        let d8 = approximate_diameter(&sq, 8, &o).unwrap();
        let d16 = approximate_diameter(&sq, 16, &o).unwrap();
        assert!(d8.value >= 1.0 - 1e-12 && d8.value <= 1.5);
        assert!(d16.value >= d8.value - 1e-12);
        assert!(d16.error_bound < d8.error_bound);
        assert!(d16.upper() >= 1.0);
    }

    #[test]
    fn refinement_is_monotone() {
        let sq = DoubledNgon::new(4, 1.0).unwrap();
        let o = PolygonOracle::new(&sq);
        let coarse = approximate_diameter(&sq, 8, &o).unwrap();
        let fine = approximate_diameter(&sq, 64, &o).unwrap();
        assert!(fine.value >= coarse.value);
        assert!(fine.value <= coarse.upper());
        assert!(fine.error_bound * 8.0 - coarse.error_bound < 1e-12);
    }

    #[test]
    fn upper_bound_dominates_exact_distance() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let hex = DoubledNgon::new(6, 1.0).unwrap();
        let o = PolygonOracle::new(&hex);
        for _ in 0..200 {
            let (a, b) = (hex.random_point(&mut rng, 0.2), hex.random_point(&mut rng, 0.2));
            assert!(path_upper_bound(&hex, &a, &b) >= o.distance(&a, &b).unwrap() - 1e-12);
        }
    }

    #[test]
    fn diameter_scales_with_side() {
        let a = DoubledNgon::new(5, 1.0).unwrap();
        let b = DoubledNgon::new(5, 2.5).unwrap();
        let da = approximate_diameter(&a, 8, &PolygonOracle::new(&a)).unwrap();
        let db = approximate_diameter(&b, 8, &PolygonOracle::new(&b)).unwrap();
        assert!((db.value - 2.5 * da.value).abs() < 1e-9);
        assert!(approximate_diameter(&a, 4, &PolygonOracle::new(&a)).is_err());
    }

    #[test]
    fn counts_for_small_n() {
        for (n, expected) in [(3, 0), (4, 2), (5, 0), (6, 3)] {
            let ngon = DoubledNgon::new(n, 1.0).unwrap();
            let c = classify_half_geodesics(&ngon, &ClassifyConfig::default()).unwrap();
            assert_eq!(c.half_geodesics.len(), expected, "n={n}: {:?}", c.candidates);
            for g in &c.half_geodesics {
                assert_eq!(g.tag, GeodesicTag::Meridian);
                assert!(meridians(&ngon).iter().any(|m| m.same_curve(g, &ngon, 1e-9)));
            }
            assert!(c.certificate.exhausted);
        }
    }
}
