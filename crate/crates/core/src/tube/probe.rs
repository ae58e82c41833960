//! Closed-geodesic probe: many shortening runs, then k = 2 verification of
//! every loop that did not contract.
//!
//! Starting loops are random, plus (optionally) lifts of closed geodesics of
//! the base polygon, which give shortening a chance to settle on the tube
//! versions of those. No run count makes this exhaustive.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::metric::{verify_one_over_k, ClosedCurve, ToleranceConfig, Verdict};
use crate::polygon::{DiameterEstimate, PolygonPoint};

use super::{birkhoff_shorten, lift_curve, random_loop, ShortenConfig, ShortenOutcome, TubeGraphOracle};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub runs: usize,
    pub seed: u64,
    pub shorten: ShortenConfig,
    /// Samples for the verification of each survivor.
    pub verify_samples: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { runs: 100, seed: 0, shorten: ShortenConfig::default(), verify_samples: 240 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "lowercase")]
pub enum LoopSource {
    Random(usize),
    Lifted(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Survivor {
    pub source: LoopSource,
    pub length: f64,
    pub iterations: usize,
    /// Whether the length is within `2·diam_upper`, the cutoff for
    /// half-geodesic candidates.
    pub within_cutoff: bool,
    /// Verification result; only loops within the cutoff are verified.
    pub verdict: Option<Verdict>,
    pub max_deviation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub eps: f64,
    pub h: f64,
    pub random_runs: usize,
    pub lifted_runs: usize,
    pub contracted: usize,
    pub diam_upper: f64,
    pub tolerance: ToleranceConfig,
    pub survivors: Vec<Survivor>,
}

impl ProbeReport {
    pub fn shortest_survivor(&self) -> Option<f64> {
        self.survivors.iter().map(|s| s.length).reduce(f64::min)
    }

    pub fn verified(&self) -> impl Iterator<Item = &Survivor> {
        self.survivors.iter().filter(|s| s.verdict.is_some())
    }
}

/// Runs `cfg.runs` random loops (run `i` seeded with `cfg.seed + i`) and one
/// run per curve in `lifts`, shortening each on the graph metric.
pub fn closed_geodesic_probe(
    oracle: &TubeGraphOracle,
    base_diameter: &DiameterEstimate,
    lifts: &[ClosedCurve<PolygonPoint>],
    cfg: &ProbeConfig,
) -> Result<ProbeReport> {
    if cfg.runs == 0 && lifts.is_empty() {
        return Err(invalid("the probe needs at least one run"));
    }
    let tube = oracle.tube();
    let diam_upper = tube.geometry_summary(base_diameter).cheeger.diam_upper;
    let tolerance = ToleranceConfig::for_oracle_error(crate::metric::DistanceOracle::error_bound(oracle)).with_samples(cfg.verify_samples);
    let mut starts: Vec<(LoopSource, Vec<_>)> = (0..cfg.runs)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
            (LoopSource::Random(i), random_loop(tube, &mut rng))
        })
        .collect();
    starts.extend(lifts.iter().enumerate().map(|(i, c)| (LoopSource::Lifted(i), lift_curve(tube, c))));

    let outcomes: Vec<Option<Survivor>> = starts
        .par_iter()
        .map(|(source, anchors)| -> Result<Option<Survivor>> {
            let run = birkhoff_shorten(oracle, anchors, &cfg.shorten)?;
            if run.outcome == ShortenOutcome::Contracted {
                return Ok(None);
            }
            let within_cutoff = run.length <= 2.0 * diam_upper;
            let (verdict, max_deviation) = match (&run.curve, within_cutoff) {
                (Some(curve), true) => {
                    let r = verify_one_over_k(tube, curve, oracle, 2, &tolerance)?;
                    (Some(r.verdict), Some(r.max_deviation))
                }
                _ => (None, None),
            };
            Ok(Some(Survivor {
                source: source.clone(),
                length: run.length,
                iterations: run.iterations,
                within_cutoff,
                verdict,
                max_deviation,
            }))
        })
        .collect::<Result<_>>()?;
    let contracted = outcomes.iter().filter(|o| o.is_none()).count();
    Ok(ProbeReport {
        eps: tube.eps(),
        h: oracle.h(),
        random_runs: cfg.runs,
        lifted_runs: lifts.len(),
        contracted,
        diam_upper,
        tolerance,
        survivors: outcomes.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polygon::{approximate_diameter, meridians, DoubledNgon, PolygonOracle};
    use crate::tube::{build_mesh, mesh_distance_oracle, TubeSurface};

    #[test]
    fn square_meridian_lifts_survive_and_pass() {
        let sq = DoubledNgon::new(4, 1.0).unwrap();
        let t = TubeSurface::new(&sq, 0.1).unwrap();
        let g = mesh_distance_oracle(&build_mesh(&t, 0.02).unwrap());
        let diam = approximate_diameter(&sq, 16, &PolygonOracle::new(&sq)).unwrap();
        let lifts: Vec<_> = meridians(&sq).into_iter().map(|m| m.curve).collect();
        let cfg = ProbeConfig { runs: 2, verify_samples: 60, ..ProbeConfig::default() };
        let r = closed_geodesic_probe(&g, &diam, &lifts, &cfg).unwrap();
        assert_eq!(r.random_runs + r.lifted_runs, 4);
        assert_eq!(r.contracted + r.survivors.len(), 4);
        let lifted: Vec<_> = r.survivors.iter().filter(|s| matches!(s.source, LoopSource::Lifted(_))).collect();
        assert_eq!(lifted.len(), 2);
        for s in lifted {
            assert!(s.within_cutoff);
            assert_eq!(s.verdict, Some(Verdict::Pass), "{s:?}");
        }
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"kind\":\"lifted\""));
    }
}
