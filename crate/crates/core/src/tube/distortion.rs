//! Sampled Gromov-Hausdorff distortion of the collapse Y_{n,ε} → X_n.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::metric::DistanceOracle;
use crate::polygon::PolygonPoint;

use super::{Correspondence, TubeGraphOracle, TubePoint};

/// One CSV row: `eps,h,samples,max_distortion`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub eps: f64,
    pub h: f64,
    /// Number of sample points; every pair among them is compared.
    pub samples: usize,
    /// `max |d_Y(p, q) − d_X(π p, π q)|` over the sampled pairs, less the
    /// error allowance of the two oracles (never below zero).
    pub max_distortion: f64,
    /// The maximum before the allowance is subtracted.
    pub raw_max: f64,
    /// Combined declared error of the two oracles.
    pub error_bound: f64,
    /// Largest ambient displacement of the collapse on the samples.
    pub max_displacement: f64,
}

impl DistortionReport {
    pub const CSV_HEADER: &'static str = "eps,h,samples,max_distortion";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.eps, self.h, self.samples, self.max_distortion)
    }
}

/// Compares Y distances with X_n distances of the collapsed points over all
/// pairs of `samples` area-uniform points drawn from `seed`.
pub fn gh_distortion<O>(tube_oracle: &TubeGraphOracle, base_oracle: &O, samples: usize, seed: u64) -> Result<DistortionReport>
where
    O: DistanceOracle<Point = PolygonPoint>,
{
    if samples < 2 {
        return Err(invalid("distortion needs at least two sample points"));
    }
    let tube = tube_oracle.tube();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<TubePoint> = (0..samples).map(|_| tube.random_point(&mut rng)).collect();
    let corr = Correspondence::new(tube, &points);
    let pairs: Vec<(usize, usize)> = (0..samples).flat_map(|i| (i + 1..samples).map(move |j| (i, j))).collect();
    let worst = pairs
        .par_iter()
        .map(|&(i, j)| -> Result<f64> {
            let dy = tube_oracle.distance(&points[i], &points[j])?;
            let dx = base_oracle.distance(&corr.targets[i].0, &corr.targets[j].0)?;
            Ok((dy - dx).abs())
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    let error_bound = tube_oracle.error_bound() + base_oracle.error_bound();
    Ok(DistortionReport {
        eps: tube.eps(),
        h: tube_oracle.h(),
        samples,
        max_distortion: (worst - error_bound).max(0.0),
        raw_max: worst,
        error_bound,
        max_displacement: corr.max_displacement,
    })
}
