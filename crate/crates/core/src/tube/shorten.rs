//! Birkhoff curve shortening on the graph metric.
//!
//! A loop is held as a cyclic list of anchors. Each round joins consecutive
//! anchors by shortest graph paths, then resamples the anchors at equal arc
//! length along the result, shifted by half a spacing every other round so
//! that corners get straightened. The length never increases beyond the
//! graph error, and the loop either collapses or settles on an approximate
//! closed geodesic.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::metric::{ClosedCurve, CurveSpace};
use crate::polygon::Face;

use super::{TubeGraphOracle, TubePath, TubePoint, TubeSurface};

/// Rounds without improvement before a loop counts as settled.
const PATIENCE: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortenConfig {
    pub anchors: usize,
    /// Stop once a round shortens the loop by less than this.
    pub tol: f64,
    pub max_iterations: usize,
    /// Loops shorter than this count as contracted to a point. `None` uses
    /// two node spacings per anchor.
    pub contraction_length: Option<f64>,
}

impl Default for ShortenConfig {
    fn default() -> Self {
        ShortenConfig { anchors: 12, tol: 1e-6, max_iterations: 3000, contraction_length: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShortenOutcome {
    Contracted,
    Converged,
}

#[derive(Clone, Debug, Serialize)]
pub struct ShortenReport {
    pub outcome: ShortenOutcome,
    pub length: f64,
    pub iterations: usize,
    /// Loop length after every round.
    pub history: Vec<f64>,
    /// The limit loop, present when it did not contract.
    #[serde(skip)]
    pub curve: Option<ClosedCurve<TubePoint>>,
}

impl TubeSurface {
    /// A point drawn uniformly with respect to area.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> TubePoint {
        let ngon = self.base();
        let eps = self.eps();
        let face = ngon.face_area();
        let cyl = PI * eps * ngon.side();
        let total = self.area();
        let mut pick = rng.gen_range(0.0..total);
        for f in [Face::Top, Face::Bottom] {
            if pick < face {
                let p = ngon.planar(&ngon.random_interior(rng));
                return TubePoint::Face { face: f, x: p.x, y: p.y };
            }
            pick -= face;
        }
        let n = self.n();
        if pick < n as f64 * cyl {
            return TubePoint::Cylinder { edge: rng.gen_range(0..n), s: rng.gen_range(0.0..ngon.side()), phi: rng.gen_range(0.0..PI) };
        }
        let z: f64 = rng.gen_range(-1.0..1.0);
        TubePoint::Sphere { vertex: rng.gen_range(0..n), theta: rng.gen_range(0.0..self.lune_angle()), phi: z.acos() }
    }
}

/// Three to six random anchors for a starting loop.
pub fn random_loop<R: Rng + ?Sized>(tube: &TubeSurface, rng: &mut R) -> Vec<TubePoint> {
    let count = rng.gen_range(3..=6);
    (0..count).map(|_| tube.random_point(rng)).collect()
}

fn join(oracle: &TubeGraphOracle, anchors: &[TubePoint]) -> Result<Vec<TubePath>> {
    (0..anchors.len()).map(|i| oracle.shortest_path(&anchors[i], &anchors[(i + 1) % anchors.len()])).collect()
}

fn resample(oracle: &TubeGraphOracle, paths: &[TubePath], count: usize, shift: f64) -> Vec<TubePoint> {
    let total: f64 = paths.iter().map(|p| p.length).sum();
    let step = total / count as f64;
    let mut out = Vec::with_capacity(count);
    let mut idx = 0;
    let mut before = 0.0;
    for j in 0..count {
        let target = (j as f64 + shift) * step;
        while idx + 1 < paths.len() && before + paths[idx].length < target {
            before += paths[idx].length;
            idx += 1;
        }
        out.push(oracle.path_point(&paths[idx], target - before));
    }
    out
}

fn loop_curve(tube: &TubeSurface, paths: &[TubePath]) -> Result<ClosedCurve<TubePoint>> {
    let mut pts: Vec<TubePoint> = Vec::new();
    for p in paths {
        for q in &p.points[..p.points.len() - 1] {
            if pts.last().map_or(true, |last| tube.segment_length(last, q) > 1e-12) {
                pts.push(*q);
            }
        }
    }
    while pts.len() > 1 && tube.segment_length(&pts[pts.len() - 1], &pts[0]) <= 1e-12 {
        pts.pop();
    }
    ClosedCurve::from_points(tube, pts)
}

/// Shortens the loop through `initial` (at least two anchors).
pub fn birkhoff_shorten(oracle: &TubeGraphOracle, initial: &[TubePoint], cfg: &ShortenConfig) -> Result<ShortenReport> {
    if initial.len() < 2 {
        return Err(invalid("a loop needs at least two anchors"));
    }
    if cfg.anchors < 3 || !(cfg.tol >= 0.0) {
        return Err(invalid("shortening needs at least three anchors and a nonnegative tolerance"));
    }
    let tube = oracle.tube();
    let floor = cfg.contraction_length.unwrap_or(2.0 * cfg.anchors as f64 * oracle.h());
    let mut anchors = initial.to_vec();
    let mut history = Vec::new();
    let mut best = f64::INFINITY;
    let mut since = 0;
    for it in 0..cfg.max_iterations {
        let paths = join(oracle, &anchors)?;
        let length: f64 = paths.iter().map(|p| p.length).sum();
        history.push(length);
        if length < floor {
            return Ok(ShortenReport { outcome: ShortenOutcome::Contracted, length, iterations: it + 1, history, curve: None });
        }
        // Quiet once a full window of rounds brings no real improvement.
        if length < best - cfg.tol {
            best = length;
            since = 0;
        } else {
            since += 1;
        }
        if since >= PATIENCE {
            let curve = loop_curve(tube, &paths)?;
            return Ok(ShortenReport { outcome: ShortenOutcome::Converged, length, iterations: it + 1, history, curve: Some(curve) });
        }
        let shift = if it % 2 == 0 { 0.0 } else { 0.5 };
        anchors = resample(oracle, &paths, cfg.anchors, shift);
    }
    Err(Error::IterationCap(cfg.max_iterations))
}
