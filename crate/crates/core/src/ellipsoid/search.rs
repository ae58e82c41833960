//! Short closed geodesics by random shooting.
//!
//! Each trial follows a random geodesic until it comes back near its start
//! with a similar heading, then closes it up by Levenberg–Marquardt on the
//! lateral start offset, the start heading and the length. The search is a
//! probe: finding nothing else is evidence, not proof.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geom::{closest_on_segment_3d, Vec3};

use super::integrate::Flow;
use super::{integrate_geodesic, Ellipsoid, GeodesicState, IntegratorConfig, Plane};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    /// Position plus tangent mismatch accepted as closed.
    pub closure_tol: f64,
    /// Returns with a larger initial mismatch are not refined.
    pub capture: f64,
    pub max_refine: usize,
    /// Two finds are the same geodesic when their lengths agree to this and
    /// one start point lies on the other curve to `dedup_distance`.
    pub dedup_length: f64,
    pub dedup_distance: f64,
    pub integrator: IntegratorConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            seed: 0,
            closure_tol: 1e-8,
            capture: 0.5,
            max_refine: 60,
            dedup_length: 1e-6,
            dedup_distance: 1e-4,
            integrator: IntegratorConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedGeodesicFound {
    pub length: f64,
    pub start: GeodesicState,
    pub closure_residual: f64,
    /// The coordinate plane containing the curve, if any.
    pub plane: Option<Plane>,
    /// Trials that converged to this geodesic.
    pub multiplicity: usize,
    #[serde(skip)]
    pub polyline: Vec<Vec3>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub axes: [f64; 3],
    pub l_max: f64,
    pub trials: usize,
    pub seed: u64,
    /// Always false: random shooting cannot certify absence.
    pub exhaustive: bool,
    pub found: Vec<ClosedGeodesicFound>,
}

impl SearchReport {
    pub fn planes(&self) -> Vec<Option<Plane>> {
        self.found.iter().map(|f| f.plane).collect()
    }
}

/// Start state for offset `w` across and turn `theta` from a base state.
fn start_from(ell: &Ellipsoid, base: &GeodesicState, w: f64, theta: f64) -> GeodesicState {
    let side = ell.normal(base.position).cross(base.tangent);
    let x = ell.project(base.position + side * w);
    let (s, c) = theta.sin_cos();
    GeodesicState { position: x, tangent: ell.tangent_unit(x, base.tangent * c + side * s) }
}

fn mismatch(start: &GeodesicState, end: &GeodesicState) -> [f64; 6] {
    let (dx, dv) = (end.position - start.position, end.tangent - start.tangent);
    [dx.x, dx.y, dx.z, dv.x, dv.y, dv.z]
}

fn norm(r: &[f64; 6]) -> f64 {
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// First return of the geodesic through `start` with the smallest mismatch,
/// among returns no longer than `l_max`.
fn best_return(ell: &Ellipsoid, start: &GeodesicState, l_max: f64, cfg: &IntegratorConfig) -> Result<Option<(f64, f64)>> {
    let mut flow = Flow::new(ell, *start, *cfg);
    let f = |st: &GeodesicState| (st.position - start.position).dot(st.tangent);
    let mut f0 = f(&flow.state);
    let mut best: Option<(f64, f64)> = None;
    let reach = l_max * 1.02;
    while flow.s < reach {
        let (s0, st0) = flow.step(reach)?;
        let f1 = f(&flow.state);
        // A minimum of the distance to the start, away from the start itself.
        if f0 < 0.0 && f1 >= 0.0 && s0 > 0.5 {
            let mut sig = (0.0, flow.s - s0);
            for _ in 0..50 {
                let m = 0.5 * (sig.0 + sig.1);
                if f(&flow.jump(&st0, m)) < 0.0 {
                    sig.0 = m;
                } else {
                    sig.1 = m;
                }
            }
            let s = s0 + sig.0;
            let mis = norm(&mismatch(start, &flow.jump(&st0, sig.0)));
            if best.map_or(true, |b| mis < b.1) {
                best = Some((s, mis));
            }
        }
        f0 = f1;
    }
    Ok(best)
}

fn residual(ell: &Ellipsoid, base: &GeodesicState, u: [f64; 3], cfg: &IntegratorConfig) -> Result<[f64; 6]> {
    let st = start_from(ell, base, u[0], u[1]);
    let path = integrate_geodesic(ell, &st, u[2], cfg)?;
    Ok(mismatch(&st, path.end()))
}

/// Solves the 3×3 system `m x = b` by Cramer's rule.
fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d.abs() < 1e-300 {
        return None;
    }
    let mut x = [0.0; 3];
    for (k, xk) in x.iter_mut().enumerate() {
        let mut mk = m;
        for r in 0..3 {
            mk[r][k] = b[r];
        }
        *xk = det(&mk) / d;
    }
    Some(x)
}

/// Levenberg–Marquardt closure from a near return. Returns the closed
/// start state, length and residual.
fn close_up(ell: &Ellipsoid, base: &GeodesicState, length: f64, cfg: &SearchConfig) -> Result<Option<(GeodesicState, f64, f64)>> {
    let ic = &cfg.integrator;
    let mut u = [0.0, 0.0, length];
    let mut r = residual(ell, base, u, ic)?;
    let mut lambda = 1e-3;
    for _ in 0..cfg.max_refine {
        if norm(&r) <= cfg.closure_tol {
            break;
        }
        let mut jac = [[0.0; 3]; 6];
        for k in 0..3 {
            let mut up = u;
            up[k] += 1e-7;
            let rk = residual(ell, base, up, ic)?;
            for i in 0..6 {
                jac[i][k] = (rk[i] - r[i]) / 1e-7;
            }
        }
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for a in 0..3 {
            for b in 0..3 {
                jtj[a][b] = (0..6).map(|i| jac[i][a] * jac[i][b]).sum();
            }
            jtr[a] = -(0..6).map(|i| jac[i][a] * r[i]).sum::<f64>();
        }
        let mut improved = false;
        for _ in 0..12 {
            let mut m = jtj;
            for a in 0..3 {
                m[a][a] += lambda * jtj[a][a].max(1e-12);
            }
            let Some(delta) = solve3(m, jtr) else { break };
            let trial = [u[0] + delta[0], u[1] + delta[1], u[2] + delta[2]];
            if trial[2] <= 0.0 {
                lambda *= 10.0;
                continue;
            }
            let rt = residual(ell, base, trial, ic)?;
            if norm(&rt) < norm(&r) {
                u = trial;
                r = rt;
                lambda = (lambda * 0.1).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let res = norm(&r);
    Ok((res <= cfg.closure_tol).then(|| (start_from(ell, base, u[0], u[1]), u[2], res)))
}

fn polyline(ell: &Ellipsoid, start: &GeodesicState, length: f64, cfg: &IntegratorConfig) -> Result<Vec<Vec3>> {
    let fine = IntegratorConfig { max_step: 0.01, initial_step: cfg.initial_step.min(0.01), ..*cfg };
    Ok(integrate_geodesic(ell, start, length, &fine)?.states.iter().map(|s| s.position).collect())
}

fn distance_to_polyline(p: Vec3, line: &[Vec3]) -> f64 {
    line.windows(2).map(|w| closest_on_segment_3d(p, w[0], w[1]).dist(p)).fold(f64::INFINITY, f64::min)
}

fn plane_of(line: &[Vec3]) -> Option<Plane> {
    Plane::ALL
        .into_iter()
        .find(|pl| line.iter().all(|x| x.to_array()[pl.normal_axis()].abs() <= 1e-6))
}

/// Random shooting for closed geodesics of length at most `l_max`.
pub fn search_short_closed_geodesics(ell: &Ellipsoid, l_max: f64, trials: usize, cfg: &SearchConfig) -> Result<SearchReport> {
    if trials == 0 {
        return Err(invalid("the search needs at least one trial"));
    }
    if !(l_max > 0.0 && l_max.is_finite()) {
        return Err(invalid(format!("l_max must be positive, got {l_max}")));
    }
    cfg.integrator.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let starts: Vec<GeodesicState> = (0..trials)
        .map(|_| {
            let u = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let x = ell.radial_point(if u.norm() < 1e-6 { Vec3::new(1.0, 0.0, 0.0) } else { u });
            let (e1, e2) = ell.tangent_frame(x);
            let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            GeodesicState { position: x, tangent: e1 * th.cos() + e2 * th.sin() }
        })
        .collect();
    let closed: Vec<Option<(GeodesicState, f64, f64)>> = starts
        .par_iter()
        .map(|st| -> Result<_> {
            let Some((s, mis)) = best_return(ell, st, l_max, &cfg.integrator)? else {
                return Ok(None);
            };
            if mis > cfg.capture {
                return Ok(None);
            }
            Ok(close_up(ell, st, s, cfg)?.filter(|c| c.1 <= l_max))
        })
        .collect::<Result<_>>()?;

    let mut found: Vec<ClosedGeodesicFound> = Vec::new();
    for (start, length, closure_residual) in closed.into_iter().flatten() {
        if let Some(f) = found
            .iter_mut()
            .find(|f| (f.length - length).abs() <= cfg.dedup_length && distance_to_polyline(start.position, &f.polyline) <= cfg.dedup_distance)
        {
            f.multiplicity += 1;
            continue;
        }
        let line = polyline(ell, &start, length, &cfg.integrator)?;
        found.push(ClosedGeodesicFound { length, start, closure_residual, plane: plane_of(&line), multiplicity: 1, polyline: line });
    }
    found.sort_by(|a, b| a.length.total_cmp(&b.length));
    Ok(SearchReport { axes: ell.axes(), l_max, trials, seed: cfg.seed, exhaustive: false, found })
}
