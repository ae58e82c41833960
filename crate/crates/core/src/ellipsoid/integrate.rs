//! Geodesic flow by the Dormand–Prince 5(4) pair.
//!
//! For a unit-speed curve on `F(x) = 0` the geodesic equation reads
//! `x'' = −(v·∇²F v / |∇F|²) ∇F`. Each accepted step is projected back onto
//! the surface and onto the unit tangent sphere, which keeps the residuals
//! at rounding level instead of letting them drift.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geom::Vec3;

use super::{Ellipsoid, GeodesicState};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Local error per step (max norm over position and tangent).
    pub tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    /// Steps below this abort with an integration error.
    pub min_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { tol: 1e-10, initial_step: 1e-2, max_step: 0.1, min_step: 1e-12 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.min_step > 0.0 && self.initial_step >= self.min_step && self.max_step >= self.initial_step) {
            return Err(invalid("integrator needs 0 < tol and 0 < min_step <= initial_step <= max_step"));
        }
        Ok(())
    }
}

/// Accepted steps of an integration, with arc-length stamps.
#[derive(Clone, Debug, Serialize)]
pub struct GeodesicPath {
    pub arc: Vec<f64>,
    pub states: Vec<GeodesicState>,
    /// Largest state residual seen along the path.
    pub max_residual: f64,
}

impl GeodesicPath {
    pub fn end(&self) -> &GeodesicState {
        self.states.last().unwrap()
    }
}

// Dormand–Prince tableau. The system is autonomous, so the nodes are not
// needed; the last row doubles as the fifth order weights.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Difference between the fifth and fourth order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type Y = [f64; 6];

/// Stepping state shared by the plain integrator and the shooting code.
pub(crate) struct Flow<'a> {
    ell: &'a Ellipsoid,
    cfg: IntegratorConfig,
    k: [f64; 3],
    pub s: f64,
    pub state: GeodesicState,
    h: f64,
}

impl<'a> Flow<'a> {
    pub fn new(ell: &'a Ellipsoid, start: GeodesicState, cfg: IntegratorConfig) -> Self {
        Flow { ell, cfg, k: ell.inv2(), s: 0.0, state: start, h: cfg.initial_step }
    }

    fn rhs(&self, y: &Y) -> Y {
        let k = self.k;
        let (x, v) = ([y[0], y[1], y[2]], [y[3], y[4], y[5]]);
        let vhv = v[0] * v[0] * k[0] + v[1] * v[1] * k[1] + v[2] * v[2] * k[2];
        let g = [x[0] * k[0], x[1] * k[1], x[2] * k[2]];
        let lam = vhv / (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
        [v[0], v[1], v[2], -lam * g[0], -lam * g[1], -lam * g[2]]
    }

    /// One Dormand–Prince step of size `h` from `state`: the new state
    /// (unprojected) and the error estimate.
    fn trial(&self, state: &GeodesicState, h: f64) -> (GeodesicState, f64) {
        let (p, v) = (state.position, state.tangent);
        let y0: Y = [p.x, p.y, p.z, v.x, v.y, v.z];
        let mut ks = [[0.0; 6]; 7];
        ks[0] = self.rhs(&y0);
        for i in 1..7 {
            let mut y = y0;
            for (j, kj) in ks.iter().enumerate().take(i) {
                let a = A[i][j];
                if a != 0.0 {
                    for m in 0..6 {
                        y[m] += h * a * kj[m];
                    }
                }
            }
            ks[i] = self.rhs(&y);
        }
        let mut y1 = y0;
        let mut err: f64 = 0.0;
        for m in 0..6 {
            let incr: f64 = (0..6).map(|i| A[6][i] * ks[i][m]).sum();
            let e: f64 = (0..7).map(|i| E[i] * ks[i][m]).sum();
            y1[m] += h * incr;
            err = err.max((h * e).abs());
        }
        let out = GeodesicState { position: Vec3::new(y1[0], y1[1], y1[2]), tangent: Vec3::new(y1[3], y1[4], y1[5]) };
        (out, err)
    }

    /// The state after an exact step of size `h` (no error control), with
    /// projection. Used to land on event locations inside an accepted step.
    pub fn jump(&self, from: &GeodesicState, h: f64) -> GeodesicState {
        let (raw, _) = self.trial(from, h);
        self.project(raw)
    }

    fn project(&self, raw: GeodesicState) -> GeodesicState {
        let position = self.ell.project(raw.position);
        GeodesicState { position, tangent: self.ell.tangent_unit(position, raw.tangent) }
    }

    /// Advances by one accepted step without passing `s_end`. Returns the
    /// state and arc length before the step.
    pub fn step(&mut self, s_end: f64) -> Result<(f64, GeodesicState)> {
        loop {
            let last = s_end - self.s <= self.h;
            let h = if last { s_end - self.s } else { self.h };
            let (raw, err) = self.trial(&self.state, h);
            let factor = if err == 0.0 { 5.0 } else { (0.9 * (self.cfg.tol / err).powf(0.2)).clamp(0.2, 5.0) };
            if err <= self.cfg.tol {
                let before = (self.s, self.state);
                self.state = self.project(raw);
                self.s = if last { s_end } else { self.s + h };
                if !last || factor < 1.0 {
                    self.h = (h * factor).min(self.cfg.max_step);
                }
                return Ok(before);
            }
            self.h = h * factor;
            if self.h < self.cfg.min_step {
                return Err(Error::Integration(format!(
                    "step size underflow ({:e}) at arc length {}",
                    self.h, self.s
                )));
            }
        }
    }
}

/// Integrates the geodesic through `start` for `arc_length` (negative
/// lengths are rejected; reverse the tangent instead).
pub fn integrate_geodesic(ell: &Ellipsoid, start: &GeodesicState, arc_length: f64, cfg: &IntegratorConfig) -> Result<GeodesicPath> {
    cfg.validate()?;
    ell.check_state(start)?;
    if !(arc_length >= 0.0) || !arc_length.is_finite() {
        return Err(invalid(format!("arc length must be finite and nonnegative, got {arc_length}")));
    }
    let mut flow = Flow::new(ell, *start, *cfg);
    let mut path = GeodesicPath { arc: vec![0.0], states: vec![*start], max_residual: ell.residual(start) };
    while flow.s < arc_length {
        flow.step(arc_length)?;
        path.arc.push(flow.s);
        path.states.push(flow.state);
        path.max_residual = path.max_residual.max(ell.residual(&flow.state));
    }
    Ok(path)
}

/// CSV polyline `s,x,y,z` of a path.
pub fn trace_csv(path: &GeodesicPath) -> String {
    let mut out = String::from("s,x,y,z\n");
    for (s, st) in path.arc.iter().zip(&path.states) {
        let p = st.position;
        out.push_str(&format!("{s},{},{},{}\n", p.x, p.y, p.z));
    }
    out
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;
    use crate::ellipsoid::Plane;

    fn reverse(s: &GeodesicState) -> GeodesicState {
        GeodesicState { position: s.position, tangent: -s.tangent }
    }

    #[test]
    fn great_circles_close_up() {
        let sphere = Ellipsoid::sphere(1.0).unwrap();
        for dir in [Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.6, 0.8), Vec3::new(0.3, -0.2, 0.9)] {
            let start = sphere.state(Vec3::new(0.48, 0.6, 0.64), dir);
            let path = integrate_geodesic(&sphere, &start, TAU, &IntegratorConfig::default()).unwrap();
            assert!(path.end().position.dist(start.position) < 1e-7);
            assert!(path.max_residual <= 1e-9);
        }
    }

    #[test]
    fn section_start_stays_in_its_plane() {
        let ell = Ellipsoid::new(1.0, 1.005, 1.01).unwrap();
        let start = ell.section_point(Plane::AB, 0.3);
        let path = integrate_geodesic(&ell, &start, 10.0, &IntegratorConfig::default()).unwrap();
        assert!(path.states.iter().all(|s| s.position.z.abs() <= 1e-9));
    }

    #[test]
    fn tilted_start_leaves_every_plane() {
        let ell = Ellipsoid::new(1.0, 1.005, 1.01).unwrap();
        let start = ell.state(ell.radial_point(Vec3::new(1.0, 0.3, 0.2)), Vec3::new(-0.2, 0.5, 0.7));
        let path = integrate_geodesic(&ell, &start, 2.0 * TAU, &IntegratorConfig::default()).unwrap();
        for axis in 0..3 {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for s in &path.states {
                let c = s.position.to_array()[axis];
                lo = lo.min(c);
                hi = hi.max(c);
            }
            assert!(hi > 0.1 && lo < -0.1, "axis {axis} never crossed");
        }
        assert!(path.states.iter().any(|s| s.position.to_array().iter().all(|c| c.abs() > 0.1)));
    }

    #[test]
    fn reversal_returns_to_the_start() {
        let ell = Ellipsoid::new(1.0, 1.2, 1.4).unwrap();
        let start = ell.state(ell.radial_point(Vec3::new(0.3, 0.9, -0.4)), Vec3::new(0.7, 0.1, 0.5));
        let cfg = IntegratorConfig::default();
        let out = integrate_geodesic(&ell, &start, 4.0 * std::f64::consts::PI, &cfg).unwrap();
        assert!(out.max_residual <= 1e-9);
        let back = integrate_geodesic(&ell, &reverse(out.end()), 4.0 * std::f64::consts::PI, &cfg).unwrap();
        assert!(back.end().position.dist(start.position) < 1e-7);
        assert!(back.end().tangent.dist(-start.tangent) < 1e-7);
    }

    #[test]
    fn underflow_and_bad_input_are_errors() {
        let ell = Ellipsoid::new(1.0, 1.2, 1.4).unwrap();
        let start = ell.section_point(Plane::BC, 0.0);
        let tight = IntegratorConfig { tol: 1e-30, min_step: 1e-3, initial_step: 1e-2, max_step: 0.1 };
        assert!(matches!(integrate_geodesic(&ell, &start, 1.0, &tight), Err(Error::Integration(_))));
        assert!(integrate_geodesic(&ell, &start, -1.0, &IntegratorConfig::default()).is_err());
        let off = GeodesicState { position: start.position * 1.1, tangent: start.tangent };
        assert!(integrate_geodesic(&ell, &off, 1.0, &IntegratorConfig::default()).is_err());
    }

    #[test]
    fn csv_has_one_row_per_state() {
        let ell = Ellipsoid::sphere(1.0).unwrap();
        let path = integrate_geodesic(&ell, &ell.section_point(Plane::AB, 0.0), 1.0, &IntegratorConfig::default()).unwrap();
        assert_eq!(trace_csv(&path).lines().count(), path.states.len() + 1);
    }
}
