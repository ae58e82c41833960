//! Two-point distances by shooting.
//!
//! Geodesics leave `p` in a full circle of directions. Each is followed to
//! its first close approach to `q`, where the signed lateral miss is
//! recorded. Sign changes of the miss between neighbouring directions
//! bracket geodesics through `q`; bisection on the angle refines them, and
//! the shortest arrival is the distance.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geom::Vec3;
use crate::metric::DistanceOracle;

use super::integrate::Flow;
use super::{ellipse_perimeter, Ellipsoid, GeodesicState, IntegratorConfig, Plane, STATE_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootingConfig {
    /// Angular spacing of the initial sweep, in radians.
    pub resolution: f64,
    /// A geodesic hits `q` when it passes within this distance.
    pub hit_tol: f64,
    /// Approaches farther than this from `q` are ignored.
    pub capture: f64,
    /// Longest geodesic followed. `None` uses 1.05 times half the largest
    /// section perimeter.
    pub max_length: Option<f64>,
    pub bisection_steps: usize,
    /// Error declared to the verifier.
    pub declared_error: f64,
    pub integrator: IntegratorConfig,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        ShootingConfig {
            resolution: 1e-3,
            hit_tol: 1e-8,
            capture: 0.25,
            max_length: None,
            bisection_steps: 80,
            declared_error: 1e-7,
            integrator: IntegratorConfig::default(),
        }
    }
}

impl ShootingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.resolution > 0.0 && self.resolution <= 0.5 && self.hit_tol > 0.0 && self.capture > self.hit_tol) {
            return Err(invalid("shooting needs 0 < resolution <= 0.5 and 0 < hit_tol < capture"));
        }
        if !(self.declared_error >= self.hit_tol) {
            return Err(invalid("declared error must be at least hit_tol"));
        }
        if let Some(l) = self.max_length {
            if !(l > 0.0 && l.is_finite()) {
                return Err(invalid(format!("max_length must be positive, got {l}")));
            }
        }
        self.integrator.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotDistance {
    pub length: f64,
    /// Initial direction angle of the shortest hit, in the tangent frame at `p`.
    pub direction: f64,
    /// Angle bracket the hit was refined in (degenerate for direct hits).
    pub bracket: [f64; 2],
    /// Closest approach of the shortest hit to `q`.
    pub miss: f64,
    /// Number of distinct hits found.
    pub hits: usize,
    pub resolution: f64,
    /// For antipodal points on a coordinate axis: the shorter of the two
    /// section arcs joining them.
    pub section_bound: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
struct Probe {
    length: f64,
    lateral: f64,
    miss: f64,
}

struct Shooter<'a> {
    ell: &'a Ellipsoid,
    cfg: &'a ShootingConfig,
    p: Vec3,
    q: Vec3,
    frame: (Vec3, Vec3),
    max_length: f64,
}

impl Shooter<'_> {
    fn start(&self, theta: f64) -> GeodesicState {
        let (s, c) = theta.sin_cos();
        GeodesicState { position: self.p, tangent: self.frame.0 * c + self.frame.1 * s }
    }

    fn approach(&self, st: &GeodesicState) -> f64 {
        (st.position - self.q).dot(st.tangent)
    }

    /// Follows direction `theta` to its first close approach to `q`.
    fn probe(&self, theta: f64) -> Result<Option<Probe>> {
        let mut flow = Flow::new(self.ell, self.start(theta), self.cfg.integrator);
        let mut f0 = self.approach(&flow.state);
        while flow.s < self.max_length {
            let (s0, st0) = flow.step(self.max_length)?;
            let f1 = self.approach(&flow.state);
            if f0 < 0.0 && f1 >= 0.0 {
                let (sigma, st) = self.locate(&flow, &st0, flow.s - s0, f0, f1);
                let miss = st.position.dist(self.q);
                if miss < self.cfg.capture {
                    let side = self.ell.normal(st.position).cross(st.tangent);
                    return Ok(Some(Probe { length: s0 + sigma, lateral: (self.q - st.position).dot(side), miss }));
                }
            }
            f0 = f1;
        }
        Ok(None)
    }

    /// Root of the approach function inside an accepted step (Illinois).
    fn locate(&self, flow: &Flow, st0: &GeodesicState, h: f64, f0: f64, f1: f64) -> (f64, GeodesicState) {
        let (mut a, mut fa, mut b, mut fb) = (0.0, f0, h, f1);
        let mut best = (b, flow.jump(st0, b));
        let mut side = 0;
        for _ in 0..60 {
            let m = (a * fb - b * fa) / (fb - fa);
            let st = flow.jump(st0, m);
            let fm = self.approach(&st);
            best = (m, st);
            if fm.abs() < 1e-15 || (b - a) < 1e-15 {
                break;
            }
            if (fm < 0.0) == (fa < 0.0) {
                a = m;
                fa = fm;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            } else {
                b = m;
                fb = fm;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            }
        }
        best
    }

    /// Bisection on a sign change of the lateral miss.
    fn refine(&self, mut lo: (f64, Probe), mut hi: (f64, Probe)) -> Result<Option<(f64, Probe, [f64; 2])>> {
        for _ in 0..self.cfg.bisection_steps {
            let mid = 0.5 * (lo.0 + hi.0);
            let Some(pm) = self.probe(mid)? else {
                return Ok(None);
            };
            if pm.miss <= self.cfg.hit_tol {
                return Ok(Some((mid, pm, [lo.0, hi.0])));
            }
            if (pm.lateral < 0.0) == (lo.1.lateral < 0.0) {
                lo = (mid, pm);
            } else {
                hi = (mid, pm);
            }
        }
        // The miss jumped across the bracket without passing through zero.
        Ok(None)
    }
}

fn on_axis(x: Vec3) -> Option<usize> {
    let a = x.to_array();
    let big = (0..3).max_by(|&i, &j| a[i].abs().total_cmp(&a[j].abs())).unwrap();
    ((0..3).all(|i| i == big || a[i].abs() <= 1e-12)).then_some(big)
}

/// The shorter of the two section arcs between antipodal axis points.
fn section_bound(ell: &Ellipsoid, p: Vec3, q: Vec3) -> Option<f64> {
    let i = on_axis(p)?;
    if on_axis(q) != Some(i) || (p + q).norm() > 1e-12 {
        return None;
    }
    let ax = ell.axes();
    Plane::ALL
        .into_iter()
        .filter(|pl| pl.normal_axis() != i)
        .map(|pl| {
            let (u, v) = pl.axes();
            0.5 * ellipse_perimeter(ax[u], ax[v])
        })
        .reduce(f64::min)
}

pub fn two_point_distance(ell: &Ellipsoid, p: Vec3, q: Vec3, cfg: &ShootingConfig) -> Result<ShotDistance> {
    cfg.validate()?;
    for x in [p, q] {
        if !(ell.constraint(x).abs() <= STATE_TOL) {
            return Err(invalid(format!("point {x:?} is not on {}", ell.surface_id())));
        }
    }
    let bound = section_bound(ell, p, q);
    if p.dist(q) <= 1e-14 {
        return Ok(ShotDistance {
            length: 0.0,
            direction: 0.0,
            bracket: [0.0, 0.0],
            miss: p.dist(q),
            hits: 1,
            resolution: cfg.resolution,
            section_bound: bound,
        });
    }
    let ax = ell.axes();
    let shooter = Shooter {
        ell,
        cfg,
        p,
        q,
        frame: ell.tangent_frame(p),
        max_length: cfg.max_length.unwrap_or(1.05 * 0.5 * ellipse_perimeter(ax[1], ax[2])),
    };
    let m = (TAU / cfg.resolution).ceil() as usize;
    let thetas: Vec<f64> = (0..m).map(|i| TAU * i as f64 / m as f64).collect();
    let probes: Vec<Option<Probe>> = thetas.par_iter().map(|&t| shooter.probe(t)).collect::<Result<_>>()?;

    let mut hits: Vec<(f64, Probe, [f64; 2])> = Vec::new();
    for i in 0..m {
        let Some(a) = probes[i] else { continue };
        if a.miss <= cfg.hit_tol {
            hits.push((thetas[i], a, [thetas[i]; 2]));
            continue;
        }
        let j = (i + 1) % m;
        let Some(b) = probes[j] else { continue };
        if b.miss > cfg.hit_tol && (a.lateral < 0.0) != (b.lateral < 0.0) {
            let hi = if j == 0 { TAU } else { thetas[j] };
            if let Some(h) = shooter.refine((thetas[i], a), (hi, b))? {
                hits.push(h);
            }
        }
    }
    let best = hits.iter().min_by(|x, y| x.1.length.total_cmp(&y.1.length)).ok_or_else(|| {
        Error::NoHit(format!(
            "no geodesic from {p:?} passed within {} of {q:?} up to length {} at sweep resolution {}",
            cfg.hit_tol, shooter.max_length, cfg.resolution
        ))
    })?;
    Ok(ShotDistance {
        length: best.1.length,
        direction: best.0,
        bracket: best.2,
        miss: best.1.miss,
        hits: hits.len(),
        resolution: cfg.resolution,
        section_bound: bound,
    })
}

/// [`two_point_distance`] as a verifier oracle.
#[derive(Clone, Debug)]
pub struct ShootingOracle {
    pub ellipsoid: Ellipsoid,
    pub cfg: ShootingConfig,
}

impl ShootingOracle {
    pub fn new(ellipsoid: Ellipsoid, cfg: ShootingConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(ShootingOracle { ellipsoid, cfg })
    }
}

impl DistanceOracle for ShootingOracle {
    type Point = Vec3;

    fn surface_id(&self) -> String {
        self.ellipsoid.surface_id()
    }

    fn error_bound(&self) -> f64 {
        self.cfg.declared_error
    }

    fn distance(&self, p: &Vec3, q: &Vec3) -> Result<f64> {
        Ok(two_point_distance(&self.ellipsoid, *p, *q, &self.cfg)?.length)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::ellipsoid::{axis, coordinate_sections};

    fn coarse() -> ShootingConfig {
        ShootingConfig { resolution: 1e-2, ..ShootingConfig::default() }
    }

    #[test]
    fn sphere_antipodes_are_pi_apart() {
        let s = Ellipsoid::sphere(1.0).unwrap();
        let p = s.radial_point(Vec3::new(0.3, -0.5, 0.8));
        let d = two_point_distance(&s, p, -p, &coarse()).unwrap();
        assert!((d.length - PI).abs() < 1e-9, "{d:?}");
        let q = s.radial_point(Vec3::new(0.5, 0.1, 0.6));
        let d = two_point_distance(&s, p, q, &coarse()).unwrap();
        assert!((d.length - p.angle_to(q)).abs() < 1e-9, "{d:?}");
        assert_eq!(two_point_distance(&s, p, p, &coarse()).unwrap().length, 0.0);
    }

    #[test]
    fn middle_axis_antipodes_take_the_short_section() {
        let ell = Ellipsoid::new(1.0, 1.005, 1.01).unwrap();
        let secs = coordinate_sections(&ell).unwrap();
        let (ab, bc) = (secs[0].half_perimeter(), secs[2].half_perimeter());
        let p = axis(1) * 1.005;
        let d = two_point_distance(&ell, p, -p, &ShootingConfig::default()).unwrap();
        assert!(d.length <= ab + 1e-9, "{d:?} vs {ab}");
        assert!(d.length < bc - (bc - ab) * 0.5, "{d:?} vs {bc}");
        assert!((d.length - d.section_bound.unwrap()).abs() <= 1e-9);
        assert!(d.hits >= 2);
    }

    #[test]
    fn off_surface_points_and_bad_configs_are_rejected() {
        let ell = Ellipsoid::new(1.0, 1.1, 1.2).unwrap();
        let p = axis(0);
        assert!(two_point_distance(&ell, p, p * 2.0, &coarse()).is_err());
        let bad = ShootingConfig { resolution: 0.0, ..coarse() };
        assert!(two_point_distance(&ell, p, -p, &bad).is_err());
    }

    #[test]
    fn unreachable_targets_report_the_sweep() {
        let ell = Ellipsoid::new(1.0, 1.1, 1.2).unwrap();
        let short = ShootingConfig { max_length: Some(1.0), ..coarse() };
        match two_point_distance(&ell, axis(0), -axis(0), &short) {
            Err(Error::NoHit(msg)) => assert!(msg.contains("resolution")),
            other => panic!("{other:?}"),
        }
    }
}
