//! Closed curves, distance oracles and the 1/k-geodesic verifier.
//!
//! A closed curve is stored as a polyline of breakpoints in the intrinsic
//! coordinates of some surface backend, parameterized at constant speed over
//! `[0, 2π)`. The backend supplies segment lengths and interpolation through
//! [`CurveSpace`]; distances come from any [`DistanceOracle`]. One verifier
//! serves every backend.

use std::f64::consts::TAU;
use std::fmt::Debug;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Geometry needed to walk along a breakpoint polyline.
pub trait CurveSpace: Sync {
    type Point: Clone + Debug + Send + Sync;

    fn surface_id(&self) -> String;

    /// Length of the intrinsic segment joining two consecutive breakpoints.
    fn segment_length(&self, a: &Self::Point, b: &Self::Point) -> f64;

    /// Point at fraction `s ∈ [0, 1]` of arc length along the segment `a → b`.
    fn interpolate(&self, a: &Self::Point, b: &Self::Point, s: f64) -> Self::Point;
}

/// The contract every distance backend satisfies.
///
/// `error_bound` is the declared absolute error of `distance`; exact backends
/// return 0. Implementations must tolerate concurrent read-only queries.
pub trait DistanceOracle: Sync {
    type Point;

    fn surface_id(&self) -> String;
    fn error_bound(&self) -> f64;
    fn distance(&self, p: &Self::Point, q: &Self::Point) -> Result<f64>;
}

impl<O: DistanceOracle + ?Sized> DistanceOracle for &O {
    type Point = O::Point;
    fn surface_id(&self) -> String {
        (**self).surface_id()
    }
    fn error_bound(&self) -> f64 {
        (**self).error_bound()
    }
    fn distance(&self, p: &Self::Point, q: &Self::Point) -> Result<f64> {
        (**self).distance(p, q)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint<P> {
    pub t: f64,
    pub point: P,
}

/// A closed curve `γ: S¹ → M` with period 2π and constant speed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedCurve<P> {
    pub breakpoints: Vec<Breakpoint<P>>,
    pub total_length: f64,
    pub surface_id: String,
}

impl<P: Clone + Debug + Send + Sync> ClosedCurve<P> {
    /// Builds a constant-speed curve through `points` (closing back to the
    /// first). Parameters are assigned proportionally to segment length.
    pub fn from_points<S>(space: &S, points: Vec<P>) -> Result<Self>
    where
        S: CurveSpace<Point = P>,
    {
        if points.len() < 2 {
            return Err(Error::MalformedCurve(format!(
                "a closed curve needs at least 2 breakpoints, got {}",
                points.len()
            )));
        }
        let m = points.len();
        let lengths: Vec<f64> = (0..m)
            .map(|i| space.segment_length(&points[i], &points[(i + 1) % m]))
            .collect();
        let total: f64 = lengths.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::MalformedCurve(format!("nonpositive length {total}")));
        }
        let mut acc = 0.0;
        let mut breakpoints = Vec::with_capacity(m);
        for (point, len) in points.into_iter().zip(&lengths) {
            breakpoints.push(Breakpoint { t: TAU * acc / total, point });
            acc += len;
        }
        let curve = ClosedCurve { breakpoints, total_length: total, surface_id: space.surface_id() };
        curve.check_parameters()?;
        Ok(curve)
    }

    /// Breakpoint order: first at 0, strictly increasing, all below 2π.
    pub fn check_parameters(&self) -> Result<()> {
        let bps = &self.breakpoints;
        if bps.len() < 2 {
            return Err(Error::MalformedCurve(format!(
                "a closed curve needs at least 2 breakpoints, got {}",
                bps.len()
            )));
        }
        if bps[0].t != 0.0 {
            return Err(Error::MalformedCurve(format!("first parameter is {} not 0", bps[0].t)));
        }
        for w in bps.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(Error::MalformedCurve(format!(
                    "parameters not strictly increasing at t = {}",
                    w[1].t
                )));
            }
        }
        let last = bps[bps.len() - 1].t;
        if !(last < TAU) {
            return Err(Error::MalformedCurve(format!("parameter {last} outside [0, 2π)")));
        }
        if !(self.total_length > 0.0) {
            return Err(Error::MalformedCurve(format!("length {} is not positive", self.total_length)));
        }
        Ok(())
    }

    /// Checks constant speed: each segment's length over its Δt equals
    /// `total_length / 2π` within `rel_tol` (relative to the segment length).
    pub fn check_constant_speed<S>(&self, space: &S, rel_tol: f64) -> Result<()>
    where
        S: CurveSpace<Point = P>,
    {
        self.check_parameters()?;
        let speed = self.total_length / TAU;
        let m = self.breakpoints.len();
        for i in 0..m {
            let (t0, t1) = self.segment_span(i);
            let len = space.segment_length(&self.breakpoints[i].point, &self.breakpoints[(i + 1) % m].point);
            let expected = speed * (t1 - t0);
            if (len - expected).abs() > rel_tol * expected.max(f64::MIN_POSITIVE) + 1e-15 {
                return Err(Error::MalformedCurve(format!(
                    "segment {i} has length {len}, constant speed needs {expected}"
                )));
            }
        }
        Ok(())
    }

    fn segment_span(&self, i: usize) -> (f64, f64) {
        let m = self.breakpoints.len();
        let t0 = self.breakpoints[i].t;
        let t1 = if i + 1 == m { TAU } else { self.breakpoints[i + 1].t };
        (t0, t1)
    }

    /// γ(t) for any real `t` (reduced mod 2π).
    pub fn point_at<S>(&self, space: &S, t: f64) -> P
    where
        S: CurveSpace<Point = P>,
    {
        let t = t.rem_euclid(TAU);
        let bps = &self.breakpoints;
        // last breakpoint with parameter <= t
        let i = match bps.binary_search_by(|b| b.t.partial_cmp(&t).unwrap()) {
            Ok(i) => return bps[i].point.clone(),
            Err(0) => 0,
            Err(i) => i - 1,
        };
        let (t0, t1) = self.segment_span(i);
        let s = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let next = &bps[(i + 1) % bps.len()].point;
        space.interpolate(&bps[i].point, next, s)
    }

    /// The curve traversed backwards, `t ↦ γ(−t)`.
    pub fn reversed(&self) -> Self {
        let mut breakpoints = vec![self.breakpoints[0].clone()];
        for b in self.breakpoints.iter().skip(1).rev() {
            breakpoints.push(Breakpoint { t: TAU - b.t, point: b.point.clone() });
        }
        ClosedCurve { breakpoints, total_length: self.total_length, surface_id: self.surface_id.clone() }
    }
}

/// l(γ): the sum of segment lengths, checked against the stored total.
pub fn curve_length<S: CurveSpace>(space: &S, curve: &ClosedCurve<S::Point>) -> Result<f64> {
    curve.check_parameters()?;
    let m = curve.breakpoints.len();
    let sum: f64 = (0..m)
        .map(|i| space.segment_length(&curve.breakpoints[i].point, &curve.breakpoints[(i + 1) % m].point))
        .sum();
    if (sum - curve.total_length).abs() > 1e-12 * curve.total_length {
        return Err(Error::MalformedCurve(format!(
            "segment lengths sum to {sum} but the curve records {}",
            curve.total_length
        )));
    }
    Ok(sum)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Thresholds for the three-valued verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub pass_tol: f64,
    pub fail_gap: f64,
    pub sample_count: usize,
    pub rng_seed: u64,
}

impl ToleranceConfig {
    /// Defaults scaled to an oracle's declared error.
    pub fn for_oracle_error(err: f64) -> Self {
        let pass_tol = if err == 0.0 { 1e-9 } else { 5.0 * err };
        ToleranceConfig { pass_tol, fail_gap: 10.0 * err + 1e-9, sample_count: 720, rng_seed: 0 }
    }

    pub fn for_oracle<O: DistanceOracle + ?Sized>(oracle: &O) -> Self {
        Self::for_oracle_error(oracle.error_bound())
    }

    pub fn with_samples(mut self, sample_count: usize) -> Self {
        self.sample_count = sample_count;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    // For exact oracles the two thresholds coincide and the verdict is binary.
    pub fn validate(&self) -> Result<()> {
        if !(self.pass_tol > 0.0 && self.pass_tol <= self.fail_gap) {
            return Err(invalid(format!(
                "tolerances need 0 < pass_tol <= fail_gap, got {} and {}",
                self.pass_tol, self.fail_gap
            )));
        }
        Ok(())
    }

    pub fn verdict(&self, max_deviation: f64) -> Verdict {
        if max_deviation <= self.pass_tol {
            Verdict::Pass
        } else if max_deviation >= self.fail_gap {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    }
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self::for_oracle_error(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleDeviation {
    pub t: f64,
    pub distance: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub k: u32,
    pub sample_count: usize,
    pub max_deviation: f64,
    pub worst_t: f64,
    pub verdict: Verdict,
    /// Per-sample evidence, in evaluation order. Not part of the JSON schema.
    #[serde(skip)]
    pub samples: Vec<SampleDeviation>,
}

/// Parameters at which the verifier evaluates: a uniform grid plus every
/// breakpoint, sorted and deduplicated.
pub fn sample_parameters<P>(curve: &ClosedCurve<P>, sample_count: usize) -> Vec<f64> {
    let mut ts: Vec<f64> = (0..sample_count).map(|j| TAU * j as f64 / sample_count as f64).collect();
    ts.extend(curve.breakpoints.iter().map(|b| b.t));
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    ts
}

/// Tests `d(γ(t), γ(t + 2π/k)) = l(γ)/k` at the sample parameters.
pub fn verify_one_over_k<S, O>(
    space: &S,
    curve: &ClosedCurve<S::Point>,
    oracle: &O,
    k: u32,
    cfg: &ToleranceConfig,
) -> Result<VerificationReport>
where
    S: CurveSpace,
    O: DistanceOracle<Point = S::Point>,
{
    if k < 2 {
        return Err(invalid(format!("k must be at least 2, got {k}")));
    }
    cfg.validate()?;
    if curve.surface_id != oracle.surface_id() {
        return Err(Error::SurfaceMismatch { curve: curve.surface_id.clone(), oracle: oracle.surface_id() });
    }
    curve.check_parameters()?;
    let shift = TAU / k as f64;
    let target = curve.total_length / k as f64;
    let ts = sample_parameters(curve, cfg.sample_count);
    let samples: Vec<SampleDeviation> = ts
        .par_iter()
        .map(|&t| {
            let p = curve.point_at(space, t);
            let q = curve.point_at(space, t + shift);
            let d = oracle
                .distance(&p, &q)
                .map_err(|e| Error::OracleAt { t, source: Box::new(e) })?;
            Ok(SampleDeviation { t, distance: d, deviation: (d - target).abs() })
        })
        .collect::<Result<_>>()?;
    let (mut max_deviation, mut worst_t) = (0.0, 0.0);
    for s in &samples {
        if s.deviation > max_deviation {
            max_deviation = s.deviation;
            worst_t = s.t;
        }
    }
    Ok(VerificationReport {
        k,
        sample_count: samples.len(),
        max_deviation,
        worst_t,
        verdict: cfg.verdict(max_deviation),
        samples,
    })
}

/// Largest observed departures from the metric axioms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub points: usize,
    /// max d(p, p)
    pub identity: f64,
    /// max |d(p, q) − d(q, p)|
    pub symmetry: f64,
    /// max d(p, r) − d(p, q) − d(q, r), clamped below at 0
    pub triangle: f64,
    pub err: f64,
}

impl AxiomReport {
    /// Worst violation beyond the oracle's error allowance (0 when clean).
    pub fn worst_excess(&self) -> f64 {
        let e = self.err;
        (self.identity - e).max(self.symmetry - 2.0 * e).max(self.triangle - 3.0 * e).max(0.0)
    }

    pub fn within_allowance(&self, slack: f64) -> bool {
        self.worst_excess() <= slack
    }
}

pub fn metric_axiom_check<O>(oracle: &O, points: &[O::Point]) -> Result<AxiomReport>
where
    O: DistanceOracle,
    O::Point: Sync,
{
    let n = points.len();
    if n < 3 {
        return Err(invalid(format!("axiom check needs at least 3 points, got {n}")));
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| oracle.distance(&points[i], &points[j])).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut report = AxiomReport {
        points: n,
        identity: 0.0,
        symmetry: 0.0,
        triangle: 0.0,
        err: oracle.error_bound(),
    };
    for i in 0..n {
        report.identity = report.identity.max(rows[i][i]);
        for j in 0..n {
            report.symmetry = report.symmetry.max((rows[i][j] - rows[j][i]).abs());
            for k in 0..n {
                report.triangle = report.triangle.max(rows[i][k] - rows[i][j] - rows[j][k]);
            }
        }
    }
    Ok(report)
}

/// The `L ≤ 2·diam` cutoff for half-geodesic candidates.
pub fn diameter_cutoff(length: f64, diam: f64, pass_tol: f64) -> Result<bool> {
    if !(length > 0.0) || !(diam > 0.0) {
        return Err(invalid(format!("length and diameter must be positive, got {length} and {diam}")));
    }
    Ok(length <= 2.0 * diam + pass_tol)
}

/// The round sphere of a given radius, with exact great-circle distances.
///
/// Points are unit vectors; the radius scales lengths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundSphere {
    pub radius: f64,
}

impl RoundSphere {
    pub fn unit() -> Self {
        RoundSphere { radius: 1.0 }
    }

    fn angle(a: &[f64; 3], b: &[f64; 3]) -> f64 {
        // atan2 form stays accurate near 0 and π
        let c = cross(a, b);
        let s = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        s.atan2(dot(a, b))
    }

    /// A great circle through `a` with initial direction `dir` (both unit,
    /// orthogonal), as a curve with `m` breakpoints.
    pub fn great_circle(&self, a: [f64; 3], dir: [f64; 3], m: usize) -> Result<ClosedCurve<[f64; 3]>> {
        let pts = (0..m)
            .map(|j| {
                let th = TAU * j as f64 / m as f64;
                let (s, c) = th.sin_cos();
                [c * a[0] + s * dir[0], c * a[1] + s * dir[1], c * a[2] + s * dir[2]]
            })
            .collect();
        ClosedCurve::from_points(self, pts)
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

impl CurveSpace for RoundSphere {
    type Point = [f64; 3];

    fn surface_id(&self) -> String {
        format!("sphere(r={})", self.radius)
    }

    fn segment_length(&self, a: &[f64; 3], b: &[f64; 3]) -> f64 {
        self.radius * Self::angle(a, b)
    }

    fn interpolate(&self, a: &[f64; 3], b: &[f64; 3], s: f64) -> [f64; 3] {
        let om = Self::angle(a, b);
        if om < 1e-15 {
            return *a;
        }
        let (wa, wb) = (((1.0 - s) * om).sin() / om.sin(), (s * om).sin() / om.sin());
        let p = [wa * a[0] + wb * b[0], wa * a[1] + wb * b[1], wa * a[2] + wb * b[2]];
        let n = dot(&p, &p).sqrt();
        [p[0] / n, p[1] / n, p[2] / n]
    }
}

impl DistanceOracle for RoundSphere {
    type Point = [f64; 3];

    fn surface_id(&self) -> String {
        CurveSpace::surface_id(self)
    }

    fn error_bound(&self) -> f64 {
        0.0
    }

    fn distance(&self, p: &[f64; 3], q: &[f64; 3]) -> Result<f64> {
        Ok(self.radius * Self::angle(p, q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equator() -> ClosedCurve<[f64; 3]> {
        RoundSphere::unit().great_circle([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 8).unwrap()
    }

    #[test]
    fn great_circle_has_length_two_pi() {
        let s = RoundSphere::unit();
        let l = curve_length(&s, &equator()).unwrap();
        assert!((l - TAU).abs() < 1e-12);
        equator().check_constant_speed(&s, 1e-12).unwrap();
    }

    #[test]
    fn one_breakpoint_is_rejected() {
        let s = RoundSphere::unit();
        assert!(ClosedCurve::from_points(&s, vec![[1.0, 0.0, 0.0]]).is_err());
        let bad = ClosedCurve {
            breakpoints: vec![Breakpoint { t: 0.0, point: [1.0, 0.0, 0.0] }],
            total_length: 1.0,
            surface_id: "x".into(),
        };
        assert!(matches!(curve_length(&s, &bad), Err(Error::MalformedCurve(_))));
    }

    #[test]
    fn unordered_parameters_are_rejected() {
        let mut c = equator();
        c.breakpoints.swap(2, 3);
        assert!(c.check_parameters().is_err());
        let mut c = equator();
        c.breakpoints[0].t = 0.1;
        assert!(c.check_parameters().is_err());
    }

    #[test]
    fn great_circle_is_a_half_geodesic() {
        let s = RoundSphere::unit();
        let cfg = ToleranceConfig::for_oracle(&s);
        let r = verify_one_over_k(&s, &equator(), &s, 2, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.max_deviation < 1e-12, "{}", r.max_deviation);
        assert_eq!(r.sample_count, 720);
    }

    #[test]
    fn great_circle_is_a_one_over_k_geodesic_for_every_k() {
        let s = RoundSphere::unit();
        let cfg = ToleranceConfig::for_oracle(&s).with_samples(97);
        for k in 2..7 {
            let r = verify_one_over_k(&s, &equator(), &s, k, &cfg).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "k = {k}");
        }
    }

    #[test]
    fn k_below_two_is_rejected() {
        let s = RoundSphere::unit();
        let cfg = ToleranceConfig::default();
        assert!(verify_one_over_k(&s, &equator(), &s, 1, &cfg).is_err());
    }

    #[test]
    fn surface_mismatch_is_rejected() {
        let s = RoundSphere::unit();
        let big = RoundSphere { radius: 2.0 };
        let cfg = ToleranceConfig::default();
        assert!(matches!(
            verify_one_over_k(&s, &equator(), &big, 2, &cfg),
            Err(Error::SurfaceMismatch { .. })
        ));
    }

    #[test]
    fn verdict_thresholds() {
        let cfg = ToleranceConfig::for_oracle_error(0.01);
        assert_eq!(cfg.verdict(0.05), Verdict::Pass);
        assert_eq!(cfg.verdict(0.07), Verdict::Inconclusive);
        assert_eq!(cfg.verdict(0.2), Verdict::Fail);
        let exact = ToleranceConfig::for_oracle_error(0.0);
        assert_eq!(exact.verdict(1e-9), Verdict::Pass);
        assert_eq!(exact.verdict(1.1e-9), Verdict::Fail);
    }

    #[test]
    fn report_json_fields() {
        let s = RoundSphere::unit();
        let r = verify_one_over_k(&s, &equator(), &s, 2, &ToleranceConfig::default()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["k", "max_deviation", "sample_count", "verdict", "worst_t"]);
        assert_eq!(v["verdict"], "PASS");
    }

    #[test]
    fn axioms_on_sphere_and_repeated_point() {
        let s = RoundSphere::unit();
        let pts: Vec<[f64; 3]> = (0..12)
            .map(|i| {
                let th = 0.37 * i as f64;
                let ph = 0.21 * i as f64 + 0.3;
                [ph.sin() * th.cos(), ph.sin() * th.sin(), ph.cos()]
            })
            .collect();
        let r = metric_axiom_check(&s, &pts).unwrap();
        assert!(r.within_allowance(1e-12));
        let same = vec![[0.0, 0.0, 1.0]; 4];
        let r = metric_axiom_check(&s, &same).unwrap();
        assert_eq!(r.identity, 0.0);
        assert_eq!(r.symmetry, 0.0);
        assert!(metric_axiom_check(&s, &same[..2]).is_err());
    }

    #[test]
    fn cutoff() {
        assert!(diameter_cutoff(2.0, 1.2, 1e-9).unwrap());
        assert!(!diameter_cutoff(10.0, 1.0, 1e-9).unwrap());
        assert!(diameter_cutoff(2.0 * 0.7, 0.7, 1e-9).unwrap());
        assert!(diameter_cutoff(0.0, 1.0, 1e-9).is_err());
        assert!(diameter_cutoff(1.0, -1.0, 1e-9).is_err());
    }

    #[test]
    fn reversed_curve_has_same_deviation() {
        let s = RoundSphere::unit();
        let c = s.great_circle([0.0, 0.6, 0.8], [1.0, 0.0, 0.0], 5).unwrap();
        let cfg = ToleranceConfig::default().with_samples(60);
        let a = verify_one_over_k(&s, &c, &s, 3, &cfg).unwrap();
        let b = verify_one_over_k(&s, &c.reversed(), &s, 3, &cfg).unwrap();
        assert!((a.max_deviation - b.max_deviation).abs() < 1e-12);
    }
}
