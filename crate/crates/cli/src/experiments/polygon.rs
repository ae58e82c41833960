use std::fmt::Write as _;

use geolab::polygon::{
    approximate_diameter, classify_half_geodesics, ellipse_clearance_check, enumerate_closed_geodesics, meridians,
    ClassifyConfig, DoubledNgon, EnumerationLimits, MeshOracle, PolygonOracle,
};
use geolab::svg;
use geolab::{DistanceOracle, Error, Result, Verdict};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::cli::{Figure, Polygon, PolygonClassifyArgs, PolygonDistanceArgs, PolygonEnumerateArgs};
use crate::report::{Outcome, Report};

/// Share of random distance pairs with a point on an edge.
const EDGE_FRACTION: f64 = 0.1;

fn ngon(p: &Polygon) -> Result<DoubledNgon> {
    DoubledNgon::new(p.n, p.side)
}

pub fn classify(args: &PolygonClassifyArgs) -> Result<Outcome> {
    let ngon = ngon(&args.polygon)?;
    let mut cfg = ClassifyConfig::default();
    cfg.tolerance.pass_tol = args.tol;
    let c = classify_half_geodesics(&ngon, &cfg)?;
    let expected = if ngon.n() % 2 == 0 { ngon.n() / 2 } else { 0 };

    let mut report = Report::new(
        "polygon-classify",
        json!({ "n": ngon.n(), "side": ngon.side(), "tol": args.tol }),
        None,
        serde_json::to_value(&cfg.tolerance)?,
    );
    for g in &c.half_geodesics {
        report.push(g);
    }
    report.details = json!({
        "diameter": c.diameter,
        "l_max": c.l_max,
        "candidates": c.candidates,
        "certificate": c.certificate,
        "offsets": c.offsets,
    });
    let found = c.half_geodesics.len();
    let worst = c
        .candidates
        .iter()
        .filter(|k| k.verdict == Verdict::Pass)
        .map(|k| k.max_deviation)
        .fold(0.0, f64::max);
    report.summary.expected = format!("{expected} half-geodesics, enumeration exhausted");
    report.summary.observed = format!(
        "{found} half-geodesics (worst passing deviation {worst:.3e}), enumeration {}",
        if c.certificate.exhausted { "exhausted" } else { "not exhausted" }
    );
    report.summary.holds = found == expected && c.certificate.exhausted;

    let mut csv = String::from("orbit,family,offset,length,period,verdict,max_deviation,orbit_size\n");
    for k in &c.candidates {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{:?},{},{}",
            k.orbit, k.family, k.offset, k.length, k.period, k.verdict, k.max_deviation, k.orbit_size
        );
    }
    let figure = match args.figure {
        Figure::Curves => Some(svg::polygon_curves(&ngon, &c.half_geodesics.iter().map(|g| g.curve.clone()).collect::<Vec<_>>())),
        Figure::Ellipse => ellipse_figure(&ngon)?,
    };
    Ok(Outcome { incomplete: !c.certificate.exhausted, csv: Some(csv), svg: figure, report })
}

/// Witness figure for a pair half a period apart on the first meridian,
/// one on each face.
fn ellipse_figure(ngon: &DoubledNgon) -> Result<Option<String>> {
    let Some(m) = meridians(ngon).into_iter().next() else {
        return Err(Error::InvalidInput(format!("the ellipse figure needs an even polygon, got n = {}", ngon.n())));
    };
    let t = std::f64::consts::FRAC_PI_2 - 0.3;
    let p = m.curve.point_at(ngon, t);
    let q = m.curve.point_at(ngon, t + std::f64::consts::PI);
    let check = ellipse_clearance_check(ngon, &p, &q, m.length / 2.0, 1e-9)?;
    Ok(Some(svg::ellipse_witness(ngon, &check)))
}

#[derive(Serialize)]
struct DistanceRow {
    h: f64,
    pairs: usize,
    declared_error: f64,
    max_abs_error: f64,
    mean_abs_error: f64,
    within: bool,
}

pub fn distance(args: &PolygonDistanceArgs) -> Result<Outcome> {
    let ngon = ngon(&args.polygon)?;
    if args.pairs == 0 {
        return Err(Error::InvalidInput("--pairs must be positive".into()));
    }
    let meshes = args.h.iter().map(|&h| MeshOracle::new(&ngon, h)).collect::<Result<Vec<_>>>()?;
    let exact = PolygonOracle::new(&ngon);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let pairs: Vec<_> = (0..args.pairs)
        .map(|_| (ngon.random_point(&mut rng, EDGE_FRACTION), ngon.random_point(&mut rng, EDGE_FRACTION)))
        .collect();
    let paths = pairs.par_iter().map(|(p, q)| exact.exact_distance(p, q)).collect::<Result<Vec<_>>>()?;

    let mut report = Report::new(
        "polygon-distance",
        json!({ "n": ngon.n(), "side": ngon.side(), "h": args.h, "pairs": args.pairs }),
        Some(args.seed),
        json!({ "declared_error": meshes.iter().map(|m| m.error_bound()).collect::<Vec<_>>() }),
    );
    let mut csv = String::from("h,pairs,declared_error,max_abs_error,mean_abs_error\n");
    let mut rows = Vec::new();
    for mesh in &meshes {
        let errs = pairs
            .par_iter()
            .zip(&paths)
            .map(|((p, q), path)| Ok((mesh.distance(p, q)? - path.length).abs()))
            .collect::<Result<Vec<f64>>>()?;
        let max = errs.iter().copied().fold(0.0, f64::max);
        let row = DistanceRow {
            h: mesh.h(),
            pairs: errs.len(),
            declared_error: mesh.error_bound(),
            max_abs_error: max,
            mean_abs_error: errs.iter().sum::<f64>() / errs.len() as f64,
            within: max <= mesh.error_bound(),
        };
        let _ = writeln!(csv, "{},{},{},{},{}", row.h, row.pairs, row.declared_error, row.max_abs_error, row.mean_abs_error);
        report.push(&row);
        rows.push(row);
    }
    // Declared errors must shrink at least as fast as h.
    let mut by_h: Vec<&DistanceRow> = rows.iter().collect();
    by_h.sort_by(|a, b| b.h.total_cmp(&a.h));
    let linear = by_h.windows(2).all(|w| w[1].declared_error / w[0].declared_error <= w[1].h / w[0].h * (1.0 + 1e-12));
    let within = rows.iter().all(|r| r.within);
    report.summary.expected = "mesh distances within err(h) of exact distances, err(h) at most linear in h".into();
    report.summary.observed = format!(
        "{} of {} spacings within bound; declared errors {}",
        rows.iter().filter(|r| r.within).count(),
        rows.len(),
        if linear { "shrink linearly" } else { "shrink slower than h" }
    );
    report.summary.holds = within && linear;
    let figure = svg::polygon_unfolding(&ngon, &paths[..paths.len().min(3)]);
    Ok(Outcome { csv: Some(csv), svg: Some(figure), ..Outcome::new(report) })
}

pub fn enumerate(args: &PolygonEnumerateArgs) -> Result<Outcome> {
    let ngon = ngon(&args.polygon)?;
    let l_max = match args.lmax {
        Some(l) => l,
        None => 2.0 * approximate_diameter(&ngon, 16, &PolygonOracle::new(&ngon))?.upper(),
    };
    let limits = EnumerationLimits::default();
    let e = enumerate_closed_geodesics(&ngon, l_max, limits)?;
    let mut report = Report::new(
        "polygon-enumerate",
        json!({ "n": ngon.n(), "side": ngon.side(), "l_max": l_max }),
        None,
        serde_json::to_value(limits)?,
    );
    let reps: Vec<_> = e.representatives().collect();
    for g in &reps {
        report.push(g);
    }
    report.details = json!({ "families": e.families.len(), "certificate": e.certificate });
    report.summary.expected = "pruned search tree exhausted".into();
    report.summary.observed = format!(
        "{} families in {} orbits, {} nodes expanded, {}",
        e.families.len(),
        reps.len(),
        e.certificate.nodes_expanded,
        if e.certificate.exhausted { "exhausted" } else { "budget ran out" }
    );
    report.summary.holds = e.certificate.exhausted;

    let mut csv = String::from("length,period,tag,edge_sequence\n");
    for g in &reps {
        let seq: Vec<String> = g.edge_sequence.iter().map(|e| e.to_string()).collect();
        let _ = writeln!(csv, "{},{},{:?},{}", g.length, g.period, g.tag, seq.join(" "));
    }
    let figure = svg::polygon_curves(&ngon, &reps.iter().map(|g| g.curve.clone()).collect::<Vec<_>>());
    Ok(Outcome { incomplete: !e.certificate.exhausted, csv: Some(csv), svg: Some(figure), report })
}

