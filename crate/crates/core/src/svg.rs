//! Static SVG figures.
//!
//! Drawing coordinates are the model's own; the y axis is flipped on output
//! and the view box is fitted to whatever was drawn.

use std::f64::consts::PI;
use std::fmt::Write;

use crate::geom::Vec2;
use crate::metric::{ClosedCurve, CurveSpace};
use crate::polygon::{Affine, DoubledNgon, EllipseCheck, Face, GeodesicPath, PolygonPoint};
use crate::tube::{TubePoint, TubeSurface};

const PALETTE: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Canvas {
    body: String,
    lo: Vec2,
    hi: Vec2,
}

impl Canvas {
    fn new() -> Self {
        Canvas { body: String::new(), lo: Vec2::new(f64::INFINITY, f64::INFINITY), hi: Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY) }
    }

    fn grow(&mut self, p: Vec2) {
        self.lo = Vec2::new(self.lo.x.min(p.x), self.lo.y.min(p.y));
        self.hi = Vec2::new(self.hi.x.max(p.x), self.hi.y.max(p.y));
    }

    fn points(&mut self, pts: &[Vec2]) -> String {
        let mut s = String::new();
        for p in pts {
            self.grow(*p);
            let _ = write!(s, "{:.6},{:.6} ", p.x, -p.y);
        }
        s.trim_end().to_string()
    }

    fn polygon(&mut self, pts: &[Vec2], fill: &str, stroke: &str) {
        let pts = self.points(pts);
        let _ = writeln!(self.body, r#"<polygon points="{pts}" fill="{fill}" stroke="{stroke}" stroke-width="0.01"/>"#);
    }

    fn polyline(&mut self, pts: &[Vec2], stroke: &str, width: f64) {
        if pts.len() < 2 {
            return;
        }
        let pts = self.points(pts);
        let _ = writeln!(self.body, r#"<polyline points="{pts}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#);
    }

    fn dot(&mut self, p: Vec2, r: f64, fill: &str) {
        self.grow(p + Vec2::new(r, r));
        self.grow(p - Vec2::new(r, r));
        let _ = writeln!(self.body, r#"<circle cx="{:.6}" cy="{:.6}" r="{r}" fill="{fill}"/>"#, p.x, -p.y);
    }

    fn label(&mut self, p: Vec2, size: f64, text: &str) {
        self.grow(p);
        self.grow(p + Vec2::new(0.6 * size * text.chars().count() as f64, size));
        let _ = writeln!(self.body, r#"<text x="{:.6}" y="{:.6}" font-size="{size}" font-family="sans-serif">{text}</text>"#, p.x, -p.y);
    }

    fn finish(self, title: &str) -> String {
        let (lo, hi) = if self.lo.x.is_finite() { (self.lo, self.hi) } else { (Vec2::default(), Vec2::new(1.0, 1.0)) };
        let pad = 0.05 * (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
        let (x, y, w, h) = (lo.x - pad, -hi.y - pad, hi.x - lo.x + 2.0 * pad, hi.y - lo.y + 2.0 * pad);
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{x:.6} {y:.6} {w:.6} {h:.6}\" width=\"800\" height=\"{:.0}\">\n<title>{title}</title>\n{}</svg>\n",
            800.0 * h / w,
            self.body
        )
    }
}

fn colour(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

/// Shortest paths developed into the plane, over the chain of polygon
/// copies each one crosses.
pub fn polygon_unfolding(ngon: &DoubledNgon, paths: &[GeodesicPath]) -> String {
    let mut c = Canvas::new();
    c.polygon(ngon.vertices(), "#dddddd", "#333333");
    for (i, path) in paths.iter().enumerate() {
        let mut frame = Affine::identity();
        for cr in &path.crossings {
            let (a, b) = ngon.edge(cr.edge);
            frame = frame.reflected(frame.apply(a), frame.apply(b));
            let copy: Vec<Vec2> = ngon.vertices().iter().map(|v| frame.apply(*v)).collect();
            c.polygon(&copy, "none", "#999999");
        }
        let line = path.unfolded(ngon);
        c.polyline(&line, colour(i), 0.02);
        c.dot(line[0], 0.025, colour(i));
        c.dot(*line.last().unwrap(), 0.025, colour(i));
    }
    c.finish("unfolded shortest paths")
}

/// The ellipse with foci `p`, `q` and string length `L/2`, inside the face,
/// with the edges it touches and the shortest boundary-crossing point.
pub fn ellipse_witness(ngon: &DoubledNgon, check: &EllipseCheck) -> String {
    let mut c = Canvas::new();
    c.polygon(ngon.vertices(), "#eeeeee", "#333333");
    for &e in &check.tangent_edges {
        let (a, b) = ngon.edge(e);
        c.polyline(&[a, b], "#d62728", 0.03);
    }
    let (f1, f2) = check.foci;
    let major = 0.5 * check.l_half;
    let half_focal = 0.5 * f1.dist(f2);
    if major > half_focal {
        let minor = (major * major - half_focal * half_focal).sqrt();
        let centre = f1.lerp(f2, 0.5);
        let axis = if half_focal > 0.0 { (f2 - f1).normalized() } else { Vec2::new(1.0, 0.0) };
        let pts: Vec<Vec2> = (0..=256)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 256.0;
                centre + axis * (major * t.cos()) + axis.perp() * (minor * t.sin())
            })
            .collect();
        c.polyline(&pts, "#1f77b4", 0.015);
    }
    c.dot(f1, 0.02, "#000000");
    c.dot(f2, 0.02, "#000000");
    let w = ngon.edge_position(check.witness.edge, check.witness.u);
    c.polyline(&[f1, w, f2], "#2ca02c", 0.01);
    c.dot(w, 0.025, "#2ca02c");
    let verdict = if check.clear { "clear" } else { "blocked" };
    let below = Vec2::new(-ngon.circumradius(), -ngon.circumradius() - 0.1);
    c.label(below, 0.05, &format!("L/2 = {:.6}, crossing = {:.6}, {verdict}", check.l_half, check.shortest_crossing()));
    c.finish("ellipse criterion witness")
}

/// Splits a sampled curve wherever the drawing jumps, so that seams of an
/// atlas are not bridged by straight lines.
fn split_runs(samples: &[(Vec2, f64)]) -> Vec<Vec<Vec2>> {
    let mut runs: Vec<Vec<Vec2>> = vec![vec![samples[0].0]];
    for w in samples.windows(2) {
        let (a, b) = (w[0].0, w[1].0);
        if a.dist(b) > 3.0 * w[1].1 + 1e-9 {
            runs.push(Vec::new());
        }
        runs.last_mut().unwrap().push(b);
    }
    runs
}

/// Evenly densified samples of a curve, with the intrinsic step to each.
fn densify<S: CurveSpace>(space: &S, curve: &ClosedCurve<S::Point>, per_segment: usize) -> Vec<(S::Point, f64)> {
    let bps = &curve.breakpoints;
    let mut out = Vec::new();
    for i in 0..bps.len() {
        let (a, b) = (&bps[i].point, &bps[(i + 1) % bps.len()].point);
        let step = space.segment_length(a, b) / per_segment as f64;
        for k in 0..per_segment {
            out.push((space.interpolate(a, b, k as f64 / per_segment as f64), if k == 0 && i > 0 { 0.0 } else { step }));
        }
    }
    let first = bps[0].point.clone();
    let last = out.last().map_or(0.0, |p| p.1);
    out.push((first, last));
    out
}

/// Two-face layout of the doubled polygon: top face on the left, bottom
/// face reflected on the right so that each edge reads the same way.
pub fn polygon_curves(ngon: &DoubledNgon, curves: &[ClosedCurve<PolygonPoint>]) -> String {
    let shift = Vec2::new(2.5 * ngon.circumradius(), 0.0);
    let place = |face: Face, p: Vec2| if face == Face::Top { p } else { Vec2::new(-p.x, p.y) + shift };
    let mut c = Canvas::new();
    for face in [Face::Top, Face::Bottom] {
        let vs: Vec<Vec2> = ngon.vertices().iter().map(|v| place(face, *v)).collect();
        c.polygon(&vs, "#eeeeee", "#333333");
    }
    for (i, curve) in curves.iter().enumerate() {
        let samples = densify(ngon, curve, 32);
        // Edge points belong to both faces; the run on one face ends there and
        // the next run starts from it on the other.
        let mut drawn: Vec<(Vec2, f64)> = Vec::new();
        let mut face = samples.iter().find_map(|s| s.0.face()).unwrap_or(Face::Top);
        let mut prev: Option<&PolygonPoint> = None;
        for (p, step) in &samples {
            let here = p.face().unwrap_or(face);
            if here != face {
                face = here;
                if let Some(e) = prev {
                    drawn.push((place(face, ngon.planar(e)), 0.0));
                }
            }
            drawn.push((place(face, ngon.planar(p)), *step));
            prev = Some(p);
        }
        for run in split_runs(&drawn) {
            c.polyline(&run, colour(i), 0.02);
        }
    }
    c.finish("doubled polygon")
}

/// Atlas of the tube: the top face with the half-cylinders unrolled outward
/// from its edges and the spherical lunes as sectors at the vertices, plus
/// the bottom face alongside. Curves are drawn in the atlas coordinates.
pub fn tube_atlas(tube: &TubeSurface, curves: &[ClosedCurve<TubePoint>]) -> String {
    let ngon = tube.base();
    let n = ngon.n();
    let eps = tube.eps();
    let reach = PI * eps;
    let shift = Vec2::new(2.0 * (ngon.circumradius() + reach) + 0.3, 0.0);
    let lune_start = |v: usize| ngon.edge_normal((v + n - 1) % n);
    let place = |p: &TubePoint| -> Vec2 {
        match *p {
            TubePoint::Face { face: Face::Top, x, y } => Vec2::new(x, y),
            TubePoint::Face { face: Face::Bottom, x, y } => Vec2::new(-x, y) + shift,
            TubePoint::Cylinder { edge, s, phi } => {
                let (a, b) = ngon.edge(edge);
                a + (b - a).normalized() * s + ngon.edge_normal(edge) * (eps * phi)
            }
            TubePoint::Sphere { vertex, theta, phi } => ngon.vertex(vertex) + lune_start(vertex).rotated(theta) * (eps * phi),
        }
    };
    let mut c = Canvas::new();
    c.polygon(ngon.vertices(), "#eeeeee", "#333333");
    let bottom: Vec<Vec2> = ngon.vertices().iter().map(|v| Vec2::new(-v.x, v.y) + shift).collect();
    c.polygon(&bottom, "#eeeeee", "#333333");
    for e in 0..n {
        let (a, b) = ngon.edge(e);
        let nu = ngon.edge_normal(e) * reach;
        c.polygon(&[a, b, b + nu, a + nu], "#bbbbbb", "#666666");
        let v = ngon.vertex(e);
        let start = lune_start(e);
        let mut sector = vec![v];
        sector.extend((0..=24).map(|k| v + start.rotated(tube.lune_angle() * k as f64 / 24.0) * reach));
        c.polygon(&sector, "#d8d8f0", "#666666");
    }
    for (i, curve) in curves.iter().enumerate() {
        let drawn: Vec<(Vec2, f64)> = densify(tube, curve, 32).iter().map(|(p, step)| (place(p), *step)).collect();
        for run in split_runs(&drawn) {
            c.polyline(&run, colour(i), 0.015);
        }
    }
    c.label(Vec2::new(-ngon.circumradius(), -ngon.circumradius() - reach - 0.1), 0.08, &format!("eps = {eps}: top face with cylinders and lunes"));
    c.label(shift + Vec2::new(-ngon.circumradius(), -ngon.circumradius() - 0.1), 0.08, "bottom face (mirrored)");
    c.finish("tube atlas")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polygon::{ellipse_clearance_check, meridians, PolygonOracle};
    use crate::tube::meridian_on_tube;

    fn well_formed(svg: &str) {
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn unfolding_draws_one_copy_per_crossing() {
        let sq = DoubledNgon::new(4, 1.0).unwrap();
        let o = PolygonOracle::new(&sq);
        let p = sq.interior_point(Face::Top, 0.1, 0.2).unwrap();
        let q = sq.interior_point(Face::Bottom, -0.2, 0.1).unwrap();
        let path = o.exact_distance(&p, &q).unwrap();
        let svg = polygon_unfolding(&sq, &[path.clone()]);
        well_formed(&svg);
        assert_eq!(svg.matches("<polygon").count(), 1 + path.crossings.len());
    }

    #[test]
    fn witness_shows_foci_ellipse_and_tangent_edges() {
        let sq = DoubledNgon::new(4, 1.0).unwrap();
        let p = sq.interior_point(Face::Top, 0.3, 0.0).unwrap();
        let q = sq.interior_point(Face::Bottom, -0.2, 0.0).unwrap();
        let check = ellipse_clearance_check(&sq, &p, &q, 1.0, 1e-9).unwrap();
        let svg = ellipse_witness(&sq, &check);
        well_formed(&svg);
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.matches("#d62728").count() >= check.tangent_edges.len());
    }

    #[test]
    fn atlas_has_faces_strips_and_sectors() {
        let sq = DoubledNgon::new(4, 1.0).unwrap();
        let t = TubeSurface::new(&sq, 0.1).unwrap();
        let m = meridian_on_tube(&t, 0).unwrap();
        let svg = tube_atlas(&t, &[m]);
        well_formed(&svg);
        assert_eq!(svg.matches("<polygon").count(), 2 + 2 * 4);
        assert!(svg.contains("<polyline"));
        let curves: Vec<_> = meridians(&sq).into_iter().map(|g| g.curve).collect();
        let two = polygon_curves(&sq, &curves);
        well_formed(&two);
    }

    #[test]
    fn empty_figures_are_valid() {
        let sq = DoubledNgon::new(5, 1.0).unwrap();
        well_formed(&polygon_unfolding(&sq, &[]));
        well_formed(&polygon_curves(&sq, &[]));
    }
}
