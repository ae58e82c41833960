//! Region-conforming triangulation of Y_{n,ε}.
//!
//! Faces are triangulated by barycentric subdivision of the fan from the
//! center, cylinders and lunes by (s, φ) and (θ, φ) grids. Neighboring
//! regions share their boundary vertices by construction, so the mesh is a
//! closed oriented surface without any position-based welding.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geom::Vec3;
use crate::polygon::Face;

use super::{TubePoint, TubeSurface};

pub const DEFAULT_VERTEX_CAP: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    Face(Face),
    Cylinder(usize),
    Lune(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub area: f64,
    pub euler_characteristic: i64,
    /// Every edge is shared by exactly two triangles with opposite orientations.
    pub watertight: bool,
}

#[derive(Clone, Debug)]
pub struct TubeMesh {
    pub(crate) tube: TubeSurface,
    pub(crate) h: f64,
    pub points: Vec<TubePoint>,
    pub positions: Vec<Vec3>,
    pub regions: Vec<Region>,
    pub triangles: Vec<[usize; 3]>,
    /// Subdivisions per polygon edge.
    pub per_edge: usize,
    /// Subdivisions of the half-circle φ ∈ [0, π].
    pub per_arc: usize,
    /// Subdivisions of each lune in θ.
    pub per_lune: usize,
}

struct Builder<'a> {
    tube: &'a TubeSurface,
    points: Vec<TubePoint>,
    regions: Vec<Region>,
    triangles: Vec<[usize; 3]>,
}

impl Builder<'_> {
    fn push(&mut self, p: TubePoint, r: Region) -> usize {
        self.points.push(p);
        self.regions.push(r);
        self.points.len() - 1
    }

    fn tri(&mut self, a: usize, b: usize, c: usize) {
        if a != b && b != c && a != c {
            self.triangles.push([a, b, c]);
        }
    }

    fn grid(&mut self, idx: &dyn Fn(usize, usize) -> usize, cols: usize, rows: usize) {
        for a in 0..cols {
            for l in 0..rows {
                let (p00, p10, p11, p01) = (idx(a, l), idx(a + 1, l), idx(a + 1, l + 1), idx(a, l + 1));
                self.tri(p00, p10, p11);
                self.tri(p00, p11, p01);
            }
        }
        let _ = self.tube;
    }
}

/// Triangulates with edge lengths of order `h`. Requires `0 < h ≤ ε/3`.
pub fn build_mesh(tube: &TubeSurface, h: f64) -> Result<TubeMesh> {
    build_mesh_with_cap(tube, h, DEFAULT_VERTEX_CAP)
}

pub fn build_mesh_with_cap(tube: &TubeSurface, h: f64, cap: usize) -> Result<TubeMesh> {
    let eps = tube.eps();
    if !(h > 0.0 && h <= eps / 3.0) {
        return Err(invalid(format!("mesh size must satisfy 0 < h <= eps/3 = {}, got {h}", eps / 3.0)));
    }
    let ngon = tube.base();
    let n = ngon.n();
    let side = ngon.side();
    let k = (ngon.circumradius().max(side) / h).ceil() as usize;
    let q = ((PI * eps / h).ceil() as usize).max(3);
    let p = ((tube.lune_angle() * eps / h).ceil() as usize).max(1);

    let face_count = 1 + n * k * (k + 1) / 2;
    let estimate = 2 * face_count + n * (k - 1) * (q - 1) + n * (p + 1) * (q - 1);
    if estimate > cap {
        return Err(Error::MeshTooLarge { vertices: estimate, cap });
    }

    let mut b = Builder { tube, points: Vec::with_capacity(estimate), regions: Vec::with_capacity(estimate), triangles: Vec::new() };

    // Face rings: ring[r][e * r + t] for t < r; ring k is the boundary.
    let mut faces: Vec<Vec<Vec<usize>>> = Vec::new();
    for face in [Face::Top, Face::Bottom] {
        let mut rings = vec![vec![b.push(TubePoint::Face { face, x: 0.0, y: 0.0 }, Region::Face(face))]];
        for r in 1..=k {
            let mut ring = Vec::with_capacity(n * r);
            for e in 0..n {
                let (va, vb) = ngon.edge(e);
                for t in 0..r {
                    let pos = if r == k {
                        ngon.edge_position(e, t as f64 / k as f64)
                    } else {
                        let f = r as f64 / k as f64;
                        va.lerp(vb, t as f64 / r as f64) * f
                    };
                    ring.push(b.push(TubePoint::Face { face, x: pos.x, y: pos.y }, Region::Face(face)));
                }
            }
            rings.push(ring);
        }
        for e in 0..n {
            for r in 0..k {
                let at = |ring: &Vec<usize>, rr: usize, t: usize| -> usize {
                    if rr == 0 {
                        ring[0]
                    } else {
                        ring[(e * rr + t) % (n * rr)]
                    }
                };
                for t in 0..=r {
                    let pt = at(&rings[r], r, t);
                    b.tri(pt, at(&rings[r + 1], r + 1, t), at(&rings[r + 1], r + 1, t + 1));
                    if t < r {
                        b.tri(pt, at(&rings[r + 1], r + 1, t + 1), at(&rings[r], r, t + 1));
                    }
                }
            }
        }
        faces.push(rings);
    }
    let boundary = |face: usize, e: usize, j: usize| faces[face][k][(e * k + j) % (n * k)];

    // Lune meridians: start[v][l] at θ = 0, end[v][l] at θ = Θ, l in 1..q.
    let theta_max = tube.lune_angle();
    let mut start = vec![Vec::new(); n];
    let mut end = vec![Vec::new(); n];
    for v in 0..n {
        for l in 1..q {
            let phi = PI * l as f64 / q as f64;
            start[v].push(b.push(TubePoint::Sphere { vertex: v, theta: 0.0, phi }, Region::Lune(v)));
            end[v].push(b.push(TubePoint::Sphere { vertex: v, theta: theta_max, phi }, Region::Lune(v)));
        }
    }

    // Cylinders.
    for e in 0..n {
        let mut inner = vec![Vec::new(); k + 1];
        for (j, col) in inner.iter_mut().enumerate().take(k).skip(1) {
            let s = side * j as f64 / k as f64;
            for l in 1..q {
                let phi = PI * l as f64 / q as f64;
                col.push(b.push(TubePoint::Cylinder { edge: e, s, phi }, Region::Cylinder(e)));
            }
        }
        let next = (e + 1) % n;
        let idx = |j: usize, l: usize| -> usize {
            if l == 0 {
                boundary(0, e, j)
            } else if l == q {
                boundary(1, e, j)
            } else if j == 0 {
                end[e][l - 1]
            } else if j == k {
                start[next][l - 1]
            } else {
                inner[j][l - 1]
            }
        };
        b.grid(&idx, k, q);
    }

    // Lunes.
    for v in 0..n {
        let mut inner = vec![Vec::new(); p + 1];
        for (a, col) in inner.iter_mut().enumerate().take(p).skip(1) {
            let theta = theta_max * a as f64 / p as f64;
            for l in 1..q {
                let phi = PI * l as f64 / q as f64;
                col.push(b.push(TubePoint::Sphere { vertex: v, theta, phi }, Region::Lune(v)));
            }
        }
        let idx = |a: usize, l: usize| -> usize {
            if l == 0 {
                boundary(0, v, 0)
            } else if l == q {
                boundary(1, v, 0)
            } else if a == 0 {
                start[v][l - 1]
            } else if a == p {
                end[v][l - 1]
            } else {
                inner[a][l - 1]
            }
        };
        b.grid(&idx, p, q);
    }

    let positions: Vec<Vec3> = b.points.iter().map(|pt| tube.embed(pt)).collect();
    // Orient outward: the origin is inside the convex body.
    let mut triangles = b.triangles;
    for t in triangles.iter_mut() {
        let (a, bb, c) = (positions[t[0]], positions[t[1]], positions[t[2]]);
        let normal = (bb - a).cross(c - a);
        if normal.dot(a + bb + c) < 0.0 {
            t.swap(1, 2);
        }
    }
    Ok(TubeMesh { tube: tube.clone(), h, points: b.points, positions, regions: b.regions, triangles, per_edge: k, per_arc: q, per_lune: p })
}

impl TubeMesh {
    pub fn tube(&self) -> &TubeSurface {
        &self.tube
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let (a, b, c) = (self.positions[t[0]], self.positions[t[1]], self.positions[t[2]]);
                0.5 * (b - a).cross(c - a).norm()
            })
            .sum()
    }

    pub fn stats(&self) -> MeshStats {
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for i in 0..3 {
                *directed.entry((t[i], t[(i + 1) % 3])).or_default() += 1;
            }
        }
        let mut undirected: HashMap<(usize, usize), usize> = HashMap::new();
        for (&(a, b), &c) in &directed {
            *undirected.entry((a.min(b), a.max(b))).or_default() += c;
        }
        let watertight = directed.iter().all(|(&(a, b), &c)| c == 1 && directed.get(&(b, a)) == Some(&1));
        let (v, e, f) = (self.positions.len(), undirected.len(), self.triangles.len());
        MeshStats {
            vertices: v,
            edges: e,
            triangles: f,
            area: self.area(),
            euler_characteristic: v as i64 - e as i64 + f as i64,
            watertight,
        }
    }

    /// Wavefront OBJ: `v x y z` lines followed by 1-based `f a b c` lines,
    /// counter-clockwise seen from outside.
    pub fn write_obj<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# tube mesh n={} eps={} h={}", self.tube.n(), self.tube.eps(), self.h)?;
        for p in &self.positions {
            writeln!(w, "v {:.17e} {:.17e} {:.17e}", p.x, p.y, p.z)?;
        }
        for t in &self.triangles {
            writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polygon::DoubledNgon;

    fn tube(n: usize, eps: f64) -> TubeSurface {
        TubeSurface::new(&DoubledNgon::new(n, 1.0).unwrap(), eps).unwrap()
    }

    #[test]
    fn closed_sphere_topology() {
        for n in [3, 4, 7] {
            let m = build_mesh(&tube(n, 0.1), 0.03).unwrap();
            let s = m.stats();
            assert!(s.watertight, "n={n}");
            assert_eq!(s.euler_characteristic, 2, "n={n}");
        }
    }

    #[test]
    fn area_converges_quadratically() {
        let t = tube(4, 0.1);
        let exact = t.area();
        let e1 = (build_mesh(&t, 0.03).unwrap().area() - exact).abs();
        let e2 = (build_mesh(&t, 0.015).unwrap().area() - exact).abs();
        assert!(e1 < 0.01);
        // Halving h should cut the error by about four.
        assert!(e2 < e1 / 3.0, "{e1} {e2}");
    }

    #[test]
    fn vertices_lie_on_the_surface() {
        let t = tube(5, 0.05);
        let m = build_mesh(&t, 0.015).unwrap();
        for (p, r) in m.points.iter().zip(&m.positions) {
            t.check_point(p).unwrap();
            assert!(t.embed(&t.project(*r)).dist(*r) < 1e-12);
        }
    }

    #[test]
    fn guards() {
        let t = tube(4, 0.1);
        assert!(build_mesh(&t, 0.05).is_err());
        assert!(build_mesh(&t, 0.0).is_err());
        assert!(matches!(build_mesh_with_cap(&t, 0.01, 1000), Err(Error::MeshTooLarge { .. })));
    }

    #[test]
    fn obj_export() {
        let m = build_mesh(&tube(3, 0.1), 0.03).unwrap();
        let mut buf = Vec::new();
        m.write_obj(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), m.positions.len());
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), m.triangles.len());
    }
}
