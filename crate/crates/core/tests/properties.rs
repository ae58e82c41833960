use geolab::ellipsoid::{integrate_geodesic, Ellipsoid, GeodesicState, IntegratorConfig};
use geolab::geom::Vec3;
use geolab::polygon::{DoubledNgon, MeshOracle, PolygonOracle, PolygonPoint, Symmetry};
use geolab::tube::TubeSurface;
use geolab::{CurveSpace, DistanceOracle};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn points(ngon: &DoubledNgon, seed: u64, count: usize) -> Vec<PolygonPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| ngon.random_point(&mut rng, 0.2)).collect()
}

fn unit(v: [f64; 3]) -> Option<Vec3> {
    let u = Vec3::new(v[0], v[1], v[2]);
    (u.norm() > 0.1).then(|| u * (1.0 / u.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_distance_is_dihedral_invariant(n in 3usize..=8, seed in any::<u64>(), g in 0usize..16) {
        let ngon = DoubledNgon::new(n, 1.0).unwrap();
        let o = PolygonOracle::new(&ngon);
        let pts = points(&ngon, seed, 2);
        let sym = Symmetry::all(n)[g % (2 * n)];
        let d = o.distance(&pts[0], &pts[1]).unwrap();
        let dg = o.distance(&ngon.apply_symmetry(&pts[0], sym), &ngon.apply_symmetry(&pts[1], sym)).unwrap();
        prop_assert!((d - dg).abs() < 1e-9, "{d} vs {dg}");
        let ds = o.distance(&ngon.swap_faces(&pts[0]), &ngon.swap_faces(&pts[1])).unwrap();
        prop_assert!((d - ds).abs() < 1e-9, "{d} vs {ds}");
    }

    #[test]
    fn exact_distance_is_a_metric(n in 3usize..=8, seed in any::<u64>()) {
        let ngon = DoubledNgon::new(n, 1.0).unwrap();
        let o = PolygonOracle::new(&ngon);
        let p = points(&ngon, seed, 3);
        let d = |a: usize, b: usize| o.distance(&p[a], &p[b]).unwrap();
        prop_assert_eq!(d(0, 0), 0.0);
        prop_assert!((d(0, 1) - d(1, 0)).abs() < 1e-12);
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
        // Folding both faces onto one is 1-Lipschitz.
        let (a, b) = (ngon.planar(&p[0]), ngon.planar(&p[1]));
        prop_assert!(d(0, 1) >= a.dist(b) - 1e-12);
    }

    #[test]
    fn mesh_oracle_agrees_with_exact(n in 3usize..=8, seed in any::<u64>()) {
        let ngon = DoubledNgon::new(n, 1.0).unwrap();
        let (exact, mesh) = (PolygonOracle::new(&ngon), MeshOracle::new(&ngon, 0.05).unwrap());
        let p = points(&ngon, seed, 2);
        let (d, dm) = (exact.distance(&p[0], &p[1]).unwrap(), mesh.distance(&p[0], &p[1]).unwrap());
        prop_assert!((d - dm).abs() <= mesh.error_bound(), "{d} vs {dm}");
    }

    #[test]
    fn tube_projection_inverts_embedding(n in 3usize..=8, seed in any::<u64>()) {
        let base = DoubledNgon::new(n, 1.0).unwrap();
        let tube = TubeSurface::new(&base, 0.3 * base.apothem()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = tube.random_point(&mut rng);
        let x = tube.embed(&p);
        let back = tube.embed(&tube.project(x));
        prop_assert!(back.dist(x) < 1e-12, "{p:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn section_arcs_are_consistent(
        a in prop::array::uniform3(-1.0f64..1.0),
        b in prop::array::uniform3(-1.0f64..1.0),
        s in 0.05f64..0.95,
    ) {
        let ell = Ellipsoid::new(1.0, 1.2, 1.5).unwrap();
        let (Some(ua), Some(ub)) = (unit(a), unit(b)) else { return Ok(()) };
        // Central arcs are undefined between antipodal or coincident points.
        prop_assume!(ua.cross(ub).norm() > 0.1 && ua.dot(ub) > -0.9);
        let (p, q) = (ell.radial_point(ua), ell.radial_point(ub));
        let m = ell.interpolate(&p, &q, s);
        prop_assert!(ell.constraint(m).abs() < 1e-12);
        let whole = ell.segment_length(&p, &q);
        let (first, second) = (ell.segment_length(&p, &m), ell.segment_length(&m, &q));
        prop_assert!((first + second - whole).abs() < 1e-10, "{first} + {second} vs {whole}");
        prop_assert!((first - s * whole).abs() < 1e-9);
        prop_assert!((ell.segment_length(&q, &p) - whole).abs() < 1e-12);
    }

    #[test]
    fn geodesic_flow_respects_octant_reflections(
        dir in prop::array::uniform3(-1.0f64..1.0),
        heading in 0.0f64..std::f64::consts::TAU,
        axis in 0usize..3,
    ) {
        let ell = Ellipsoid::new(1.0, 1.005, 1.01).unwrap();
        let Some(u) = unit(dir) else { return Ok(()) };
        let x = ell.radial_point(u);
        let (e1, e2) = ell.tangent_frame(x);
        let start = GeodesicState { position: x, tangent: e1 * heading.cos() + e2 * heading.sin() };
        let flip = |v: Vec3| {
            let mut c = v.to_array();
            c[axis] = -c[axis];
            Vec3::new(c[0], c[1], c[2])
        };
        let mirrored = GeodesicState { position: flip(start.position), tangent: flip(start.tangent) };
        let cfg = IntegratorConfig::default();
        let a = integrate_geodesic(&ell, &start, 3.0, &cfg).unwrap();
        let b = integrate_geodesic(&ell, &mirrored, 3.0, &cfg).unwrap();
        prop_assert!(flip(a.end().position).dist(b.end().position) < 1e-8);
        prop_assert!(a.max_residual < 1e-9);
    }
}
