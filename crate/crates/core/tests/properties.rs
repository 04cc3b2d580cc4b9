use proptest::prelude::*;

use hypermin::barrier::{
    alpha_second, default_step, integrate_alpha, integrate_ode, ruled_mean_curvature, BarrierParams,
};
use hypermin::curvature::{gauss_bonnet_check, EdgeMetric, IntrinsicMesh};
use hypermin::ends::{
    classify, diameter_g, slab_of_curve, slab_of_mesh, standard_end_mesh, BoundaryCurve, EndType,
    StandardEnd,
};
use hypermin::graph::domains::rectangle_mesh;
use hypermin::graph::{solve, Chart, GraphProblem, SolverOptions};
use hypermin::hyperbolic::{
    dist_h2, horocycle_length, CuspModel, Generator, Geodesic, Isometry, Point3,
};
use hypermin::mesh::TriMesh;
use hypermin::reflection::ReflectionRule;
use hypermin::sweep::{sweep, ContactResult, Side, SweepFamily};

fn geodesic() -> impl Strategy<Value = Geodesic<f64>> {
    prop_oneof![
        (-3.0..3.0f64).prop_map(|x| Geodesic::VerticalLine { x }),
        (-3.0..3.0f64, 0.2..4.0f64).prop_map(|(a, w)| Geodesic::Semicircle { a, b: a + w }),
    ]
}

fn generator() -> impl Strategy<Value = Generator<f64>> {
    prop_oneof![
        (-3.0..3.0f64).prop_map(Generator::Parabolic),
        (-3.0..3.0f64).prop_map(Generator::VerticalTranslate),
        (geodesic(), -2.0..2.0f64)
            .prop_map(|(axis, length)| Generator::HyperbolicTranslate { axis, length }),
        geodesic().prop_map(Generator::GeodesicReflection),
        (-2.0..2.0f64).prop_map(Generator::VerticalReflection),
        (-2.0..2.0f64, 0.3..3.0f64).prop_map(|(x, y)| Generator::HalfTurn { x, y }),
    ]
}

fn isometry() -> impl Strategy<Value = Isometry<f64>> {
    prop::collection::vec(generator(), 1..5).prop_map(|gs| {
        gs.into_iter()
            .fold(Isometry::identity(), |iso, g| iso.then(g))
    })
}

fn point() -> impl Strategy<Value = Point3<f64>> {
    (-3.0..3.0f64, 0.2..4.0f64, -2.0..2.0f64).prop_map(|(x, y, t)| Point3::new(x, y, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn isometries_preserve_distance(g in isometry(), p in point(), q in point()) {
        let (gp, gq) = (g.apply(p), g.apply(q));
        let d0 = dist_h2(p.xy(), q.xy()).unwrap();
        let d1 = dist_h2(gp.xy(), gq.xy()).unwrap();
        prop_assert!((d0 - d1).abs() <= 1e-10 * (1.0 + d0), "{} vs {}", d0, d1);
        prop_assert!(((p.t - q.t).abs() - (gp.t - gq.t).abs()).abs() <= 1e-10);
    }

    #[test]
    fn deck_translations_commute(tau in 0.1..5.0f64, h in 0.1..5.0f64, p in point()) {
        let psi = Generator::Parabolic(tau);
        let th = Generator::VerticalTranslate(h);
        let a = Isometry::identity().then(psi).then(th).apply(p);
        let b = Isometry::identity().then(th).then(psi).apply(p);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn horocycle_length_scales_inversely(tau in 0.1..10.0f64, y in 1.0..1e4f64) {
        let m = CuspModel::product(tau, 1.0);
        let l = horocycle_length(&m, y).unwrap();
        prop_assert!((l * y - tau).abs() <= 4.0 * f64::EPSILON * tau);
    }

    #[test]
    fn geodesic_reflection_is_an_involution(g in geodesic(), p in point(), s in -3.0..3.0f64) {
        let r = Isometry::from_generator(Generator::GeodesicReflection(g));
        let back = r.apply(r.apply(p));
        prop_assert!((back.x - p.x).abs() < 1e-10 && (back.y - p.y).abs() < 1e-10);
        let on = g.point_at(s);
        let fixed = g.reflect(on);
        prop_assert!((fixed.0 - on.0).abs() < 1e-10 && (fixed.1 - on.1).abs() < 1e-10);
    }

    #[test]
    fn reflection_rules_are_involutions(
        g in geodesic(),
        c in -2.0..2.0f64,
        axis in (-2.0..2.0f64, 0.3..3.0f64),
        p in point(),
    ) {
        let rules = [
            ReflectionRule::AcrossGeodesicAtHeight { geodesic: g, height: c },
            ReflectionRule::AboutVerticalAxis { x: axis.0, y: axis.1, t_min: 0.0, t_max: 1.0 },
        ];
        let v = [p.x, p.y, p.t];
        for r in rules {
            let w = r.apply(r.apply(v));
            for k in 0..3 {
                prop_assert!((w[k] - v[k]).abs() <= 1e-12 * (1.0 + v[k].abs()), "{:?}", w);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn barrier_curves_conserve_and_are_concave(lambda in 0.3..3.0f64, t in 1.5..200.0f64) {
        let p = BarrierParams::new(lambda, t);
        let c = integrate_alpha(p, default_step(&p)).unwrap();
        prop_assert!(c.max_residual() <= 1e-8, "{}", c.max_residual());
        let n = c.samples.len();
        for s in &c.samples[1..n - 1] {
            let app = alpha_second(s.alpha, s.alpha_prime, lambda);
            prop_assert!(app < 0.0);
            let h = ruled_mean_curvature(s.alpha, s.alpha_prime, app, lambda).unwrap();
            prop_assert!(h.abs() <= 1e-8, "{}", h);
        }
        for k in 1..20 {
            let v = c.v0 * k as f64 / 20.0;
            let (a, _) = c.eval(v);
            let (b, _) = c.eval(c.v0 - v);
            prop_assert!((a - b).abs() <= 1e-7, "v = {}: {} vs {}", v, a, b);
        }
    }

    #[test]
    fn end_type_and_width_are_deck_invariant(
        p in -4i64..=4,
        q in -4i64..=4,
        a in -3i64..=3,
        b in -3i64..=3,
        amp in 0.0..0.5f64,
        tau in 0.5..3.0f64,
        h in 0.5..3.0f64,
    ) {
        prop_assume!((p, q) != (0, 0));
        let m = CuspModel::product(tau, h);
        let c = BoundaryCurve::from_fn(m, 200, |s| {
            let w = (2.0 * std::f64::consts::PI * s).sin();
            (p as f64 * tau * s + amp * w, q as f64 * h * s + amp * w * w)
        });
        let kind = EndType { p, q };
        prop_assert_eq!(classify(&c).unwrap(), kind);
        let moved = c.translated(a, b);
        prop_assert_eq!(classify(&moved).unwrap(), kind);
        let w0 = slab_of_curve(&c, kind).unwrap().width();
        let w1 = slab_of_curve(&moved, kind).unwrap().width();
        prop_assert!((w0 - w1).abs() <= 1e-9 * (1.0 + w0));
        if p != 0 {
            let xs = c.samples.iter().map(|s| s.x);
            let extent = xs.clone().fold(f64::NEG_INFINITY, f64::max)
                - xs.fold(f64::INFINITY, f64::min);
            let pt = p.unsigned_abs() as f64 * tau;
            let bound = w0 / pt + q.unsigned_abs() as f64 * h * extent / pt;
            prop_assert!(diameter_g(&c) <= bound + 1e-9);
        }
    }

    #[test]
    fn standard_ends_have_zero_width(
        p in -3i64..=3,
        q in -3i64..=3,
        c0 in -2.0..2.0f64,
        tau in 0.5..3.0f64,
        h in 0.5..3.0f64,
    ) {
        prop_assume!((p, q) != (0, 0));
        let m = CuspModel::product(tau, h);
        let kind = EndType { p, q };
        let end = StandardEnd { kind, constant: c0, model: m };
        let mesh = standard_end_mesh(&end, (1.0, 4.0), 1.0, 5, 5).unwrap();
        prop_assert!(slab_of_mesh(&mesh, kind, &m).width().abs() <= 1e-12 * (1.0 + c0.abs()));
    }

    #[test]
    fn graph_solutions_obey_comparison(
        a in -1.0..1.0f64,
        k in 0.5..3.0f64,
        lift in 0.0..0.5f64,
    ) {
        let mesh = rectangle_mesh(-0.5, 0.5, 1.0, 2.0, 9, 9, true);
        let f1 = |v: &[f64; 3]| a * (k * v[0]).cos() + 0.3 * v[1];
        let f2 = |v: &[f64; 3]| f1(v) + lift * (1.0 + v[0]);
        let opts = SolverOptions::default();
        let p1 = GraphProblem::from_boundary(mesh.clone(), Chart::HalfPlane, |_, v| f1(v)).unwrap();
        let p2 = GraphProblem::from_boundary(mesh, Chart::HalfPlane, |_, v| f2(v)).unwrap();
        let s1 = solve(&p1, &opts).unwrap();
        let s2 = solve(&p2, &opts).unwrap();
        let (lo, hi) = p1.data_range();
        prop_assert!(s1.min_u >= lo - 1e-12 && s1.max_u <= hi + 1e-12);
        prop_assert!(s1.energy_trace.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-14)));
        prop_assert!(s1.u.iter().zip(&s2.u).all(|(x, y)| *x <= y + 1e-9));
    }

    #[test]
    fn polyhedral_gauss_bonnet_is_exact(
        amp in 0.0..0.8f64,
        kx in 0.5..4.0f64,
        n in 4usize..12,
    ) {
        let mesh = TriMesh::grid(n, n, |i, j| {
            let x = i as f64 / (n - 1) as f64;
            let y = 1.0 + j as f64 / (n - 1) as f64;
            [x, y, amp * (kx * x).sin() * y]
        });
        let im = IntrinsicMesh::from_trimesh(&mesh);
        for metric in [EdgeMetric::Euclidean, EdgeMetric::Product] {
            let r = gauss_bonnet_check(&im, metric, None, None).unwrap();
            prop_assert!(r.gb_defect.abs() < 1e-9, "{:?}", r);
        }
    }
}

/// Vertical end `x = 2 + bump(t, y)` over one period in `t` and `y ∈ [1, 8]`.
fn bumpy_end(n: usize, amp: f64, k: f64) -> TriMesh {
    TriMesh::grid(n, n, |i, j| {
        let t = i as f64 / (n - 1) as f64;
        let y = 8f64.powf(j as f64 / (n - 1) as f64);
        let x = 2.0 + amp * (2.0 * std::f64::consts::PI * t).sin() * (k * y.ln()).cos();
        [x, y, t]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sweeps_are_monotone_sound_and_deterministic(amp in 0.0..0.3f64, k in 0.5..3.0f64) {
        let f = SweepFamily::VerticalPlanes { side: Side::Upper, schedule: (12.0, 0.5) };
        let tol = 1e-3;
        let mut params = Vec::new();
        for n in [5, 9, 17] {
            let mesh = bumpy_end(n, amp, k);
            let r = sweep(&mesh, &f, tol).unwrap();
            prop_assert_eq!(&r, &sweep(&mesh, &f, tol).unwrap());
            match r {
                ContactResult::Contact { param, point, barrier_point, .. } => {
                    let sep = f.separation(&point, param).unwrap();
                    prop_assert!(sep <= tol * (1.0 + 1e-9), "{}", sep);
                    prop_assert_eq!(barrier_point, f.barrier_point(&point, param).unwrap());
                    params.push(param);
                }
                other => prop_assert!(false, "{:?}", other),
            }
        }
        prop_assert!(params.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{:?}", params);
    }
}

#[test]
fn halving_the_step_gains_fourth_order() {
    for (lambda, t) in [(0.5, 5.0), (1.0, 10.0), (2.0, 50.0)] {
        let p = BarrierParams::new(lambda, t);
        let coarse = integrate_ode(p, 0.04).unwrap().max_residual();
        let fine = integrate_ode(p, 0.02).unwrap().max_residual();
        assert!(
            coarse >= 4.0 * fine,
            "({lambda},{t}): {coarse:e} -> {fine:e}"
        );
    }
}
