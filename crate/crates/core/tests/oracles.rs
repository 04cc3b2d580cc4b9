//! Independent oracles for derived reference values.

use std::f64::consts::PI;

use hypermin::barrier::{
    compact_convergence_gap, default_step, gap_bound, integrate_alpha, ruled_mean_curvature,
    v0_of_t, BarrierParams,
};
use hypermin::curvature::{area_bound_check, intrinsic_area, EdgeMetric, IntrinsicMesh};
use hypermin::ends::{
    asymptotic_distance_profile, classify, diameter_g, k0_of, slab_of_curve, standard_end_mesh,
    BoundaryCurve, EndType, StandardEnd,
};
use hypermin::graph::domains::{
    rectangle_mesh, standard_ideal_triangle, BoundaryDatum, DomainProblem, HypDomain, IdealPoint,
    Resolution,
};
use hypermin::graph::plateau::{solve_plateau, PlateauOptions};
use hypermin::graph::{area, solve, Chart, GraphProblem, SolverOptions};
use hypermin::hyperbolic::{
    disk_to_halfplane, dist_h2, halfplane_to_disk, horocycle_length, level_torus_mean_curvature,
    CuspModel,
};
use hypermin::mesh::TriMesh;
use hypermin::reflection::{build_example, ExampleParams};

/// Composite Simpson rule with `n` (even) panels.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn distance_matches_length_of_the_connecting_arc() {
    // Semicircle through (0,1) and (3,1): centre 1.5, radius √3.25.
    let c = 1.5f64;
    let th = |x: f64, y: f64| y.atan2(x - c);
    let (a, b) = (th(3.0, 1.0), th(0.0, 1.0));
    let len = simpson(|s| 1.0 / s.sin(), a, b, 20_000);
    let d = dist_h2((0.0, 1.0), (3.0, 1.0)).unwrap();
    assert!((d - len).abs() < 1e-10, "{d} vs {len}");
}

#[test]
fn flat_ruled_surface_has_the_level_torus_curvature() {
    let m = CuspModel::product(1.0f64, 1.0);
    for a in [0.3f64, 1.0, 7.0] {
        let hr = ruled_mean_curvature(a, 0.0, 0.0, 0.0).unwrap();
        assert!((hr + 0.5).abs() < 1e-15);
        assert!((hr.abs() - level_torus_mean_curvature(&m)).abs() < 1e-15);
    }
}

#[test]
fn horocycle_length_is_the_integral_of_dx_over_y() {
    let m = CuspModel::product(3.0f64, 1.0);
    let y = 3.0;
    let oracle = simpson(|_| 1.0 / y, 0.0, 3.0, 2);
    assert_eq!(horocycle_length(&m, y).unwrap(), 1.0);
    assert!((oracle - 1.0).abs() < 1e-15);
}

#[test]
fn disk_diameter_maps_onto_a_geodesic() {
    let pts: Vec<(f64, f64)> = (-9..=9)
        .map(|k| disk_to_halfplane((0.0, k as f64 / 10.0)).unwrap())
        .collect();
    let (x1, y1) = pts[0];
    let (x2, y2) = pts[pts.len() - 1];
    if (x1 - x2).abs() < 1e-12 {
        assert!(pts.iter().all(|p| (p.0 - x1).abs() < 1e-12));
    } else {
        let c = (x1 * x1 + y1 * y1 - x2 * x2 - y2 * y2) / (2.0 * (x1 - x2));
        let r2 = (x1 - c).powi(2) + y1 * y1;
        for (x, y) in &pts {
            assert!(((x - c).powi(2) + y * y - r2).abs() < 1e-10);
        }
    }
    for p in &pts {
        let back = halfplane_to_disk(*p).unwrap();
        assert!(back.0.abs() < 1e-12);
    }
}

#[test]
fn ruled_curvature_vanishes_on_the_solution_point() {
    let app = -1.0 * (1.0 + 0.0) / (1.0 + 1.0);
    assert_eq!(app, -0.5);
    assert!(ruled_mean_curvature(1.0f64, 0.0, app, 1.0).unwrap().abs() < 1e-15);
    // The same point lies on the T = 2 curve: (1 + α′²)(1 + α²) = 2 at α = 1.
    let p = BarrierParams::new(1.0f64, 2.0);
    let c = integrate_alpha(p, default_step(&p)).unwrap();
    assert!((c.max_alpha() - 1.0).abs() < 1e-8);
}

#[test]
fn first_integral_holds_on_the_reference_curve() {
    let p = BarrierParams::new(1.0f64, 10.0);
    let c = integrate_alpha(p, default_step(&p)).unwrap();
    let worst = c
        .samples
        .iter()
        .map(|s| ((1.0 + s.alpha_prime.powi(2)) * (1.0 + s.alpha.powi(2)) - 10.0).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-8, "{worst}");
}

#[test]
fn quadrature_v0_agrees_with_integration() {
    for (l, t) in [(0.5f64, 2.0), (1.0, 10.0), (2.0, 100.0)] {
        let p = BarrierParams::new(l, t);
        let c = integrate_alpha(p, default_step(&p)).unwrap();
        let q = v0_of_t(l, t).unwrap();
        assert!((c.v0 - q).abs() < 1e-6, "({l},{t}): {} vs {q}", c.v0);
    }
}

#[test]
fn v0_grows_with_t_from_pi() {
    // With β = λα the first integral gives v0 = 2∫₀^{π/2} √(1 + (T − 1) sin²θ) dθ.
    for l in [0.5f64, 1.0, 2.0] {
        let v: Vec<f64> = [1.5, 2.0, 5.0, 10.0, 50.0, 200.0]
            .iter()
            .map(|&t| v0_of_t(l, t).unwrap())
            .collect();
        assert!(v[0] > PI && v.windows(2).all(|w| w[1] > w[0]), "{v:?}");
        for (&t, &v0) in [1.5, 2.0, 5.0, 10.0, 50.0, 200.0].iter().zip(&v) {
            let oracle = 2.0
                * simpson(
                    |th| (1.0 + (t - 1.0) * th.sin().powi(2)).sqrt(),
                    0.0,
                    PI / 2.0,
                    2000,
                );
            assert!((v0 - oracle).abs() < 1e-9, "T = {t}: {v0} vs {oracle}");
        }
    }
}

#[test]
fn compact_gap_respects_the_bound() {
    let g = compact_convergence_gap(1.0f64, 100.0, 1.0).unwrap();
    assert!(g <= 1.0 / 7.0 && g <= gap_bound(1.0, 100.0, 1.0));
    assert!((gap_bound(1.0f64, 100.0, 1.0) - 1.0 / 7.0).abs() < 1e-15);
    // Independent route: first crossing of α = M on the sampled curve.
    let p = BarrierParams::new(1.0f64, 100.0);
    let c = integrate_alpha(p, 1e-4).unwrap();
    let k = c.samples.iter().position(|s| s.alpha >= 1.0).unwrap();
    let (a, b) = (&c.samples[k - 1], &c.samples[k]);
    let v = a.v + (1.0 - a.alpha) / (b.alpha - a.alpha) * (b.v - a.v);
    assert!((v - g).abs() < 1e-6, "{v} vs {g}");
}

#[test]
fn horizontal_gap_is_arcsine() {
    let mut last = f64::INFINITY;
    for t in [2.0f64, 10.0, 100.0, 1e4] {
        let g = compact_convergence_gap(0.0, t, 1.0).unwrap();
        assert!((g - (1.0 / t).asin()).abs() < 1e-15);
        assert!(g < last);
        last = g;
    }
    assert!(last < 1e-3);
}

#[test]
fn end_type_of_constructed_curve() {
    let m = CuspModel::product(1.7f64, 0.6);
    let c = BoundaryCurve::from_fn(m, 300, |s| {
        (2.0 * s * m.tau, 3.0 * s * m.h + 0.1 * (2.0 * PI * s).sin())
    });
    assert_eq!(classify(&c).unwrap(), EndType { p: 2, q: 3 });
}

#[test]
fn diameter_and_k0_from_sine_extrema() {
    let m = CuspModel::product(2.0f64, 1.0);
    // 4k + 1 samples hit both extrema of the sine exactly.
    let c = BoundaryCurve::from_fn(m, 400, |s| (s * m.tau, 0.7 * (2.0 * PI * s).sin()));
    let g = diameter_g(&c);
    assert!((g - 1.4).abs() < 1e-12);
    assert_eq!(k0_of(1.4f64, 1.0).unwrap(), 2);
    assert_eq!(k0_of(g, 1.0).unwrap(), 2);
}

#[test]
fn slabs_from_functional_extrema() {
    let tau = 2.5f64;
    let m = CuspModel::product(tau, 1.0);
    let a = 0.7;
    let c = BoundaryCurve::from_fn(m, 400, |s| (s * tau, a * (2.0 * PI * s).sin()));
    let sl = slab_of_curve(&c, EndType { p: 1, q: 0 }).unwrap();
    assert!((sl.c_min + a * tau).abs() < 1e-12 && (sl.c_max - a * tau).abs() < 1e-12);
    let c = BoundaryCurve::from_fn(m, 400, |s| (0.3 * tau * (2.0 * PI * s).sin(), s));
    let sl = slab_of_curve(&c, EndType { p: 0, q: 1 }).unwrap();
    // For (0,1) the functional is −h·x.
    assert!((sl.c_min + 0.3 * tau).abs() < 1e-12 && (sl.c_max - 0.3 * tau).abs() < 1e-12);
}

/// Product distance from `p` to the plane `{ct·t + cx·x = c}` by dense
/// search over the plane's trace in the horizontal slice through `p`.
fn distance_to_plane(p: [f64; 3], ct: f64, cx: f64, c: f64) -> f64 {
    let mut best = f64::INFINITY;
    let n = 4000;
    for i in 0..=n {
        for yk in 0..=40 {
            let x = p[0] + (i as f64 / n as f64 - 0.5) * 4.0;
            let y = p[1] * (((yk as f64) / 40.0 - 0.5) * 0.02).exp();
            let t = (c - cx * x) / ct;
            let dh = dist_h2((p[0], p[1]), (x, y)).unwrap();
            best = best.min((dh * dh + (t - p[2]).powi(2)).sqrt());
        }
    }
    best
}

#[test]
fn offset_end_profile_matches_plane_distance() {
    let m = CuspModel::product(1.0f64, 1.0);
    let kind = EndType { p: 1, q: 1 };
    let end = StandardEnd {
        kind,
        constant: 0.0,
        model: m,
    };
    let shifted = StandardEnd {
        kind,
        constant: 0.2,
        model: m,
    };
    let mesh = standard_end_mesh(&shifted, (1.0, 16.0), 1.0, 5, 41).unwrap();
    let ys = [1.0, 2.0, 4.0, 8.0];
    let (prof, _) = asymptotic_distance_profile(&mesh, &end, &ys, 1e-9);
    let (ct, cx) = kind.functional(&m);
    for e in &prof {
        let v = mesh
            .vertices
            .iter()
            .find(|v| (v[1] - e.y).abs() < 1e-9)
            .unwrap();
        let oracle = distance_to_plane(*v, ct, cx, 0.0);
        assert!(
            (e.sup_distance - oracle).abs() < 2e-3 * oracle,
            "y = {}: {} vs {oracle}",
            e.y,
            e.sup_distance
        );
    }
    assert!(prof
        .windows(2)
        .all(|w| w[1].sup_distance < w[0].sup_distance));
}

#[test]
fn example_horizontal_end_approaches_its_standard_end() {
    let build = build_example(1, &ExampleParams::default()).unwrap();
    let e = build.ends.iter().find(|e| e.kind == "horizontal").unwrap();
    let mesh = e.mesh(&build.complex, e.y_unit);
    let end = StandardEnd {
        kind: EndType { p: 1, q: 0 },
        constant: 0.0,
        model: e.model,
    };
    let ladder: Vec<f64> = [2.0, 4.0, 8.0, 16.0].iter().map(|y| y * e.y_unit).collect();
    let (prof, _) = asymptotic_distance_profile(&mesh, &end, &ladder, 1e-6);
    assert!(prof.len() >= 4);
    assert!(
        prof.windows(2)
            .all(|w| w[1].sup_distance < w[0].sup_distance),
        "{prof:?}"
    );
    assert!(prof.last().unwrap().sup_distance < 1e-3 * prof[0].sup_distance.max(1e-3));
}

#[test]
fn tilted_plane_area_matches_separable_integral() {
    let lambda = 1.5;
    let oracle = simpson(
        |y| (1.0 + y * y * lambda * lambda).sqrt() / (y * y),
        1.0,
        2.0,
        2000,
    );
    let mesh = rectangle_mesh(0.0, 1.0, 1.0, 2.0, 32, 32, false);
    let u: Vec<f64> = mesh.vertices.iter().map(|v| lambda * v[0]).collect();
    let a = area(&mesh, Chart::HalfPlane, &u).unwrap();
    assert!((a - oracle).abs() < 1e-8, "{a} vs {oracle}");
}

#[test]
fn area_converges_at_second_order() {
    let f = |v: &[f64; 3]| (2.0 * v[0]).sin() * v[1];
    let values: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&n| {
            let mesh = rectangle_mesh(0.0, 1.0, 1.0, 2.0, n, n, false);
            let u: Vec<f64> = mesh.vertices.iter().map(f).collect();
            area(&mesh, Chart::HalfPlane, &u).unwrap()
        })
        .collect();
    let ratio = (values[1] - values[0]).abs() / (values[2] - values[1]).abs();
    assert!(ratio > 3.0, "{values:?} ratio {ratio}");
}

fn triangle(data: [BoundaryDatum; 3], lambda_trunc: Option<f64>) -> DomainProblem {
    DomainProblem {
        domain: HypDomain::IdealTriangle {
            vertices: [
                IdealPoint::Infinity,
                IdealPoint::Finite(0.0),
                IdealPoint::Finite(1.0),
            ],
        },
        data: data.to_vec(),
        lambda_trunc,
        resolution: Resolution { n: 8, m: 6 },
        y_cap: 16.0,
    }
}

#[test]
fn ideal_triangle_solution_stays_between_its_data() {
    let h = 1.3;
    let p = triangle(
        [
            BoundaryDatum::Finite(h),
            BoundaryDatum::Finite(0.0),
            BoundaryDatum::Finite(0.0),
        ],
        None,
    );
    let s = p.solve(&SolverOptions::default()).unwrap();
    assert!(s.residual <= 1e-8);
    assert!(s.u.iter().all(|&u| (0.0..=h).contains(&u)));
    assert!(s.max_u > 0.5 * h && s.min_u < 0.5 * h);
}

#[test]
fn truncation_ladder_is_monotone() {
    let mut prev: Option<Vec<f64>> = None;
    for lt in [2.0, 4.0, 8.0] {
        let p = triangle(
            [
                BoundaryDatum::PlusInf,
                BoundaryDatum::Finite(0.0),
                BoundaryDatum::Finite(0.0),
            ],
            Some(lt),
        );
        let s = p.solve(&SolverOptions::default()).unwrap();
        if let Some(prev) = &prev {
            assert_eq!(prev.len(), s.u.len());
            assert!(prev.iter().zip(&s.u).all(|(a, b)| *b >= a - 1e-9));
        }
        prev = Some(s.u);
    }
}

#[test]
fn plateau_residual_reaches_tolerance() {
    let h = 1.0;
    let corners = [
        [0.0, 1.0, 0.0],
        [1.0, 1.0, 0.0],
        [1.0, 1.0, h],
        [1.0, 2.0, h],
        [0.0, 2.0, h],
        [0.0, 2.0, 0.0],
    ];
    let r = solve_plateau(&corners, None, &PlateauOptions::default()).unwrap();
    assert!(r.residual <= 1e-4, "{}", r.residual);
    assert!(r.area_trace.last().unwrap() <= r.area_trace.first().unwrap());
}

#[test]
fn chart_change_preserves_the_solution() {
    let mesh = rectangle_mesh(-0.5, 0.5, 1.0, 2.0, 33, 33, true);
    let data = |v: &[f64; 3]| 0.8 * v[0] + 0.05 * (v[0] * 3.0).cos() * v[1].ln();
    let hp = GraphProblem::from_boundary(mesh.clone(), Chart::HalfPlane, |_, v| data(v)).unwrap();
    let a = solve(&hp, &SolverOptions::default()).unwrap();
    let mut disk = mesh.clone();
    for v in disk.vertices.iter_mut() {
        let (x, y) = halfplane_to_disk((v[0], v[1])).unwrap();
        v[0] = x;
        v[1] = y;
    }
    let dp = GraphProblem::new(disk, Chart::Disk, hp.dirichlet.clone()).unwrap();
    let b = solve(&dp, &SolverOptions::default()).unwrap();
    let gap =
        a.u.iter()
            .zip(&b.u)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
    assert!(gap < 1e-5, "{gap}");
}

#[test]
fn first_example_has_euler_characteristic_minus_one() {
    let b = build_example(1, &ExampleParams::default()).unwrap();
    assert_eq!(b.topology.chi, -1);
    assert_eq!(b.complex.euler_characteristic().unwrap(), -1);
}

/// Ideal triangle mesh doubled into a thrice-punctured sphere.
fn doubled_triangle(y_cap: f64) -> f64 {
    let m: TriMesh = standard_ideal_triangle(16, 12, y_cap).unwrap();
    let im = IntrinsicMesh::from_trimesh(&m);
    let all: Vec<usize> = (0..im.triangles.len()).collect();
    2.0 * intrinsic_area(&im, EdgeMetric::Hyperbolic, &all)
}

#[test]
fn totally_geodesic_area_ladder_meets_the_bound() {
    let cuts = [4.0, 8.0, 16.0];
    let ladder: Vec<(f64, f64)> = cuts.iter().map(|&y| (y, doubled_triangle(y))).collect();
    let r = area_bound_check(&ladder, 0, 3, 0.02).unwrap();
    assert!(!r.violation, "{r:?}");
    assert!(r.excess.abs() < 0.02 * r.bound, "{r:?}");
    assert!(ladder.windows(2).all(|w| w[1].1 > w[0].1));
}

#[test]
fn inflated_area_is_flagged() {
    let bound = 2.0 * PI * 2.0;
    let ladder = [(4.0, 1.1 * bound), (8.0, 1.1 * bound), (16.0, 1.1 * bound)];
    let r = area_bound_check(&ladder, 1, 2, 0.02).unwrap();
    assert!(r.violation);
    assert!((r.excess - 0.1 * bound).abs() < 1e-12);
}

#[test]
fn horizontal_end_slab_shrinks_up_the_cusp() {
    let b = build_example(1, &ExampleParams::default()).unwrap();
    let e = b.ends.iter().find(|e| e.kind == "horizontal").unwrap();
    let widths: Vec<f64> = [2.0, 4.0, 8.0]
        .iter()
        .map(|y| b.end_slab(e, y * e.y_unit).unwrap().envelope.width())
        .collect();
    assert!(widths.windows(2).all(|w| w[1] < w[0]), "{widths:?}");
}
