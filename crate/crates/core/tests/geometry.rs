use std::f64::consts::PI;

use anosovlab::geometry::{
    build_octagon, closed_geodesic_from_word, curvature_at, reduce_to_fundamental_domain, word_pool, SurfaceModel,
    TorusMetric,
};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

#[test]
fn generators_are_unimodular_and_relator_is_identity() {
    let oct = build_octagon();
    for g in &oct.generators {
        assert!((g.det() - 1.0).norm() < 1e-12);
    }
    for m in &oct.sl2r {
        assert!((m[0] * m[3] - m[1] * m[2] - 1.0).abs() < 1e-12);
    }
    let r = oct.relator();
    let scale = r.a.norm();
    let (a, b, c, d) = (r.a / scale, r.b / scale, r.c / scale, r.d / scale);
    let err = [(a - 1.0).norm().min((a + 1.0).norm()), b.norm(), c.norm(), (d - a).norm()];
    assert!(err.iter().all(|e| *e < 1e-9), "relator {r:?}");
}

#[test]
fn octagon_area_is_four_pi() {
    let oct = build_octagon();
    assert!((oct.area() - 4.0 * PI).abs() < 1e-6, "area {}", oct.area());
}

#[test]
fn shortest_generator_length_matches_trace_formula() {
    let oct = build_octagon();
    let g1 = &oct.sl2r[0];
    let expected = 2.0 * ((g1[0] + g1[3]).abs() / 2.0).acosh();
    let geo = closed_geodesic_from_word(&oct, &[0], 256).unwrap().unwrap();
    assert!((geo.period - expected).abs() < 1e-10);
    let pool = word_pool(&oct, 2);
    assert!((pool[0].length - expected).abs() < 1e-10);
}

#[test]
fn two_letter_word_is_longer_than_its_letters() {
    let oct = build_octagon();
    let l1 = closed_geodesic_from_word(&oct, &[0], 64).unwrap().unwrap().period;
    let l3 = closed_geodesic_from_word(&oct, &[2], 64).unwrap().unwrap().period;
    let l13 = closed_geodesic_from_word(&oct, &[0, 2], 64).unwrap().unwrap().period;
    assert!(l13 > l1.max(l3));
}

#[test]
fn word_geodesics_close_up_inside_the_octagon() {
    let oct = build_octagon();
    for e in word_pool(&oct, 3).iter().take(30) {
        let geo = closed_geodesic_from_word(&oct, &e.word, 512).unwrap().unwrap();
        assert!(geo.closure_error < 1e-6, "{:?}: {}", e.word, geo.closure_error);
        assert!(geo.orbit.iter().all(|p| oct.contains(p.z(), 1e-9)));
    }
}

#[test]
fn pool_up_to_length_six_has_two_hundred_lengths() {
    let oct = build_octagon();
    let pool = word_pool(&oct, 6);
    assert!(pool.len() >= 200, "only {} distinct lengths", pool.len());
    assert!(pool.windows(2).all(|w| w[0].length <= w[1].length));
}

#[test]
fn reduction_undoes_a_generator() {
    let oct = build_octagon();
    let q = C64::new(0.1, -0.2);
    let (p, h) = reduce_to_fundamental_domain(&oct, q).unwrap();
    assert_eq!(p, q);
    assert!((h.a - 1.0).norm() < 1e-15 && h.b.norm() < 1e-15);
    let z = oct.generators[0].apply(q);
    let (p, h) = reduce_to_fundamental_domain(&oct, z).unwrap();
    assert!((p - q).norm() < 1e-12);
    assert!(h.dist_projective(&oct.generators[4]) < 1e-9);
}

#[test]
fn reduction_rejects_boundary_points() {
    let oct = build_octagon();
    assert!(reduce_to_fundamental_domain(&oct, C64::new(1.0 - 1e-13, 0.0)).is_err());
}

#[test]
fn torus_curvature_integrates_to_zero() {
    let lx = 2.0;
    let ly = 1.5;
    let m = TorusMetric::from_expr(lx, ly, 64, 64, "0.2*cos(2*pi*x/Lx)*sin(2*pi*y/Ly) + 0.1*sin(4*pi*x/Lx)").unwrap();
    let model = SurfaceModel::ConformalTorus(m.clone());
    let n = 64;
    let mut total = 0.0;
    let mut area = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (lx * i as f64 / n as f64, ly * j as f64 / n as f64);
            let w = (2.0 * m.lambda(x, y)).exp();
            total += curvature_at(&model, x, y).unwrap() * w;
            area += w;
        }
    }
    assert!(total.abs() <= 1e-6 * area, "{total} vs area {area}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cyclic_permutation_preserves_length(word in proptest::collection::vec(0usize..8, 1..6), shift in 0usize..6) {
        let oct = build_octagon();
        let g = oct.word_element(&word);
        let tr = g.trace().re.abs();
        prop_assume!(tr > 2.0 + 1e-6);
        let s = shift % word.len();
        let rotated: Vec<usize> = word[s..].iter().chain(&word[..s]).copied().collect();
        let a = closed_geodesic_from_word(&oct, &word, 8).unwrap().unwrap().period;
        let b = closed_geodesic_from_word(&oct, &rotated, 8).unwrap().unwrap().period;
        prop_assert!((a - b).abs() < 1e-10 * a.max(1.0));
    }

    #[test]
    fn deep_points_reduce_into_the_octagon(r in 0.0f64..0.999, phi in 0.0f64..(2.0 * PI)) {
        let oct = build_octagon();
        let (p, h) = reduce_to_fundamental_domain(&oct, C64::from_polar(r, phi)).unwrap();
        prop_assert!(oct.contains(p, 1e-9));
        prop_assert!((h.apply(C64::from_polar(r, phi)) - p).norm() < 1e-8);
    }
}
