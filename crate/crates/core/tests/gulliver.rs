use std::f64::consts::PI;

use anosovlab::cocycle::{first_conjugate_time, terminator_bisect, TerminatorConfig};
use anosovlab::gulliver::{
    certify, feasibility, max_feasible_beta, search_params, solve_r2, synth_profile, GulliverParams, SearchConfig,
    PI_2SQRT2,
};
use anosovlab::Error;
use proptest::prelude::*;

fn residual(b: f64, r1: f64, r2: f64) -> f64 {
    let lhs = if b == 0.0 { r1 } else { (b * r1).sin() / b };
    (lhs - (r1 - r2).sinh()).abs()
}

/// Plain bisection on `g(r₂) = sin(b r₁)/b - sinh(r₁ - r₂)`, increasing in r₂.
fn bisect_r2(b: f64, r1: f64) -> f64 {
    let g = |r2: f64| (b * r1).sin() / b - (r1 - r2).sinh();
    let (mut lo, mut hi) = (0.0, r1);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn r2_examples() {
    let r1 = 2.0;
    let r2 = solve_r2(1e-9, r1).unwrap();
    assert!((r2 - (r1 - r1.asinh())).abs() < 1e-12);
    assert!((solve_r2(0.0, r1).unwrap() - (r1 - r1.asinh())).abs() < 1e-15);

    let b = 0.02;
    let r1 = PI_2SQRT2 / b + 0.1;
    let r2 = solve_r2(b, r1).unwrap();
    assert!(residual(b, r1, r2) <= 1e-12 * r1);
    assert!((r2 - bisect_r2(b, r1)).abs() < 1e-9);

    let b = 0.5;
    let r1 = (PI / 2.0 - 1e-15) / b;
    let r2 = solve_r2(b, r1).unwrap();
    assert!(residual(b, r1, r2) <= 1e-10);
    assert!(matches!(solve_r2(0.5, PI), Err(Error::Domain(_))));
}

#[test]
fn feasibility_examples() {
    let b = 0.02;
    let delta = 0.1;
    let r1 = PI_2SQRT2 / b + delta;
    let r2 = solve_r2(b, r1).unwrap();
    let collar = 3.0 + (r1 + 0.05) - r2;
    let p = GulliverParams::new(b, r1, 0.05, delta, collar, 1.75).unwrap();
    assert!((1.75f64.sqrt() * p.r_prime).tanh() > 0.5);
    let f = feasibility(&p, 1.75);
    assert!(f.conjugate_point_free && f.cond1_margin > 0.0 && f.cond2_margin > 0.0);
    assert!(p.forces_below_two());
    assert!(!feasibility(&p, 2.0).conjugate_point_free);
    assert!(feasibility(&p, 0.0).conjugate_point_free);
}

#[test]
fn search_examples() {
    let p = search_params(1.75, SearchConfig::default()).unwrap();
    assert!(feasibility(&p, 1.75).conjugate_point_free && p.forces_below_two());
    let q = search_params(1.51, SearchConfig::default()).unwrap();
    assert!(q.b >= p.b);
    let r = search_params(1.999, SearchConfig::default()).unwrap();
    assert!(r.b < p.b && feasibility(&r, 1.999).cond1_margin < 1e-3);
    assert!(matches!(search_params(2.05, SearchConfig::default()), Err(Error::Domain(_))));
    assert!(matches!(search_params(1.5, SearchConfig::default()), Err(Error::Domain(_))));
}

#[test]
fn density_grid_certifies() {
    let cfg = TerminatorConfig::default();
    for i in 0..5 {
        let beta = 1.55 + 0.1 * i as f64;
        let p = search_params(beta, SearchConfig::default()).unwrap();
        let c = certify(&p, cfg).unwrap();
        assert!(c.window_ok, "beta {beta}: {}", c.terminator.summary());
    }
}

#[test]
fn certified_window_for_1_75() {
    let p = search_params(1.75, SearchConfig::default()).unwrap();
    let c = certify(&p, TerminatorConfig::default()).unwrap();
    assert!(c.terminator.beta_lo >= 1.749);
    assert!(c.terminator.beta_hi.unwrap() < 2.0);
    // the cond2 equality is the exact threshold of the extremal profile
    let exact = max_feasible_beta(&p, 1e-9);
    assert!(c.terminator.beta_lo <= exact + 1e-9 && exact <= c.terminator.beta_hi.unwrap() + 1e-9);
}

#[test]
fn flat_cap_has_no_conjugate_points() {
    let p = GulliverParams::new(0.0, 2.0, 0.1, 0.1, 5.0, 1.75).unwrap();
    let c = terminator_bisect(&[synth_profile(&p)], TerminatorConfig::default()).unwrap();
    assert!(c.exceeds_beta_max);
}

#[test]
fn violated_cond2_gives_conjugate_point() {
    let p = search_params(1.75, SearchConfig::default()).unwrap();
    let beta = max_feasible_beta(&p, 1e-9) + 0.01;
    assert!(!feasibility(&p, beta).conjugate_point_free);
    assert!(first_conjugate_time(&synth_profile(&p), beta, 1e5).is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn longer_collar_raises_feasible_beta(b in 0.01f64..0.2, extra in 0.1f64..3.0) {
        let r1 = PI_2SQRT2 / b + 0.05;
        let r2 = solve_r2(b, r1).unwrap();
        let eps = 0.01f64.min(0.5 * (r1 - r2));
        let base = r1 + eps - r2 + 0.2;
        let short = GulliverParams::new(b, r1, eps, 0.05, base, 1.75).unwrap();
        let long = GulliverParams::new(b, r1, eps, 0.05, base + extra, 1.75).unwrap();
        prop_assert!(max_feasible_beta(&long, 1e-10) > max_feasible_beta(&short, 1e-10));
    }

    #[test]
    fn r2_root_has_small_residual(b in 0.001f64..1.0, frac in 0.01f64..0.999) {
        let r1 = frac * PI / 2.0 / b;
        let r2 = solve_r2(b, r1).unwrap();
        prop_assert!(r2 > 0.0 && r2 < r1);
        prop_assert!(residual(b, r1, r2) <= 1e-12 * r1.max(1.0));
    }
}
