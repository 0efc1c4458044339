use std::f64::consts::PI;
use std::sync::OnceLock;

use anosovlab::flow::torus_rk4_step;
use anosovlab::geometry::TorusMetric;
use anosovlab::smfourier::*;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

fn curved() -> TorusMetric {
    TorusMetric::from_expr(1.0, 1.0, 64, 64, "0.25*sin(2*pi*x/Lx)*cos(2*pi*y/Ly)").unwrap()
}

fn mesh() -> &'static OctagonMesh {
    static MESH: OnceLock<OctagonMesh> = OnceLock::new();
    MESH.get_or_init(|| OctagonMesh::new(MeshConfig::default()).unwrap())
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn v_multiplies_mode_k_by_ik() {
    let g = SpectralGrid::new(&curved(), 16, 16);
    let h = g.sample(|x, y| C64::new(x.sin(), y.cos()));
    let u = SMField::single(3, 2, h.clone());
    let vu = apply_frame(&g, FrameOp::V, &u).unwrap();
    let expect: Vec<C64> = h.iter().map(|v| C64::new(0.0, 2.0) * v).collect();
    assert_eq!(vu.mode(2).unwrap(), expect.as_slice());
    for k in [-3, -2, -1, 0, 1, 3] {
        assert!(vu.is_zero_mode(k));
    }
}

#[test]
fn x_on_a_function_is_the_pair_of_eta_images() {
    let g = SpectralGrid::new(&curved(), 32, 32);
    let f = random_function(&g, 9, &mut rng(3));
    let xu = apply_frame(&g, FrameOp::X, &SMField::single(2, 0, f.clone())).unwrap();
    assert_eq!(xu.mode(1).unwrap(), g.eta_plus(0, &f).as_slice());
    assert_eq!(xu.mode(-1).unwrap(), g.eta_minus(0, &f).as_slice());
    for k in [-3, -2, 0, 2, 3] {
        assert!(xu.is_zero_mode(k));
    }
}

/// `(Xu)(x, θ)` compared with a central difference of `u` along the geodesic
/// through `(x, θ)`, integrated with RK4.
fn transport_derivative_error(metric: &TorusMetric, n: usize) -> f64 {
    let g = SpectralGrid::new(metric, n, n);
    let h = |x: f64, _y: f64| C64::from_polar(1.0, 2.0 * PI * x);
    let u = SMField::single(2, 1, g.sample(h));
    let xu = apply_frame(&g, FrameOp::X, &u).unwrap();
    let eval = |s: [f64; 3]| h(s[0], s[1]) * C64::from_polar(1.0, s[2]);
    let step = 1e-3;
    let nodes = g.nodes();
    let mut worst: f64 = 0.0;
    for i in (0..nodes.len()).step_by(37) {
        let (x, y) = nodes[i];
        for theta in [0.3, 1.9, 4.0] {
            let at = |t: f64| eval(torus_rk4_step(metric, [x, y, theta], t).unwrap());
            let fd = (8.0 * (at(step) - at(-step)) - (at(2.0 * step) - at(-2.0 * step))) / (12.0 * step);
            let grid: C64 = xu.levels().map(|k| xu.mode(k).unwrap()[i] * C64::from_polar(1.0, k as f64 * theta)).sum();
            worst = worst.max((fd - grid).norm());
        }
    }
    worst
}

#[test]
fn x_agrees_with_the_transport_derivative() {
    assert!(transport_derivative_error(&TorusMetric::flat(1.0, 1.0, 16, 16), 16) < 1e-7);
    let e = transport_derivative_error(&curved(), 32);
    assert!(e < 1e-7, "{e:e}");
}

#[test]
fn eta_symbols_on_the_flat_torus() {
    let (lx, ly) = (2.0, 1.5);
    let g = SpectralGrid::new(&TorusMetric::flat(lx, ly, 16, 16), 16, 16);
    let h = g.sample(|x, _| C64::from_polar(1.0, 2.0 * PI * x / lx));
    // ½(∂_x ± i∂_y) of e^{2πix/Lx} is (iπ/Lx) times the function
    let expect: Vec<C64> = h.iter().map(|v| C64::new(0.0, PI / lx) * v).collect();
    assert!(max_diff(&g.eta_minus(0, &h), &expect) < 1e-12);
    assert!(max_diff(&g.eta_plus(0, &h), &expect) < 1e-12);
    let wave = g.sample(|_, y| C64::from_polar(1.0, 2.0 * PI * y / ly));
    let expect: Vec<C64> = wave.iter().map(|v| C64::new(-PI / ly, 0.0) * v).collect();
    assert!(max_diff(&g.eta_minus(3, &wave), &expect) < 1e-12);
    // constants are the periodic holomorphic functions
    let c = vec![C64::new(0.7, -0.2); g.n_nodes()];
    assert!(g.eta_minus(0, &c).iter().all(|v| v.norm() < 1e-13));
}

#[test]
fn flat_torus_pestov_for_a_function_is_exact() {
    let g = SpectralGrid::new(&TorusMetric::flat(1.0, 1.0, 32, 32), 32, 32);
    let u = SMField::single(3, 0, random_function(&g, 12, &mut rng(5)));
    let r = pestov_residual(&g, &u).unwrap();
    assert!(r.residual < 1e-13, "{r:?}");
    let u = random_field(&g, 6, 4, 12, &mut rng(6));
    assert!(pestov_residual(&g, &u).unwrap().residual < 1e-12);
}

#[test]
fn pestov_residual_on_resolved_curved_grids() {
    let m = curved();
    for n in [32, 64] {
        let g = SpectralGrid::new(&m, n, n);
        let u = random_field(&g, 6, 4, 16, &mut rng(7));
        let r = pestov_residual(&g, &u).unwrap();
        assert!(r.residual < 1e-9, "n = {n}: {r:?}");
    }
}

#[test]
fn pestov_residual_drops_under_refinement() {
    // a narrow bump keeps the coarse grid under-resolved
    let m = TorusMetric::from_expr(1.0, 1.0, 64, 64, "0.3*exp(-(sin(pi*x)^2+sin(pi*y)^2)/0.03)").unwrap();
    let res = |n: usize| {
        let g = SpectralGrid::new(&m, n, n);
        let u = random_field(&g, 6, 4, 9, &mut rng(8));
        pestov_residual(&g, &u).unwrap().residual
    };
    let (coarse, fine) = (res(32), res(64));
    assert!(coarse > 1e-8, "coarse grid unexpectedly resolved: {coarse:e}");
    assert!(coarse / fine >= 3.5, "{coarse:e} -> {fine:e}");
}

#[test]
fn pestov_residual_on_the_octagon_mesh() {
    let b = mesh();
    let u = random_field(b, 4, 2, 9, &mut rng(9));
    let r = pestov_residual(b, &u).unwrap();
    assert!(r.residual < 1e-3, "{r:?}");
}

#[test]
fn structure_equations_on_the_spectral_grid() {
    let g = SpectralGrid::new(&curved(), 64, 64);
    let u = random_field(&g, 5, 3, 16, &mut rng(10));
    let s = structure_residuals(&g, &u).unwrap();
    assert!(s.xv < 1e-12 && s.vxperp < 1e-12, "{s:?}");
    assert!(s.xxperp < 1e-8, "{s:?}");
    assert!(s.eta_adjoint < 1e-12 && s.x_antisymmetry < 1e-8, "{s:?}");
}

#[test]
fn structure_equations_improve_under_refinement() {
    let m = TorusMetric::from_expr(1.0, 1.0, 64, 64, "0.3*exp(-(sin(pi*x)^2+sin(pi*y)^2)/0.03)").unwrap();
    let res = |n: usize| {
        let g = SpectralGrid::new(&m, n, n);
        structure_residuals(&g, &random_field(&g, 4, 2, 9, &mut rng(11))).unwrap().xxperp
    };
    assert!(res(64) < res(32));
}

#[test]
fn eta_adjoint_defect_on_the_octagon_is_at_discretization_level() {
    let b = mesh();
    let mut r = rng(12);
    for k in 0..3 {
        let u = random_field(b, 3, 3, 9, &mut r);
        let d = eta_adjoint_defect(b, k, u.mode(k).unwrap(), u.mode(k + 1).unwrap());
        assert!(d < 5e-3, "level {k}: {d:e}");
    }
}

#[test]
fn alpha_on_the_flat_torus_is_one() {
    let g = SpectralGrid::new(&TorusMetric::flat(1.0, 1.0, 16, 16), 16, 16);
    let est = alpha_lower_bound(&g, 2, 9).unwrap();
    assert!((est.alpha - 1.0).abs() < 1e-9, "{est:?}");
    // the constants are in the test space and are deflated
    assert!(est.null_dim >= 1);
}

#[test]
fn alpha_on_the_octagon_is_at_least_one() {
    let est = alpha_lower_bound(mesh(), 1, 6).unwrap();
    assert!(est.alpha >= 1.0 - 1e-6, "{est:?}");
}

#[test]
fn alpha_on_a_positively_curved_torus_is_below_one() {
    let m = TorusMetric::from_expr(1.0, 1.0, 32, 32, "0.4*cos(2*pi*x/Lx)").unwrap();
    let g = SpectralGrid::new(&m, 32, 32);
    let est = alpha_lower_bound(&g, 1, 9).unwrap();
    assert!(est.alpha < 1.0, "{est:?}");
}

#[test]
fn alpha_of_a_profile_matches_constant_curvature() {
    use anosovlab::flow::CurvatureProfile;
    // K ≡ -1: the constants are negative for (Kψ,ψ) and are eliminated
    let est = alpha_lower_bound_profile(&CurvatureProfile::constant("K=-1", -1.0), 8).unwrap();
    assert!(est.alpha >= 1.0 - 1e-12, "{est:?}");
    // K > 0: the constants have Xψ = 0 but (Kψ,ψ) > 0
    let est = alpha_lower_bound_profile(&CurvatureProfile::constant("K=1/4", 0.25), 8).unwrap();
    assert!(est.alpha == f64::NEG_INFINITY, "{est:?}");
}

#[test]
fn q1_identity_examples() {
    let g = SpectralGrid::new(&curved(), 32, 32);
    for m in [1, 2, 3] {
        let u = random_field(&g, 6, 5, 9, &mut rng(13 + m as u64));
        let r = q1_identity(&g, &u, m).unwrap();
        assert!(r.residual < 1e-13, "m = {m}: {r:?}");
    }
}

#[test]
fn quantitative_inequality_on_the_octagon() {
    let b = mesh();
    let alpha = alpha_lower_bound(b, 1, 6).unwrap().alpha;
    let mut u = random_field(b, 4, 3, 9, &mut rng(17));
    u.set_mode(0, vec![C64::new(0.0, 0.0); b.n_nodes()]);
    let r = verify_quantitative_inequality(b, &u, 1, alpha).unwrap();
    assert!(r.positive_coefficients);
    assert!(r.slack >= -1e-8 * r.lhs.max(1.0), "{r:?}");
}

#[test]
fn quantitative_inequality_of_zero_is_an_equality() {
    let g = SpectralGrid::new(&curved(), 16, 16);
    let r = verify_quantitative_inequality(&g, &SMField::zeros(3, g.n_nodes()), 1, 1.0).unwrap();
    assert_eq!((r.lhs, r.rhs, r.slack), (0.0, 0.0, 0.0));
}

#[test]
fn quantitative_coefficients_at_m_two() {
    // α > (m-1)/(m+1) = 1/3 makes both coefficients positive
    let (c1, c2) = quantitative_coefficients(2, 0.34);
    assert!(c1 > 0.0 && c2 > 0.0);
    let (c1, _) = quantitative_coefficients(2, 0.33);
    assert!(c1 < 0.0);
    let r = verify_quantitative_inequality(mesh(), &SMField::zeros(3, mesh().n_nodes()), 2, 1.0).unwrap();
    assert!(r.positive_coefficients);
}

#[test]
fn quantitative_inequality_rejects_low_modes() {
    let g = SpectralGrid::new(&curved(), 16, 16);
    let u = random_field(&g, 3, 1, 4, &mut rng(18));
    assert!(verify_quantitative_inequality(&g, &u, 2, 1.0).is_err());
    assert!(verify_quantitative_inequality(&g, &u, 0, 1.0).is_err());
}

#[test]
fn transport_bound_holds_without_conjugate_points() {
    let b = mesh();
    let mut r = rng(19);
    for _ in 0..3 {
        let u = random_field(b, 3, 3, 9, &mut r);
        let t = transport_bound_check(b, &u).unwrap();
        assert!(t.margin >= -1e-8 * t.x_norm, "{t:?}");
    }
}

#[test]
fn adjoint_transport_of_zero_is_zero() {
    let g = SpectralGrid::new(&curved(), 16, 16);
    let s = solve_adjoint_transport(&g, &SMField::zeros(4, g.n_nodes()), 0, 1e-10, 1e-8, 100).unwrap();
    assert!(s.converged && s.residual == 0.0);
    assert!(s.h.levels().all(|k| s.h.is_zero_mode(k)));
}

#[test]
fn adjoint_transport_recovers_a_planted_solution() {
    let g = SpectralGrid::new(&curved(), 32, 32);
    let one = ONE;
    for m in [0usize, 1] {
        let mut h0 = random_field(&g, 4, 4, 9, &mut rng(20 + m as u64));
        for k in -(m as i32)..=(m as i32) {
            h0.set_mode(k, vec![C64::new(0.0, 0.0); g.n_nodes()]);
        }
        let vh = apply_frame(&g, FrameOp::V, &h0).unwrap();
        let f = apply_frame(&g, FrameOp::X, &vh).unwrap();
        let s = solve_adjoint_transport(&g, &f, m, 1e-14, 1e-9, 4000).unwrap();
        assert!(s.converged && s.residual <= 1e-8, "m = {m}: residual {:e} after {}", s.residual, s.iterations);
        let vh = apply_frame(&g, FrameOp::V, &s.h).unwrap();
        let back = apply_frame(&g, FrameOp::X, &vh).unwrap();
        let diff = back.lincomb(one, &f, -one);
        assert!(norm(&g, &diff) <= 1e-8 * norm(&g, &f));
    }
}

#[test]
fn adjoint_transport_residual_falls_with_the_truncation() {
    let g = SpectralGrid::new(&curved(), 32, 32);
    let gfun = random_function(&g, 9, &mut rng(22));
    let mut last = f64::INFINITY;
    for n in [2usize, 4, 8] {
        let f = apply_frame(&g, FrameOp::X, &SMField::single(n - 1, 0, gfun.clone())).unwrap().scale(-ONE);
        let s = solve_adjoint_transport(&g, &f, 0, 1e-12, 1e-12, 400).unwrap();
        assert!(s.residual < last, "n_modes {n}: {:e} after {last:e}", s.residual);
        last = s.residual;
    }
}

#[test]
fn constant_data_extends_to_a_constant() {
    let g = SpectralGrid::new(&curved(), 16, 16);
    let solver = ChainSolver::new(&g);
    let f = vec![C64::new(2.5, 0.0); g.n_nodes()];
    let ext = invariant_extension(&solver, &ExtensionVariant::W0 { f }, 6).unwrap();
    assert!(ext.w.levels().filter(|k| *k != 0).all(|k| norm(&g, &SMField::single(6, k, ext.w.mode(k).unwrap().to_vec())) < 1e-12));
    assert!(ext.ladder.max_interior < 1e-12);
}

#[test]
fn extension_on_the_octagon_satisfies_the_ladder() {
    let b = mesh();
    let solver = ChainSolver::new(b);
    let f = random_function(b, 9, &mut rng(23));
    let ext = invariant_extension(&solver, &ExtensionVariant::W0 { f: f.clone() }, 6).unwrap();
    assert_eq!(ext.w.mode(0).unwrap(), f.as_slice());
    assert!(ext.ladder.relative <= 1e-6, "{:?}", ext.ladder);
    assert!(ext.parity_defect <= 1e-12);
    assert!(!ext.ladder.boundary.is_empty());
    assert!(ext.growth_slope.is_some());
}

#[test]
fn extension_fails_where_the_chain_is_singular() {
    // on a torus the first raising operator kills e^{λ}, so generic data has
    // no upward chain and the level solver must report it
    let g = SpectralGrid::new(&curved(), 32, 32);
    let solver = ChainSolver::new(&g);
    let f = random_function(&g, 9, &mut rng(24));
    let err = invariant_extension(&solver, &ExtensionVariant::W0 { f }, 6).unwrap_err();
    assert!(matches!(err, anosovlab::Error::Solver(_)), "{err}");
}

#[test]
fn holomorphic_first_mode_extension() {
    let b = mesh();
    let solver = ChainSolver::new(b);
    let ker = holomorphic_kernel(&solver, 1, 2, 5).unwrap();
    for (a, q) in &ker {
        assert!(*q < 1e-4, "Rayleigh quotient {q:e}");
        let ext = invariant_extension(&solver, &ExtensionVariant::W1 { a1: a.clone(), am1: None }, 5).unwrap();
        assert_eq!(ext.w.mode(1).unwrap(), a.as_slice());
        assert!(ext.w.levels().filter(|k| *k <= 0).all(|k| ext.w.is_zero_mode(k)));
    }
}

#[test]
fn higher_mode_extension_keeps_the_prescribed_mode() {
    let g = SpectralGrid::new(&TorusMetric::flat(1.0, 1.0, 16, 16), 16, 16);
    let solver = ChainSolver::new(&g);
    // on the flat torus constants are holomorphic on every level
    let q = vec![C64::new(1.0, 1.0); g.n_nodes()];
    let ext = invariant_extension(&solver, &ExtensionVariant::Wm { m: 2, q: q.clone() }, 6).unwrap();
    assert_eq!(ext.w.mode(2).unwrap(), q.as_slice());
    assert!(ext.ladder.max_interior < 1e-12);
}

#[test]
fn extension_rejects_short_truncations() {
    let g = SpectralGrid::new(&curved(), 8, 8);
    let solver = ChainSolver::new(&g);
    let f = vec![C64::new(1.0, 0.0); g.n_nodes()];
    assert!(invariant_extension(&solver, &ExtensionVariant::W0 { f: f.clone() }, 1).is_err());
    assert!(invariant_extension(&solver, &ExtensionVariant::Wm { m: 3, q: f }, 4).is_err());
}

#[test]
fn product_with_one_is_the_identity() {
    let g = SpectralGrid::new(&curved(), 16, 16);
    let u = SMField::single(2, 0, vec![ONE; g.n_nodes()]);
    let mut v = random_field(&g, 3, 3, 4, &mut rng(25));
    for k in -3..0 {
        v.set_mode(k, vec![C64::new(0.0, 0.0); g.n_nodes()]);
    }
    let (w, _) = fourier_product(&g, &u, &v, 1.0, 1.0).unwrap();
    for k in w.levels() {
        match v.mode(k) {
            Some(h) => assert_eq!(w.mode(k).unwrap(), h),
            None => assert!(w.is_zero_mode(k)),
        }
    }
}

#[test]
fn product_of_a_single_first_mode_squares_it() {
    let g = SpectralGrid::new(&curved(), 16, 16);
    let a = g.sample(|x, y| C64::new(x.cos(), y));
    let u = SMField::single(2, 1, a.clone());
    let (w, _) = fourier_product(&g, &u, &u, 1.0, 1.0).unwrap();
    let sq: Vec<C64> = a.iter().map(|v| v * v).collect();
    assert_eq!(w.mode(2).unwrap(), sq.as_slice());
    assert!(w.levels().filter(|k| *k != 2).all(|k| w.is_zero_mode(k)));
}

#[test]
fn product_rejects_negative_modes() {
    let g = SpectralGrid::new(&curved(), 8, 8);
    let u = SMField::single(2, -1, vec![ONE; g.n_nodes()]);
    assert!(fourier_product(&g, &u, &u, 1.0, 1.0).is_err());
}

#[test]
fn product_of_planted_invariant_fields() {
    let b = mesh();
    let solver = ChainSolver::new(b);
    let ker = holomorphic_kernel(&solver, 1, 2, 7).unwrap();
    let ext = |a: &Vec<C64>| invariant_extension(&solver, &ExtensionVariant::W1 { a1: a.clone(), am1: None }, 8).unwrap().w;
    let (u, v) = (ext(&ker[0].0), ext(&ker[1].0));
    let (_, rep) = fourier_product(b, &u, &v, 1.0, 1.0).unwrap();
    assert!(rep.ladder.relative <= 1e-6, "{:?}", rep.ladder);
    assert!(rep.max_ratio <= 1.0, "{:?}", rep.l1_ratios);
}

#[test]
fn ladder_of_constants_and_of_noise() {
    let g = SpectralGrid::new(&curved(), 16, 16);
    let c = SMField::single(4, 0, vec![ONE; g.n_nodes()]);
    assert!(ladder_residual(&g, &c).unwrap().max_interior < 1e-13);
    let r = ladder_residual(&g, &random_field(&g, 4, 4, 9, &mut rng(26))).unwrap();
    assert!(r.relative > 1e-3);
    assert_eq!(r.interior.len(), 5);
    assert_eq!(r.boundary.len(), 4);
}

#[test]
fn mixed_norm_weights_modes() {
    let g = SpectralGrid::new(&TorusMetric::flat(1.0, 1.0, 8, 8), 8, 8);
    let u = SMField::single(3, 2, vec![ONE; g.n_nodes()]);
    let l2 = norm(&g, &u);
    assert!((mixed_norm(&g, &u, 0.0).value - l2).abs() < 1e-12);
    assert!((mixed_norm(&g, &u, -1.0).value - l2 / 5.0_f64.sqrt()).abs() < 1e-12);
    // the measure of SM is 2π times the area
    assert!((l2 * l2 - 2.0 * PI).abs() < 1e-12);
}

#[test]
fn octagon_mesh_quadrature_has_the_right_area() {
    let b = mesh();
    let total: f64 = b.weights().iter().sum();
    assert!((total - 8.0 * PI * PI).abs() < 1e-9);
    assert!(b.curvature().iter().all(|k| *k == -1.0));
    assert!(OctagonMesh::new(MeshConfig { spacing: 0.0, ..MeshConfig::default() }).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn eta_plus_and_minus_are_negative_adjoints(seed in 0u64..1000, k in -3i32..3) {
        let g = SpectralGrid::new(&curved(), 16, 16);
        let mut r = rng(seed);
        let u = random_field(&g, 4, 4, 9, &mut r);
        let d = eta_adjoint_defect(&g, k, u.mode(k).unwrap(), u.mode(k + 1).unwrap());
        prop_assert!(d <= 1e-8);
    }

    #[test]
    fn frame_fields_are_antisymmetric(seed in 0u64..1000) {
        let g = SpectralGrid::new(&curved(), 16, 16);
        let mut r = rng(seed);
        let u = random_field(&g, 3, 3, 9, &mut r);
        let v = random_field(&g, 3, 3, 9, &mut r);
        for op in [FrameOp::X, FrameOp::XPerp, FrameOp::V] {
            let (au, av) = (apply_frame(&g, op, &u).unwrap(), apply_frame(&g, op, &v).unwrap());
            let s = inner(&g, &au, &v.with_modes(au.n_modes())) + inner(&g, &u.with_modes(av.n_modes()), &av);
            prop_assert!(s.norm() <= 1e-8 * norm(&g, &u) * norm(&g, &v) * 10.0);
        }
    }

    #[test]
    fn x_flips_vertical_parity(seed in 0u64..1000, odd in any::<bool>()) {
        let g = SpectralGrid::new(&curved(), 8, 8);
        let mut u = random_field(&g, 4, 4, 4, &mut rng(seed));
        let p = i32::from(odd);
        for k in -4..=4 {
            if (k - p).rem_euclid(2) != 0 {
                u.set_mode(k, vec![C64::new(0.0, 0.0); g.n_nodes()]);
            }
        }
        let xu = apply_frame(&g, FrameOp::X, &u).unwrap();
        for k in xu.levels() {
            if (k - p).rem_euclid(2) == 0 {
                prop_assert!(xu.is_zero_mode(k));
            }
        }
    }

    #[test]
    fn q1_identity_holds_to_roundoff(seed in 0u64..1000, m in 1usize..4) {
        let g = SpectralGrid::new(&curved(), 16, 16);
        let u = random_field(&g, 5, 5, 6, &mut rng(seed));
        prop_assert!(q1_identity(&g, &u, m).unwrap().residual <= 1e-13);
    }

    #[test]
    fn reality_is_preserved_by_x(seed in 0u64..1000) {
        let g = SpectralGrid::new(&curved(), 16, 16);
        let f = random_function(&g, 9, &mut rng(seed));
        let u = SMField::single(2, 0, f);
        prop_assert!(u.reality_defect() == 0.0);
        let xu = apply_frame(&g, FrameOp::X, &u).unwrap();
        prop_assert!(xu.reality_defect() <= 1e-12);
    }

    #[test]
    fn quantitative_inequality_with_alpha_one_on_flat_tori(seed in 0u64..1000, m in 1usize..3) {
        let g = SpectralGrid::new(&TorusMetric::flat(1.0, 1.0, 16, 16), 16, 16);
        let mut u = random_field(&g, 5, 5, 6, &mut rng(seed));
        for k in -(m as i32 - 1)..=(m as i32 - 1) {
            u.set_mode(k, vec![C64::new(0.0, 0.0); g.n_nodes()]);
        }
        let r = verify_quantitative_inequality(&g, &u, m, 1.0).unwrap();
        prop_assert!(r.slack >= -1e-8 * r.lhs.max(1.0));
    }
}
