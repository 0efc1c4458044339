use std::f64::consts::PI;
use std::sync::OnceLock;

use anosovlab::flow::find_closed_geodesics;
use anosovlab::geometry::{build_octagon, closed_geodesic_from_word, word_pool, ClosedGeodesic, TorusMetric};
use anosovlab::smfourier::{level_norm2, MeshConfig, OctagonMesh, SMField, SmBackend, SpectralGrid};
use anosovlab::xray::*;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

fn octagon_model() -> TensorModel {
    TensorModel::Octagon(build_octagon())
}

/// Word geodesics up to length 4, sampled at 32 points per unit length.
fn short_pool() -> &'static Vec<ClosedGeodesic> {
    static POOL: OnceLock<Vec<ClosedGeodesic>> = OnceLock::new();
    POOL.get_or_init(|| {
        let oct = build_octagon();
        word_pool(&oct, 4)
            .iter()
            .filter_map(|e| closed_geodesic_from_word(&oct, &e.word, ((32.0 * e.length) as usize).max(64)).unwrap())
            .collect()
    })
}

fn gaussian(center: C64, sigma: f64) -> Atom {
    Atom::DiskGaussian { center, sigma }
}

/// Degree `m - 1` tensor with one Gaussian per centre on every level of its
/// band.
fn band_field(m: usize, centers: &[C64]) -> SymTensorField {
    let mut h = SymTensorField::zero(m - 1);
    let top = m as i32 - 1;
    for (i, k) in (-top..=top).step_by(2).enumerate() {
        for (j, c) in centers.iter().enumerate() {
            let t = SymTensorField::atom(m - 1, k, gaussian(*c, 2.0 + j as f64), C64::new(1.0 + i as f64, 0.4 * j as f64));
            h = h.add(&t.unwrap()).unwrap();
        }
    }
    h
}

#[test]
fn constant_transforms_to_period_times_constant() {
    let m = TorusMetric::from_expr(1.0, 1.0, 32, 32, "0.2*sin(2*pi*x)").unwrap();
    let model = TensorModel::Torus(m.clone());
    let f = SymTensorField::atom(0, 0, Atom::TorusWave { a: 0, b: 0 }, C64::new(3.0, 0.0)).unwrap();
    // λ depends on x only, so x = 0.25 (where λ_x = 0) is a closed geodesic
    let geo = vertical_torus_geodesic(&m, 0.25, 64);
    let i = ray_transform(&model, &f, &geo).unwrap();
    assert!((i - 3.0 * geo.period).norm() < 1e-12);
    let shot = find_closed_geodesics(&m, (1, 0), 1e-10, 128).unwrap();
    let i = ray_transform(&model, &f, &shot).unwrap();
    assert!((i - 3.0 * shot.period).norm() < 1e-9);
}

#[test]
fn cosine_along_a_vertical_geodesic() {
    let (lx, ly) = (2.0, 3.0);
    let m = TorusMetric::flat(lx, ly, 16, 16);
    let model = TensorModel::Torus(m.clone());
    let half = C64::new(0.5, 0.0);
    let f = SymTensorField::atom(0, 0, Atom::TorusWave { a: 1, b: 0 }, half)
        .unwrap()
        .add(&SymTensorField::atom(0, 0, Atom::TorusWave { a: -1, b: 0 }, half).unwrap())
        .unwrap();
    for x0 in [0.0, 0.3, 1.1] {
        let geo = vertical_torus_geodesic(&m, x0, 40);
        let i = ray_transform(&model, &f, &geo).unwrap();
        assert!((i - ly * (2.0 * PI * x0 / lx).cos()).norm() < 1e-12);
    }
}

#[test]
fn potential_of_a_constant_vanishes() {
    let m = TorusMetric::flat(1.0, 1.0, 8, 8);
    let model = TensorModel::Torus(m.clone());
    let h = SymTensorField::atom(0, 0, Atom::TorusWave { a: 0, b: 0 }, C64::new(2.0, 0.0)).unwrap();
    let dh = potential_tensor(&h).unwrap();
    assert_eq!(dh.degree, 1);
    let p = PreparedField::new(&model, &dh).unwrap();
    for z in [C64::new(0.1, 0.2), C64::new(0.7, 0.9)] {
        assert!(p.modes_at(z).iter().all(|(_, v)| v.norm() == 0.0));
    }
}

#[test]
fn potential_of_a_function_matches_spectral_eta() {
    let m = TorusMetric::from_expr(1.0, 1.0, 32, 32, "0.2*sin(2*pi*x)*cos(2*pi*y)").unwrap();
    let model = TensorModel::Torus(m.clone());
    let g = SpectralGrid::new(&m, 32, 32);
    let h = SymTensorField::atom(0, 0, Atom::TorusWave { a: 1, b: -2 }, C64::new(0.5, 0.25)).unwrap();
    let pts: Vec<C64> = g.nodes().into_iter().map(|(x, y)| C64::new(x, y)).collect();
    let hs = PreparedField::new(&model, &h).unwrap().sample(&pts, 1).unwrap();
    let dh = PreparedField::new(&model, &potential_tensor(&h).unwrap()).unwrap().sample(&pts, 1).unwrap();
    let h0 = hs.mode(0).unwrap();
    for (k, plus) in [(1, true), (-1, false)] {
        let grid = if plus { g.eta_plus(0, h0) } else { g.eta_minus(0, h0) };
        let err = grid.iter().zip(dh.mode(k).unwrap()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "mode {k}: {err:e}");
    }
    assert!(dh.is_zero_mode(0));
}

#[test]
fn potential_on_the_octagon_matches_the_mesh() {
    let mesh = OctagonMesh::new(MeshConfig::default()).unwrap();
    let model = octagon_model();
    let h = SymTensorField::atom(0, 0, gaussian(C64::new(0.1, -0.2), 2.5), ONE).unwrap();
    let hs = PreparedField::new(&model, &h).unwrap().sample(mesh.nodes(), 1).unwrap();
    let dh = PreparedField::new(&model, &potential_tensor(&h).unwrap()).unwrap().sample(mesh.nodes(), 1).unwrap();
    let w = mesh.weights();
    let mesh_plus = mesh.eta_plus(0, hs.mode(0).unwrap());
    let diff: Vec<C64> = mesh_plus.iter().zip(dh.mode(1).unwrap()).map(|(a, b)| a - b).collect();
    let rel = (level_norm2(w, &diff) / level_norm2(w, dh.mode(1).unwrap())).sqrt();
    assert!(rel < 1e-3, "{rel:e}");
}

#[test]
fn degree_two_potential_lives_on_the_even_band() {
    let c = C64::new(0.2, 0.1);
    let h = SymTensorField::atom(1, -1, gaussian(c, 3.0), ONE)
        .unwrap()
        .add(&SymTensorField::atom(1, 1, gaussian(c, 3.0), C64::new(0.0, 1.0)).unwrap())
        .unwrap();
    let dh = potential_tensor(&h).unwrap();
    assert_eq!(dh.degree, 2);
    let mut levels: Vec<i32> = dh.terms.iter().map(|t| t.out_level()).collect();
    levels.sort();
    levels.dedup();
    assert_eq!(levels, vec![-2, 0, 2]);
    let model = octagon_model();
    let modes = PreparedField::new(&model, &dh).unwrap().modes_at(C64::new(0.05, 0.3));
    assert_eq!(modes.iter().map(|m| m.0).collect::<Vec<_>>(), vec![-2, 0, 2]);
}

#[test]
fn out_of_band_atoms_are_rejected() {
    assert!(SymTensorField::atom(2, 1, gaussian(C64::new(0.0, 0.0), 2.0), ONE).is_err());
    assert!(SymTensorField::atom(1, 0, Atom::TorusWave { a: 0, b: 0 }, ONE).is_err());
    let twice = SymTensorField::atom(1, 1, gaussian(C64::new(0.0, 0.0), 2.0), ONE).unwrap();
    assert!(potential_tensor(&potential_tensor(&twice).unwrap()).is_err());
}

#[test]
fn potential_tensors_integrate_to_zero_on_word_geodesics() {
    let model = octagon_model();
    let centers = octagon_centers(5);
    for m in 1..=3 {
        let f = potential_tensor(&band_field(m, &centers)).unwrap();
        let p = PreparedField::new(&model, &f).unwrap();
        for g in short_pool() {
            let i = ray_transform_prepared(&p, g).unwrap().norm();
            let scale = ray_transform_abs(&p, g).unwrap();
            assert!(i <= 1e-6 * scale, "m = {m}: {i:e} vs {scale:e}");
        }
    }
}

#[test]
fn model_mismatch_is_an_error() {
    let torus = TorusMetric::flat(1.0, 1.0, 8, 8);
    let f = SymTensorField::atom(0, 0, gaussian(C64::new(0.0, 0.0), 2.0), ONE).unwrap();
    let geo = vertical_torus_geodesic(&torus, 0.0, 16);
    assert!(ray_transform(&octagon_model(), &f, &geo).is_err());
    assert!(PreparedField::new(&TensorModel::Torus(torus), &f).is_err());
    let g = SymTensorField::atom(0, 0, Atom::TorusWave { a: 1, b: 0 }, ONE).unwrap();
    assert!(ray_transform(&octagon_model(), &g, &short_pool()[0]).is_err());
}

#[test]
fn solenoidal_check_cases() {
    let mesh = OctagonMesh::new(MeshConfig::default()).unwrap();
    let n = mesh.n_nodes();
    assert_eq!(solenoidal_check(&mesh, &SMField::zeros(2, n)).unwrap(), 0.0);
    // an exact 1-form of a non-harmonic function is not solenoidal; the
    // residual is ‖η₊η₋h + η₋η₊h‖
    let model = octagon_model();
    let h = SymTensorField::atom(0, 0, gaussian(C64::new(0.2, 0.0), 3.0), ONE).unwrap();
    let hs = PreparedField::new(&model, &h).unwrap().sample(mesh.nodes(), 1).unwrap();
    let h0 = hs.mode(0).unwrap();
    let mut a = SMField::zeros(1, n);
    a.set_mode(1, mesh.eta_plus(0, h0));
    a.set_mode(-1, mesh.eta_minus(0, h0));
    let r = solenoidal_check(&mesh, &a).unwrap();
    let expect: Vec<C64> = mesh
        .eta_plus(-1, a.mode(-1).unwrap())
        .iter()
        .zip(mesh.eta_minus(1, a.mode(1).unwrap()))
        .map(|(x, y)| x + y)
        .collect();
    assert!((r - level_norm2(mesh.weights(), &expect).sqrt()).abs() <= 1e-12 * r);
    assert!(r > 1e-2);
    let mut bad = SMField::zeros(2, n);
    bad.set_mode(2, vec![ONE; n]);
    assert!(solenoidal_check(&mesh, &bad).is_err());
}

#[test]
fn holomorphic_one_form_plus_its_conjugate_is_solenoidal() {
    use anosovlab::smfourier::{holomorphic_kernel, ChainSolver};
    let mesh = OctagonMesh::new(MeshConfig::default()).unwrap();
    let solver = ChainSolver::new(&mesh);
    let (a1, _) = holomorphic_kernel(&solver, 1, 1, 3).unwrap().remove(0);
    let am1: Vec<C64> = a1.iter().map(|v| v.conj()).collect();
    let mut a = SMField::zeros(1, mesh.n_nodes());
    a.set_mode(1, a1.clone());
    a.set_mode(-1, am1.clone());
    let r = solenoidal_check(&mesh, &a).unwrap();
    // η₊ conj(a₁) = conj(η₋a₁), so only η₊a₋₁ contributes and it is as small
    // as η₋a₁
    let up = level_norm2(mesh.weights(), &mesh.eta_plus(-1, &am1)).sqrt();
    let down = level_norm2(mesh.weights(), &mesh.eta_minus(1, &a1)).sqrt();
    assert!((up - down).abs() <= 1e-9 * down.max(1e-300), "{up:e} vs {down:e}");
    assert!(r <= (up + down) * (1.0 + 1e-12));
    let size = level_norm2(mesh.weights(), &a1).sqrt();
    assert!(r <= 1e-4 * size, "{r:e} for |a1| = {size:e}");
}

#[test]
fn only_potentials_in_the_basis_gives_a_full_kernel() {
    let model = octagon_model();
    let centers = octagon_centers(4);
    let pots: Vec<SymTensorField> = centers
        .iter()
        .map(|c| potential_tensor(&SymTensorField::atom(0, 0, gaussian(*c, 3.0), ONE).unwrap()).unwrap())
        .collect();
    let (pts, wts) = anosovlab::smfourier::octagon_quadrature(&build_octagon(), 0.2);
    let rep = sinjectivity_experiment(&model, &pots, &pots, short_pool(), &pts, &wts, SInjectivityConfig::default()).unwrap();
    assert_eq!(rep.kernel_dim, pots.len());
    assert!(rep.non_potential_residual < 1e-8, "{rep:?}");
}

#[test]
fn functions_have_a_trivial_kernel() {
    let model = octagon_model();
    let basis: Vec<SymTensorField> = octagon_centers(8)
        .iter()
        .map(|c| SymTensorField::atom(0, 0, gaussian(*c, 3.0), ONE).unwrap())
        .collect();
    let (pts, wts) = anosovlab::smfourier::octagon_quadrature(&build_octagon(), 0.2);
    let rep = sinjectivity_experiment(&model, &basis, &[], short_pool(), &pts, &wts, SInjectivityConfig::default()).unwrap();
    assert_eq!(rep.kernel_dim, 0);
    assert!(rep.sigma_min > 1e-3 * rep.sigma_max, "{rep:?}");
}

#[test]
fn an_underdetermined_pool_is_flagged() {
    let model = octagon_model();
    let basis: Vec<SymTensorField> = octagon_centers(6)
        .iter()
        .map(|c| SymTensorField::atom(0, 0, gaussian(*c, 3.0), ONE).unwrap())
        .collect();
    let (pts, wts) = anosovlab::smfourier::octagon_quadrature(&build_octagon(), 0.3);
    let pool = &short_pool()[..3];
    let rep = sinjectivity_experiment(&model, &basis, &[], pool, &pts, &wts, SInjectivityConfig::default()).unwrap();
    assert!(rep.underdetermined);
    assert!(rep.kernel_dim >= 3);
    assert!(sinjectivity_experiment(&model, &basis, &[], &[], &pts, &wts, SInjectivityConfig::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn transform_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, i in 0usize..20) {
        let model = octagon_model();
        let f = SymTensorField::atom(2, 2, gaussian(C64::new(0.1, 0.2), 2.0), ONE).unwrap();
        let g = SymTensorField::atom(2, -2, gaussian(C64::new(-0.3, 0.0), 3.0), C64::new(0.0, 1.0)).unwrap();
        let geo = &short_pool()[i % short_pool().len()];
        let comb = SymTensorField::combination(&[f.clone(), g.clone()], &[C64::new(a, 0.0), C64::new(b, 0.0)]).unwrap();
        let (tf, tg) = (ray_transform(&model, &f, geo).unwrap(), ray_transform(&model, &g, geo).unwrap());
        let tc = ray_transform(&model, &comb, geo).unwrap();
        let scale = 1.0 + tf.norm() + tg.norm();
        prop_assert!((tc - a * tf - b * tg).norm() <= 1e-10 * scale);
    }

    #[test]
    fn start_point_does_not_matter(shift in 1usize..50, i in 0usize..20) {
        let model = octagon_model();
        let f = band_field(2, &octagon_centers(3)).add(&SymTensorField::atom(1, 1, gaussian(C64::new(0.3, 0.3), 2.0), ONE).unwrap()).unwrap();
        let geo = &short_pool()[i % short_pool().len()];
        let mut rotated = geo.clone();
        rotated.orbit.rotate_left(shift % geo.orbit.len());
        let (a, b) = (ray_transform(&model, &f, geo).unwrap(), ray_transform(&model, &f, &rotated).unwrap());
        prop_assert!((a - b).norm() <= 1e-10 * (1.0 + a.norm()));
    }
}
