//! Transport-invariant fields built mode by mode.
//!
//! `Xw = 0` is the ladder `η₊w_{k-1} + η₋w_{k+1} = 0`.  Going up, write
//! `w_{k+1} = η₊v_k` and solve `(η₋η₊)v_k = -η₊w_{k-1}`; going down,
//! `w_{k-1} = η₋v_k` with `(η₊η₋)v_k = -η₋w_{k+1}`.  The ansatz picks the
//! minimum-energy continuation, and each step only needs one level solve.

use std::collections::HashMap;
use std::sync::Mutex;

use faer::Mat;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::forms::hermitian_eigen;
use super::{check_nodes, japanese, level_inner, level_norm2, mode_norms, norm2, LevelSolve, SMField, SmBackend};
use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Caches level factorizations of one backend.
pub struct ChainSolver<'a> {
    backend: &'a dyn SmBackend,
    cache: Mutex<HashMap<(i32, bool), std::sync::Arc<dyn LevelSolve + 'a>>>,
}

impl<'a> ChainSolver<'a> {
    pub fn new(backend: &'a dyn SmBackend) -> Self {
        ChainSolver { backend, cache: Mutex::new(HashMap::new()) }
    }

    pub fn backend(&self) -> &'a dyn SmBackend {
        self.backend
    }

    fn solver(&self, k: i32, raise_first: bool) -> Result<std::sync::Arc<dyn LevelSolve + 'a>> {
        if let Some(s) = self.cache.lock().unwrap().get(&(k, raise_first)) {
            return Ok(s.clone());
        }
        let s: std::sync::Arc<dyn LevelSolve + 'a> = self.backend.level_solver(k, raise_first)?.into();
        self.cache.lock().unwrap().insert((k, raise_first), s.clone());
        Ok(s)
    }

    /// `(η₋η₊)v = r` (`raise_first`) or `(η₊η₋)v = r` on level `k`.
    pub fn solve_level(&self, k: i32, raise_first: bool, rhs: &[C64]) -> Result<Vec<C64>> {
        self.solver(k, raise_first)?.solve(rhs)
    }

    /// Continues `w` from level `from` (with `w_{from∓1}` already set) up or
    /// down to the truncation.
    fn chain(&self, w: &mut SMField, from: i32, up: bool) -> Result<()> {
        let b = self.backend;
        let n = w.n_modes() as i32;
        let step = if up { 1 } else { -1 };
        let mut k = from;
        while (k + 2 * step).abs() <= n {
            let src = w.mode(k).unwrap().to_vec();
            let next = if up {
                let rhs: Vec<C64> = b.eta_plus(k, &src).into_iter().map(|v| -v).collect();
                let v = self.solve_level(k + 1, true, &rhs)?;
                b.eta_plus(k + 1, &v)
            } else {
                let rhs: Vec<C64> = b.eta_minus(k, &src).into_iter().map(|v| -v).collect();
                let v = self.solve_level(k - 1, false, &rhs)?;
                b.eta_minus(k - 1, &v)
            };
            if next.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::Solver(format!("chain produced non-finite values at level {}", k + 2 * step)));
            }
            w.set_mode(k + 2 * step, next);
            k += 2 * step;
        }
        Ok(())
    }
}

/// Which mode data are prescribed.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ExtensionVariant {
    /// `w_0 = f`; even modes only.
    W0 { f: Vec<C64> },
    /// `w_{±1} = a_{±1}` with `η₋a₁ = 0` and `η₊a₋₁ + η₋a₁ = 0`; odd modes
    /// only.  Without `am1` the field is holomorphic (modes `k ≥ 1`).
    W1 { a1: Vec<C64>, am1: Option<Vec<C64>> },
    /// `w_m = q` with `η₋q = 0`, continued upward.
    Wm { m: usize, q: Vec<C64> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LadderReport {
    /// `(k, ‖η₊w_{k-1} + η₋w_{k+1}‖)` for `|k| ≤ N - 2`.
    pub interior: Vec<(i32, f64)>,
    /// The same for `|k| ∈ {N - 1, N}`, which see the cut-off.
    pub boundary: Vec<(i32, f64)>,
    pub max_interior: f64,
    /// `max_interior / ‖w‖`.
    pub relative: f64,
}

/// Per-mode residuals of `Xw = 0`.
pub fn ladder_residual(b: &dyn SmBackend, w: &SMField) -> Result<LadderReport> {
    ladder_residual_within(b, w, w.n_modes().saturating_sub(2))
}

fn ladder_residual_within(b: &dyn SmBackend, w: &SMField, interior: usize) -> Result<LadderReport> {
    check_nodes(b, w)?;
    let wts = b.weights();
    let n = w.n_modes() as i32;
    let mut rep = LadderReport { interior: Vec::new(), boundary: Vec::new(), max_interior: 0.0, relative: 0.0 };
    for k in -n..=n {
        let mut acc = vec![ZERO; w.n_nodes()];
        if let Some(h) = w.mode(k - 1) {
            acc.iter_mut().zip(b.eta_plus(k - 1, h)).for_each(|(a, v)| *a += v);
        }
        if let Some(h) = w.mode(k + 1) {
            acc.iter_mut().zip(b.eta_minus(k + 1, h)).for_each(|(a, v)| *a += v);
        }
        let r = level_norm2(wts, &acc).sqrt();
        if k.unsigned_abs() as usize <= interior {
            rep.interior.push((k, r));
            rep.max_interior = rep.max_interior.max(r);
        } else {
            rep.boundary.push((k, r));
        }
    }
    let wn = norm2(b, w).sqrt();
    rep.relative = if wn > 0.0 { rep.max_interior / wn } else { 0.0 };
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantExtension {
    #[serde(skip)]
    pub w: SMField,
    pub ladder: LadderReport,
    /// `(k, ‖w_k‖)`.
    pub mode_norms: Vec<(i32, f64)>,
    /// Least-squares slope of `log ‖w_k‖` against `log ⟨k⟩` over the nonzero
    /// modes; `None` with fewer than two such modes.
    pub growth_slope: Option<f64>,
    /// Largest norm of a mode of the wrong parity, relative to `‖w‖`.
    pub parity_defect: f64,
}

/// Builds a truncated invariant field from prescribed low modes.
pub fn invariant_extension(solver: &ChainSolver, variant: &ExtensionVariant, n_modes: usize) -> Result<InvariantExtension> {
    let b = solver.backend();
    let nn = b.n_nodes();
    let check = |h: &[C64], what: &str| -> Result<()> {
        if h.len() != nn {
            return Err(Error::Config(format!("{what} has {} values, backend has {nn} nodes", h.len())));
        }
        Ok(())
    };
    let mut w = SMField::zeros(n_modes, nn);
    let parity;
    match variant {
        ExtensionVariant::W0 { f } => {
            check(f, "f")?;
            if n_modes < 2 {
                return Err(Error::Config("the w0 construction needs n_modes >= 2".into()));
            }
            w.set_mode(0, f.clone());
            solver.chain(&mut w, 0, true)?;
            solver.chain(&mut w, 0, false)?;
            parity = 0;
        }
        ExtensionVariant::W1 { a1, am1 } => {
            check(a1, "a1")?;
            if n_modes < 3 {
                return Err(Error::Config("the w1 construction needs n_modes >= 3".into()));
            }
            w.set_mode(1, a1.clone());
            solver.chain(&mut w, 1, true)?;
            if let Some(a) = am1 {
                check(a, "am1")?;
                w.set_mode(-1, a.clone());
                solver.chain(&mut w, -1, false)?;
            }
            parity = 1;
        }
        ExtensionVariant::Wm { m, q } => {
            check(q, "q")?;
            if *m + 2 > n_modes {
                return Err(Error::Config(format!("n_modes = {n_modes} leaves no room above m = {m}")));
            }
            w.set_mode(*m as i32, q.clone());
            solver.chain(&mut w, *m as i32, true)?;
            parity = *m as i32 % 2;
        }
    }
    let ladder = ladder_residual(b, &w)?;
    let norms = mode_norms(b, &w);
    let total = norm2(b, &w).sqrt().max(f64::MIN_POSITIVE);
    let parity_defect = norms.iter().filter(|(k, _)| (k - parity).rem_euclid(2) != 0).map(|(_, n)| *n).fold(0.0, f64::max) / total;
    let growth_slope = growth_slope(&norms);
    Ok(InvariantExtension { w, ladder, mode_norms: norms, growth_slope, parity_defect })
}

fn growth_slope(norms: &[(i32, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        norms.iter().filter(|(k, n)| *k != 0 && *n > 1e-300).map(|(k, n)| (japanese(*k).ln(), n.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductReport {
    pub s: f64,
    pub t: f64,
    /// `(k, ‖w_k‖_{L¹} / (⟨k⟩^{s+t} ‖u‖_{L²H^{-s}} ‖v‖_{L²H^{-t}}))`.
    pub l1_ratios: Vec<(i32, f64)>,
    pub max_ratio: f64,
    /// Ladder residuals of `w` on `0 ≤ k ≤ min(N_u, N_v) - 2`, where every
    /// term of the convolution is present.
    pub ladder: LadderReport,
}

/// `w_k = Σ_j u_j v_{k-j}` for holomorphic `u`, `v`; `w` carries
/// `N_u + N_v` modes so the convolution is not aliased.
pub fn fourier_product(b: &dyn SmBackend, u: &SMField, v: &SMField, s: f64, t: f64) -> Result<(SMField, ProductReport)> {
    check_nodes(b, u)?;
    check_nodes(b, v)?;
    for (name, f) in [("u", u), ("v", v)] {
        if let Some(k) = f.levels().filter(|k| *k < 0).find(|k| !f.is_zero_mode(*k)) {
            return Err(Error::Config(format!("{name} is not holomorphic: mode {k} is nonzero")));
        }
    }
    let (nu, nv) = (u.n_modes() as i32, v.n_modes() as i32);
    let nw = (nu + nv) as usize;
    let mut w = SMField::zeros(nw, u.n_nodes());
    for j in 0..=nu {
        let a = u.mode(j).unwrap();
        if u.is_zero_mode(j) {
            continue;
        }
        for l in 0..=nv {
            if v.is_zero_mode(l) {
                continue;
            }
            let c = v.mode(l).unwrap();
            w.mode_mut(j + l).iter_mut().zip(a.iter().zip(c)).for_each(|(d, (x, y))| *d += x * y);
        }
    }
    let wts = b.weights();
    let un = super::mixed_norm(b, u, -s).value;
    let vn = super::mixed_norm(b, v, -t).value;
    let mut l1_ratios = Vec::new();
    let mut max_ratio: f64 = 0.0;
    for k in 0..=nw as i32 {
        let l1: f64 = w.mode(k).unwrap().iter().zip(wts).map(|(x, w)| x.norm() * w).sum();
        let denom = japanese(k).powf(s + t) * un * vn;
        let r = if denom > 0.0 { l1 / denom } else { 0.0 };
        max_ratio = max_ratio.max(r);
        l1_ratios.push((k, r));
    }
    let interior = (nu.min(nv) - 2).max(0) as usize;
    let mut ladder = ladder_residual_within(b, &w, interior)?;
    // negative levels of a holomorphic product are empty apart from the
    // k = -1 equation, which only involves η₋w_0
    ladder.interior.retain(|(k, _)| *k >= -1);
    Ok((w, ProductReport { s, t, l1_ratios, max_ratio, ladder }))
}

/// Approximate basis of `ker η₋` on level `k`: subspace inverse iteration on
/// `η₊η₋` followed by a Rayleigh-Ritz step minimizing `‖η₋x‖/‖x‖` over the
/// iterates together with the first smooth basis sections.  The latter
/// matter when the level solver is a pseudo-inverse that removes the kernel.
/// Returns the sections (unit `L²` norm) with their quotients.
pub fn holomorphic_kernel(solver: &ChainSolver, k: i32, count: usize, seed: u64) -> Result<Vec<(Vec<C64>, f64)>> {
    let b = solver.backend();
    let n = b.n_nodes();
    let w = b.weights();
    let width = count + 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut block: Vec<Vec<C64>> =
        (0..width).map(|_| (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()).collect();
    orthonormalize(w, &mut block);
    for _ in 0..6 {
        for x in block.iter_mut() {
            *x = solver.solve_level(k, false, x)?;
        }
        orthonormalize(w, &mut block);
    }
    block.extend(b.smooth_basis(k, width));
    orthonormalize(w, &mut block);
    let m = block.len();
    let low: Vec<Vec<C64>> = block.iter().map(|x| b.eta_minus(k, x)).collect();
    let g = Mat::from_fn(m, m, |i, j| level_inner(w, &low[j], &low[i]));
    let (vals, vecs) = hermitian_eigen(&g)?;
    let mut out = Vec::new();
    for c in 0..count.min(m) {
        let mut x = vec![ZERO; n];
        for (i, bi) in block.iter().enumerate() {
            let coef = vecs[(i, c)];
            x.iter_mut().zip(bi).for_each(|(a, v)| *a += coef * v);
        }
        let nrm = level_norm2(w, &x).sqrt();
        x.iter_mut().for_each(|a| *a /= nrm);
        out.push((x, vals[c].max(0.0).sqrt()));
    }
    Ok(out)
}

/// Weighted Gram-Schmidt with reorthogonalization; drops vectors that are
/// numerically dependent on the earlier ones.
fn orthonormalize(w: &[f64], block: &mut Vec<Vec<C64>>) {
    let mut done: Vec<Vec<C64>> = Vec::with_capacity(block.len());
    for mut x in block.drain(..) {
        let start = level_norm2(w, &x).sqrt();
        for _ in 0..2 {
            for q in &done {
                let c = level_inner(w, &x, q);
                x.iter_mut().zip(q).for_each(|(a, v)| *a -= c * v);
            }
        }
        let nrm = level_norm2(w, &x).sqrt();
        if nrm > 1e-10 * start && nrm > 0.0 {
            x.iter_mut().for_each(|a| *a /= nrm);
            done.push(x);
        }
    }
    *block = done;
}
