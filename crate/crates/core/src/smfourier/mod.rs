//! Vertical Fourier analysis on the unit circle bundle `SM`.
//!
//! A field `u = Σ_k u_k(x) e^{ikθ}` is stored as its coefficient fields `u_k`
//! sampled on the nodes of a backend.  Backends supply the raising and
//! lowering operators `η±` between levels and a quadrature for `d(SM)`;
//! everything else (frame operators, the energy identity, α estimates,
//! invariant extensions, products) is generic.

mod chains;
mod forms;
mod octagon;
mod torus;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use chains::{
    fourier_product, holomorphic_kernel, invariant_extension, ladder_residual, ChainSolver, ExtensionVariant,
    InvariantExtension, LadderReport, ProductReport,
};
pub use forms::{
    alpha_lower_bound, alpha_lower_bound_profile, q1_identity, quantitative_coefficients, solve_adjoint_transport,
    structure_residuals, transport_bound_check, verify_quantitative_inequality, AdjointSolve, AlphaEstimate,
    Q1Report, QuantitativeReport, StructureResiduals, TransportBound,
};
pub use octagon::{octagon_quadrature, MeshConfig, OctagonMesh};
pub use torus::SpectralGrid;

/// Solves one level equation `(η₋η₊)v = r` or `(η₊η₋)v = r`.
pub trait LevelSolve: Send + Sync {
    fn solve(&self, rhs: &[C64]) -> Result<Vec<C64>>;
}

/// A discretization of `SM` in vertical Fourier modes.
pub trait SmBackend: Send + Sync {
    fn name(&self) -> String;
    fn n_nodes(&self) -> usize;
    /// Quadrature weights for `d(SM)`, including the `2π` of the fibre.
    fn weights(&self) -> &[f64];
    /// Gaussian curvature at the nodes.
    fn curvature(&self) -> &[f64];
    /// `η₊`: level `k` to level `k + 1`.
    fn eta_plus(&self, k: i32, h: &[C64]) -> Vec<C64>;
    /// `η₋`: level `k` to level `k - 1`.
    fn eta_minus(&self, k: i32, h: &[C64]) -> Vec<C64>;
    /// Discrete adjoint of `η₊` at level `k` (level `k + 1` to `k`).
    fn eta_plus_adjoint(&self, k: i32, h: &[C64]) -> Vec<C64> {
        self.eta_minus(k + 1, h).into_iter().map(|v| -v).collect()
    }
    /// Discrete adjoint of `η₋` at level `k` (level `k - 1` to `k`).
    fn eta_minus_adjoint(&self, k: i32, h: &[C64]) -> Vec<C64> {
        self.eta_plus(k - 1, h).into_iter().map(|v| -v).collect()
    }
    /// Solver for `(η₋η₊)v = r` (`raise_first`) or `(η₊η₋)v = r` on level `k`.
    fn level_solver(&self, k: i32, raise_first: bool) -> Result<Box<dyn LevelSolve + '_>> {
        Ok(Box::new(forms::CgLevelSolver::new(self, k, raise_first)))
    }
    /// A basis of smooth sections of level `k`, of size about `n`.
    fn smooth_basis(&self, k: i32, n: usize) -> Vec<Vec<C64>>;
}

/// Coefficient fields `u_k`, `|k| ≤ n_modes`, on the nodes of a backend.
#[derive(Clone, Debug, PartialEq)]
pub struct SMField {
    n_modes: usize,
    n_nodes: usize,
    modes: Vec<Vec<C64>>,
}

impl SMField {
    pub fn zeros(n_modes: usize, n_nodes: usize) -> Self {
        SMField { n_modes, n_nodes, modes: vec![vec![C64::new(0.0, 0.0); n_nodes]; 2 * n_modes + 1] }
    }

    /// A field with the single mode `k` equal to `h`.
    pub fn single(n_modes: usize, k: i32, h: Vec<C64>) -> Self {
        let mut u = SMField::zeros(n_modes, h.len());
        u.set_mode(k, h);
        u
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    fn index(&self, k: i32) -> Option<usize> {
        (k.unsigned_abs() as usize <= self.n_modes).then(|| (k + self.n_modes as i32) as usize)
    }

    /// `u_k`, or `None` outside the truncation.
    pub fn mode(&self, k: i32) -> Option<&[C64]> {
        self.index(k).map(|i| self.modes[i].as_slice())
    }

    pub fn mode_mut(&mut self, k: i32) -> &mut [C64] {
        let i = self.index(k).unwrap_or_else(|| panic!("mode {k} outside truncation {}", self.n_modes));
        &mut self.modes[i]
    }

    pub fn set_mode(&mut self, k: i32, h: Vec<C64>) {
        assert_eq!(h.len(), self.n_nodes, "mode field has the wrong number of nodes");
        let i = self.index(k).unwrap_or_else(|| panic!("mode {k} outside truncation {}", self.n_modes));
        self.modes[i] = h;
    }

    /// Mode indices `-n_modes..=n_modes`.
    pub fn levels(&self) -> impl Iterator<Item = i32> {
        let n = self.n_modes as i32;
        -n..=n
    }

    /// Same coefficients with a different truncation (dropping or padding).
    pub fn with_modes(&self, n_modes: usize) -> SMField {
        let mut out = SMField::zeros(n_modes, self.n_nodes);
        for k in out.levels().collect::<Vec<_>>() {
            if let Some(h) = self.mode(k) {
                out.set_mode(k, h.to_vec());
            }
        }
        out
    }

    pub fn is_zero_mode(&self, k: i32) -> bool {
        self.mode(k).is_none_or(|h| h.iter().all(|v| *v == C64::new(0.0, 0.0)))
    }

    /// `a·self + b·other` (the result has the larger truncation).
    pub fn lincomb(&self, a: C64, other: &SMField, b: C64) -> SMField {
        let n = self.n_modes.max(other.n_modes);
        let mut out = SMField::zeros(n, self.n_nodes);
        for k in out.levels().collect::<Vec<_>>() {
            let dst = out.mode_mut(k);
            if let Some(h) = self.mode(k) {
                for (d, v) in dst.iter_mut().zip(h) {
                    *d += a * v;
                }
            }
            if let Some(h) = other.mode(k) {
                for (d, v) in dst.iter_mut().zip(h) {
                    *d += b * v;
                }
            }
        }
        out
    }

    pub fn scale(&self, a: C64) -> SMField {
        let mut out = self.clone();
        out.modes.iter_mut().flatten().for_each(|v| *v *= a);
        out
    }

    /// Largest deviation from the reality condition `conj(u_k) = u_{-k}`.
    pub fn reality_defect(&self) -> f64 {
        let n = self.n_modes as i32;
        (0..=n)
            .flat_map(|k| {
                let (p, m) = (self.mode(k).unwrap(), self.mode(-k).unwrap());
                p.iter().zip(m).map(|(a, b)| (a.conj() - b).norm()).collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }
}

fn check_nodes(b: &dyn SmBackend, u: &SMField) -> Result<()> {
    if u.n_nodes != b.n_nodes() {
        return Err(Error::Config(format!("field has {} nodes, backend {} has {}", u.n_nodes, b.name(), b.n_nodes())));
    }
    Ok(())
}

/// `∫ u v̄ d(SM)`.
pub fn inner(b: &dyn SmBackend, u: &SMField, v: &SMField) -> C64 {
    let w = b.weights();
    let n = u.n_modes.min(v.n_modes) as i32;
    (-n..=n).map(|k| level_inner(w, u.mode(k).unwrap(), v.mode(k).unwrap())).sum()
}

pub fn level_inner(w: &[f64], a: &[C64], c: &[C64]) -> C64 {
    a.iter().zip(c).zip(w).map(|((x, y), w)| x * y.conj() * w).sum()
}

pub fn level_norm2(w: &[f64], a: &[C64]) -> f64 {
    a.iter().zip(w).map(|(x, w)| x.norm_sqr() * w).sum()
}

pub fn norm2(b: &dyn SmBackend, u: &SMField) -> f64 {
    let w = b.weights();
    u.modes.iter().map(|h| level_norm2(w, h)).sum()
}

pub fn norm(b: &dyn SmBackend, u: &SMField) -> f64 {
    norm2(b, u).sqrt()
}

/// `‖u_k‖_{L²(SM)}` for each level.
pub fn mode_norms(b: &dyn SmBackend, u: &SMField) -> Vec<(i32, f64)> {
    let w = b.weights();
    u.levels().map(|k| (k, level_norm2(w, u.mode(k).unwrap()).sqrt())).collect()
}

/// The mixed norm `(Σ_k ⟨k⟩^{2s} ‖u_k‖²)^{1/2}` of `L²_x H^s_θ`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MixedNorm {
    pub s: f64,
    pub value: f64,
}

pub fn japanese(k: i32) -> f64 {
    (1.0 + (k as f64).powi(2)).sqrt()
}

pub fn mixed_norm(b: &dyn SmBackend, u: &SMField, s: f64) -> MixedNorm {
    let value = mode_norms(b, u).iter().map(|(k, n)| japanese(*k).powf(2.0 * s) * n * n).sum::<f64>().sqrt();
    MixedNorm { s, value }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameOp {
    X,
    XPerp,
    V,
}

/// `η±` on one coefficient field.
pub fn eta(b: &dyn SmBackend, plus: bool, k: i32, h: &[C64]) -> Vec<C64> {
    if plus {
        b.eta_plus(k, h)
    } else {
        b.eta_minus(k, h)
    }
}

/// Applies `X = η₊ + η₋`, `X⊥ = -i(η₊ - η₋)` or `V`.  `X` and `X⊥` raise the
/// truncation by one so nothing is lost.
pub fn apply_frame(b: &dyn SmBackend, op: FrameOp, u: &SMField) -> Result<SMField> {
    check_nodes(b, u)?;
    if op == FrameOp::V {
        let mut out = u.clone();
        for k in u.levels().collect::<Vec<_>>() {
            let f = C64::new(0.0, k as f64);
            out.mode_mut(k).iter_mut().for_each(|v| *v *= f);
        }
        return Ok(out);
    }
    let n = u.n_modes as i32;
    let mut out = SMField::zeros(u.n_modes + 1, u.n_nodes);
    let (cp, cm) = match op {
        FrameOp::X => (C64::new(1.0, 0.0), C64::new(1.0, 0.0)),
        _ => (C64::new(0.0, -1.0), C64::new(0.0, 1.0)),
    };
    for k in -n..=n {
        let h = u.mode(k).unwrap();
        if h.iter().all(|v| *v == C64::new(0.0, 0.0)) {
            continue;
        }
        let up = b.eta_plus(k, h);
        for (d, v) in out.mode_mut(k + 1).iter_mut().zip(&up) {
            *d += cp * v;
        }
        let down = b.eta_minus(k, h);
        for (d, v) in out.mode_mut(k - 1).iter_mut().zip(&down) {
            *d += cm * v;
        }
    }
    Ok(out)
}

/// Adjoint of `X` on the truncation: maps `n_modes + 1` levels back to
/// `n_modes`.
pub fn apply_x_adjoint(b: &dyn SmBackend, g: &SMField, n_modes: usize) -> SMField {
    let n = n_modes as i32;
    let mut out = SMField::zeros(n_modes, g.n_nodes);
    for k in -n..=n {
        let mut acc = vec![C64::new(0.0, 0.0); g.n_nodes];
        if let Some(h) = g.mode(k + 1) {
            for (a, v) in acc.iter_mut().zip(b.eta_plus_adjoint(k, h)) {
                *a += v;
            }
        }
        if let Some(h) = g.mode(k - 1) {
            for (a, v) in acc.iter_mut().zip(b.eta_minus_adjoint(k, h)) {
                *a += v;
            }
        }
        out.set_mode(k, acc);
    }
    out
}

/// Pointwise multiplication of every mode by the curvature.
pub fn multiply_curvature(b: &dyn SmBackend, u: &SMField) -> SMField {
    let mut out = u.clone();
    let kk = b.curvature();
    for k in u.levels().collect::<Vec<_>>() {
        out.mode_mut(k).iter_mut().zip(kk).for_each(|(v, c)| *v *= c);
    }
    out
}

/// Terms of the energy identity
/// `‖XVu‖² - (KVu, Vu) + ‖Xu‖² - ‖VXu‖² = 0`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PestovReport {
    pub xv2: f64,
    pub kvv: f64,
    pub x2: f64,
    pub vx2: f64,
    pub h1_norm2: f64,
    /// `|LHS| / ‖u‖²_{H¹}`.
    pub residual: f64,
}

/// Evaluates the energy identity for a band-limited `u`, normalized by the
/// Sasaki `H¹` norm `‖Xu‖² + ‖X⊥u‖² + ‖Vu‖² + ‖u‖²`.
pub fn pestov_residual(b: &dyn SmBackend, u: &SMField) -> Result<PestovReport> {
    check_nodes(b, u)?;
    let vu = apply_frame(b, FrameOp::V, u)?;
    let xu = apply_frame(b, FrameOp::X, u)?;
    let xvu = apply_frame(b, FrameOp::X, &vu)?;
    let vxu = apply_frame(b, FrameOp::V, &xu)?;
    let xpu = apply_frame(b, FrameOp::XPerp, u)?;
    let kvv = inner(b, &multiply_curvature(b, &vu), &vu).re;
    let (xv2, x2, vx2) = (norm2(b, &xvu), norm2(b, &xu), norm2(b, &vxu));
    let h1_norm2 = x2 + norm2(b, &xpu) + norm2(b, &vu) + norm2(b, u);
    let lhs = xv2 - kvv + x2 - vx2;
    let residual = if h1_norm2 > 0.0 { lhs.abs() / h1_norm2 } else { 0.0 };
    Ok(PestovReport { xv2, kvv, x2, vx2, h1_norm2, residual })
}

/// `|⟨η₊u, v⟩ + ⟨u, η₋v⟩| / (‖u‖‖η₋v‖ + ‖η₊u‖‖v‖)` for `u` on level `k`
/// and `v` on level `k + 1`.
pub fn eta_adjoint_defect(b: &dyn SmBackend, k: i32, u: &[C64], v: &[C64]) -> f64 {
    let w = b.weights();
    let (pu, mv) = (b.eta_plus(k, u), b.eta_minus(k + 1, v));
    let s = level_inner(w, &pu, v) + level_inner(w, u, &mv);
    let scale = level_norm2(w, u).sqrt() * level_norm2(w, &mv).sqrt() + level_norm2(w, &pu).sqrt() * level_norm2(w, v).sqrt();
    if scale > 0.0 {
        s.norm() / scale
    } else {
        0.0
    }
}

/// Random band-limited field built from the backend's smooth basis:
/// levels `|k| ≤ k_max`, coefficients uniform in the unit square.
pub fn random_field(b: &dyn SmBackend, n_modes: usize, k_max: usize, n_basis: usize, rng: &mut impl rand::Rng) -> SMField {
    let mut u = SMField::zeros(n_modes, b.n_nodes());
    for k in -(k_max.min(n_modes) as i32)..=(k_max.min(n_modes) as i32) {
        let basis = b.smooth_basis(k, n_basis);
        let mut h = vec![C64::new(0.0, 0.0); b.n_nodes()];
        for f in &basis {
            let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            h.iter_mut().zip(f).for_each(|(a, v)| *a += c * v);
        }
        u.set_mode(k, h);
    }
    u
}

/// Random real (reality-symmetric) mode-0 function from the smooth basis.
pub fn random_function(b: &dyn SmBackend, n_basis: usize, rng: &mut impl rand::Rng) -> Vec<C64> {
    let mut h = vec![C64::new(0.0, 0.0); b.n_nodes()];
    for f in b.smooth_basis(0, n_basis) {
        let c = rng.random_range(-1.0..1.0);
        h.iter_mut().zip(&f).for_each(|(a, v)| *a += c * v);
    }
    h.iter_mut().for_each(|v| v.im = 0.0);
    h
}
