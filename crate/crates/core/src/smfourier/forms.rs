//! Quadratic forms on `SM`: α estimates, the `P`/`Q` energy splitting, the
//! quantitative inequality on high modes, structure-equation residuals and
//! least-squares solutions of `P*h = f` and `Q*h = f`.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{
    apply_frame, apply_x_adjoint, check_nodes, inner, level_inner, level_norm2, multiply_curvature, norm2, FrameOp,
    LevelSolve, SMField, SmBackend,
};
use crate::error::{Error, Result};
use crate::flow::{CurvatureProfile, ProfileShape};
use crate::geometry::octagon::gauss_legendre;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Conjugate gradients on `-η₋η₊` (or `-η₊η₋`), which is Hermitian positive
/// semidefinite whenever the backend's discrete adjoints satisfy `η₊* = -η₋`.
pub struct CgLevelSolver<'a, B: SmBackend + ?Sized> {
    backend: &'a B,
    k: i32,
    raise_first: bool,
    pub tol: f64,
    pub max_iter: usize,
}

impl<'a, B: SmBackend + ?Sized> CgLevelSolver<'a, B> {
    pub fn new(backend: &'a B, k: i32, raise_first: bool) -> Self {
        CgLevelSolver { backend, k, raise_first, tol: 1e-13, max_iter: 4000 }
    }

    fn apply(&self, v: &[C64]) -> Vec<C64> {
        let b = self.backend;
        let out = if self.raise_first {
            b.eta_minus(self.k + 1, &b.eta_plus(self.k, v))
        } else {
            b.eta_plus(self.k - 1, &b.eta_minus(self.k, v))
        };
        out.into_iter().map(|x| -x).collect()
    }
}

impl<B: SmBackend + ?Sized> LevelSolve for CgLevelSolver<'_, B> {
    fn solve(&self, rhs: &[C64]) -> Result<Vec<C64>> {
        let w = self.backend.weights();
        let mut x = vec![ZERO; rhs.len()];
        let mut r: Vec<C64> = rhs.iter().map(|v| -v).collect();
        let r0 = level_norm2(w, &r).sqrt();
        if r0 == 0.0 {
            return Ok(x);
        }
        let mut p = r.clone();
        let mut rr = level_norm2(w, &r);
        for _ in 0..self.max_iter {
            let ap = self.apply(&p);
            let pap = level_inner(w, &ap, &p).re;
            if !(pap > 0.0) {
                break;
            }
            let a = rr / pap;
            x.iter_mut().zip(&p).for_each(|(x, p)| *x += a * p);
            r.iter_mut().zip(&ap).for_each(|(r, q)| *r -= a * q);
            let rr_new = level_norm2(w, &r);
            if rr_new.sqrt() <= self.tol * r0 {
                return Ok(x);
            }
            let beta = rr_new / rr;
            p.iter_mut().zip(&r).for_each(|(p, r)| *p = r + beta * *p);
            rr = rr_new;
        }
        // singular levels (flat directions) stall at the consistent part
        if rr.sqrt() > 1e-6 * r0 {
            return Err(Error::Solver(format!("level {} CG stalled at relative residual {:e}", self.k, rr.sqrt() / r0)));
        }
        Ok(x)
    }
}

/// Eigen-decomposition of a Hermitian matrix, ascending.
pub(crate) fn hermitian_eigen(m: &Mat<C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    let h = Mat::from_fn(m.nrows(), m.ncols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
    let evd = h.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Solver(format!("eigensolver: {e:?}")))?;
    let vals = (0..h.nrows()).map(|i| evd.S()[i].re).collect();
    Ok((vals, evd.U().to_owned()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlphaEstimate {
    /// `1 - sup (Kψ,ψ)/‖Xψ‖²` over the test space (`-∞` when a ψ with
    /// `Xψ = 0` has `(Kψ,ψ) > 0`).
    pub alpha: f64,
    pub dim: usize,
    /// Dimension of the numerically null part of `‖Xψ‖²`.
    pub null_dim: usize,
    /// How the null part was treated: `none`, `deflated` or `schur`.
    pub null_treatment: String,
}

/// `α̂ = 1 - λ_max` of the pencil `(B, A)` with `A = ‖Xψ‖²` and `B = (Kψ,ψ)`.
///
/// On the null space `N` of `A` the quotient is unbounded unless `B_NN ≤ 0`.
/// If `B_NN` is negative definite the null directions are eliminated by the
/// Schur complement; if it vanishes they are dropped.
fn alpha_from_forms(a: &Mat<C64>, b: &Mat<C64>) -> Result<AlphaEstimate> {
    let n = a.nrows();
    let (avals, avecs) = hermitian_eigen(a)?;
    let amax = avals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bmax = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).fold(0.0f64, |m, (i, j)| m.max(b[(i, j)].norm()));
    let cut = 1e-10 * amax.max(1e-300);
    let null: Vec<usize> = (0..n).filter(|&i| avals[i] <= cut).collect();
    let range: Vec<usize> = (0..n).filter(|&i| avals[i] > cut).collect();
    if range.is_empty() {
        return Err(Error::InsufficientData("the X form vanishes on the whole test space".into()));
    }
    let rot = |cols: &[usize]| Mat::from_fn(n, cols.len(), |i, j| avecs[(i, cols[j])]);
    let (ur, un) = (rot(&range), rot(&null));
    let brr = ur.adjoint() * b * &ur;
    let mut treatment = "none";
    let beff = if null.is_empty() {
        brr
    } else {
        let bnn = un.adjoint() * b * &un;
        let (nvals, nvecs) = hermitian_eigen(&bnn)?;
        let ntol = 1e-10 * bmax.max(1e-300);
        if nvals.iter().any(|v| *v > ntol) {
            return Ok(AlphaEstimate {
                alpha: f64::NEG_INFINITY,
                dim: n,
                null_dim: null.len(),
                null_treatment: "positive-on-null".into(),
            });
        }
        if nvals.iter().all(|v| v.abs() <= ntol) {
            treatment = "deflated";
            brr
        } else {
            // eliminate the strictly negative null directions; near-zero ones
            // contribute nothing to the supremum
            treatment = "schur";
            let neg: Vec<usize> = (0..nvals.len()).filter(|&i| nvals[i] < -ntol).collect();
            let v = Mat::from_fn(null.len(), neg.len(), |i, j| nvecs[(i, neg[j])]);
            let brn = ur.adjoint() * b * (&un * &v);
            let inv = Mat::from_fn(neg.len(), neg.len(), |i, j| if i == j { C64::new(1.0 / nvals[neg[i]], 0.0) } else { ZERO });
            &brr - &brn * inv * brn.adjoint()
        }
    };
    let scale = Mat::from_fn(range.len(), range.len(), |i, j| {
        if i == j {
            C64::new(1.0 / avals[range[i]].sqrt(), 0.0)
        } else {
            ZERO
        }
    });
    let pencil = &scale * beff * &scale;
    let (pv, _) = hermitian_eigen(&pencil)?;
    let lmax = pv.last().copied().unwrap_or(0.0);
    Ok(AlphaEstimate { alpha: 1.0 - lmax, dim: n, null_dim: null.len(), null_treatment: treatment.into() })
}

/// α̂ on the test space spanned by `n_basis` smooth sections on each level
/// `|k| ≤ n_modes`.
pub fn alpha_lower_bound(b: &dyn SmBackend, n_modes: usize, n_basis: usize) -> Result<AlphaEstimate> {
    if n_basis == 0 {
        return Err(Error::Config("alpha test space needs at least one basis function".into()));
    }
    let mut fields = Vec::new();
    let n = n_modes as i32;
    for k in -n..=n {
        for f in b.smooth_basis(k, n_basis) {
            fields.push(SMField::single(n_modes, k, f));
        }
    }
    let xs: Vec<SMField> = fields.iter().map(|u| apply_frame(b, FrameOp::X, u)).collect::<Result<_>>()?;
    let ks: Vec<SMField> = fields.iter().map(|u| multiply_curvature(b, u)).collect();
    let m = fields.len();
    let a = Mat::from_fn(m, m, |i, j| inner(b, &xs[j], &xs[i]));
    let bf = Mat::from_fn(m, m, |i, j| inner(b, &ks[j], &fields[i]));
    alpha_from_forms(&a, &bf)
}

/// α̂ for the one-dimensional forms `∫ψ'²` and `∫Kψ²` over one period of a
/// curvature profile, with a real trigonometric basis of `n` harmonics.
///
/// This is the restriction of the α-controlled inequality to functions that
/// depend only on the arc length along a periodic geodesic, so it bounds the
/// surface value from above; the index-form argument ties it to the
/// terminator value, `α̂ ≥ (β-1)/β` when the profile is β-conjugate-point free.
pub fn alpha_lower_bound_profile(profile: &CurvatureProfile, n: usize) -> Result<AlphaEstimate> {
    // a constant profile is periodic with any period
    let period = match profile.shape {
        ProfileShape::Constant { .. } => 2.0 * std::f64::consts::PI,
        _ => profile
            .period()
            .ok_or_else(|| Error::Config(format!("profile '{}' is not periodic", profile.id)))?,
    };
    if n == 0 {
        return Err(Error::Config("need at least one harmonic".into()));
    }
    // quadrature: Gauss-Legendre per smooth piece
    let breaks: Vec<f64> = match &profile.shape {
        ProfileShape::Piecewise { segments: segs } => {
            let mut t = 0.0;
            let mut out = vec![0.0];
            for s in segs {
                t += s.length;
                out.push(t);
            }
            out
        }
        _ => {
            let pieces = (4 * n).max(16);
            (0..=pieces).map(|i| period * i as f64 / pieces as f64).collect()
        }
    };
    let order = (2 * n + 8).min(200);
    let (gx, gw) = gauss_legendre(order);
    let mut ts = Vec::new();
    let mut ws = Vec::new();
    for win in breaks.windows(2) {
        let (a, c) = (win[0], win[1]);
        let sub = (((c - a) / period * 4.0 * n as f64).ceil() as usize).max(1);
        for s in 0..sub {
            let (lo, hi) = (a + (c - a) * s as f64 / sub as f64, a + (c - a) * (s + 1) as f64 / sub as f64);
            for (x, w) in gx.iter().zip(&gw) {
                ts.push(0.5 * (lo + hi) + 0.5 * (hi - lo) * x);
                ws.push(0.5 * (hi - lo) * w);
            }
        }
    }
    let kv: Vec<f64> = ts.iter().map(|&t| profile.eval(t)).collect();
    // basis: 1, cos(jωt), sin(jωt)
    let om = 2.0 * std::f64::consts::PI / period;
    let dim = 2 * n + 1;
    let basis = |i: usize, t: f64| -> (f64, f64) {
        if i == 0 {
            return (1.0, 0.0);
        }
        let j = i.div_ceil(2) as f64;
        if i % 2 == 1 {
            ((j * om * t).cos(), -j * om * (j * om * t).sin())
        } else {
            ((j * om * t).sin(), j * om * (j * om * t).cos())
        }
    };
    let mut a = Mat::<C64>::zeros(dim, dim);
    let mut bf = Mat::<C64>::zeros(dim, dim);
    for q in 0..ts.len() {
        let vals: Vec<(f64, f64)> = (0..dim).map(|i| basis(i, ts[q])).collect();
        for i in 0..dim {
            for j in 0..dim {
                a[(i, j)].re += ws[q] * vals[i].1 * vals[j].1;
                bf[(i, j)].re += ws[q] * kv[q] * vals[i].0 * vals[j].0;
            }
        }
    }
    alpha_from_forms(&a, &bf)
}

/// `T`: keeps the modes with `|k| ≥ m + 1`.
fn high_pass(u: &SMField, m: usize) -> SMField {
    let mut out = u.clone();
    for k in -(m as i32)..=(m as i32) {
        if out.mode(k).is_some() {
            out.mode_mut(k).iter_mut().for_each(|v| *v = ZERO);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Q1Report {
    /// `‖Pu‖²` with `P = VX`.
    pub pu2: f64,
    /// `Σ_{|k|≤m} k² ‖(Xu)_k‖²`.
    pub low: f64,
    /// `‖Qu‖²` with `Q = TVX`.
    pub qu2: f64,
    pub residual: f64,
}

/// Splits `‖Pu‖²` into its low-mode part and `‖Qu‖²`.
pub fn q1_identity(b: &dyn SmBackend, u: &SMField, m: usize) -> Result<Q1Report> {
    let xu = apply_frame(b, FrameOp::X, u)?;
    let pu = apply_frame(b, FrameOp::V, &xu)?;
    let qu = high_pass(&pu, m);
    let w = b.weights();
    let low: f64 = (-(m as i32)..=(m as i32))
        .filter_map(|k| xu.mode(k).map(|h| (k * k) as f64 * level_norm2(w, h)))
        .sum();
    let (pu2, qu2) = (norm2(b, &pu), norm2(b, &qu));
    let residual = (pu2 - low - qu2).abs() / pu2.max(f64::MIN_POSITIVE);
    Ok(Q1Report { pu2, low, qu2, residual })
}

/// Coefficients `(1 - m² + α(m+1)², 1 - (m-1)² + αm²)` of the quantitative
/// inequality.
pub fn quantitative_coefficients(m: usize, alpha: f64) -> (f64, f64) {
    let m = m as f64;
    (1.0 - m * m + alpha * (m + 1.0).powi(2), 1.0 - (m - 1.0).powi(2) + alpha * m * m)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuantitativeReport {
    pub m: usize,
    pub alpha: f64,
    pub coefficients: (f64, f64),
    /// `‖Qu‖²`.
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`.
    pub slack: f64,
    /// `‖η₋u_{m+1}‖² + ‖η₊u_{-m-1}‖²`.
    pub edge_outer: f64,
    /// `‖η₋u_m‖² + ‖η₊u_{-m}‖²`.
    pub edge_inner: f64,
    /// `‖v‖²` and `‖w‖²` with `v = T(Xu)`, `w = T(XVu)`.
    pub v2: f64,
    pub w2: f64,
    pub positive_coefficients: bool,
}

/// Evaluates both sides of the lower bound for `‖Qu‖²` on `u` supported on
/// `|k| ≥ m`.
pub fn verify_quantitative_inequality(b: &dyn SmBackend, u: &SMField, m: usize, alpha: f64) -> Result<QuantitativeReport> {
    check_nodes(b, u)?;
    if m == 0 {
        return Err(Error::Config("the quantitative inequality needs m >= 1".into()));
    }
    for k in -(m as i32 - 1)..=(m as i32 - 1) {
        if !u.is_zero_mode(k) {
            return Err(Error::Config(format!("u must vanish on |k| < {m}, mode {k} is nonzero")));
        }
    }
    let w8 = b.weights();
    let xu = apply_frame(b, FrameOp::X, u)?;
    let vu = apply_frame(b, FrameOp::V, u)?;
    let qu = high_pass(&apply_frame(b, FrameOp::V, &xu)?, m);
    let v = high_pass(&xu, m);
    let w = high_pass(&apply_frame(b, FrameOp::X, &vu)?, m);
    let mi = m as i32;
    let edge = |k: i32, plus: bool| -> f64 {
        match u.mode(k) {
            Some(h) => level_norm2(w8, &if plus { b.eta_plus(k, h) } else { b.eta_minus(k, h) }),
            None => 0.0,
        }
    };
    let edge_outer = edge(mi + 1, false) + edge(-mi - 1, true);
    let edge_inner = edge(mi, false) + edge(-mi, true);
    let (c1, c2) = quantitative_coefficients(m, alpha);
    let (v2, w2) = (norm2(b, &v), norm2(b, &w));
    let lhs = norm2(b, &qu);
    let rhs = c1 * edge_outer + c2 * edge_inner + alpha * w2 + v2;
    Ok(QuantitativeReport {
        m,
        alpha,
        coefficients: (c1, c2),
        lhs,
        rhs,
        slack: lhs - rhs,
        edge_outer,
        edge_inner,
        v2,
        w2,
        positive_coefficients: c1 > 0.0 && c2 > 0.0,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructureResiduals {
    /// `‖[X,V]u - X⊥u‖ / ‖u‖_{H¹}`.
    pub xv: f64,
    /// `‖[V,X⊥]u - Xu‖ / ‖u‖_{H¹}`.
    pub vxperp: f64,
    /// `‖[X,X⊥]u + KVu‖ / ‖u‖_{H²}`-type scale (sum of the term norms).
    pub xxperp: f64,
    /// Largest `|⟨η₊u_k, u_{k+1}⟩ + ⟨u_k, η₋u_{k+1}⟩|`, normalized.
    pub eta_adjoint: f64,
    /// Largest `|⟨Xu, u'⟩ + ⟨u, Xu'⟩| / (‖u‖‖u'‖)` over pairs of levels.
    pub x_antisymmetry: f64,
}

/// Residuals of the frame structure equations and of the adjoint relations
/// on a band-limited field.
pub fn structure_residuals(b: &dyn SmBackend, u: &SMField) -> Result<StructureResiduals> {
    check_nodes(b, u)?;
    let x = |f: &SMField| apply_frame(b, FrameOp::X, f);
    let xp = |f: &SMField| apply_frame(b, FrameOp::XPerp, f);
    let v = |f: &SMField| apply_frame(b, FrameOp::V, f);
    let xu = x(u)?;
    let xpu = xp(u)?;
    let h1 = (norm2(b, &xu) + norm2(b, &xpu) + norm2(b, &v(u)?) + norm2(b, u)).sqrt().max(f64::MIN_POSITIVE);
    let one = C64::new(1.0, 0.0);
    // [X,V]u = XVu - VXu
    let c1 = x(&v(u)?)?.lincomb(one, &v(&xu)?, -one).lincomb(one, &xpu, -one);
    let c2 = v(&xpu)?.lincomb(one, &xp(&v(u)?)?, -one).lincomb(one, &xu, -one);
    let xxp = x(&xpu)?;
    let xpx = xp(&xu)?;
    let kv = multiply_curvature(b, &v(u)?);
    let c3 = xxp.lincomb(one, &xpx, -one).lincomb(one, &kv, one);
    let scale3 = (norm2(b, &xxp).sqrt() + norm2(b, &xpx).sqrt() + norm2(b, &kv).sqrt()).max(f64::MIN_POSITIVE);
    let mut eta_adjoint: f64 = 0.0;
    let n = u.n_modes() as i32;
    for k in -n..n {
        let d = super::eta_adjoint_defect(b, k, u.mode(k).unwrap(), u.mode(k + 1).unwrap());
        eta_adjoint = eta_adjoint.max(d);
    }
    // ⟨Xu, u'⟩ + ⟨u, Xu'⟩ with u' = Vu (a second, independent field)
    let u2 = v(u)?;
    let xu2 = x(&u2)?;
    let s = inner(b, &xu, &u2) + inner(b, u, &xu2);
    let x_antisymmetry = s.norm() / (norm2(b, u).sqrt() * norm2(b, &u2).sqrt()).max(f64::MIN_POSITIVE);
    Ok(StructureResiduals {
        xv: norm2(b, &c1).sqrt() / h1,
        vxperp: norm2(b, &c2).sqrt() / h1,
        xxperp: norm2(b, &c3).sqrt() / scale3,
        eta_adjoint,
        x_antisymmetry,
    })
}

/// Iterations without progress after which CGLS gives up.
const STAGNATION: usize = 200;

#[derive(Clone, Debug)]
pub struct AdjointSolve {
    pub h: SMField,
    /// `‖A h - f‖ / ‖f‖` (0 for `f = 0`).
    pub residual: f64,
    pub iterations: usize,
    /// False when the residual is above the requested tolerance: the
    /// solution does not fit in the truncation.
    pub converged: bool,
}

/// Least-squares solution of `P*h = XVh = f` (`m = 0`) or
/// `Q*h = XVTh = f` (`m ≥ 1`), with ridge `reg` and CGLS from `h = 0`, which
/// selects the minimum-norm solution as `reg → 0`.
///
/// `h` lives on `|k| ≤ N - 1` where `N` is the truncation of `f`.
pub fn solve_adjoint_transport(
    b: &dyn SmBackend,
    f: &SMField,
    m: usize,
    reg: f64,
    tol: f64,
    max_iter: usize,
) -> Result<AdjointSolve> {
    check_nodes(b, f)?;
    if f.n_modes() < 2 {
        return Err(Error::Config("f needs at least two vertical modes".into()));
    }
    if !(reg >= 0.0) {
        return Err(Error::Config(format!("ridge parameter must be nonnegative, got {reg}")));
    }
    let nh = f.n_modes() - 1;
    let fwd = |h: &SMField| -> Result<SMField> {
        let t = if m > 0 { high_pass(h, m) } else { h.clone() };
        apply_frame(b, FrameOp::X, &apply_frame(b, FrameOp::V, &t)?)
    };
    // adjoint of X V T is T V* X* = -T V X*
    let adj = |g: &SMField| -> Result<SMField> {
        let y = apply_frame(b, FrameOp::V, &apply_x_adjoint(b, g, nh))?.scale(C64::new(-1.0, 0.0));
        Ok(if m > 0 { high_pass(&y, m) } else { y })
    };
    let one = C64::new(1.0, 0.0);
    let fnorm = norm2(b, f).sqrt();
    let mut h = SMField::zeros(nh, f.n_nodes());
    if fnorm == 0.0 {
        return Ok(AdjointSolve { h, residual: 0.0, iterations: 0, converged: true });
    }
    // CGLS for min ‖Ah - f‖² + reg‖h‖²
    let mut r = f.clone();
    let mut s = adj(&r)?;
    let mut p = s.clone();
    let mut gamma = norm2(b, &s);
    let mut iterations = 0;
    // on inconsistent data the recursion stagnates at the least-squares
    // residual and eventually loses orthogonality; keep the best iterate
    let (mut best, mut best_res, mut best_it) = (h.clone(), 1.0, 0);
    for it in 0..max_iter {
        iterations = it + 1;
        let q = fwd(&p)?;
        let delta = norm2(b, &q) + reg * norm2(b, &p);
        if !(delta > 0.0) {
            break;
        }
        let alpha = C64::new(gamma / delta, 0.0);
        h = h.lincomb(one, &p, alpha);
        r = r.lincomb(one, &q, -alpha);
        let residual = norm2(b, &r).sqrt() / fnorm;
        if residual < best_res * (1.0 - 1e-6) {
            (best, best_res, best_it) = (h.clone(), residual, it);
        }
        s = adj(&r)?.lincomb(one, &h, C64::new(-reg, 0.0));
        let gnew = norm2(b, &s);
        if residual <= tol || gnew.sqrt() <= 1e-15 * fnorm || it - best_it > STAGNATION {
            break;
        }
        p = s.lincomb(one, &p, C64::new(gnew / gamma, 0.0));
        gamma = gnew;
    }
    if best_res < norm2(b, &r).sqrt() / fnorm {
        h = best;
    }
    let r_true = fwd(&h)?.lincomb(one, f, -one);
    let residual = norm2(b, &r_true).sqrt() / fnorm;
    Ok(AdjointSolve { h, residual, iterations, converged: residual <= tol })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TransportBound {
    pub x_norm: f64,
    /// `‖Pu‖ = ‖VXu‖`.
    pub p_norm: f64,
    /// `‖Pu‖ - ‖Xu‖`.
    pub margin: f64,
}

/// Compares `‖Xu‖` with `‖Pu‖`; on surfaces without conjugate points the
/// margin is nonnegative.
pub fn transport_bound_check(b: &dyn SmBackend, u: &SMField) -> Result<TransportBound> {
    let xu = apply_frame(b, FrameOp::X, u)?;
    let pu = apply_frame(b, FrameOp::V, &xu)?;
    let (x_norm, p_norm) = (norm2(b, &xu).sqrt(), norm2(b, &pu).sqrt());
    Ok(TransportBound { x_norm, p_norm, margin: p_norm - x_norm })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_at_threshold() {
        // α = (m-1)/(m+1) makes the first coefficient vanish
        let (c1, c2) = quantitative_coefficients(2, 1.0 / 3.0);
        assert!(c1.abs() < 1e-15);
        assert!(c2 > 0.0);
        assert_eq!(quantitative_coefficients(1, 0.0), (0.0, 1.0));
        assert_eq!(quantitative_coefficients(1, 1.0), (4.0, 2.0));
    }

    #[test]
    fn schur_elimination_of_negative_null_part() {
        // A = diag(1, 0), B = [[0, 1], [1, -1]]: sup over (r, n) of
        // (2rn - n²)/r² is 1 at n = r, so α = 0
        let a = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 0 { C64::new(1.0, 0.0) } else { ZERO });
        let b = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) | (1, 0) => C64::new(1.0, 0.0),
            (1, 1) => C64::new(-1.0, 0.0),
            _ => ZERO,
        });
        let est = alpha_from_forms(&a, &b).unwrap();
        assert_eq!(est.null_treatment, "schur");
        assert!(est.alpha.abs() < 1e-12, "{}", est.alpha);
    }

    #[test]
    fn positive_null_part_is_unbounded() {
        let a = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 0 { C64::new(1.0, 0.0) } else { ZERO });
        let b = Mat::from_fn(2, 2, |i, j| if i == 1 && j == 1 { C64::new(1.0, 0.0) } else { ZERO });
        assert_eq!(alpha_from_forms(&a, &b).unwrap().alpha, f64::NEG_INFINITY);
    }
}
