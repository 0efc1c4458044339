//! Surfaces with a positively curved cap surrounded by a hyperbolic collar,
//! tuned so that the terminator value lands in a prescribed window below 2.
//!
//! The surface itself is never built.  Along any geodesic the curvature is at
//! most `b²` on stretches of length at most `2r₃`, separated by stretches of
//! curvature `-1`; [`synth_profile`] realizes the extremal periodic profile and
//! the cocycle module certifies it.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::cocycle::{terminator_bisect, TerminatorCertificate, TerminatorConfig};
use crate::error::{Error, Result};
use crate::flow::{CurvatureProfile, Segment};

/// `π/(2√2)`: a cap of constant curvature `b²` longer than `2·PI_2SQRT2/b` has
/// 2-conjugate points.
pub const PI_2SQRT2: f64 = PI / (2.0 * std::f64::consts::SQRT_2);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GulliverParams {
    /// Cap curvature is `b²`.
    pub b: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub eps: f64,
    pub delta: f64,
    /// Collar size.
    pub collar: f64,
    /// `R' = R + r₂ - r₃`, the shortest traversal of the collar.
    pub r_prime: f64,
    pub beta_target: f64,
}

/// The unique `r₂ ∈ (0, r₁)` with `sin(b r₁)/b = sinh(r₁ - r₂)`; `b = 0` is the
/// limit `r₂ = r₁ - asinh(r₁)`.
pub fn solve_r2(b: f64, r1: f64) -> Result<f64> {
    if !(b >= 0.0) || !(r1 > 0.0) {
        return Err(Error::Domain(format!("need b >= 0 and r1 > 0, got b = {b}, r1 = {r1}")));
    }
    if b * r1 >= FRAC_PI_2 {
        return Err(Error::Domain(format!("b*r1 = {} must be below pi/2", b * r1)));
    }
    let lhs = sin_over_b(b, r1);
    let r2 = r1 - lhs.asinh();
    let residual = (lhs - (r1 - r2).sinh()).abs();
    if !(r2 > 0.0 && r2 < r1) || residual > 1e-12 * lhs.max(1.0) {
        return Err(Error::Solver(format!("r2 root out of range (r2 = {r2}, residual {residual:e})")));
    }
    Ok(r2)
}

fn sin_over_b(b: f64, r: f64) -> f64 {
    if b * r < 1e-6 {
        // series keeps full precision as b → 0
        r * (1.0 - (b * r).powi(2) / 6.0)
    } else {
        (b * r).sin() / b
    }
}

impl GulliverParams {
    /// Builds a parameter set from the free choices and checks the
    /// invariants of the construction.
    pub fn new(b: f64, r1: f64, eps: f64, delta: f64, collar: f64, beta_target: f64) -> Result<Self> {
        let r2 = solve_r2(b, r1)?;
        let r3 = r1 + eps;
        if !(eps > 0.0 && eps < r1 - r2) {
            return Err(Error::Domain(format!("eps = {eps} must lie in (0, r1 - r2 = {})", r1 - r2)));
        }
        if b * r3 >= FRAC_PI_2 {
            return Err(Error::Domain("b*(r1 + eps) must be below pi/2".into()));
        }
        let r_prime = collar + r2 - r3;
        if !(r_prime > 0.0) {
            return Err(Error::Domain(format!("collar R = {collar} must exceed r3 - r2 = {}", r3 - r2)));
        }
        Ok(GulliverParams { b, r1, r2, r3, eps, delta, collar, r_prime, beta_target })
    }

    /// `b(r₁ - ε) > π/(2√2)`: the constant-curvature core alone has
    /// 2-conjugate points, so the terminator value is below 2.
    pub fn forces_below_two(&self) -> bool {
        self.b * (self.r1 - self.eps) > PI_2SQRT2
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Feasibility {
    pub beta: f64,
    /// `π/2 - √β b r₃`.
    pub cond1_margin: f64,
    /// `tanh(√β R') - b tan(√β b r₃)`; `-∞` once the first condition fails.
    pub cond2_margin: f64,
    pub conjugate_point_free: bool,
}

/// Evaluates the two sufficient conditions for `Ψ^β` to be free of conjugate
/// points.
pub fn feasibility(p: &GulliverParams, beta: f64) -> Feasibility {
    let s = beta.max(0.0).sqrt();
    let cond1_margin = FRAC_PI_2 - s * p.b * p.r3;
    let cond2_margin =
        if cond1_margin > 0.0 { (s * p.r_prime).tanh() - p.b * (s * p.b * p.r3).tan() } else { f64::NEG_INFINITY };
    let conjugate_point_free = beta == 0.0 || (cond1_margin > 0.0 && cond2_margin > 0.0);
    Feasibility { beta, cond1_margin, cond2_margin, conjugate_point_free }
}

/// Largest β for which [`feasibility`] certifies freedom from conjugate
/// points, by bisection to `tol`.
pub fn max_feasible_beta(p: &GulliverParams, tol: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = (FRAC_PI_2 / (p.b * p.r3)).powi(2).min(1e6);
    if feasibility(p, hi).conjugate_point_free {
        return hi;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasibility(p, mid).conjugate_point_free {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub b0: f64,
    pub delta0: f64,
    /// Geometric factor applied to `b` and `δ` while the conditions fail.
    pub shrink: f64,
    pub max_shrinks: usize,
    /// Required positive margin on the selection conditions.
    pub tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { b0: 0.05, delta0: 0.1, shrink: 0.7, max_shrinks: 200, tol: 0.0 }
    }
}

/// Margins of the selection conditions on `(b, δ)`:
/// `π/2 - √β(π/(2√2) + 2bδ)` and `1/2 - b tan(√β(π/(2√2) + 2bδ))`.
pub fn selection_margins(beta: f64, b: f64, delta: f64) -> (f64, f64) {
    let arg = beta.sqrt() * (PI_2SQRT2 + 2.0 * b * delta);
    let m3 = FRAC_PI_2 - arg;
    let m4 = if m3 > 0.0 { 0.5 - b * arg.tan() } else { f64::NEG_INFINITY };
    (m3, m4)
}

/// Chooses `b`, `δ` small enough for the selection conditions, sets
/// `r₁ = π/(2√2 b) + δ`, `ε = δ/2`, and grows the collar until
/// `tanh(√β R') > 1/2`.
pub fn search_params(beta_target: f64, cfg: SearchConfig) -> Result<GulliverParams> {
    if !(beta_target > 1.5 && beta_target < 2.0) {
        return Err(Error::Domain(format!("beta_target must lie in (3/2, 2), got {beta_target}")));
    }
    let (mut b, mut delta) = (cfg.b0, cfg.delta0);
    let mut shrinks = 0;
    loop {
        let (m3, m4) = selection_margins(beta_target, b, delta);
        if m3 > cfg.tol && m4 > cfg.tol {
            break;
        }
        shrinks += 1;
        if shrinks > cfg.max_shrinks {
            return Err(Error::Solver(format!("no (b, delta) found for beta = {beta_target}")));
        }
        b *= cfg.shrink;
        delta *= cfg.shrink;
    }
    let r1 = PI_2SQRT2 / b + delta;
    let r2 = solve_r2(b, r1)?;
    let eps = (0.5 * delta).min(0.5 * (r1 - r2));
    let r3 = r1 + eps;
    // tanh(√β R') > 1/2 ⟺ R' > atanh(1/2)/√β; add a margin of one unit
    let r_prime = 0.5f64.atanh() / beta_target.sqrt() + 1.0;
    let collar = r_prime + r3 - r2;
    let p = GulliverParams::new(b, r1, eps, delta, collar, beta_target)?;
    let f = feasibility(&p, beta_target);
    if !f.conjugate_point_free || !p.forces_below_two() {
        return Err(Error::Solver(format!(
            "selected parameters fail the certificate (cond1 {:e}, cond2 {:e})",
            f.cond1_margin, f.cond2_margin
        )));
    }
    Ok(p)
}

/// Extremal periodic profile: curvature `b²` for `2r₃`, then `-1` for `2R'`.
///
/// A geodesic spends at least `R'` in the collar on each side of the cap, so
/// consecutive caps are at least `2R'` apart along the periodic worst case;
/// with this spacing the conjugate-point threshold of the profile is exactly
/// the equality case of the second feasibility condition.
pub fn synth_profile(p: &GulliverParams) -> CurvatureProfile {
    CurvatureProfile::piecewise(
        format!("gulliver(b={:.3e},beta={})", p.b, p.beta_target),
        vec![Segment { length: 2.0 * p.r3, k: p.b * p.b }, Segment { length: 2.0 * p.r_prime, k: -1.0 }],
    )
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GulliverCertificate {
    pub params: GulliverParams,
    pub feasibility: Feasibility,
    pub terminator: TerminatorCertificate,
    /// `beta_lo ≥ β_target - tol` and `beta_hi < 2`.
    pub window_ok: bool,
}

/// Runs the terminator bisection on the synthesized profile and compares the
/// bracket with `[β_target, 2)`.
pub fn certify(p: &GulliverParams, cfg: TerminatorConfig) -> Result<GulliverCertificate> {
    let profile = synth_profile(p);
    let terminator = terminator_bisect(&[profile], cfg)?;
    let window_ok =
        terminator.beta_lo >= p.beta_target - cfg.tol && terminator.beta_hi.is_some_and(|hi| hi < 2.0);
    Ok(GulliverCertificate { params: *p, feasibility: feasibility(p, p.beta_target), terminator, window_ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_over_b_series_matches() {
        let (b, r) = (1e-7, 3.0);
        assert!((sin_over_b(b, r) - (b * r).sin() / b).abs() < 1e-9);
    }
}
