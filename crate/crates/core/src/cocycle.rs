//! β-Jacobi cocycles along geodesics: conjugate points, Hopf solutions of the
//! Riccati equation, hyperbolicity, terminator values and the Anosov verdict.
//!
//! Everything here consumes a [`CurvatureProfile`].  Constant and piecewise
//! constant profiles are propagated with exact 2×2 transfer matrices and
//! closed-form zero finding; smooth and sampled profiles use classical RK4
//! with cubic Hermite dense output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{
    curvature_profile_along, find_closed_geodesics, integrate_geodesic, orbit_profile, random_unit_tangent,
    trapping_surrogate, CurvatureProfile, ProfileShape, Segment, TrappingConfig, TrappingReport,
};
use crate::geometry::{closed_geodesic_from_word, word_pool, SurfaceModel};

type State = [f64; 2];
type Mat2 = [[f64; 2]; 2];

fn mat_vec(m: &Mat2, s: State) -> State {
    [m[0][0] * s[0] + m[0][1] * s[1], m[1][0] * s[0] + m[1][1] * s[1]]
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Transfer matrix of `ÿ + c y = 0` over a time `tau`.
pub fn transfer(c: f64, tau: f64) -> Mat2 {
    if c > 0.0 {
        let w = c.sqrt();
        let (s, co) = (w * tau).sin_cos();
        [[co, s / w], [-w * s, co]]
    } else if c < 0.0 {
        let w = (-c).sqrt();
        let (s, co) = ((w * tau).sinh(), (w * tau).cosh());
        [[co, s / w], [w * s, co]]
    } else {
        [[1.0, tau], [0.0, 1.0]]
    }
}

/// First `τ ∈ (0, len]` where the solution of `ÿ + c y = 0` with data
/// `(y0, v0)` vanishes.
fn first_zero_exact(c: f64, y0: f64, v0: f64, len: f64) -> Option<f64> {
    let tiny = 1e-13 * len.max(1.0);
    let tau = if c > 0.0 {
        let w = c.sqrt();
        // y = A cos(wτ - φ)
        let phi = (v0 / w).atan2(y0);
        (-1..=1)
            .map(|n| (phi + std::f64::consts::FRAC_PI_2 + n as f64 * std::f64::consts::PI) / w)
            .filter(|t| *t > tiny)
            .fold(f64::INFINITY, f64::min)
    } else if c < 0.0 {
        let w = (-c).sqrt();
        if v0 == 0.0 {
            return None;
        }
        let q = -y0 * w / v0;
        if q > 0.0 && q < 1.0 {
            q.atanh() / w
        } else {
            return None;
        }
    } else {
        if v0 == 0.0 {
            return None;
        }
        -y0 / v0
    };
    (tau > tiny && tau <= len).then_some(tau)
}

fn rescale(s: State) -> State {
    let n = s[0].abs() + s[1].abs();
    if n > 1e100 || (n < 1e-100 && n > 0.0) {
        [s[0] / n, s[1] / n]
    } else {
        s
    }
}

impl CurvatureProfile {
    /// Replaces sampled profiles whose samples are all equal by the constant
    /// profile (exact propagation).
    pub fn simplified(&self) -> CurvatureProfile {
        if let ProfileShape::Sampled { values, .. } = &self.shape {
            if self.periodic && values.iter().all(|v| *v == values[0]) {
                return CurvatureProfile::constant(self.id.clone(), values[0]);
            }
        }
        self.clone()
    }

    fn is_exact(&self) -> bool {
        matches!(self.shape, ProfileShape::Constant { .. } | ProfileShape::Piecewise { .. })
    }

    /// Step used by the RK4 path and the output grid of exact kinds.
    pub fn natural_step(&self, beta: f64) -> f64 {
        let stiff = (beta.abs() * self.max_abs()).sqrt().max(1.0);
        match &self.shape {
            ProfileShape::Sampled { dt, .. } => dt / (dt * stiff / 0.02).ceil().max(1.0),
            ProfileShape::Trig { period, .. } => {
                let h0 = (0.01 / stiff).min(period / 200.0);
                period / (period / h0).ceil()
            }
            ProfileShape::Piecewise { .. } => {
                let p = self.period().unwrap();
                p / (p / (0.05 / stiff)).ceil().max(256.0)
            }
            ProfileShape::Constant { .. } => 0.01 / stiff,
        }
    }
}

/// Exact propagation over `[t0, t1]` of a piecewise constant (or constant)
/// profile, with an optional callback reporting the first zero of `y`.
fn propagate_exact(profile: &CurvatureProfile, beta: f64, t0: f64, t1: f64, mut s: State, find_zero: bool) -> (State, Option<f64>) {
    match &profile.shape {
        ProfileShape::Constant { k } => {
            let c = beta * k;
            let z = if find_zero { first_zero_exact(c, s[0], s[1], t1 - t0).map(|tau| t0 + tau) } else { None };
            (mat_vec(&transfer(c, t1 - t0), s), z)
        }
        ProfileShape::Piecewise { segments } => {
            let period: f64 = segments.iter().map(|g| g.length).sum();
            let cycles = (t0 / period).floor();
            let mut base = cycles * period;
            let mut idx = 0;
            let mut seg_start = base;
            // locate the segment containing t0
            loop {
                let end = seg_start + segments[idx].length;
                if end > t0 {
                    break;
                }
                seg_start = end;
                idx += 1;
                if idx == segments.len() {
                    idx = 0;
                    base += period;
                    seg_start = base;
                }
            }
            let mut t = t0;
            while t < t1 {
                let seg_end = seg_start + segments[idx].length;
                let stop = seg_end.min(t1);
                let c = beta * segments[idx].k;
                if find_zero {
                    if let Some(tau) = first_zero_exact(c, s[0], s[1], stop - t) {
                        return (mat_vec(&transfer(c, tau), s), Some(t + tau));
                    }
                }
                s = rescale(mat_vec(&transfer(c, stop - t), s));
                t = stop;
                seg_start = seg_end;
                idx += 1;
                if idx == segments.len() {
                    idx = 0;
                }
            }
            (s, None)
        }
        _ => unreachable!("exact propagation requires a constant or piecewise profile"),
    }
}

fn rk4_step(profile: &CurvatureProfile, beta: f64, t: f64, s: State, h: f64) -> State {
    let f = |t: f64, s: State| [s[1], -beta * profile.eval(t) * s[0]];
    let k1 = f(t, s);
    let k2 = f(t + h / 2.0, [s[0] + h / 2.0 * k1[0], s[1] + h / 2.0 * k1[1]]);
    let k3 = f(t + h / 2.0, [s[0] + h / 2.0 * k2[0], s[1] + h / 2.0 * k2[1]]);
    let k4 = f(t + h, [s[0] + h * k3[0], s[1] + h * k3[1]]);
    [
        s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Zero of the cubic Hermite interpolant on `[0, h]` with `y(0) > 0 ≥ y(h)`.
fn hermite_zero(y0: f64, d0: f64, y1: f64, d1: f64, h: f64) -> f64 {
    let p = |u: f64| {
        let (u2, u3) = (u * u, u * u * u);
        (2.0 * u3 - 3.0 * u2 + 1.0) * y0 + (u3 - 2.0 * u2 + u) * h * d0 + (-2.0 * u3 + 3.0 * u2) * y1 + (u3 - u2) * h * d1
    };
    let (mut a, mut b) = (0.0, 1.0);
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if p(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b) * h
}

/// Propagates `(y, ẏ)` from `t0` to `t1 ≥ t0`, returning the state and the
/// first time in `(t0, t1]` where `y` changes sign from its sign at `t0`.
fn propagate(profile: &CurvatureProfile, beta: f64, t0: f64, t1: f64, s: State, find_zero: bool) -> (State, Option<f64>) {
    if t1 <= t0 {
        return (s, None);
    }
    if profile.is_exact() {
        return propagate_exact(profile, beta, t0, t1, s, find_zero);
    }
    let h0 = profile.natural_step(beta);
    let n = ((t1 - t0) / h0 - 1e-9).ceil().max(1.0) as usize;
    let h = (t1 - t0) / n as f64;
    let mut s = s;
    let sign0 = if s[0] != 0.0 { s[0].signum() } else { s[1].signum() };
    for j in 0..n {
        let t = t0 + j as f64 * h;
        let s1 = rk4_step(profile, beta, t, s, h);
        if find_zero && s1[0] * sign0 <= 0.0 {
            let tau = hermite_zero(s[0] * sign0, s[1] * sign0, s1[0] * sign0, s1[1] * sign0, h);
            return (s1, Some(t + tau));
        }
        s = s1;
        let norm = s[0].abs() + s[1].abs();
        if norm > 1e100 {
            s = [s[0] / norm, s[1] / norm];
        }
    }
    (s, None)
}

/// Samples of a β-Jacobi solution on a uniform time grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JacobiSolution {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub yd: Vec<f64>,
}

/// Solves `ÿ + βK(t)y = 0` with `y(0) = y0`, `ẏ(0) = yd0` on `[0, t_end]`.
pub fn integrate_beta_jacobi(profile: &CurvatureProfile, beta: f64, y0: f64, yd0: f64, t_end: f64) -> Result<JacobiSolution> {
    check_beta(beta)?;
    if !(t_end > 0.0) {
        return Err(Error::Config(format!("integration time must be positive, got {t_end}")));
    }
    if t_end > profile.window() * (1.0 + 1e-12) {
        return Err(Error::Config(format!("profile '{}' is only defined up to t = {}", profile.id, profile.window())));
    }
    let h0 = profile.natural_step(beta);
    let n = (t_end / h0 - 1e-9).ceil().max(1.0) as usize;
    let h = t_end / n as f64;
    let mut sol = JacobiSolution { t: vec![0.0], y: vec![y0], yd: vec![yd0] };
    let mut s = [y0, yd0];
    for j in 0..n {
        let (t, t1) = (j as f64 * h, (j + 1) as f64 * h);
        s = if profile.is_exact() { propagate_exact(profile, beta, t, t1, s, false).0 } else { rk4_step(profile, beta, t, s, h) };
        sol.t.push(t1);
        sol.y.push(s[0]);
        sol.yd.push(s[1]);
    }
    Ok(sol)
}

/// The cocycle matrix `Ψ_t^β` mapping `(y(0), ẏ(0))` to `(y(t), ẏ(t))`.
pub fn cocycle_matrix(profile: &CurvatureProfile, beta: f64, t: f64) -> Mat2 {
    let (a, _) = propagate(profile, beta, 0.0, t, [1.0, 0.0], false);
    let (b, _) = propagate(profile, beta, 0.0, t, [0.0, 1.0], false);
    [[a[0], b[0]], [a[1], b[1]]]
}

/// Monodromy over one period (`Ψ_T^β`); the cocycle along a periodic orbit
/// is hyperbolic exactly when `|tr| > 2`.
pub fn monodromy(profile: &CurvatureProfile, beta: f64) -> Option<Mat2> {
    profile.period().map(|p| cocycle_matrix(profile, beta, p))
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::Config(format!("beta must be finite and non-negative, got {beta}")));
    }
    Ok(())
}

/// Default conjugate-point search horizon for a profile.
pub fn default_t_max(profile: &CurvatureProfile) -> f64 {
    let t = profile.period().map_or(200.0, |p| (10.0 * p).max(200.0));
    t.min(profile.window())
}

/// Smallest `t ∈ (0, t_max]` with `y(t) = 0` for `y(0) = 0`, `ẏ(0) = 1`.
pub fn first_conjugate_time(profile: &CurvatureProfile, beta: f64, t_max: f64) -> Option<f64> {
    let t_max = t_max.min(profile.window());
    if !(t_max > 0.0) || beta == 0.0 {
        return None;
    }
    propagate(profile, beta, 0.0, t_max, [0.0, 1.0], true).1
}

/// Solves the Riccati equation `ṙ + r² + βK = 0` with RK4 from `r(0) = r0`,
/// failing with a conjugate-point error if `r` runs off to `-∞`.
pub fn integrate_riccati(profile: &CurvatureProfile, beta: f64, r0: f64, t_end: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    riccati_on_grid(profile, beta, r0, t_end, riccati_steps(profile, beta, r0, t_end))
}

fn riccati_steps(profile: &CurvatureProfile, beta: f64, r0: f64, t_end: f64) -> usize {
    let h0 = profile.natural_step(beta).min(0.01 / (1.0 + r0.abs()));
    (t_end / h0 - 1e-9).ceil().max(1.0) as usize
}

fn riccati_on_grid(profile: &CurvatureProfile, beta: f64, r0: f64, t_end: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let h = t_end / n as f64;
    let f = |t: f64, r: f64| -r * r - beta * profile.eval(t);
    let (mut ts, mut rs) = (vec![0.0], vec![r0]);
    let mut r = r0;
    for j in 0..n {
        let t0 = j as f64 * h;
        // near a blow-up the local time scale is 1/|r|; substep so that
        // h·|r| stays below 0.01 while keeping the output grid fixed
        let sub = (h * (1.0 + r.abs()) / 0.01).ceil().clamp(1.0, 1e6) as usize;
        let hs = h / sub as f64;
        for i in 0..sub {
            let t = t0 + i as f64 * hs;
            let k1 = f(t, r);
            let k2 = f(t + hs / 2.0, r + hs / 2.0 * k1);
            let k3 = f(t + hs / 2.0, r + hs / 2.0 * k2);
            let k4 = f(t + hs, r + hs * k3);
            r += hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if !r.is_finite() || r < -1e8 {
                return Err(Error::ConjugatePoint { beta, time: t + hs });
            }
        }
        ts.push(t0 + h);
        rs.push(r);
    }
    Ok((ts, rs))
}

/// Hopf solutions `r^±` sampled over one period.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HopfPair {
    pub t: Vec<f64>,
    pub r_plus: Vec<f64>,
    pub r_minus: Vec<f64>,
    /// Truncation horizon actually used (a whole number of periods).
    pub r_used: f64,
    pub gap_min: f64,
}

/// `r⁺_R` on a grid over one period: the Riccati solution started at
/// `t = -R` from `r = cap`.  It is computed from the Jacobi solution with
/// `y(-R) = 1/cap`, `ẏ(-R) = 1`, so passing through `ẏ = 0` or `r = ∞` needs no
/// special handling.
fn r_plus_over_period(profile: &CurvatureProfile, beta: f64, r: f64, cap: f64) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let period = profile.period().unwrap_or(1.0);
    let r_eff = (r / period).ceil().max(1.0) * period;
    // output grid independent of β so that pairs at different β line up
    let step = profile.natural_step(0.0);
    let n = (period / step).round().max(1.0) as usize;
    let init = if cap.is_finite() { [1.0 / cap, 1.0] } else { [0.0, 1.0] };
    let (mut s, z) = propagate(profile, beta, 0.0, r_eff, init, true);
    if let Some(t) = z {
        return Err(Error::ConjugatePoint { beta, time: t - r_eff });
    }
    let (mut ts, mut rs) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for j in 0..n {
        let t = j as f64 * period / n as f64;
        if j > 0 {
            let (s1, z) = propagate(profile, beta, r_eff + (j - 1) as f64 * period / n as f64, r_eff + t, s, true);
            if let Some(tz) = z {
                return Err(Error::ConjugatePoint { beta, time: tz - r_eff });
            }
            s = s1;
        }
        ts.push(t);
        rs.push(s[1] / s[0]);
    }
    Ok((ts, rs, r_eff))
}

/// Hopf limit solutions truncated at horizon `R`: `r⁺` from `r(-R) = +cap`
/// and `r⁻` from `r(R) = -cap`, the latter via the reversed profile,
/// `r⁻(t) = -r⁺_rev(-t)`.
pub fn riccati_hopf(profile: &CurvatureProfile, beta: f64, r: f64, cap: f64) -> Result<HopfPair> {
    check_beta(beta)?;
    if !(r > 0.0) {
        return Err(Error::Config("Hopf horizon R must be positive".into()));
    }
    if !profile.periodic {
        return Err(Error::Config(format!("profile '{}' is a finite window; Hopf solutions need a periodic profile", profile.id)));
    }
    let profile = profile.simplified();
    let (t, r_plus, r_used) = r_plus_over_period(&profile, beta, r, cap)?;
    let (_, rev, _) = r_plus_over_period(&profile.reversed(), beta, r, cap)?;
    let n = t.len();
    let r_minus: Vec<f64> = (0..n).map(|j| -rev[(n - j) % n]).collect();
    let gap_min = r_plus.iter().zip(&r_minus).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
    Ok(HopfPair { t, r_plus, r_minus, r_used, gap_min })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hyperbolicity {
    Hyperbolic,
    NotHyperbolic,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperbolicityConfig {
    pub gap_tol: f64,
    /// Base horizon; `None` picks `max(20, 4·period)`.
    pub horizon: Option<f64>,
    pub cap: f64,
}

impl Default for HyperbolicityConfig {
    fn default() -> Self {
        HyperbolicityConfig { gap_tol: 1e-4, horizon: None, cap: 1e6 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HyperbolicityReport {
    pub verdict: Hyperbolicity,
    /// `(R, min(r⁺ - r⁻))` for `R, 2R, 4R`.
    pub gaps: Vec<(f64, f64)>,
    /// `log‖Ψ_T ξ‖ / T` for the probe `ξ = (1, 0)` and `T = 4R`.
    pub probe_growth_rate: f64,
    pub monodromy_trace: Option<f64>,
}

/// Decides hyperbolicity of the cocycle along a periodic profile from the
/// Hopf gap at horizons `R, 2R, 4R`: a gap above `gap_tol` stable to 10% is
/// hyperbolic, a gap that keeps shrinking under doubling is not.
pub fn hyperbolicity_test(profile: &CurvatureProfile, beta: f64, cfg: HyperbolicityConfig) -> Result<HyperbolicityReport> {
    let period = profile.period().unwrap_or(1.0);
    let r0 = cfg.horizon.unwrap_or((4.0 * period).max(20.0));
    let mut gaps = Vec::new();
    for f in [1.0, 2.0, 4.0] {
        let pair = riccati_hopf(profile, beta, f * r0, cfg.cap)?;
        gaps.push((pair.r_used, pair.gap_min));
    }
    let (g1, g2, g4) = (gaps[0].1, gaps[1].1, gaps[2].1);
    let stable = g4 > cfg.gap_tol && (g2 - g4).abs() <= 0.1 * g4 && (g1 - g4).abs() <= 0.1 * g4;
    let shrinking = g4 < cfg.gap_tol || (g2 < 0.75 * g1 && g4 < 0.75 * g2);
    let t = 4.0 * r0;
    let probe_growth_rate = probe_rate(&profile.simplified(), beta, t).unwrap_or(f64::NAN);
    let monodromy_trace = monodromy(&profile.simplified(), beta).map(|m| m[0][0] + m[1][1]);
    use Hyperbolicity::*;
    let mut verdict = if stable {
        Hyperbolic
    } else if shrinking {
        NotHyperbolic
    } else {
        Inconclusive
    };
    if let Some(tr) = monodromy_trace {
        // along a periodic orbit hyperbolicity is |tr Ψ_T| > 2
        if (verdict == Hyperbolic && tr.abs() <= 2.0) || (verdict == NotHyperbolic && tr.abs() > 2.0 + 1e-6 && probe_growth_rate > 1e-3) {
            verdict = Inconclusive;
        }
    }
    Ok(HyperbolicityReport { verdict, gaps, probe_growth_rate, monodromy_trace })
}
/// Growth rate of `(1, 0)` measured in pieces, since `propagate` rescales
/// large states.
fn probe_rate(profile: &CurvatureProfile, beta: f64, t: f64) -> Option<f64> {
    let pieces = 64;
    let mut s = [1.0, 0.0];
    let mut log_norm = 0.0;
    for j in 0..pieces {
        let (a, b) = (t * j as f64 / pieces as f64, t * (j + 1) as f64 / pieces as f64);
        s = propagate(profile, beta, a, b, s, false).0;
        let n = s[0].hypot(s[1]);
        if !(n > 0.0 && n.is_finite()) {
            return None;
        }
        log_norm += n.ln();
        s = [s[0] / n, s[1] / n];
    }
    Some(log_norm / t)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TerminatorConfig {
    pub beta_max: f64,
    pub tol: f64,
    /// Conjugate-point horizon; `None` uses `max(200, 10·period)` per profile.
    pub t_max: Option<f64>,
}

impl Default for TerminatorConfig {
    fn default() -> Self {
        TerminatorConfig { beta_max: 64.0, tol: 1e-3, t_max: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConjugateEvidence {
    pub beta: f64,
    pub profile: String,
    pub first_conjugate_time: Option<f64>,
}

/// Bracket `[beta_lo, beta_hi]` for the terminator value over a profile pool.
/// When every tested profile is free of conjugate points at `beta_max`,
/// `exceeds_beta_max` is set and `beta_hi` is `None`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TerminatorCertificate {
    pub beta_lo: f64,
    pub beta_hi: Option<f64>,
    pub beta_max: f64,
    pub exceeds_beta_max: bool,
    pub profiles: Vec<String>,
    pub evidence: Vec<ConjugateEvidence>,
}

impl TerminatorCertificate {
    pub fn summary(&self) -> String {
        match self.beta_hi {
            None => format!("beta_Ter exceeds beta_max = {}", self.beta_max),
            Some(hi) => format!("beta_Ter in [{:.6}, {:.6}]", self.beta_lo, hi),
        }
    }
}

/// Bisection on β for the largest value at which none of the profiles has a
/// conjugate point within its horizon.  Relies on monotonicity in β.
pub fn terminator_bisect(profiles: &[CurvatureProfile], cfg: TerminatorConfig) -> Result<TerminatorCertificate> {
    if profiles.is_empty() {
        return Err(Error::InsufficientData("terminator bisection needs at least one profile".into()));
    }
    if !(cfg.beta_max > 0.0) || !(cfg.tol > 0.0) {
        return Err(Error::Config("beta_max and tol must be positive".into()));
    }
    let pool: Vec<CurvatureProfile> = profiles.iter().map(|p| p.simplified()).collect();
    let mut evidence = Vec::new();
    let free = |beta: f64, evidence: &mut Vec<ConjugateEvidence>| -> bool {
        let times: Vec<Option<f64>> = pool
            .par_iter()
            .map(|p| first_conjugate_time(p, beta, cfg.t_max.unwrap_or_else(|| default_t_max(p))))
            .collect();
        for (p, t) in pool.iter().zip(&times) {
            evidence.push(ConjugateEvidence { beta, profile: p.id.clone(), first_conjugate_time: *t });
        }
        times.iter().all(Option::is_none)
    };
    let ids = pool.iter().map(|p| p.id.clone()).collect();
    if free(cfg.beta_max, &mut evidence) {
        return Ok(TerminatorCertificate {
            beta_lo: cfg.beta_max,
            beta_hi: None,
            beta_max: cfg.beta_max,
            exceeds_beta_max: true,
            profiles: ids,
            evidence,
        });
    }
    let (mut lo, mut hi) = (0.0, cfg.beta_max);
    while hi - lo > cfg.tol {
        let mid = 0.5 * (lo + hi);
        if free(mid, &mut evidence) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(TerminatorCertificate { beta_lo: lo, beta_hi: Some(hi), beta_max: cfg.beta_max, exceeds_beta_max: false, profiles: ids, evidence })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnosovVerdict {
    AnosovConsistent,
    NotAnosov,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnosovConfig {
    pub trapping: TrappingConfig,
    pub terminator: TerminatorConfig,
    /// Closed geodesics added to the profile pool.
    pub n_closed: usize,
    /// Long non-closed orbits added to the pool.
    pub n_random: usize,
    pub random_window: f64,
    pub seed: u64,
}

impl Default for AnosovConfig {
    fn default() -> Self {
        AnosovConfig {
            trapping: TrappingConfig::default(),
            terminator: TerminatorConfig::default(),
            n_closed: 16,
            n_random: 8,
            random_window: 100.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnosovReport {
    pub surface: String,
    pub verdict: AnosovVerdict,
    pub trapping: TrappingReport,
    pub terminator: TerminatorCertificate,
    pub notes: Vec<String>,
}

/// Builds the profile pool used for a surface: closed geodesics plus long
/// random orbit windows.
pub fn profile_pool(model: &SurfaceModel, cfg: &AnosovConfig) -> Result<(Vec<CurvatureProfile>, Vec<String>)> {
    let mut pool = Vec::new();
    let mut notes = Vec::new();
    match model {
        SurfaceModel::ConstantCurvature { k0 } => {
            pool.push(CurvatureProfile::constant(format!("constant(K={k0})"), *k0));
            notes.push("constant curvature: every geodesic has the same profile".into());
        }
        SurfaceModel::FuchsianOctagon(oct) => {
            for e in word_pool(oct, 4).iter().take(cfg.n_closed) {
                if let Some(g) = closed_geodesic_from_word(oct, &e.word, 64)? {
                    pool.push(curvature_profile_along(model, &g)?);
                }
            }
        }
        SurfaceModel::ConformalTorus(m) => {
            let classes = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2)];
            for &c in classes.iter().take(cfg.n_closed) {
                match find_closed_geodesics(m, c, 1e-8, 256) {
                    Ok(g) => pool.push(curvature_profile_along(model, &g)?),
                    Err(e) => notes.push(format!("class {c:?}: {e}")),
                }
            }
        }
    }
    if !matches!(model, SurfaceModel::ConstantCurvature { .. }) {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for i in 0..cfg.n_random {
            let start = random_unit_tangent(model, &mut rng);
            let orbit = integrate_geodesic(model, start, cfg.random_window, 0.02)?;
            pool.push(orbit_profile(model, &orbit, format!("orbit{i}"))?);
        }
    }
    Ok((pool, notes))
}

/// Anosov verdict from the finite trapping surrogate and the terminator
/// bracket: Anosov-consistent needs no detected trapping and `β_Ter > 1`.
pub fn anosov_verdict(model: &SurfaceModel, cfg: &AnosovConfig) -> Result<AnosovReport> {
    let (pool, mut notes) = profile_pool(model, cfg)?;
    if pool.is_empty() {
        return Err(Error::InsufficientData("no geodesic profiles could be sampled".into()));
    }
    let trapping = trapping_surrogate(model, cfg.trapping, cfg.seed)?;
    let terminator = terminator_bisect(&pool, cfg.terminator)?;
    notes.push(trapping.note.clone());
    notes.push(format!("{} over a pool of {} profiles (finite sample)", terminator.summary(), pool.len()));
    let verdict = if trapping.trapped {
        AnosovVerdict::NotAnosov
    } else if terminator.exceeds_beta_max || terminator.beta_lo > 1.0 {
        AnosovVerdict::AnosovConsistent
    } else if terminator.beta_hi.is_some_and(|hi| hi <= 1.0) {
        AnosovVerdict::NotAnosov
    } else {
        AnosovVerdict::Inconclusive
    };
    Ok(AnosovReport { surface: model.name().to_string(), verdict, trapping, terminator, notes })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub holds: bool,
    /// `min_t (r₁(t) - r₀(t))`.
    pub min_margin: f64,
}

/// Riccati comparison: with `K₁ ≤ K₀` and `w₁ ≥ w₀`, the solutions of
/// `ṙ + r² + K = 0`, `r(0) = w`, satisfy `r₁ ≥ r₀` on `[0, t0]`.
pub fn comparison_oracle(k0: &CurvatureProfile, k1: &CurvatureProfile, w0: f64, w1: f64, t0: f64, tol: f64) -> Result<ComparisonReport> {
    if w1 < w0 {
        return Err(Error::Config(format!("comparison needs w1 >= w0, got {w1} < {w0}")));
    }
    // both solutions on the finer of the two natural grids, so they are
    // compared at the same times
    let n = riccati_steps(k0, 1.0, w0, t0).max(riccati_steps(k1, 1.0, w1, t0));
    let (_, r0) = riccati_on_grid(k0, 1.0, w0, t0, n).map_err(|e| match e {
        Error::ConjugatePoint { time, .. } => Error::Domain(format!("r0 is not defined on [0, t0]: blow-up near t = {time:.4}")),
        other => other,
    })?;
    let (_, r1) = riccati_on_grid(k1, 1.0, w1, t0, n)?;
    let min_margin = r1.iter().zip(&r0).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
    Ok(ComparisonReport { holds: min_margin >= -tol, min_margin })
}

/// Convenience: a two-piece periodic profile.
pub fn two_piece_profile(id: &str, len_a: f64, k_a: f64, len_b: f64, k_b: f64) -> CurvatureProfile {
    CurvatureProfile::piecewise(id, vec![Segment { length: len_a, k: k_a }, Segment { length: len_b, k: k_b }])
}

/// Convenience for tests and examples: det of a 2×2 matrix.
pub fn det2(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Product of cocycle matrices, `Ψ_{s+t} = Ψ_t∘σ_s · Ψ_s`.
pub fn compose2(a: &Mat2, b: &Mat2) -> Mat2 {
    mat_mul(a, b)
}
