//! The geodesic flow on the unit tangent bundle: integration, closed geodesics
//! on tori, and curvature profiles along orbits.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::octagon::disk_geodesic_step;
use crate::geometry::{
    angle_diff, curvature_at, ClosedGeodesic, GeodesicSource, SurfaceModel, TorusMetric, UnitTangent,
};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OrbitSample {
    pub t: f64,
    pub state: UnitTangent,
}

/// A sampled trajectory `t ↦ φ_t(start)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeodesicOrbit {
    pub samples: Vec<OrbitSample>,
    pub dt: f64,
}

/// Right-hand side of the geodesic equations in isothermal coordinates,
/// `ẋ = e^{-λ}cos θ`, `ẏ = e^{-λ}sin θ`, `θ̇ = e^{-λ}(λ_y cos θ - λ_x sin θ)`.
fn torus_rhs(m: &TorusMetric, s: [f64; 3]) -> Result<[f64; 3]> {
    let j = m.jet(s[0], s[1]);
    let e = (-j.value).exp();
    let (sn, cs) = s[2].sin_cos();
    let out = [e * cs, e * sn, e * (j.dy * cs - j.dx * sn)];
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::Evaluation(format!("non-finite lambda derivatives at ({}, {})", s[0], s[1])))
    }
}

/// One classical Runge-Kutta step of the torus geodesic flow on unwrapped
/// coordinates.
pub fn torus_rk4_step(m: &TorusMetric, s: [f64; 3], h: f64) -> Result<[f64; 3]> {
    let add = |a: [f64; 3], b: [f64; 3], c: f64| [a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]];
    let k1 = torus_rhs(m, s)?;
    let k2 = torus_rhs(m, add(s, k1, h / 2.0))?;
    let k3 = torus_rhs(m, add(s, k2, h / 2.0))?;
    let k4 = torus_rhs(m, add(s, k3, h))?;
    Ok([
        s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        s[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ])
}

/// Integrates `n` equal steps of size `h` from an unwrapped torus state.
fn torus_shoot(m: &TorusMetric, s0: [f64; 3], h: f64, n: usize) -> Result<[f64; 3]> {
    let mut s = s0;
    for _ in 0..n {
        s = torus_rk4_step(m, s, h)?;
    }
    Ok(s)
}

/// Exact flow of the constant curvature chart `λ = ln 2 - ln(1 + k0|z|²)`.
pub fn constant_curvature_flow(k0: f64, start: UnitTangent, t: f64) -> Result<UnitTangent> {
    let z = start.z();
    if k0 == 0.0 {
        // speed e^{-λ} = 1/2 in the chart
        let p = z + C64::from_polar(0.5 * t, start.theta);
        return Ok(UnitTangent::new(p.re, p.im, start.theta));
    }
    if k0 < 0.0 {
        let c = (-k0).sqrt();
        let w = z * c;
        if w.norm() >= 1.0 {
            return Err(Error::Domain(format!("{z} lies outside the hyperbolic chart")));
        }
        let (w1, th) = disk_geodesic_step(w, start.theta, c * t);
        let p = w1 / c;
        return Ok(UnitTangent::new(p.re, p.im, th));
    }
    // sphere of curvature k0: rotate along the great circle in R³
    let c = k0.sqrt();
    let w = z * c;
    let rho = 1.0 + w.norm_sqr();
    let p = [2.0 * w.re / rho, 2.0 * w.im / rho, (w.norm_sqr() - 1.0) / rho];
    let d = C64::from_polar(1.0, start.theta);
    let wd = 2.0 * (w.conj() * d).re;
    let mut tv = [
        2.0 * d.re / rho - 2.0 * w.re * wd / (rho * rho),
        2.0 * d.im / rho - 2.0 * w.im * wd / (rho * rho),
        2.0 * wd / (rho * rho),
    ];
    let nt = (tv[0] * tv[0] + tv[1] * tv[1] + tv[2] * tv[2]).sqrt();
    tv.iter_mut().for_each(|v| *v /= nt);
    let (sn, cs) = (c * t).sin_cos();
    let q: Vec<f64> = (0..3).map(|i| cs * p[i] + sn * tv[i]).collect();
    let qd: Vec<f64> = (0..3).map(|i| -sn * p[i] + cs * tv[i]).collect();
    let den = 1.0 - q[2];
    if den < 1e-14 {
        return Err(Error::Domain("orbit passes through the point at infinity of the stereographic chart".into()));
    }
    let w1 = C64::new(q[0], q[1]) / den;
    let dw = (C64::new(qd[0], qd[1]) * den + C64::new(q[0], q[1]) * qd[2]) / (den * den);
    let p1 = w1 / c;
    Ok(UnitTangent::new(p1.re, p1.im, dw.arg()))
}

fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Config(format!("integration time must be positive, got {t_end}")));
    }
    if !(dt > 0.0) || dt < 1e-12 * t_end {
        return Err(Error::Config(format!("step size {dt} underflows for T = {t_end}")));
    }
    Ok((t_end / dt - 1e-9).ceil() as usize)
}

/// Integrates `φ_t(start)` for `t ∈ [0, t_end]` with fixed step `dt` (the
/// final step is shortened to land on `t_end`).  Torus models use RK4;
/// constant curvature and the octagon use exact formulas.
pub fn integrate_geodesic(model: &SurfaceModel, start: UnitTangent, t_end: f64, dt: f64) -> Result<GeodesicOrbit> {
    let n = step_count(t_end, dt)?;
    let times: Vec<f64> = (0..=n).map(|j| (j as f64 * dt).min(t_end)).collect();
    let mut samples = Vec::with_capacity(n + 1);
    match model {
        SurfaceModel::ConformalTorus(m) => {
            let mut s = [start.x, start.y, start.theta];
            samples.push(OrbitSample { t: 0.0, state: wrap_torus(m, s) });
            for j in 1..=n {
                s = torus_rk4_step(m, s, times[j] - times[j - 1])?;
                samples.push(OrbitSample { t: times[j], state: wrap_torus(m, s) });
            }
        }
        SurfaceModel::ConstantCurvature { k0 } => {
            for &t in &times {
                samples.push(OrbitSample { t, state: constant_curvature_flow(*k0, start, t)? });
            }
        }
        SurfaceModel::FuchsianOctagon(oct) => {
            let r = oct.reduce(start.z())?;
            let mut z = r.point;
            let mut th = start.theta + r.element.arg_deriv(start.z());
            samples.push(OrbitSample { t: 0.0, state: UnitTangent::new(z.re, z.im, th) });
            for j in 1..=n {
                let (z1, th1) = disk_geodesic_step(z, th, times[j] - times[j - 1]);
                let red = oct.reduce(z1)?;
                th = th1 + red.element.arg_deriv(z1);
                z = red.point;
                samples.push(OrbitSample { t: times[j], state: UnitTangent::new(z.re, z.im, th) });
            }
        }
    }
    Ok(GeodesicOrbit { samples, dt })
}

fn wrap_torus(m: &TorusMetric, s: [f64; 3]) -> UnitTangent {
    let (x, y) = m.wrap(s[0], s[1]);
    UnitTangent::new(x, y, s[2])
}

/// Finds a closed geodesic in the free homotopy class `(p, q)` of the torus by
/// shooting with a damped Gauss-Newton (Levenberg-Marquardt) iteration on the
/// start offset, initial angle and period.  The orbit is returned with
/// `n_samples` equally spaced samples.
pub fn find_closed_geodesics(m: &TorusMetric, class: (i64, i64), tol: f64, n_samples: usize) -> Result<ClosedGeodesic> {
    let (p, q) = class;
    if p == 0 && q == 0 {
        return Err(Error::Config("homotopy class (0, 0) has no closed geodesic".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    let shift = [p as f64 * m.lx, q as f64 * m.ly];
    let chart_len = shift[0].hypot(shift[1]);
    let mean_lambda = m.terms.iter().filter(|t| t.a == 0 && t.b == 0).map(|t| t.c.re).sum::<f64>();
    let theta_guess = shift[1].atan2(shift[0]);
    let t_guess = chart_len * mean_lambda.exp();
    let n_samples = n_samples.max(16);
    // integration steps: fine enough that RK4 error sits well below tol
    let steps = n_samples * ((4000.0 * t_guess.max(1.0) / n_samples as f64).ceil() as usize).max(1);
    let start_of = |u: &[f64; 3]| -> [f64; 3] {
        if p != 0 {
            [0.0, u[0], u[1]]
        } else {
            [u[0], 0.0, u[1]]
        }
    };
    let residual = |u: &[f64; 3]| -> Result<[f64; 3]> {
        if !(u[2] > 0.0) {
            return Ok([f64::INFINITY; 3]);
        }
        let s0 = start_of(u);
        let s1 = torus_shoot(m, s0, u[2] / steps as f64, steps)?;
        Ok([s1[0] - s0[0] - shift[0], s1[1] - s0[1] - shift[1], angle_diff(s1[2], s0[2])])
    };
    let norm = |r: &[f64; 3]| (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    let transversal = if p != 0 { m.ly } else { m.lx };
    let mut best: Option<([f64; 3], f64)> = None;
    for i in 0..8 {
        let mut u = [transversal * i as f64 / 8.0, theta_guess, t_guess];
        let mut r = residual(&u)?;
        let mut mu = 1e-3;
        for _ in 0..60 {
            if norm(&r) < 0.1 * tol {
                break;
            }
            let mut jac = [[0.0; 3]; 3];
            for c in 0..3 {
                let hstep = 1e-6 * u[c].abs().max(1.0);
                let (mut up, mut um) = (u, u);
                up[c] += hstep;
                um[c] -= hstep;
                let (rp, rm) = (residual(&up)?, residual(&um)?);
                for row in 0..3 {
                    jac[row][c] = (rp[row] - rm[row]) / (2.0 * hstep);
                }
            }
            let mut improved = false;
            for _ in 0..12 {
                let delta = lm_step(&jac, &r, mu);
                let cand = [u[0] + delta[0], u[1] + delta[1], u[2] + delta[2]];
                let rc = residual(&cand)?;
                if norm(&rc) < norm(&r) {
                    u = cand;
                    r = rc;
                    mu = (mu / 3.0).max(1e-12);
                    improved = true;
                    break;
                }
                mu *= 4.0;
            }
            if !improved {
                break;
            }
        }
        // among converged candidates keep the shortest geodesic
        let e = norm(&r);
        let better = match &best {
            None => true,
            Some((ub, eb)) => {
                if e < tol && *eb < tol {
                    u[2] < ub[2] - 1e-9
                } else {
                    e < *eb
                }
            }
        };
        if better {
            best = Some((u, e));
        }
    }
    let (u, err) = best.unwrap();
    if !(err < tol) {
        return Err(Error::Solver(format!(
            "shooting for class ({p}, {q}) stalled with return-map residual {err:.3e} > {tol:.1e}"
        )));
    }
    let sub = steps / n_samples;
    let h = u[2] / steps as f64;
    let mut s = start_of(&u);
    let mut orbit = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        orbit.push(wrap_torus(m, s));
        s = torus_shoot(m, s, h, sub)?;
    }
    Ok(ClosedGeodesic { orbit, period: u[2], source: GeodesicSource::TorusShooting { p, q }, closure_error: err })
}

/// Solves `(JᵀJ + μ diag(JᵀJ) + μ I) δ = -Jᵀr` for a 3×3 system.
fn lm_step(j: &[[f64; 3]; 3], r: &[f64; 3], mu: f64) -> [f64; 3] {
    let mut a = [[0.0; 3]; 3];
    let mut g = [0.0; 3];
    for i in 0..3 {
        for k in 0..3 {
            a[i][k] = (0..3).map(|row| j[row][i] * j[row][k]).sum();
        }
        g[i] = -(0..3).map(|row| j[row][i] * r[row]).sum::<f64>();
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += mu * (row[i] + 1.0);
    }
    // Cramer's rule is adequate for a damped, symmetric positive 3×3 system
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&a);
    let mut out = [0.0; 3];
    for c in 0..3 {
        let mut m = a;
        for row in 0..3 {
            m[row][c] = g[row];
        }
        out[c] = det(&m) / d;
    }
    out
}

/// One piece of a piecewise constant curvature profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub length: f64,
    pub k: f64,
}

/// The ways a curvature function `t ↦ K(t)` along a unit speed geodesic is
/// represented.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileShape {
    Constant { k: f64 },
    /// Periodic repetition of the segments.
    Piecewise { segments: Vec<Segment> },
    /// `mean + Σ cos[n]·cos(2π(n+1)t/period) + sin[n]·sin(2π(n+1)t/period)`.
    Trig { period: f64, mean: f64, cos: Vec<f64>, sin: Vec<f64> },
    /// Values at `t_j = j·dt`.  Periodic samples cover one period of length
    /// `values.len()·dt`; window samples cover `[0, (len-1)·dt]`.
    Sampled { dt: f64, values: Vec<f64> },
}

/// Gaussian curvature along a unit speed geodesic, `K(t) = K(π∘φ_t(x, v))`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurvatureProfile {
    pub id: String,
    pub shape: ProfileShape,
    pub periodic: bool,
}

impl CurvatureProfile {
    pub fn constant(id: impl Into<String>, k: f64) -> Self {
        CurvatureProfile { id: id.into(), shape: ProfileShape::Constant { k }, periodic: true }
    }

    pub fn piecewise(id: impl Into<String>, segments: Vec<Segment>) -> Self {
        CurvatureProfile { id: id.into(), shape: ProfileShape::Piecewise { segments }, periodic: true }
    }

    pub fn trig(id: impl Into<String>, period: f64, mean: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        CurvatureProfile { id: id.into(), shape: ProfileShape::Trig { period, mean, cos, sin }, periodic: true }
    }

    pub fn sampled(id: impl Into<String>, dt: f64, values: Vec<f64>, periodic: bool) -> Self {
        CurvatureProfile { id: id.into(), shape: ProfileShape::Sampled { dt, values }, periodic }
    }

    /// Period of a periodic profile; `None` for constants and windows.
    pub fn period(&self) -> Option<f64> {
        match &self.shape {
            ProfileShape::Constant { .. } => None,
            ProfileShape::Piecewise { segments } => Some(segments.iter().map(|s| s.length).sum()),
            ProfileShape::Trig { period, .. } => Some(*period),
            ProfileShape::Sampled { dt, values } if self.periodic => Some(dt * values.len() as f64),
            ProfileShape::Sampled { .. } => None,
        }
    }

    /// Length of the time window on which the profile is defined (infinite for
    /// periodic profiles).
    pub fn window(&self) -> f64 {
        match &self.shape {
            ProfileShape::Sampled { dt, values } if !self.periodic => dt * (values.len().max(1) - 1) as f64,
            _ => f64::INFINITY,
        }
    }

    /// `K(t)`; sampled profiles are interpolated by cubic Lagrange
    /// interpolation on the four nearest samples.
    pub fn eval(&self, t: f64) -> f64 {
        match &self.shape {
            ProfileShape::Constant { k } => *k,
            ProfileShape::Piecewise { segments } => {
                let period: f64 = segments.iter().map(|s| s.length).sum();
                let mut tau = t.rem_euclid(period);
                for s in segments {
                    if tau < s.length {
                        return s.k;
                    }
                    tau -= s.length;
                }
                segments.last().map_or(0.0, |s| s.k)
            }
            ProfileShape::Trig { period, mean, cos, sin } => {
                let w = 2.0 * PI / period;
                let mut v = *mean;
                for (n, c) in cos.iter().enumerate() {
                    v += c * (w * (n + 1) as f64 * t).cos();
                }
                for (n, s) in sin.iter().enumerate() {
                    v += s * (w * (n + 1) as f64 * t).sin();
                }
                v
            }
            ProfileShape::Sampled { dt, values } => {
                let n = values.len() as i64;
                let u = t / dt;
                let nearest = u.round();
                if (u - nearest).abs() < 1e-9 {
                    let i = nearest as i64;
                    return if self.periodic { values[i.rem_euclid(n) as usize] } else { values[i.clamp(0, n - 1) as usize] };
                }
                let i0 = u.floor() as i64;
                let f = u - i0 as f64;
                let at = |i: i64| -> f64 {
                    if self.periodic {
                        values[i.rem_euclid(n) as usize]
                    } else {
                        values[i.clamp(0, n - 1) as usize]
                    }
                };
                let (a, b, c, d) = (at(i0 - 1), at(i0), at(i0 + 1), at(i0 + 2));
                // cubic Lagrange on nodes -1, 0, 1, 2
                -f * (f - 1.0) * (f - 2.0) / 6.0 * a + (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0 * b
                    - (f + 1.0) * f * (f - 2.0) / 2.0 * c
                    + (f + 1.0) * f * (f - 1.0) / 6.0 * d
            }
        }
    }

    /// `sup |K|` (over one period or the window).
    pub fn max_abs(&self) -> f64 {
        match &self.shape {
            ProfileShape::Constant { k } => k.abs(),
            ProfileShape::Piecewise { segments } => segments.iter().map(|s| s.k.abs()).fold(0.0, f64::max),
            ProfileShape::Trig { mean, cos, sin, .. } => mean.abs() + cos.iter().chain(sin).map(|c| c.abs()).sum::<f64>(),
            ProfileShape::Sampled { values, .. } => values.iter().map(|v| v.abs()).fold(0.0, f64::max),
        }
    }

    /// The profile seen along the reversed geodesic, `K_rev(t) = K(-t)`.
    pub fn reversed(&self) -> Self {
        let shape = match &self.shape {
            ProfileShape::Constant { k } => ProfileShape::Constant { k: *k },
            ProfileShape::Piecewise { segments } => {
                ProfileShape::Piecewise { segments: segments.iter().rev().copied().collect() }
            }
            ProfileShape::Trig { period, mean, cos, sin } => ProfileShape::Trig {
                period: *period,
                mean: *mean,
                cos: cos.clone(),
                sin: sin.iter().map(|s| -s).collect(),
            },
            ProfileShape::Sampled { dt, values } => {
                let mut v = values.clone();
                if self.periodic {
                    // K_rev(j dt) = K(-j dt) = values[(n - j) mod n]
                    v.reverse();
                    v.rotate_right(1);
                } else {
                    v.reverse();
                }
                ProfileShape::Sampled { dt: *dt, values: v }
            }
        };
        CurvatureProfile { id: format!("{}~rev", self.id), shape, periodic: self.periodic }
    }

    /// Tabulates the profile at `t_j = j·dt` over one period or window.
    pub fn tabulate(&self, dt: f64) -> Vec<(f64, f64)> {
        let len = self.period().unwrap_or_else(|| if self.window().is_finite() { self.window() } else { 1.0 });
        let n = (len / dt).round().max(1.0) as usize;
        (0..n).map(|j| (j as f64 * dt, self.eval(j as f64 * dt))).collect()
    }
}

/// The periodic curvature profile along a closed geodesic.
pub fn curvature_profile_along(model: &SurfaceModel, geo: &ClosedGeodesic) -> Result<CurvatureProfile> {
    if !(geo.period > 0.0) || geo.orbit.is_empty() {
        return Err(Error::Config("closed geodesic must have positive period and samples".into()));
    }
    let values = geo.orbit.iter().map(|s| curvature_at(model, s.x, s.y)).collect::<Result<Vec<_>>>()?;
    let id = match &geo.source {
        GeodesicSource::TorusShooting { p, q } => format!("torus({p},{q})"),
        GeodesicSource::OctagonWord { word } => {
            format!("word[{}]", word.iter().map(|i| format!("g{}", i + 1)).collect::<Vec<_>>().join(","))
        }
        GeodesicSource::Constant => "constant".to_string(),
    };
    Ok(CurvatureProfile::sampled(id, geo.dt(), values, true))
}

/// The curvature along an integrated orbit as a window profile.
pub fn orbit_profile(model: &SurfaceModel, orbit: &GeodesicOrbit, id: impl Into<String>) -> Result<CurvatureProfile> {
    let values = orbit.samples.iter().map(|s| curvature_at(model, s.state.x, s.state.y)).collect::<Result<Vec<_>>>()?;
    Ok(CurvatureProfile::sampled(id, orbit.dt, values, false))
}

fn default_dt(model: &SurfaceModel) -> f64 {
    match model {
        SurfaceModel::ConformalTorus(m) => {
            let (a, b) = m.bandwidth();
            let scale = (a.max(1) as f64 / m.lx).max(b.max(1) as f64 / m.ly);
            (0.02 / scale).min(0.02)
        }
        _ => 0.05,
    }
}

/// `max |K|` along `φ_t(start)`, `t ∈ [0, t_window]`.
pub fn max_abs_curvature_along(model: &SurfaceModel, start: UnitTangent, t_window: f64) -> Result<f64> {
    if let Some(k) = model.constant_curvature() {
        step_count(t_window, 1.0)?;
        return Ok(k.abs());
    }
    let orbit = integrate_geodesic(model, start, t_window, default_dt(model))?;
    orbit
        .samples
        .iter()
        .map(|s| curvature_at(model, s.state.x, s.state.y).map(f64::abs))
        .try_fold(0.0f64, |acc, k| k.map(|k| acc.max(k)))
}

/// A random start in the model's chart, reproducible from the generator.
pub fn random_unit_tangent(model: &SurfaceModel, rng: &mut impl Rng) -> UnitTangent {
    let theta = rng.random_range(0.0..2.0 * PI);
    match model {
        SurfaceModel::ConformalTorus(m) => UnitTangent::new(rng.random_range(0.0..m.lx), rng.random_range(0.0..m.ly), theta),
        SurfaceModel::ConstantCurvature { k0 } => {
            let scale = if *k0 != 0.0 { 1.0 / k0.abs().sqrt() } else { 1.0 };
            let r = rng.random_range(0.0..0.8f64).sqrt() * scale;
            let phi = rng.random_range(0.0..2.0 * PI);
            UnitTangent::new(r * phi.cos(), r * phi.sin(), theta)
        }
        SurfaceModel::FuchsianOctagon(oct) => loop {
            let z = C64::new(rng.random_range(-0.85..0.85), rng.random_range(-0.85..0.85));
            if oct.contains(z, 0.0) {
                break UnitTangent::new(z.re, z.im, theta);
            }
        },
    }
}

/// Parameters of the finite-window trapping surrogate.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrappingConfig {
    pub n_dir: usize,
    pub t_window: f64,
    pub kappa_floor: f64,
}

impl Default for TrappingConfig {
    fn default() -> Self {
        TrappingConfig { n_dir: 256, t_window: 50.0, kappa_floor: 1e-4 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrappingReport {
    pub config: TrappingConfig,
    /// Starts whose orbit never saw `|K| ≥ kappa_floor`.
    pub trapped_count: usize,
    /// Smallest per-orbit `max |K|`.
    pub min_max_abs_k: f64,
    pub trapped: bool,
    pub note: String,
}

/// Samples `n_dir` random starts, integrates each for `t_window` and flags
/// trapping in the zero curvature region when some orbit keeps
/// `max |K| < kappa_floor`.  This is a finite surrogate and can miss trapped
/// geodesics.
pub fn trapping_surrogate(model: &SurfaceModel, cfg: TrappingConfig, seed: u64) -> Result<TrappingReport> {
    if cfg.n_dir == 0 || !(cfg.t_window > 0.0) || !(cfg.kappa_floor > 0.0) {
        return Err(Error::Config("trapping test needs n_dir > 0, t_window > 0, kappa_floor > 0".into()));
    }
    let maxima = (0..cfg.n_dir)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64));
            let start = random_unit_tangent(model, &mut rng);
            max_abs_curvature_along(model, start, cfg.t_window)
        })
        .collect::<Result<Vec<f64>>>()?;
    let trapped_count = maxima.iter().filter(|&&k| k < cfg.kappa_floor).count();
    let min_max_abs_k = maxima.iter().copied().fold(f64::INFINITY, f64::min);
    let trapped = trapped_count > 0;
    let note = if trapped {
        format!("trapping detected: {trapped_count}/{} orbits stayed where |K| < {:.1e}", cfg.n_dir, cfg.kappa_floor)
    } else {
        "no trapping detected (finite test)".to_string()
    };
    Ok(TrappingReport { config: cfg, trapped_count, min_max_abs_k, trapped, note })
}

/// Writes `t,x,y,theta,K` rows.
pub fn write_orbit_csv<W: Write>(model: &SurfaceModel, orbit: &GeodesicOrbit, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x", "y", "theta", "K"])?;
    for s in &orbit.samples {
        let k = curvature_at(model, s.state.x, s.state.y)?;
        w.serialize((s.t, s.state.x, s.state.y, s.state.theta, k))?;
    }
    w.flush()?;
    Ok(())
}
