//! Conformal metrics `e^{2λ}(dx² + dy²)` on the flat torus
//! `[0, Lx) × [0, Ly)`.
//!
//! λ is held as a sparse trigonometric series obtained from grid samples, so
//! values and derivatives can be evaluated anywhere (for geodesic
//! integration) and resampled exactly on any grid (for spectral work).

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{wavenumber, Fft2};

/// One term `c · exp(i(2π a x/Lx + 2π b y/Ly))` of the series for λ.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TrigTerm {
    pub a: i64,
    pub b: i64,
    pub c: C64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TorusMetric {
    pub lx: f64,
    pub ly: f64,
    /// Default grid resolution.
    pub nx: usize,
    pub ny: usize,
    pub terms: Vec<TrigTerm>,
}

/// λ and its derivatives up to second order at a point.
#[derive(Clone, Copy, Debug, Default)]
pub struct LambdaJet {
    pub value: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dyy: f64,
}

impl LambdaJet {
    pub fn curvature(&self) -> f64 {
        -(-2.0 * self.value).exp() * (self.dxx + self.dyy)
    }
}

impl TorusMetric {
    /// The flat torus, λ ≡ 0.
    pub fn flat(lx: f64, ly: f64, nx: usize, ny: usize) -> Self {
        TorusMetric { lx, ly, nx, ny, terms: Vec::new() }
    }

    /// Builds the series from samples `values[ix * ny + iy]` of a smooth
    /// doubly periodic function on the `nx × ny` grid.
    pub fn from_samples(lx: f64, ly: f64, nx: usize, ny: usize, values: &[f64]) -> Result<Self> {
        if values.len() != nx * ny {
            return Err(Error::Config(format!("lambda grid has {} values, expected {}", values.len(), nx * ny)));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("lambda grid contains non-finite value {v}")));
        }
        let fft = Fft2::new(nx, ny);
        let mut data: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        fft.forward(&mut data);
        let scale = 1.0 / (nx * ny) as f64;
        let cmax = data.iter().map(|c| c.norm() * scale).fold(0.0, f64::max);
        let mut terms = Vec::new();
        for ix in 0..nx {
            for iy in 0..ny {
                let c = data[ix * ny + iy] * scale;
                if c.norm() <= 1e-15 * cmax.max(1e-300) || c.norm() == 0.0 {
                    continue;
                }
                // Nyquist bins carry a real cosine; keep them with half weight
                // on both signs so the interpolant stays real.
                let (ka, half_a) = match wavenumber(ix, nx) {
                    Some(k) => (k, false),
                    None => ((nx / 2) as i64, true),
                };
                let (kb, half_b) = match wavenumber(iy, ny) {
                    Some(k) => (k, false),
                    None => ((ny / 2) as i64, true),
                };
                let mut pieces = vec![(ka, kb, c)];
                if half_a {
                    pieces = pieces.into_iter().flat_map(|(a, b, c)| [(a, b, c * 0.5), (-a, b, c * 0.5)]).collect();
                }
                if half_b {
                    pieces = pieces.into_iter().flat_map(|(a, b, c)| [(a, b, c * 0.5), (a, -b, c * 0.5)]).collect();
                }
                terms.extend(pieces.into_iter().map(|(a, b, c)| TrigTerm { a, b, c }));
            }
        }
        Ok(TorusMetric { lx, ly, nx, ny, terms })
    }

    /// Samples a closure on an `n × n` master grid and keeps the series.
    pub fn from_fn(lx: f64, ly: f64, nx: usize, ny: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mx = (4 * nx).clamp(256, 1024);
        let my = (4 * ny).clamp(256, 1024);
        let mut vals = Vec::with_capacity(mx * my);
        for ix in 0..mx {
            for iy in 0..my {
                vals.push(f(lx * ix as f64 / mx as f64, ly * iy as f64 / my as f64));
            }
        }
        let mut m = Self::from_samples(lx, ly, mx, my, &vals)?;
        m.nx = nx;
        m.ny = ny;
        Ok(m)
    }

    /// Parses an expression in `x`, `y`, `Lx`, `Ly` (with `pi`, `e`, and the
    /// usual elementary functions).
    pub fn from_expr(lx: f64, ly: f64, nx: usize, ny: usize, expr: &str) -> Result<Self> {
        let parsed: meval::Expr = expr
            .parse()
            .map_err(|e| Error::Config(format!("cannot parse lambda expression '{expr}': {e}")))?;
        let mut ctx = meval::Context::new();
        ctx.var("Lx", lx).var("Ly", ly);
        let f = parsed
            .bind2_with_context(ctx, "x", "y")
            .map_err(|e| Error::Config(format!("lambda expression '{expr}': {e}")))?;
        Self::from_fn(lx, ly, nx, ny, f)
    }

    pub fn is_flat(&self) -> bool {
        self.terms.iter().all(|t| t.c.norm() < 1e-15)
    }

    fn phase_steps(&self, x: f64, y: f64) -> (C64, C64) {
        (C64::from_polar(1.0, 2.0 * PI * x / self.lx), C64::from_polar(1.0, 2.0 * PI * y / self.ly))
    }

    /// Value and derivatives of λ at `(x, y)`.
    pub fn jet(&self, x: f64, y: f64) -> LambdaJet {
        let (ex, ey) = self.phase_steps(x, y);
        let (wx, wy) = (2.0 * PI / self.lx, 2.0 * PI / self.ly);
        let mut j = LambdaJet::default();
        for t in &self.terms {
            let e = t.c * ex.powi(t.a as i32) * ey.powi(t.b as i32);
            let (ka, kb) = (wx * t.a as f64, wy * t.b as f64);
            j.value += e.re;
            j.dx += -ka * e.im;
            j.dy += -kb * e.im;
            j.dxx += -ka * ka * e.re;
            j.dyy += -kb * kb * e.re;
        }
        j
    }

    pub fn lambda(&self, x: f64, y: f64) -> f64 {
        self.jet(x, y).value
    }

    pub fn curvature(&self, x: f64, y: f64) -> f64 {
        self.jet(x, y).curvature()
    }

    /// λ sampled on an `nx × ny` grid (x-major).
    pub fn sample_grid(&self, nx: usize, ny: usize) -> Vec<f64> {
        let mut out = vec![0.0; nx * ny];
        for ix in 0..nx {
            for iy in 0..ny {
                let x = self.lx * ix as f64 / nx as f64;
                let y = self.ly * iy as f64 / ny as f64;
                out[ix * ny + iy] = self.lambda(x, y);
            }
        }
        out
    }

    /// Wraps a position into `[0, Lx) × [0, Ly)`.
    pub fn wrap(&self, x: f64, y: f64) -> (f64, f64) {
        (x.rem_euclid(self.lx), y.rem_euclid(self.ly))
    }

    /// Largest wavenumber magnitude present in the series.
    pub fn bandwidth(&self) -> (i64, i64) {
        self.terms.iter().fold((0, 0), |(a, b), t| (a.max(t.a.abs()), b.max(t.b.abs())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_series_reproduces_function_and_derivatives() {
        let m = TorusMetric::from_expr(2.0, 3.0, 32, 32, "0.1*cos(2*pi*x/Lx) + 0.05*sin(2*pi*2*y/Ly)").unwrap();
        let (x, y) = (0.37, 1.21);
        let j = m.jet(x, y);
        let wx = 2.0 * PI / 2.0;
        let wy = 4.0 * PI / 3.0;
        let l = 0.1 * (wx * x).cos() + 0.05 * (wy * y).sin();
        assert!((j.value - l).abs() < 1e-13);
        assert!((j.dx + 0.1 * wx * (wx * x).sin()).abs() < 1e-12);
        assert!((j.dyy + 0.05 * wy * wy * (wy * y).sin()).abs() < 1e-12);
        assert!(m.terms.len() <= 4 + 2);
    }

    #[test]
    fn bad_expression_is_config_error() {
        let e = TorusMetric::from_expr(1.0, 1.0, 8, 8, "cos(").unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }
}
