//! Spectral backend on a conformal torus.
//!
//! The raising and lowering operators are applied in the conservative form
//! `η₊ = e^{(k-1)λ} ∂ e^{-kλ}` and `η₋ = e^{-(k+1)λ} ∂̄ e^{kλ}`.  With
//! FFT derivatives this makes `η₊* = -η₋` hold exactly for the grid
//! quadrature, so only the commutator `[η₋, η₊] = kK/2` carries
//! discretization error.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{LevelSolve, SmBackend};
use crate::error::Result;
use crate::geometry::TorusMetric;
use crate::spectral::SpectralDiff;

pub struct SpectralGrid {
    metric: TorusMetric,
    diff: SpectralDiff,
    lambda: Vec<f64>,
    weights: Vec<f64>,
    curvature: Vec<f64>,
}

impl SpectralGrid {
    pub fn new(metric: &TorusMetric, nx: usize, ny: usize) -> Self {
        let diff = SpectralDiff::new(nx, ny, metric.lx, metric.ly);
        let cell = metric.lx * metric.ly / (nx * ny) as f64;
        let mut lambda = Vec::with_capacity(nx * ny);
        let mut curvature = Vec::with_capacity(nx * ny);
        for ix in 0..nx {
            for iy in 0..ny {
                let j = metric.jet(metric.lx * ix as f64 / nx as f64, metric.ly * iy as f64 / ny as f64);
                lambda.push(j.value);
                curvature.push(j.curvature());
            }
        }
        let weights = lambda.iter().map(|l| 2.0 * PI * cell * (2.0 * l).exp()).collect();
        SpectralGrid { metric: metric.clone(), diff, lambda, weights, curvature }
    }

    pub fn metric(&self) -> &TorusMetric {
        &self.metric
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.diff.nx(), self.diff.ny())
    }

    /// Node coordinates `(x, y)` in x-major order.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let (nx, ny) = self.shape();
        (0..nx * ny)
            .map(|i| (self.metric.lx * (i / ny) as f64 / nx as f64, self.metric.ly * (i % ny) as f64 / ny as f64))
            .collect()
    }

    /// Samples `f(x, y)` on the nodes.
    pub fn sample(&self, f: impl Fn(f64, f64) -> C64) -> Vec<C64> {
        self.nodes().into_iter().map(|(x, y)| f(x, y)).collect()
    }

    fn scaled(&self, h: &[C64], s: f64) -> Vec<C64> {
        h.iter().zip(&self.lambda).map(|(v, l)| v * (s * l).exp()).collect()
    }
}

impl SmBackend for SpectralGrid {
    fn name(&self) -> String {
        let (nx, ny) = self.shape();
        format!("spectral-torus {nx}x{ny}")
    }

    fn n_nodes(&self) -> usize {
        self.lambda.len()
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn curvature(&self) -> &[f64] {
        &self.curvature
    }

    fn eta_plus(&self, k: i32, h: &[C64]) -> Vec<C64> {
        let d = self.diff.del(&self.scaled(h, -(k as f64)));
        self.scaled(&d, (k - 1) as f64)
    }

    fn eta_minus(&self, k: i32, h: &[C64]) -> Vec<C64> {
        let d = self.diff.delbar(&self.scaled(h, k as f64));
        self.scaled(&d, -((k + 1) as f64))
    }

    fn level_solver(&self, k: i32, raise_first: bool) -> Result<Box<dyn LevelSolve + '_>> {
        if self.metric.is_flat() {
            Ok(Box::new(FlatLevelSolver { grid: self }))
        } else {
            Ok(Box::new(super::forms::CgLevelSolver::new(self, k, raise_first)))
        }
    }

    fn smooth_basis(&self, _k: i32, n: usize) -> Vec<Vec<C64>> {
        // Fourier modes by increasing |wavenumber|; the bundle is trivial on
        // the torus so every level uses the same functions
        let b = ((n as f64).sqrt().ceil() as i64 / 2).max(1);
        let (lx, ly) = (self.metric.lx, self.metric.ly);
        let mut pairs: Vec<(i64, i64)> = (-b..=b).flat_map(|a| (-b..=b).map(move |c| (a, c))).collect();
        pairs.sort_by_key(|(a, c)| (a * a + c * c, *a, *c));
        pairs.truncate(n.max(1));
        pairs
            .into_iter()
            .map(|(a, c)| self.sample(|x, y| C64::from_polar(1.0, 2.0 * PI * (a as f64 * x / lx + c as f64 * y / ly))))
            .collect()
    }
}

/// On the flat torus both `η₋η₊` and `η₊η₋` are `∂̄∂ = Δ/4`, inverted in
/// Fourier space on mean-zero data (minimum-norm solution).
struct FlatLevelSolver<'a> {
    grid: &'a SpectralGrid,
}

impl LevelSolve for FlatLevelSolver<'_> {
    fn solve(&self, rhs: &[C64]) -> Result<Vec<C64>> {
        Ok(self.grid.diff.multiplier(rhs, |kx, ky| {
            let s = kx * kx + ky * ky;
            if s > 0.0 {
                C64::new(-4.0 / s, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }
}
