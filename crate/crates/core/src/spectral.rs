//! Two-dimensional periodic FFT helpers used for spectral differentiation.
//!
//! Arrays are stored x-major: the value at grid node `(ix, iy)` lives at
//! `ix * ny + iy`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub struct Fft2 {
    pub nx: usize,
    pub ny: usize,
    fx: Arc<dyn Fft<f64>>,
    ix: Arc<dyn Fft<f64>>,
    fy: Arc<dyn Fft<f64>>,
    iy: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fft2({}x{})", self.nx, self.ny)
    }
}

impl Fft2 {
    pub fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            nx,
            ny,
            fx: planner.plan_fft_forward(nx),
            ix: planner.plan_fft_inverse(nx),
            fy: planner.plan_fft_forward(ny),
            iy: planner.plan_fft_inverse(ny),
        }
    }

    fn transform(&self, data: &mut [C64], along_x: &Arc<dyn Fft<f64>>, along_y: &Arc<dyn Fft<f64>>) {
        let (nx, ny) = (self.nx, self.ny);
        assert_eq!(data.len(), nx * ny);
        // rows of constant ix are contiguous in y
        along_y.process(data);
        let mut col = vec![C64::new(0.0, 0.0); nx];
        for iy in 0..ny {
            for ix in 0..nx {
                col[ix] = data[ix * ny + iy];
            }
            along_x.process(&mut col);
            for ix in 0..nx {
                data[ix * ny + iy] = col[ix];
            }
        }
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, data: &mut [C64]) {
        let (fx, fy) = (self.fx.clone(), self.fy.clone());
        self.transform(data, &fx, &fy);
    }

    /// Inverse transform in place, including the `1/(nx ny)` normalization.
    pub fn inverse(&self, data: &mut [C64]) {
        let (ix, iy) = (self.ix.clone(), self.iy.clone());
        self.transform(data, &ix, &iy);
        let s = 1.0 / (self.nx * self.ny) as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }
}

/// Signed integer wavenumber of FFT bin `i` out of `n`; the Nyquist bin maps
/// to `None` because its derivative is zeroed to keep differentiation skew.
pub fn wavenumber(i: usize, n: usize) -> Option<i64> {
    let i = i as i64;
    let n = n as i64;
    if n % 2 == 0 && i == n / 2 {
        None
    } else if i <= n / 2 {
        Some(i)
    } else {
        Some(i - n)
    }
}

/// Spectral first derivatives on a periodic box `[0, lx) x [0, ly)`.
#[derive(Clone, Debug)]
pub struct SpectralDiff {
    pub fft: Fft2,
    pub lx: f64,
    pub ly: f64,
    kx: Vec<f64>,
    ky: Vec<f64>,
}

impl SpectralDiff {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Self {
        let kx = (0..nx)
            .map(|i| wavenumber(i, nx).map_or(0.0, |k| 2.0 * PI * k as f64 / lx))
            .collect();
        let ky = (0..ny)
            .map(|i| wavenumber(i, ny).map_or(0.0, |k| 2.0 * PI * k as f64 / ly))
            .collect();
        SpectralDiff { fft: Fft2::new(nx, ny), lx, ly, kx, ky }
    }

    pub fn nx(&self) -> usize {
        self.fft.nx
    }

    pub fn ny(&self) -> usize {
        self.fft.ny
    }

    /// Applies the Fourier multiplier `m(kx, ky)` to `h`.
    pub fn multiplier(&self, h: &[C64], m: impl Fn(f64, f64) -> C64) -> Vec<C64> {
        let mut d = h.to_vec();
        self.fft.forward(&mut d);
        let ny = self.ny();
        for (ix, &kx) in self.kx.iter().enumerate() {
            for (iy, &ky) in self.ky.iter().enumerate() {
                d[ix * ny + iy] *= m(kx, ky);
            }
        }
        self.fft.inverse(&mut d);
        d
    }

    pub fn dx(&self, h: &[C64]) -> Vec<C64> {
        self.multiplier(h, |kx, _| C64::new(0.0, kx))
    }

    pub fn dy(&self, h: &[C64]) -> Vec<C64> {
        self.multiplier(h, |_, ky| C64::new(0.0, ky))
    }

    /// `∂ = (∂x - i ∂y)/2`.
    pub fn del(&self, h: &[C64]) -> Vec<C64> {
        self.multiplier(h, |kx, ky| C64::new(0.5 * ky, 0.5 * kx))
    }

    /// `∂̄ = (∂x + i ∂y)/2`.
    pub fn delbar(&self, h: &[C64]) -> Vec<C64> {
        self.multiplier(h, |kx, ky| C64::new(-0.5 * ky, 0.5 * kx))
    }

    /// Laplacian `∂x² + ∂y²` (Nyquist modes included, so this is not the
    /// square of the first derivative operators).
    pub fn laplacian(&self, h: &[C64]) -> Vec<C64> {
        let (nx, ny) = (self.nx(), self.ny());
        let full = |i: usize, n: usize, l: f64| {
            let k = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
            2.0 * PI * k / l
        };
        let kx: Vec<f64> = (0..nx).map(|i| full(i, nx, self.lx)).collect();
        let ky: Vec<f64> = (0..ny).map(|i| full(i, ny, self.ly)).collect();
        let mut d = h.to_vec();
        self.fft.forward(&mut d);
        for ix in 0..nx {
            for iy in 0..ny {
                d[ix * ny + iy] *= -(kx[ix] * kx[ix] + ky[iy] * ky[iy]);
            }
        }
        self.fft.inverse(&mut d);
        d
    }
}
