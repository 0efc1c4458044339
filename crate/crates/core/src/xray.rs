//! Symmetric tensor fields as functions on `SM`, their integrals over closed
//! geodesics, potential tensors and s-injectivity experiments.
//!
//! A tensor field of degree `m` is a finite sum of analytic atoms placed on
//! the vertical levels `-m, -m+2, …, m`.  Atoms and their `η±` derivatives can
//! be evaluated exactly at any point of `SM`, so the ray transform of a
//! potential `Xh` vanishes up to the quadrature along the geodesic and not up
//! to a discretization of `X`.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::mobius::cosh_dist;
use crate::geometry::{ClosedGeodesic, GeodesicSource, Mobius, Octagon, SurfaceModel, TorusMetric, UnitTangent};
use crate::smfourier::{level_norm2, SMField, SmBackend};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Exponent cut-off of the periodized Gaussians: images with
/// `σ(cosh d - 1) > GAUSS_CUT` are dropped (they are below `e^{-40}`).
const GAUSS_CUT: f64 = 40.0;

/// A scalar section of some level `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Atom {
    /// `Σ_g exp(-σ(cosh d(gz, c) - 1)) e^{ik arg g'(z)}` over the octagon group.
    DiskGaussian { center: C64, sigma: f64 },
    /// `exp(2πi(a x/Lx + b y/Ly))` on a conformal torus.
    TorusWave { a: i64, b: i64 },
}

/// What is applied to the atom before it is placed on its output level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermOp {
    Value,
    EtaPlus,
    EtaMinus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorTerm {
    /// Level of the atom before `op`.
    pub level: i32,
    pub atom: Atom,
    pub op: TermOp,
    pub coeff: C64,
}

impl TensorTerm {
    pub fn out_level(&self) -> i32 {
        match self.op {
            TermOp::Value => self.level,
            TermOp::EtaPlus => self.level + 1,
            TermOp::EtaMinus => self.level - 1,
        }
    }
}

/// A symmetric `m`-tensor viewed as a function on `SM`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SymTensorField {
    pub degree: usize,
    pub terms: Vec<TensorTerm>,
}

impl SymTensorField {
    pub fn zero(degree: usize) -> Self {
        SymTensorField { degree, terms: Vec::new() }
    }

    /// A single atom on level `k`, which must lie in the band of `degree`.
    pub fn atom(degree: usize, k: i32, atom: Atom, coeff: C64) -> Result<Self> {
        let f = SymTensorField { degree, terms: vec![TensorTerm { level: k, atom, op: TermOp::Value, coeff }] };
        f.check_band()?;
        Ok(f)
    }

    /// Levels `-m, -m+2, …, m`.
    pub fn band(&self) -> Vec<i32> {
        let m = self.degree as i32;
        (0..=m).map(|j| -m + 2 * j).collect()
    }

    pub fn check_band(&self) -> Result<()> {
        let band = self.band();
        for t in &self.terms {
            if !band.contains(&t.out_level()) {
                return Err(Error::Config(format!(
                    "term on level {} lies outside the band of a degree-{} tensor",
                    t.out_level(),
                    self.degree
                )));
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &SymTensorField) -> Result<SymTensorField> {
        if self.degree != other.degree {
            return Err(Error::Config(format!("cannot add tensors of degrees {} and {}", self.degree, other.degree)));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().copied());
        Ok(SymTensorField { degree: self.degree, terms })
    }

    pub fn scale(&self, c: C64) -> SymTensorField {
        let mut out = self.clone();
        out.terms.iter_mut().for_each(|t| t.coeff *= c);
        out
    }

    /// `Σ c_j f_j`.
    pub fn combination(fields: &[SymTensorField], coeffs: &[C64]) -> Result<SymTensorField> {
        let degree = fields.first().map_or(0, |f| f.degree);
        let mut out = SymTensorField::zero(degree);
        for (f, c) in fields.iter().zip(coeffs) {
            out = out.add(&f.scale(*c))?;
        }
        Ok(out)
    }
}

/// `dh = Xh` for `h` of degree `m - 1`: every atom `a` on level `k` becomes
/// `η₊a` on `k + 1` and `η₋a` on `k - 1`.
pub fn potential_tensor(h: &SymTensorField) -> Result<SymTensorField> {
    h.check_band()?;
    let mut terms = Vec::with_capacity(2 * h.terms.len());
    for t in &h.terms {
        if t.op != TermOp::Value {
            return Err(Error::Config("the potential of an already differentiated tensor is not supported".into()));
        }
        terms.push(TensorTerm { op: TermOp::EtaPlus, ..*t });
        terms.push(TensorTerm { op: TermOp::EtaMinus, ..*t });
    }
    Ok(SymTensorField { degree: h.degree + 1, terms })
}

/// The surfaces on which atoms can be evaluated.
#[derive(Clone, Debug)]
pub enum TensorModel {
    Octagon(Octagon),
    Torus(TorusMetric),
}

impl TensorModel {
    pub fn from_surface(model: &SurfaceModel) -> Result<Self> {
        match model {
            SurfaceModel::FuchsianOctagon(o) => Ok(TensorModel::Octagon(o.clone())),
            SurfaceModel::ConformalTorus(m) => Ok(TensorModel::Torus(m.clone())),
            SurfaceModel::ConstantCurvature { .. } => {
                Err(Error::Config("tensor fields are only supported on the octagon and on conformal tori".into()))
            }
        }
    }

    /// `λ` and `λ_z` of the chart at `z`.
    fn lambda(&self, z: C64) -> (f64, C64) {
        match self {
            TensorModel::Octagon(_) => {
                let d = 1.0 - z.norm_sqr();
                (2f64.ln() - d.ln(), z.conj() / d)
            }
            TensorModel::Torus(m) => {
                let j = m.jet(z.re, z.im);
                (j.value, C64::new(0.5 * j.dx, -0.5 * j.dy))
            }
        }
    }
}

/// Value, `∂` and `∂̄` of one atom at one point.
#[derive(Clone, Copy, Debug, Default)]
struct Jet {
    v: C64,
    dz: C64,
    dzb: C64,
}

struct PreparedTerm {
    term: TensorTerm,
    /// Group elements whose Gaussian image can reach the fundamental domain.
    images: Vec<Mobius>,
}

/// A tensor field bound to a model, ready for pointwise evaluation.
pub struct PreparedField<'a> {
    model: &'a TensorModel,
    terms: Vec<PreparedTerm>,
    degree: usize,
}

impl<'a> PreparedField<'a> {
    pub fn new(model: &'a TensorModel, f: &SymTensorField) -> Result<Self> {
        f.check_band()?;
        let mut terms = Vec::with_capacity(f.terms.len());
        for t in &f.terms {
            let images = match (&t.atom, model) {
                (Atom::DiskGaussian { center, sigma }, TensorModel::Octagon(oct)) => {
                    if !(*sigma > 0.0) || center.norm() >= 1.0 {
                        return Err(Error::Config(format!("bad disk atom: center {center}, sigma {sigma}")));
                    }
                    let reach = (1.0 + GAUSS_CUT / sigma).acosh();
                    let radius = oct.r_circ + reach + 2.0 * center.norm().atanh();
                    // keep g with g·z near c for some z in the octagon, i.e.
                    // g⁻¹c within r_circ + reach of the origin
                    oct.elements_within(radius)
                        .into_iter()
                        .filter(|g| {
                            cosh_dist(g.inverse().apply(*center), C64::new(0.0, 0.0)).acosh() <= oct.r_circ + reach + 1e-9
                        })
                        .collect()
                }
                (Atom::TorusWave { .. }, TensorModel::Torus(_)) => Vec::new(),
                _ => return Err(Error::Config(format!("atom {:?} does not live on this surface model", t.atom))),
            };
            terms.push(PreparedTerm { term: *t, images });
        }
        Ok(PreparedField { model, terms, degree: f.degree })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    fn atom_jet(&self, pt: &PreparedTerm, z: C64) -> Jet {
        let k = pt.term.level as f64;
        match (pt.term.atom, self.model) {
            (Atom::DiskGaussian { center, sigma }, _) => {
                let e = 1.0 - center.norm_sqr();
                let mut jet = Jet::default();
                for g in &pt.images {
                    let w = g.apply(z);
                    let c = cosh_dist(w, center);
                    if sigma * (c - 1.0) > GAUSS_CUT {
                        continue;
                    }
                    let phi = (-sigma * (c - 1.0)).exp();
                    let dw = 1.0 - w.norm_sqr();
                    let diff = w - center;
                    let cw = 2.0 / e * ((diff.conj() * dw + diff.norm_sqr() * w.conj()) / (dw * dw));
                    let q = g.c * z + g.d;
                    let gp = g.deriv(z);
                    let phase = C64::from_polar(1.0, k * gp.arg());
                    let cq = g.c / q;
                    let val = phi * phase;
                    jet.v += val;
                    jet.dz += val * (-sigma * cw * gp - k * cq);
                    jet.dzb += val * (-sigma * cw.conj() * gp.conj() + k * cq.conj());
                }
                jet
            }
            (Atom::TorusWave { a, b }, TensorModel::Torus(m)) => {
                let (wx, wy) = (2.0 * PI * a as f64 / m.lx, 2.0 * PI * b as f64 / m.ly);
                let v = C64::from_polar(1.0, wx * z.re + wy * z.im);
                let i = C64::new(0.0, 1.0);
                Jet { v, dz: 0.5 * i * C64::new(wx, -wy) * v, dzb: 0.5 * i * C64::new(wx, wy) * v }
            }
            _ => unreachable!("atom/model pairing is checked in PreparedField::new"),
        }
    }

    /// `(level, coefficient)` pairs at `z`, one per term.
    fn term_values(&self, z: C64) -> impl Iterator<Item = (i32, C64)> + '_ {
        let (lam, lz) = self.model.lambda(z);
        let el = (-lam).exp();
        self.terms.iter().map(move |pt| {
            let j = self.atom_jet(pt, z);
            let k = pt.term.level as f64;
            let v = match pt.term.op {
                TermOp::Value => j.v,
                TermOp::EtaPlus => el * (j.dz - k * lz * j.v),
                TermOp::EtaMinus => el * (j.dzb + k * lz.conj() * j.v),
            };
            (pt.term.out_level(), pt.term.coeff * v)
        })
    }

    /// `f(z, θ)`.
    pub fn eval(&self, p: &UnitTangent) -> C64 {
        self.term_values(p.z()).map(|(k, v)| v * C64::from_polar(1.0, k as f64 * p.theta)).sum()
    }

    /// The mode coefficients `f_k(z)` on the band.
    pub fn modes_at(&self, z: C64) -> Vec<(i32, C64)> {
        let m = self.degree as i32;
        let mut out: Vec<(i32, C64)> = (0..=m).map(|j| (-m + 2 * j, ZERO)).collect();
        for (k, v) in self.term_values(z) {
            out[((k + m) / 2) as usize].1 += v;
        }
        out
    }

    /// Samples the field at chart points into an [`SMField`] with `n_modes`
    /// vertical modes (at least the degree).
    pub fn sample(&self, points: &[C64], n_modes: usize) -> Result<SMField> {
        if n_modes < self.degree {
            return Err(Error::Config(format!("{n_modes} modes cannot hold a degree-{} tensor", self.degree)));
        }
        let vals: Vec<Vec<(i32, C64)>> = points.par_iter().map(|z| self.modes_at(*z)).collect();
        let mut u = SMField::zeros(n_modes, points.len());
        for (i, modes) in vals.iter().enumerate() {
            for (k, v) in modes {
                u.mode_mut(*k)[i] = *v;
            }
        }
        Ok(u)
    }
}

/// `∫₀^T f(γ(t), γ̇(t)) dt` by the trapezoid rule on the equally spaced
/// samples, which converges spectrally for a smooth periodic integrand.
pub fn ray_transform(model: &TensorModel, f: &SymTensorField, geo: &ClosedGeodesic) -> Result<C64> {
    let p = PreparedField::new(model, f)?;
    ray_transform_prepared(&p, geo)
}

pub fn ray_transform_prepared(p: &PreparedField, geo: &ClosedGeodesic) -> Result<C64> {
    check_geodesic(p.model, geo)?;
    Ok(geo.orbit.iter().map(|s| p.eval(s)).sum::<C64>() * geo.dt())
}

/// `∫₀^T |f(γ(t), γ̇(t))| dt`, the scale used for relative residuals.
pub fn ray_transform_abs(p: &PreparedField, geo: &ClosedGeodesic) -> Result<f64> {
    check_geodesic(p.model, geo)?;
    Ok(geo.orbit.iter().map(|s| p.eval(s).norm()).sum::<f64>() * geo.dt())
}

fn check_geodesic(model: &TensorModel, geo: &ClosedGeodesic) -> Result<()> {
    let ok = matches!(
        (model, &geo.source),
        (TensorModel::Octagon(_), GeodesicSource::OctagonWord { .. })
            | (TensorModel::Torus(_), GeodesicSource::TorusShooting { .. })
    );
    if !ok || geo.orbit.is_empty() {
        return Err(Error::Config("closed geodesic does not belong to the tensor model".into()));
    }
    Ok(())
}

/// The closed geodesic `x = x₀`, `θ = π/2` of the flat torus (or of any
/// conformal torus whose λ does not depend on `y`).
pub fn vertical_torus_geodesic(metric: &TorusMetric, x0: f64, n: usize) -> ClosedGeodesic {
    let n = n.max(8);
    let orbit = (0..n).map(|j| UnitTangent::new(x0, metric.ly * j as f64 / n as f64, PI / 2.0)).collect();
    let period = metric.ly * metric.lambda(x0, 0.0).exp();
    ClosedGeodesic { orbit, period, source: GeodesicSource::TorusShooting { p: 0, q: 1 }, closure_error: 0.0 }
}

/// `‖η₊a₋₁ + η₋a₁‖` on the backend's quadrature.
pub fn solenoidal_check(b: &dyn SmBackend, a: &SMField) -> Result<f64> {
    if a.n_nodes() != b.n_nodes() {
        return Err(Error::Config("field and backend have different node counts".into()));
    }
    for k in a.levels() {
        if k.abs() != 1 && !a.is_zero_mode(k) {
            return Err(Error::Config(format!("a 1-form lives on levels ±1, mode {k} is nonzero")));
        }
    }
    if a.n_modes() < 1 {
        return Ok(0.0);
    }
    let up = b.eta_plus(-1, a.mode(-1).unwrap());
    let down = b.eta_minus(1, a.mode(1).unwrap());
    let r: Vec<C64> = up.iter().zip(&down).map(|(x, y)| x + y).collect();
    Ok(level_norm2(b.weights(), &r).sqrt())
}

/// `G[γ, j] = I_m(f_j)(γ)`, filled in parallel over geodesics.
pub fn ray_matrix(model: &TensorModel, basis: &[SymTensorField], pool: &[ClosedGeodesic]) -> Result<Mat<C64>> {
    Ok(ray_matrix_scaled(model, basis, pool)?.0)
}

/// `G` together with the Frobenius norm of `|G|[γ, j] = ∫|f_j|` along `γ`.
fn ray_matrix_scaled(model: &TensorModel, basis: &[SymTensorField], pool: &[ClosedGeodesic]) -> Result<(Mat<C64>, f64)> {
    let prepared: Vec<PreparedField> = basis.iter().map(|f| PreparedField::new(model, f)).collect::<Result<_>>()?;
    for g in pool {
        check_geodesic(model, g)?;
    }
    let rows: Vec<Vec<(C64, f64)>> = pool
        .par_iter()
        .map(|g| {
            prepared
                .iter()
                .map(|p| {
                    let (v, a) = g.orbit.iter().fold((ZERO, 0.0), |(v, a), s| {
                        let f = p.eval(s);
                        (v + f, a + f.norm())
                    });
                    (v * g.dt(), a * g.dt())
                })
                .collect()
        })
        .collect();
    let scale = rows.iter().flatten().map(|(_, a)| a * a).sum::<f64>().sqrt();
    Ok((Mat::from_fn(pool.len(), basis.len(), |i, j| rows[i][j].0), scale))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SInjectivityReport {
    pub degree: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Frobenius norm of the matrix of `∫|f_j|`; kernel thresholds are
    /// relative to the larger of this and `sigma_max`.
    pub sigma_ref: f64,
    pub kernel_dim: usize,
    /// Largest relative distance of a kernel tensor from the potential span.
    pub non_potential_residual: f64,
    pub pool_size: usize,
    pub n_basis: usize,
    pub n_potential: usize,
    /// Fewer geodesics than basis tensors: the kernel is not interpreted.
    pub underdetermined: bool,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SInjectivityConfig {
    /// Singular values below `kernel_tol · σ_max` span the numerical kernel.
    pub kernel_tol: f64,
    /// Vertical truncation used when sampling for the L² projection.
    pub n_modes: usize,
}

impl Default for SInjectivityConfig {
    fn default() -> Self {
        SInjectivityConfig { kernel_tol: 1e-6, n_modes: 4 }
    }
}

/// Numerical kernel of `G` and its distance from `span{X h}`.
///
/// `potentials` are the tensors `X h_i` spanning the potential part.  The
/// distance is measured in `L²(SM)` on the quadrature `(points, weights)`.
pub fn sinjectivity_experiment(
    model: &TensorModel,
    basis: &[SymTensorField],
    potentials: &[SymTensorField],
    pool: &[ClosedGeodesic],
    points: &[C64],
    weights: &[f64],
    cfg: SInjectivityConfig,
) -> Result<SInjectivityReport> {
    if basis.is_empty() {
        return Err(Error::Config("s-injectivity experiment needs a nonempty basis".into()));
    }
    if pool.is_empty() {
        return Err(Error::InsufficientData("empty geodesic pool".into()));
    }
    if points.len() != weights.len() {
        return Err(Error::Config("quadrature points and weights differ in length".into()));
    }
    let degree = basis[0].degree;
    if basis.iter().chain(potentials).any(|f| f.degree != degree) {
        return Err(Error::Config("all tensors must have the same degree".into()));
    }
    let (g, abs_scale) = ray_matrix_scaled(model, basis, pool)?;
    let n = basis.len();
    let underdetermined = pool.len() < n;
    let svd = g.svd().map_err(|e| Error::Solver(format!("svd of the ray matrix: {e:?}")))?;
    let s: Vec<f64> = (0..pool.len().min(n)).map(|i| svd.S()[i].re).collect();
    let sigma_max = s.first().copied().unwrap_or(0.0);
    // a basis of potentials has only quadrature noise in G, so σ_max alone
    // is no reference
    let sigma_ref = sigma_max.max(abs_scale);
    // columns beyond the row count are kernel directions as well
    let mut sigma_all = s.clone();
    sigma_all.resize(n, 0.0);
    let kernel: Vec<usize> = (0..n).filter(|&i| sigma_all[i] <= cfg.kernel_tol * sigma_ref).collect();
    let sigma_min = sigma_all.iter().copied().fold(f64::INFINITY, f64::min);
    let mut non_potential_residual: f64 = 0.0;
    if !kernel.is_empty() && !underdetermined {
        let n_modes = cfg.n_modes.max(degree);
        let sample = |f: &SymTensorField| -> Result<Vec<C64>> {
            let u = PreparedField::new(model, f)?.sample(points, n_modes)?;
            // flatten with √w so that the Euclidean norm is the L² norm
            let mut out = Vec::with_capacity(points.len() * (2 * n_modes + 1));
            for k in u.levels() {
                out.extend(u.mode(k).unwrap().iter().zip(weights).map(|(v, w)| v * w.sqrt()));
            }
            Ok(out)
        };
        let fb: Vec<Vec<C64>> = basis.iter().map(&sample).collect::<Result<_>>()?;
        let fp: Vec<Vec<C64>> = potentials.iter().map(&sample).collect::<Result<_>>()?;
        let len = fb[0].len();
        let v = svd.V();
        let q = if fp.is_empty() {
            None
        } else {
            let pm = Mat::from_fn(len, fp.len(), |i, j| fp[j][i]);
            let svdp = pm.thin_svd().map_err(|e| Error::Solver(format!("svd of the potential span: {e:?}")))?;
            let smax = svdp.S()[0].re;
            let rank = (0..fp.len()).filter(|&i| svdp.S()[i].re > 1e-10 * smax).count();
            Some(svdp.U().subcols(0, rank).to_owned())
        };
        for &c in &kernel {
            let mut f = vec![ZERO; len];
            for (j, col) in fb.iter().enumerate() {
                let coef = v[(j, c)];
                f.iter_mut().zip(col).for_each(|(a, b)| *a += coef * b);
            }
            let fnorm = f.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if fnorm == 0.0 {
                continue;
            }
            let resid = match &q {
                None => fnorm,
                Some(q) => {
                    let fm = Mat::from_fn(len, 1, |i, _| f[i]);
                    let proj = q * (q.adjoint() * &fm);
                    (0..len).map(|i| (f[i] - proj[(i, 0)]).norm_sqr()).sum::<f64>().sqrt()
                }
            };
            non_potential_residual = non_potential_residual.max(resid / fnorm);
        }
    }
    Ok(SInjectivityReport {
        degree,
        sigma_min,
        sigma_max,
        sigma_ref,
        kernel_dim: kernel.len(),
        non_potential_residual,
        pool_size: pool.len(),
        n_basis: n,
        n_potential: potentials.len(),
        underdetermined,
    })
}

/// Disk Gaussian atoms at the origin and on rings inside the octagon.
pub fn octagon_centers(count: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0)];
    let mut ring = 0;
    while out.len() < count {
        ring += 1;
        let rho = 0.45 * ring as f64;
        let n = 4 * ring + 2;
        let r = (rho / 2.0f64).tanh();
        for j in 0..n {
            if out.len() == count {
                break;
            }
            out.push(C64::from_polar(r, 2.0 * PI * j as f64 / n as f64 + 0.3 * ring as f64));
        }
    }
    out.truncate(count);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_of_degree_two() {
        assert_eq!(SymTensorField::zero(2).band(), vec![-2, 0, 2]);
        let a = Atom::TorusWave { a: 1, b: 0 };
        assert!(SymTensorField::atom(2, 1, a, C64::new(1.0, 0.0)).is_err());
        let h = SymTensorField::atom(1, 1, a, C64::new(1.0, 0.0)).unwrap();
        let dh = potential_tensor(&h).unwrap();
        assert_eq!(dh.degree, 2);
        assert_eq!(dh.terms.iter().map(|t| t.out_level()).collect::<Vec<_>>(), vec![2, 0]);
    }
}
