//! Meshless backend on the genus-2 octagon surface.
//!
//! Nodes fill the fundamental octagon in hyperbolic polar rings.  Around each
//! node the point cloud is continued across the side pairings: a lifted
//! neighbour `g·z_j` carries the value `h_k(z_j) e^{-ik arg g'(z_j)}`, which is
//! how a level-`k` coefficient of a function on `SM` transforms.  First
//! derivatives come from a weighted least-squares polynomial fit in the
//! coordinates recentred at the node.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use faer::linalg::solvers::{Solve, SolveLstsq};
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{LevelSolve, SmBackend};
use crate::error::{Error, Result};
use crate::geometry::mobius::{cosh_dist, hyp_dist};
use crate::geometry::{build_octagon, Mobius, Octagon};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    /// Hyperbolic spacing of rings and of nodes along a ring.
    pub spacing: f64,
    /// Total degree of the local polynomial fit.
    pub degree: usize,
    /// Stencil radius in units of `spacing`.
    pub stencil: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig { spacing: 0.1, degree: 6, stencil: 4.0 }
    }
}

#[derive(Clone, Copy, Debug)]
struct StencilEntry {
    node: usize,
    del: C64,
    delbar: C64,
    /// `arg g'(z_node)` of the lifting element.
    phase: f64,
}

pub struct OctagonMesh {
    oct: Octagon,
    config: MeshConfig,
    nodes: Vec<C64>,
    weights: Vec<f64>,
    curvature: Vec<f64>,
    /// `λ = ln 2 - ln(1 - |z|²)` and `λ_z = z̄/(1 - |z|²)`.
    lambda: Vec<f64>,
    lambda_z: Vec<C64>,
    stencils: Vec<Vec<StencilEntry>>,
    /// Group elements used to continue sections beyond the octagon.
    tiles: Vec<Mobius>,
    row_cache: RwLock<HashMap<(i32, bool), Arc<Rows>>>,
}

type Rows = Vec<Vec<(usize, C64)>>;

fn ring_nodes(oct: &Octagon, spacing: f64) -> Vec<(C64, f64)> {
    let mut out = vec![(C64::new(0.0, 0.0), 2.0 * PI * ((spacing / 2.0).cosh() - 1.0))];
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut i = 1;
    loop {
        let rho = i as f64 * spacing;
        if rho > oct.r_circ + spacing {
            break;
        }
        let count = ((2.0 * PI * rho.sinh() / spacing).round() as usize).max(6);
        let area = 2.0 * PI * ((rho + spacing / 2.0).cosh() - (rho - spacing / 2.0).cosh()) / count as f64;
        let r = (rho / 2.0).tanh();
        for j in 0..count {
            let phi = 2.0 * PI * j as f64 / count as f64 + golden * i as f64;
            let z = C64::from_polar(r, phi);
            // strictly interior, so no node has an image that is also a node
            if oct.contains(z, -1e-4) {
                out.push((z, area));
            }
        }
        i += 1;
    }
    out
}

/// Nodes of the octagon on hyperbolic polar rings with area weights
/// normalized to the exact area `4π` (no fibre factor).
pub fn octagon_quadrature(oct: &Octagon, spacing: f64) -> (Vec<C64>, Vec<f64>) {
    let pts = ring_nodes(oct, spacing);
    let raw: f64 = pts.iter().map(|p| p.1).sum();
    (pts.iter().map(|p| p.0).collect(), pts.iter().map(|p| p.1 * 4.0 * PI / raw).collect())
}

impl OctagonMesh {
    pub fn new(config: MeshConfig) -> Result<Self> {
        if !(config.spacing > 0.01 && config.spacing < 0.5) || config.degree < 2 || config.stencil < 2.0 {
            return Err(Error::Config(format!("unusable mesh configuration {config:?}")));
        }
        let oct = build_octagon();
        // boundary cells are clipped by the octagon; the weights are rescaled
        // to the exact area
        let (nodes, area) = octagon_quadrature(&oct, config.spacing);
        let weights: Vec<f64> = area.iter().map(|a| 2.0 * PI * a).collect();
        let lambda = nodes.iter().map(|z| 2f64.ln() - (1.0 - z.norm_sqr()).ln()).collect();
        let lambda_z = nodes.iter().map(|z| z.conj() / (1.0 - z.norm_sqr())).collect();
        let curvature = vec![-1.0; nodes.len()];
        let rho_nb = config.stencil * config.spacing;
        let lift = oct.elements_within(2.0 * oct.r_circ + rho_nb + 0.1);
        let tiles = oct.elements_within(2.0 * oct.r_circ + 4.5);
        let mut mesh =
            OctagonMesh {
            oct,
            config,
            nodes,
            weights,
            curvature,
            lambda,
            lambda_z,
            stencils: Vec::new(),
            tiles,
            row_cache: RwLock::new(HashMap::new()),
        };
        mesh.stencils = (0..mesh.nodes.len())
            .into_par_iter()
            .map(|i| mesh.build_stencil(i, &lift, rho_nb))
            .collect::<Result<Vec<_>>>()?;
        Ok(mesh)
    }

    fn build_stencil(&self, i: usize, lift: &[Mobius], rho_nb: f64) -> Result<Vec<StencilEntry>> {
        let zi = self.nodes[i];
        let limit = rho_nb.cosh();
        let mut nb = Vec::new();
        for g in lift {
            // skip tiles that cannot reach the stencil
            if hyp_dist(zi, g.apply(C64::new(0.0, 0.0))) > self.oct.r_circ + rho_nb + 1e-9 {
                continue;
            }
            for (j, zj) in self.nodes.iter().enumerate() {
                let p = g.apply(*zj);
                let c = cosh_dist(zi, p);
                if c <= limit {
                    nb.push((j, p, g.arg_deriv(*zj), c.acosh()));
                }
            }
        }
        let m = (self.config.degree + 1) * (self.config.degree + 2) / 2;
        if nb.len() < m + 4 {
            return Err(Error::Config(format!("node {i} has only {} neighbours for {m} fit terms", nb.len())));
        }
        let to_local = Mobius::moving_origin_to(zi).inverse();
        let dt = to_local.deriv(zi);
        let scale = (rho_nb / 2.0).tanh();
        let exps: Vec<(usize, usize)> =
            (0..=self.config.degree).flat_map(|t| (0..=t).map(move |b| (t - b, b))).collect();
        let mut a = Mat::<C64>::zeros(nb.len(), m);
        let mut rhs = Mat::<C64>::zeros(nb.len(), nb.len());
        for (r, (_, p, _, d)) in nb.iter().enumerate() {
            let w = to_local.apply(*p) / scale;
            let s = d / rho_nb;
            let wt = (1.0 - s * s).max(0.0).powi(2) + 1e-3;
            let sw = wt.sqrt();
            for (c, (ea, eb)) in exps.iter().enumerate() {
                a[(r, c)] = w.powu(*ea as u32) * w.conj().powu(*eb as u32) * sw;
            }
            rhs[(r, r)] = C64::new(sw, 0.0);
        }
        let coef = a.col_piv_qr().solve_lstsq(&rhs);
        let (i10, i01) = (
            exps.iter().position(|e| *e == (1, 0)).unwrap(),
            exps.iter().position(|e| *e == (0, 1)).unwrap(),
        );
        Ok(nb
            .iter()
            .enumerate()
            .map(|(r, (j, _, phase, _))| StencilEntry {
                node: *j,
                del: coef[(i10, r)] * dt / scale,
                delbar: coef[(i01, r)] * dt.conj() / scale,
                phase: *phase,
            })
            .collect())
    }

    pub fn config(&self) -> MeshConfig {
        self.config
    }

    pub fn octagon(&self) -> &Octagon {
        &self.oct
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    /// Mean stencil size.
    pub fn mean_stencil(&self) -> f64 {
        self.stencils.iter().map(|s| s.len()).sum::<usize>() as f64 / self.stencils.len() as f64
    }

    /// Rows of the least-squares `η₊` (`plus`) or `η₋` on level `k`.
    fn mls_rows(&self, k: i32, plus: bool) -> Rows {
        let kf = k as f64;
        (0..self.nodes.len())
            .map(|i| {
                let e = (-self.lambda[i]).exp();
                let mut row: Vec<(usize, C64)> = self.stencils[i]
                    .iter()
                    .map(|s| {
                        let d = if plus { s.del } else { s.delbar };
                        (s.node, e * d * C64::from_polar(1.0, -kf * s.phase))
                    })
                    .collect();
                let diag = if plus { -kf * self.lambda_z[i] } else { kf * self.lambda_z[i].conj() };
                row.push((i, e * diag));
                row
            })
            .collect()
    }

    fn rows(&self, k: i32, plus: bool) -> Arc<Rows> {
        if let Some(r) = self.row_cache.read().unwrap().get(&(k, plus)) {
            return r.clone();
        }
        let rows = Arc::new(self.mls_rows(k, plus));
        self.row_cache.write().unwrap().insert((k, plus), rows.clone());
        rows
    }

    fn apply_eta(&self, k: i32, plus: bool, h: &[C64]) -> Vec<C64> {
        self.rows(k, plus).iter().map(|row| row.iter().map(|(j, v)| v * h[*j]).sum()).collect()
    }

    /// `W⁻¹ Eᴴ W h` for the operator `E`.
    fn apply_eta_adjoint(&self, k: i32, plus: bool, h: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.nodes.len()];
        for (i, row) in self.rows(k, plus).iter().enumerate() {
            let wh = h[i] * self.weights[i];
            for (j, v) in row {
                out[*j] += v.conj() * wh;
            }
        }
        out.iter_mut().zip(&self.weights).for_each(|(o, w)| *o /= w);
        out
    }

    /// Level-`k` section `Σ_g φ(g z) e^{ik arg g'(z)}` of the Γ-periodized
    /// Gaussian `φ(z) = exp(-σ (cosh d(z, c) - 1))`.
    pub fn periodized_gaussian(&self, k: i32, center: C64, sigma: f64) -> Vec<C64> {
        let cut = 1.0 + 40.0 / sigma;
        self.nodes
            .par_iter()
            .map(|z| {
                let mut acc = C64::new(0.0, 0.0);
                for g in &self.tiles {
                    let c = cosh_dist(g.apply(*z), center);
                    if c < cut {
                        acc += (-sigma * (c - 1.0)).exp() * C64::from_polar(1.0, k as f64 * g.arg_deriv(*z));
                    }
                }
                acc
            })
            .collect()
    }

    fn compose_rows(a: &[Vec<(usize, C64)>], b: &[Vec<(usize, C64)>], n: usize) -> Vec<Triplet<usize, usize, C64>> {
        let mut trip = Vec::new();
        let mut acc = vec![C64::new(0.0, 0.0); n];
        let mut touched = Vec::new();
        let mut mark = vec![false; n];
        for (i, row) in a.iter().enumerate() {
            for (j, v) in row {
                for (l, u) in &b[*j] {
                    if !mark[*l] {
                        mark[*l] = true;
                        touched.push(*l);
                    }
                    acc[*l] += v * u;
                }
            }
            for &l in &touched {
                trip.push(Triplet::new(i, l, acc[l]));
                acc[l] = C64::new(0.0, 0.0);
                mark[l] = false;
            }
            touched.clear();
        }
        trip
    }
}

impl SmBackend for OctagonMesh {
    fn name(&self) -> String {
        format!("octagon-mesh {} nodes (degree {})", self.nodes.len(), self.config.degree)
    }

    fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn curvature(&self) -> &[f64] {
        &self.curvature
    }

    fn eta_plus(&self, k: i32, h: &[C64]) -> Vec<C64> {
        self.apply_eta(k, true, h)
    }

    fn eta_minus(&self, k: i32, h: &[C64]) -> Vec<C64> {
        self.apply_eta(k, false, h)
    }

    fn eta_plus_adjoint(&self, k: i32, h: &[C64]) -> Vec<C64> {
        self.apply_eta_adjoint(k, true, h)
    }

    fn eta_minus_adjoint(&self, k: i32, h: &[C64]) -> Vec<C64> {
        self.apply_eta_adjoint(k, false, h)
    }

    fn level_solver(&self, k: i32, raise_first: bool) -> Result<Box<dyn LevelSolve + '_>> {
        let n = self.nodes.len();
        let (first, second) = if raise_first {
            (self.rows(k, true), self.rows(k + 1, false))
        } else {
            (self.rows(k, false), self.rows(k - 1, true))
        };
        let trip = Self::compose_rows(&second, &first, n);
        let mat = SparseColMat::<usize, C64>::try_new_from_triplets(n, n, &trip)
            .map_err(|e| Error::Solver(format!("assembling level {k} operator: {e:?}")))?;
        let lu = mat.sp_lu().map_err(|e| Error::Solver(format!("factoring level {k} operator: {e:?}")))?;
        Ok(Box::new(SparseLevelSolver { lu }))
    }

    fn smooth_basis(&self, k: i32, n: usize) -> Vec<Vec<C64>> {
        // centres on rings inside the octagon, alternating widths
        let mut centers = vec![C64::new(0.0, 0.0)];
        for (rho, count, off) in [(0.6, 6, 0.0), (1.0, 8, PI / 8.0), (0.3, 4, PI / 4.0), (1.3, 8, 0.0)] {
            let r = (rho / 2.0f64).tanh();
            for j in 0..count {
                centers.push(C64::from_polar(r, off + 2.0 * PI * j as f64 / count as f64));
            }
        }
        (0..n.max(1))
            .map(|m| {
                let sigma = if (m / centers.len()) % 2 == 0 { 2.0 } else { 4.0 };
                self.periodized_gaussian(k, centers[m % centers.len()], sigma)
            })
            .collect()
    }
}

struct SparseLevelSolver {
    lu: faer::sparse::linalg::solvers::Lu<usize, C64>,
}

impl LevelSolve for SparseLevelSolver {
    fn solve(&self, rhs: &[C64]) -> Result<Vec<C64>> {
        let mut b = Mat::<C64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        self.lu.solve_in_place(&mut b);
        let out: Vec<C64> = (0..rhs.len()).map(|i| b[(i, 0)]).collect();
        if out.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Solver("sparse level solve produced non-finite values".into()));
        }
        Ok(out)
    }
}
