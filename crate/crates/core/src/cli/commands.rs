use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Output, RunConfig};
use crate::cocycle::{anosov_verdict, profile_pool, terminator_bisect, AnosovConfig, ConjugateEvidence, TerminatorConfig};
use crate::error::{Error, Result};
use crate::flow::{find_closed_geodesics, CurvatureProfile, TrappingConfig};
use crate::geometry::{closed_geodesic_from_word, word_pool, ClosedGeodesic, Octagon, SurfaceModel, TorusMetric};
use crate::gulliver::{certify, search_params, synth_profile, SearchConfig};
use crate::smfourier::{
    holomorphic_kernel, invariant_extension, octagon_quadrature, pestov_residual, random_field, random_function,
    ChainSolver, ExtensionVariant, MeshConfig, OctagonMesh, SmBackend, SpectralGrid,
};
use crate::xray::{
    octagon_centers, potential_tensor, ray_transform_abs, ray_transform_prepared, sinjectivity_experiment, Atom,
    PreparedField, SInjectivityConfig, SymTensorField, TensorModel,
};

fn section<T: DeserializeOwned>(cfg: &RunConfig, key: &str) -> Result<T> {
    serde_json::from_value(cfg.section(key)).map_err(|e| Error::Config(format!("section '{key}': {e}")))
}

fn surface(cfg: &RunConfig) -> Result<SurfaceModel> {
    let v = cfg.surface().ok_or_else(|| Error::Config("this command needs a 'surface' block".into()))?;
    SurfaceModel::from_json(v)
}

fn positive(what: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} must be positive, got {x}")))
    }
}

/// Random streams keyed by a purpose tag and an index, so that adding a
/// field does not shift the others.
fn stream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((tag << 32) | index);
    rng
}

enum Backend {
    Grid(SpectralGrid),
    Mesh(OctagonMesh),
}

impl Backend {
    fn torus(m: &TorusMetric, n: usize) -> Self {
        Backend::Grid(SpectralGrid::new(m, n, n))
    }

    fn as_dyn(&self) -> &dyn SmBackend {
        match self {
            Backend::Grid(g) => g,
            Backend::Mesh(m) => m,
        }
    }

    fn nodes(&self) -> Vec<(f64, f64)> {
        match self {
            Backend::Grid(g) => g.nodes(),
            Backend::Mesh(m) => m.nodes().iter().map(|z| (z.re, z.im)).collect(),
        }
    }
}

// ---------------------------------------------------------------- pestov

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PestovSection {
    /// Square torus grids, coarse to fine.
    grids: Vec<usize>,
    fields: usize,
    n_modes: usize,
    k_max: usize,
    n_basis: usize,
    mesh: MeshConfig,
}

impl Default for PestovSection {
    fn default() -> Self {
        PestovSection { grids: vec![64, 128], fields: 20, n_modes: 8, k_max: 6, n_basis: 25, mesh: MeshConfig::default() }
    }
}

#[derive(Serialize)]
struct PestovField {
    field: usize,
    /// Normalized residual per resolution, in the order of `resolutions`.
    residuals: Vec<f64>,
    /// Successive coarse/fine residual ratios.
    ratios: Vec<f64>,
}

pub(super) fn pestov(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let s: PestovSection = section(cfg, "pestov")?;
    if s.fields == 0 || s.n_modes == 0 || s.n_basis == 0 {
        return Err(Error::Config("pestov needs fields, n_modes and n_basis >= 1".into()));
    }
    let model = surface(cfg)?;
    let (backends, labels): (Vec<Backend>, Vec<String>) = match &model {
        SurfaceModel::ConformalTorus(m) => {
            if s.grids.is_empty() || s.grids.iter().any(|&n| n < 8) {
                return Err(Error::Config("pestov.grids must list sizes >= 8".into()));
            }
            s.grids.iter().map(|&n| (Backend::torus(m, n), format!("{n}x{n}"))).unzip()
        }
        SurfaceModel::FuchsianOctagon(_) => {
            let mesh = OctagonMesh::new(s.mesh)?;
            let label = format!("mesh spacing {}", s.mesh.spacing);
            (vec![Backend::Mesh(mesh)], vec![label])
        }
        SurfaceModel::ConstantCurvature { .. } => {
            return Err(Error::Config("pestov runs on a conformal torus or the octagon".into()));
        }
    };
    let fields: Vec<PestovField> = (0..s.fields)
        .into_par_iter()
        .map(|i| {
            let residuals = backends
                .iter()
                .map(|b| {
                    let mut rng = stream(cfg.seed, 1, i as u64);
                    let u = random_field(b.as_dyn(), s.n_modes, s.k_max, s.n_basis, &mut rng);
                    Ok(pestov_residual(b.as_dyn(), &u)?.residual)
                })
                .collect::<Result<Vec<f64>>>()?;
            let ratios = residuals.windows(2).map(|w| w[0] / w[1]).collect();
            Ok(PestovField { field: i, residuals, ratios })
        })
        .collect::<Result<_>>()?;
    let finest = fields.iter().map(|f| *f.residuals.last().unwrap()).fold(0.0, f64::max);
    let min_ratio = fields.iter().flat_map(|f| f.ratios.iter().copied()).fold(f64::INFINITY, f64::min);
    out.json(&json!({
        "surface": model.name(),
        "resolutions": labels,
        "max_residual_finest": finest,
        "min_refinement_ratio": if min_ratio.is_finite() { Some(min_ratio) } else { None },
        "fields": fields,
    }))?;
    let rows = fields.iter().flat_map(|f| f.residuals.iter().zip(&labels).map(move |(r, l)| (f.field, l.clone(), *r)));
    out.csv("pestov_residuals", &["field", "resolution", "residual"], rows)
}

// ------------------------------------------------------------ terminator

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TerminatorSection {
    beta_max: f64,
    tol: f64,
    t_max: Option<f64>,
    /// Explicit profiles; when present the surface pool is not sampled.
    profiles: Option<Vec<CurvatureProfile>>,
    /// Adds the extremal profile of the collar construction at this target.
    gulliver_beta: Option<f64>,
    n_closed: usize,
    n_random: usize,
    random_window: f64,
}

impl Default for TerminatorSection {
    fn default() -> Self {
        let t = TerminatorConfig::default();
        let a = AnosovConfig::default();
        TerminatorSection {
            beta_max: t.beta_max,
            tol: t.tol,
            t_max: t.t_max,
            profiles: None,
            gulliver_beta: None,
            n_closed: a.n_closed,
            n_random: a.n_random,
            random_window: a.random_window,
        }
    }
}

fn evidence_rows(ev: &[ConjugateEvidence]) -> impl Iterator<Item = (String, f64, Option<f64>)> + '_ {
    ev.iter().map(|e| (e.profile.clone(), e.beta, e.first_conjugate_time))
}

pub(super) fn terminator(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let s: TerminatorSection = section(cfg, "terminator")?;
    positive("terminator.beta_max", s.beta_max)?;
    positive("terminator.tol", s.tol)?;
    let tcfg = TerminatorConfig { beta_max: s.beta_max, tol: s.tol, t_max: s.t_max };
    let mut notes = Vec::new();
    let mut pool = Vec::new();
    if let Some(p) = &s.profiles {
        pool.extend(p.iter().cloned());
    } else if cfg.surface().is_some() {
        let model = surface(cfg)?;
        let acfg = AnosovConfig {
            n_closed: s.n_closed,
            n_random: s.n_random,
            random_window: s.random_window,
            seed: cfg.seed,
            ..AnosovConfig::default()
        };
        let (p, n) = profile_pool(&model, &acfg)?;
        pool.extend(p);
        notes.extend(n);
    } else if s.gulliver_beta.is_none() {
        return Err(Error::Config("terminator needs a surface, explicit profiles or gulliver_beta".into()));
    }
    if let Some(beta) = s.gulliver_beta {
        let p = search_params(beta, SearchConfig::default())?;
        pool.push(synth_profile(&p));
    }
    let cert = terminator_bisect(&pool, tcfg)?;
    notes.push(format!("{} over {} profiles (finite sample)", cert.summary(), pool.len()));
    out.json(&json!({ "summary": cert.summary(), "certificate": cert, "pool_size": pool.len(), "notes": notes }))?;
    out.csv("terminator_evidence", &["profile", "beta", "first_conjugate_time"], evidence_rows(&cert.evidence))
}

// ---------------------------------------------------------------- anosov

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct AnosovSection {
    trapping: TrappingConfig,
    terminator: TerminatorConfig,
    n_closed: usize,
    n_random: usize,
    random_window: f64,
}

impl Default for AnosovSection {
    fn default() -> Self {
        let a = AnosovConfig::default();
        AnosovSection {
            trapping: a.trapping,
            terminator: a.terminator,
            n_closed: a.n_closed,
            n_random: a.n_random,
            random_window: a.random_window,
        }
    }
}

pub(super) fn anosov(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let s: AnosovSection = section(cfg, "anosov")?;
    positive("anosov.terminator.tol", s.terminator.tol)?;
    positive("anosov.terminator.beta_max", s.terminator.beta_max)?;
    let model = surface(cfg)?;
    let acfg = AnosovConfig {
        trapping: s.trapping,
        terminator: s.terminator,
        n_closed: s.n_closed,
        n_random: s.n_random,
        random_window: s.random_window,
        seed: cfg.seed,
    };
    let report = anosov_verdict(&model, &acfg)?;
    out.json(&report)?;
    out.csv("anosov_evidence", &["profile", "beta", "first_conjugate_time"], evidence_rows(&report.terminator.evidence))
}

// ------------------------------------------------------------------ xray

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct XraySection {
    degree: usize,
    /// Octagon: longest word in the pool.
    max_word: usize,
    /// Orbit samples per unit length, with a floor of `min_samples`.
    samples_per_length: f64,
    min_samples: usize,
    /// Octagon: number of Gaussian centres and their width.
    centers: usize,
    sigma: f64,
    quadrature_spacing: f64,
    /// Torus: homotopy classes of the pool and the largest wave number.
    classes: Vec<(i64, i64)>,
    waves: i64,
    kernel_tol: f64,
    n_modes: usize,
    /// Also checks `I(dh) = 0` over the pool for a generic `h`.
    potential_check: bool,
}

impl Default for XraySection {
    fn default() -> Self {
        XraySection {
            degree: 2,
            max_word: 6,
            samples_per_length: 32.0,
            min_samples: 64,
            centers: 8,
            sigma: 3.0,
            quadrature_spacing: 0.15,
            classes: vec![(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2), (2, -1), (1, -2), (3, 1), (1, 3)],
            waves: 1,
            kernel_tol: 1e-6,
            n_modes: 4,
            potential_check: true,
        }
    }
}

/// Levels `-m, -m + 2, ..., m` of a degree `m` tensor.
fn band(m: usize) -> impl Iterator<Item = i32> {
    (-(m as i32)..=m as i32).step_by(2)
}

fn octagon_pool(oct: &Octagon, s: &XraySection) -> Result<Vec<ClosedGeodesic>> {
    let words = word_pool(oct, s.max_word);
    let geos: Vec<Option<ClosedGeodesic>> = words
        .par_iter()
        .map(|e| closed_geodesic_from_word(oct, &e.word, ((s.samples_per_length * e.length) as usize).max(s.min_samples)))
        .collect::<Result<_>>()?;
    Ok(geos.into_iter().flatten().collect())
}

fn torus_quadrature(m: &TorusMetric) -> (Vec<C64>, Vec<f64>) {
    let (nx, ny) = (m.nx, m.ny);
    let cell = m.lx * m.ly / (nx * ny) as f64;
    let mut pts = Vec::with_capacity(nx * ny);
    let mut wts = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            let (x, y) = (m.lx * i as f64 / nx as f64, m.ly * j as f64 / ny as f64);
            pts.push(C64::new(x, y));
            wts.push(cell * (2.0 * m.lambda(x, y)).exp());
        }
    }
    (pts, wts)
}

#[derive(Serialize)]
struct PotentialCheck {
    degree: usize,
    max_relative_residual: f64,
}

pub(super) fn xray(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let s: XraySection = section(cfg, "xray")?;
    positive("xray.kernel_tol", s.kernel_tol)?;
    positive("xray.samples_per_length", s.samples_per_length)?;
    positive("xray.sigma", s.sigma)?;
    positive("xray.quadrature_spacing", s.quadrature_spacing)?;
    let model = surface(cfg)?;
    let tm = TensorModel::from_surface(&model)?;
    let mut notes = Vec::new();
    let (pool, atoms, (pts, wts)) = match &model {
        SurfaceModel::FuchsianOctagon(oct) => {
            if s.centers == 0 {
                return Err(Error::Config("xray.centers must be at least 1".into()));
            }
            let atoms: Vec<Atom> =
                octagon_centers(s.centers).into_iter().map(|c| Atom::DiskGaussian { center: c, sigma: s.sigma }).collect();
            (octagon_pool(oct, &s)?, atoms, octagon_quadrature(oct, s.quadrature_spacing))
        }
        SurfaceModel::ConformalTorus(m) => {
            let mut pool = Vec::new();
            for &c in &s.classes {
                let len = (c.0 as f64 * m.lx).hypot(c.1 as f64 * m.ly);
                let n = ((s.samples_per_length * len) as usize).max(s.min_samples);
                match find_closed_geodesics(m, c, 1e-10, n) {
                    Ok(g) => pool.push(g),
                    Err(e) => notes.push(format!("class {c:?}: {e}")),
                }
            }
            let w = s.waves.abs();
            let atoms = (-w..=w).flat_map(|a| (-w..=w).map(move |b| Atom::TorusWave { a, b })).collect();
            (pool, atoms, torus_quadrature(m))
        }
        SurfaceModel::ConstantCurvature { .. } => unreachable!("rejected by TensorModel::from_surface"),
    };
    let one = C64::new(1.0, 0.0);
    let m = s.degree;
    let mut potentials = Vec::new();
    let mut basis = Vec::new();
    for a in &atoms {
        if m > 0 {
            for k in band(m - 1) {
                let d = potential_tensor(&SymTensorField::atom(m - 1, k, *a, one)?)?;
                potentials.push(d.clone());
                basis.push(d);
            }
        }
    }
    for a in &atoms {
        for k in band(m) {
            basis.push(SymTensorField::atom(m, k, *a, one)?);
        }
    }
    let mut residuals: Vec<Option<f64>> = vec![None; pool.len()];
    let mut check = None;
    if s.potential_check && m > 0 {
        // one generic h: all atoms on every level with distinct coefficients
        let mut h = SymTensorField::zero(m - 1);
        for (i, k) in band(m - 1).enumerate() {
            for (j, a) in atoms.iter().enumerate() {
                h = h.add(&SymTensorField::atom(m - 1, k, *a, C64::new(1.0 + i as f64, 0.3 * j as f64))?)?;
            }
        }
        let dh = potential_tensor(&h)?;
        let p = PreparedField::new(&tm, &dh)?;
        let r: Vec<f64> = pool
            .par_iter()
            .map(|g| {
                let abs = ray_transform_abs(&p, g)?;
                let v = ray_transform_prepared(&p, g)?.norm();
                Ok(if abs > 0.0 { v / abs } else { v })
            })
            .collect::<Result<_>>()?;
        let worst = r.iter().copied().fold(0.0, f64::max);
        residuals = r.into_iter().map(Some).collect();
        check = Some(PotentialCheck { degree: m, max_relative_residual: worst });
    }
    let scfg = SInjectivityConfig { kernel_tol: s.kernel_tol, n_modes: s.n_modes };
    let report = sinjectivity_experiment(&tm, &basis, &potentials, &pool, &pts, &wts, scfg)?;
    if report.underdetermined {
        notes.push(format!(
            "warning: underdetermined pool ({} geodesics for {} basis tensors); the kernel is not interpreted",
            report.pool_size, report.n_basis
        ));
    }
    out.json(&json!({
        "surface": model.name(),
        "sinjectivity": report,
        "potential_check": check,
        "max_closure_error": pool.iter().map(|g| g.closure_error).fold(0.0, f64::max),
        "notes": notes,
    }))?;
    let rows = pool.iter().zip(&residuals).enumerate().map(|(i, (g, r))| (i, g.period, g.closure_error, *r));
    out.csv("xray_pool", &["geodesic", "period", "closure_error", "potential_residual"], rows)
}

// ------------------------------------------------------------- invariant

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Variant {
    #[default]
    W0,
    W1,
    Wm,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Datum {
    #[default]
    Random,
    Constant,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct InvariantSection {
    variant: Variant,
    /// Prescribed level for `wm`.
    m: usize,
    n_modes: usize,
    /// Mode-zero datum for `w0`.
    data: Datum,
    value: f64,
    n_basis: usize,
    /// `w1`: also prescribe `a₋₁ = conj(a₁)`.
    conjugate: bool,
    mesh: MeshConfig,
    /// Torus grid; defaults to the grid of the surface block.
    grid: Option<usize>,
}

impl Default for InvariantSection {
    fn default() -> Self {
        InvariantSection {
            variant: Variant::W0,
            m: 2,
            n_modes: 8,
            data: Datum::Random,
            value: 1.0,
            n_basis: 10,
            conjugate: false,
            mesh: MeshConfig::default(),
            grid: None,
        }
    }
}

pub(super) fn invariant(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let s: InvariantSection = section(cfg, "invariant")?;
    if s.n_basis == 0 {
        return Err(Error::Config("invariant.n_basis must be at least 1".into()));
    }
    let model = surface(cfg)?;
    let backend = match &model {
        SurfaceModel::ConformalTorus(m) => {
            let n = s.grid.unwrap_or(m.nx.max(m.ny));
            Backend::Grid(SpectralGrid::new(m, n, n))
        }
        SurfaceModel::FuchsianOctagon(_) => Backend::Mesh(OctagonMesh::new(s.mesh)?),
        SurfaceModel::ConstantCurvature { .. } => {
            return Err(Error::Config("invariant runs on a conformal torus or the octagon".into()));
        }
    };
    let b = backend.as_dyn();
    let solver = ChainSolver::new(b);
    let (variant, level, quotient) = match s.variant {
        Variant::W0 => {
            let f = match s.data {
                Datum::Random => random_function(b, s.n_basis, &mut stream(cfg.seed, 2, 0)),
                Datum::Constant => vec![C64::new(s.value, 0.0); b.n_nodes()],
            };
            (ExtensionVariant::W0 { f }, 0, None)
        }
        Variant::W1 => {
            let (a1, q) = holomorphic_kernel(&solver, 1, 1, cfg.seed)?.swap_remove(0);
            let am1 = s.conjugate.then(|| a1.iter().map(|v| v.conj()).collect());
            (ExtensionVariant::W1 { a1, am1 }, 1, Some(q))
        }
        Variant::Wm => {
            let (q, r) = holomorphic_kernel(&solver, s.m as i32, 1, cfg.seed)?.swap_remove(0);
            (ExtensionVariant::Wm { m: s.m, q }, s.m as i32, Some(r))
        }
    };
    let ext = invariant_extension(&solver, &variant, s.n_modes)?;
    let datum = match &variant {
        ExtensionVariant::W0 { f } => f,
        ExtensionVariant::W1 { a1, .. } => a1,
        ExtensionVariant::Wm { q, .. } => q,
    };
    let prescribed_error =
        ext.w.mode(level).unwrap().iter().zip(datum).map(|(a, c)| (a - c).norm()).fold(0.0, f64::max);
    out.json(&json!({
        "backend": b.name(),
        "variant": format!("{:?}", s.variant).to_lowercase(),
        "n_modes": s.n_modes,
        "prescribed_level": level,
        "prescribed_error": prescribed_error,
        "kernel_quotient": quotient,
        "extension": ext,
    }))?;
    out.csv("invariant_modes", &["k", "norm"], ext.mode_norms.iter().copied())?;
    let ladder = ext.ladder.interior.iter().map(|&(k, r)| (k, r, "interior")).chain(ext.ladder.boundary.iter().map(|&(k, r)| (k, r, "boundary")));
    out.csv("invariant_ladder", &["k", "residual", "region"], ladder)?;
    let nodes = backend.nodes();
    let wts = b.weights();
    let w = &ext.w;
    let field = w
        .levels()
        .filter(|&k| !w.is_zero_mode(k))
        .flat_map(|k| {
            let h = w.mode(k).unwrap();
            nodes.iter().zip(wts).zip(h).enumerate().map(move |(i, ((p, wt), v))| (i, p.0, p.1, *wt, k, v.re, v.im))
        });
    out.csv("invariant_field", &["node", "x", "y", "weight", "k", "re", "im"], field)
}

// -------------------------------------------------------------- gulliver

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GulliverSection {
    beta_target: f64,
    search: SearchConfig,
    terminator: TerminatorConfig,
    /// Step of the exported profile table.
    profile_dt: f64,
}

impl Default for GulliverSection {
    fn default() -> Self {
        GulliverSection {
            beta_target: 1.75,
            search: SearchConfig::default(),
            terminator: TerminatorConfig::default(),
            profile_dt: 0.01,
        }
    }
}

pub(super) fn gulliver(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let s: GulliverSection = section(cfg, "gulliver")?;
    positive("gulliver.profile_dt", s.profile_dt)?;
    positive("gulliver.terminator.tol", s.terminator.tol)?;
    let params = search_params(s.beta_target, s.search)?;
    let cert = certify(&params, s.terminator)?;
    let profile = synth_profile(&params);
    out.json(&json!({
        "summary": cert.terminator.summary(),
        "profile": profile,
        "certificate": cert,
    }))?;
    out.csv("gulliver_profile", &["t", "K"], profile.tabulate(s.profile_dt))
}
