//! Surface models, curvature evaluation and closed geodesics of the genus-two
//! octagon surface.

pub mod mobius;
pub mod octagon;
pub mod torus;
mod words;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
pub use mobius::Mobius;
pub use octagon::{build_octagon, Octagon, Reduction};
pub use torus::TorusMetric;
pub use words::{closed_geodesic_from_word, word_pool, PoolEntry};

/// A closed oriented surface.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum SurfaceModel {
    /// `e^{2λ}(dx² + dy²)` on a flat torus.
    ConformalTorus(TorusMetric),
    /// Constant curvature `k0`, in the chart `λ = ln 2 − ln(1 + k0 |z|²)`.
    ConstantCurvature { k0: f64 },
    /// The regular octagon genus-two surface, curvature −1.
    FuchsianOctagon(Octagon),
}

/// A point of the unit tangent bundle in the model's chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitTangent {
    pub x: f64,
    pub y: f64,
    /// Angle between the unit vector and ∂/∂x, in `[0, 2π)`.
    pub theta: f64,
}

impl UnitTangent {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        UnitTangent { x, y, theta: theta.rem_euclid(2.0 * PI) }
    }

    pub fn z(&self) -> C64 {
        C64::new(self.x, self.y)
    }
}

/// Signed angle difference reduced to `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    if d > PI {
        d - 2.0 * PI
    } else {
        d
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GeodesicSource {
    TorusShooting { p: i64, q: i64 },
    OctagonWord { word: Vec<usize> },
    Constant,
}

/// A closed geodesic sampled at `n` equally spaced arc-length parameters
/// `t_j = j T / n`, `j = 0..n` (the endpoint is not repeated).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClosedGeodesic {
    pub orbit: Vec<UnitTangent>,
    pub period: f64,
    pub source: GeodesicSource,
    /// Distance in the unit tangent bundle between the start and the point
    /// reached after one period.
    pub closure_error: f64,
}

impl ClosedGeodesic {
    pub fn dt(&self) -> f64 {
        self.period / self.orbit.len() as f64
    }
}

impl SurfaceModel {
    pub fn name(&self) -> &'static str {
        match self {
            SurfaceModel::ConformalTorus(_) => "conformal_torus",
            SurfaceModel::ConstantCurvature { .. } => "constant",
            SurfaceModel::FuchsianOctagon(_) => "octagon",
        }
    }

    /// Reads the JSON surface description used by the command line tool.
    pub fn from_json(v: &Value) -> Result<Self> {
        let ty = v
            .get("type")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Config("surface needs a string field 'type'".into()))?;
        match ty {
            "conformal_torus" => {
                let num = |key: &str, default: Option<f64>| -> Result<f64> {
                    match v.get(key) {
                        Some(x) => x.as_f64().ok_or_else(|| Error::Config(format!("surface field '{key}' must be a number"))),
                        None => default.ok_or_else(|| Error::Config(format!("surface field '{key}' is required"))),
                    }
                };
                let lx = num("Lx", None)?;
                let ly = num("Ly", None)?;
                let nx = num("nx", Some(64.0))? as usize;
                let ny = num("ny", Some(64.0))? as usize;
                if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
                    return Err(Error::Config("torus side lengths must be positive".into()));
                }
                if nx < 4 || ny < 4 {
                    return Err(Error::Config("torus grid must be at least 4x4".into()));
                }
                let metric = match v.get("lambda") {
                    None => TorusMetric::flat(lx, ly, nx, ny),
                    Some(Value::String(s)) => TorusMetric::from_expr(lx, ly, nx, ny, s)?,
                    Some(Value::Number(n)) => {
                        let c = n.as_f64().unwrap_or(0.0);
                        TorusMetric::from_fn(lx, ly, nx, ny, |_, _| c)?
                    }
                    Some(Value::Array(rows)) => {
                        let flat: Vec<f64> = if rows.iter().all(Value::is_array) {
                            if rows.len() != nx {
                                return Err(Error::Config(format!("lambda grid has {} rows, expected nx = {nx}", rows.len())));
                            }
                            let mut out = Vec::with_capacity(nx * ny);
                            for r in rows {
                                let r = r.as_array().unwrap();
                                if r.len() != ny {
                                    return Err(Error::Config(format!("lambda grid row has {} entries, expected ny = {ny}", r.len())));
                                }
                                for x in r {
                                    out.push(x.as_f64().ok_or_else(|| Error::Config("lambda grid entries must be numbers".into()))?);
                                }
                            }
                            out
                        } else {
                            rows.iter()
                                .map(|x| x.as_f64().ok_or_else(|| Error::Config("lambda grid entries must be numbers".into())))
                                .collect::<Result<_>>()?
                        };
                        TorusMetric::from_samples(lx, ly, nx, ny, &flat)?
                    }
                    Some(_) => return Err(Error::Config("'lambda' must be an expression string or a grid".into())),
                };
                Ok(SurfaceModel::ConformalTorus(metric))
            }
            "constant" => {
                let k0 = v
                    .get("K")
                    .and_then(Value::as_f64)
                    .ok_or_else(|| Error::Config("constant surface needs a numeric 'K'".into()))?;
                if !k0.is_finite() {
                    return Err(Error::Config("K must be finite".into()));
                }
                Ok(SurfaceModel::ConstantCurvature { k0 })
            }
            "octagon" => Ok(SurfaceModel::FuchsianOctagon(build_octagon())),
            other => Err(Error::Config(format!("unknown surface type '{other}'"))),
        }
    }

    /// Whether the model's curvature is identically constant.
    pub fn constant_curvature(&self) -> Option<f64> {
        match self {
            SurfaceModel::ConformalTorus(m) if m.is_flat() => Some(0.0),
            SurfaceModel::ConformalTorus(_) => None,
            SurfaceModel::ConstantCurvature { k0 } => Some(*k0),
            SurfaceModel::FuchsianOctagon(_) => Some(-1.0),
        }
    }
}

/// Gaussian curvature of `model` at the chart position `(x, y)`.
pub fn curvature_at(model: &SurfaceModel, x: f64, y: f64) -> Result<f64> {
    match model {
        SurfaceModel::ConformalTorus(m) => {
            let k = m.curvature(x, y);
            if k.is_finite() {
                Ok(k)
            } else {
                Err(Error::Evaluation(format!("non-finite curvature at ({x}, {y})")))
            }
        }
        SurfaceModel::ConstantCurvature { k0 } => {
            if *k0 < 0.0 && (x * x + y * y) * (-k0) >= 1.0 {
                return Err(Error::Domain(format!("({x}, {y}) lies outside the hyperbolic chart")));
            }
            Ok(*k0)
        }
        SurfaceModel::FuchsianOctagon(_) => {
            if x * x + y * y >= 1.0 {
                return Err(Error::Domain(format!("({x}, {y}) lies outside the unit disk")));
            }
            Ok(-1.0)
        }
    }
}

/// Maps a disk point into the fundamental octagon, returning the reduced point
/// and the group element applied.
pub fn reduce_to_fundamental_domain(oct: &Octagon, p: C64) -> Result<(C64, Mobius)> {
    let r = oct.reduce(p)?;
    Ok((r.point, r.element))
}
