//! Integrates a geodesic on a bumpy conformal torus and writes the orbit as
//! CSV (`t,x,y,theta,K`) to stdout.

use anosovlab::flow::{integrate_geodesic, write_orbit_csv};
use anosovlab::geometry::{SurfaceModel, TorusMetric, UnitTangent};

fn main() -> anosovlab::Result<()> {
    let metric = TorusMetric::from_expr(1.0, 1.0, 64, 64, "0.3*sin(2*pi*x)*cos(2*pi*y)")?;
    let model = SurfaceModel::ConformalTorus(metric);
    let orbit = integrate_geodesic(&model, UnitTangent::new(0.1, 0.2, 0.7), 5.0, 0.05)?;
    write_orbit_csv(&model, &orbit, std::io::stdout())
}
