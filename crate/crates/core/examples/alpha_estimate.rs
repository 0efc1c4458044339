use anosovlab::flow::CurvatureProfile;
use anosovlab::geometry::TorusMetric;
use anosovlab::smfourier::{alpha_lower_bound, alpha_lower_bound_profile, SpectralGrid};

fn main() -> anosovlab::Result<()> {
    let flat = SpectralGrid::new(&TorusMetric::flat(1.0, 1.0, 16, 16), 16, 16);
    let est = alpha_lower_bound(&flat, 4, 16)?;
    println!("flat torus: alpha = {:.10} (null part {}: {})", est.alpha, est.null_dim, est.null_treatment);

    let bumpy = TorusMetric::from_expr(1.0, 1.0, 32, 32, "0.25*sin(2*pi*x)*cos(2*pi*y)")?;
    let est = alpha_lower_bound(&SpectralGrid::new(&bumpy, 32, 32), 4, 16)?;
    println!("curved torus: alpha = {:.6}", est.alpha);

    // along a single geodesic the quadratic form reduces to one dimension
    for k in [-1.0, -0.25, 0.25] {
        let est = alpha_lower_bound_profile(&CurvatureProfile::constant("k", k), 64)?;
        println!("profile K = {k:>5}: alpha = {:.6}", est.alpha);
    }
    Ok(())
}
