//! Energy identity residuals for random band-limited fields on a torus with a
//! narrow bump, at increasing grid sizes.

use anosovlab::geometry::TorusMetric;
use anosovlab::smfourier::{pestov_residual, random_field, SpectralGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> anosovlab::Result<()> {
    let metric = TorusMetric::from_expr(1.0, 1.0, 256, 256, "0.3*exp(-(sin(pi*x)^2+sin(pi*y)^2)/0.02)")?;
    for n in [32, 64, 128] {
        let grid = SpectralGrid::new(&metric, n, n);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let u = random_field(&grid, 8, 6, 25, &mut rng);
            worst = worst.max(pestov_residual(&grid, &u)?.residual);
        }
        println!("{n:>4}x{n:<4} max normalized residual {worst:.3e}");
    }
    Ok(())
}
