//! Extends random mode-zero data on the octagon to a truncated solution of
//! `Xw = 0` and prints the ladder residuals and mode norms.

use anosovlab::smfourier::{
    invariant_extension, random_function, ChainSolver, ExtensionVariant, MeshConfig, OctagonMesh, SmBackend,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> anosovlab::Result<()> {
    let mesh = OctagonMesh::new(MeshConfig::default())?;
    println!("{}", mesh.name());
    let solver = ChainSolver::new(&mesh);
    let f = random_function(&mesh, 10, &mut ChaCha8Rng::seed_from_u64(5));
    let ext = invariant_extension(&solver, &ExtensionVariant::W0 { f }, 6)?;
    println!("relative interior ladder residual {:.2e}", ext.ladder.relative);
    for (k, r) in &ext.ladder.interior {
        println!("  k = {k:>2}: |eta+ w_(k-1) + eta- w_(k+1)| = {r:.2e}");
    }
    for (k, n) in ext.mode_norms.iter().filter(|(k, _)| *k >= 0) {
        println!("  |w_{k}| = {n:.4e}");
    }
    println!("odd modes: {:.1e}, growth slope {:?}", ext.parity_defect, ext.growth_slope);
    Ok(())
}
