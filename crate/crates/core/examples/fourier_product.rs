use anosovlab::smfourier::{
    fourier_product, holomorphic_kernel, invariant_extension, ChainSolver, ExtensionVariant, MeshConfig, OctagonMesh,
};

fn main() -> anosovlab::Result<()> {
    let mesh = OctagonMesh::new(MeshConfig::default())?;
    let solver = ChainSolver::new(&mesh);
    let ker = holomorphic_kernel(&solver, 1, 2, 7)?;
    for (i, (_, q)) in ker.iter().enumerate() {
        println!("holomorphic section {i}: |eta- a|/|a| = {q:.2e}");
    }
    let ext = |a: &Vec<_>| invariant_extension(&solver, &ExtensionVariant::W1 { a1: a.clone(), am1: None }, 8).map(|e| e.w);
    let (u, v) = (ext(&ker[0].0)?, ext(&ker[1].0)?);
    let (_, rep) = fourier_product(&mesh, &u, &v, 1.0, 1.0)?;
    println!("product ladder residual {:.2e} (relative)", rep.ladder.relative);
    for (k, r) in &rep.l1_ratios {
        println!("  k = {k:>2}: L1 ratio {r:.3}");
    }
    Ok(())
}
