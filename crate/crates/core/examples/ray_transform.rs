//! Ray transforms over octagon word geodesics: potentials integrate to zero,
//! and the numerical kernel of a small 2-tensor family is potential.

use anosovlab::geometry::{build_octagon, closed_geodesic_from_word, word_pool, ClosedGeodesic};
use anosovlab::smfourier::octagon_quadrature;
use anosovlab::xray::*;
use num_complex::Complex64 as C64;

fn main() -> anosovlab::Result<()> {
    let oct = build_octagon();
    let pool: Vec<ClosedGeodesic> = word_pool(&oct, 4)
        .iter()
        .filter_map(|e| closed_geodesic_from_word(&oct, &e.word, ((32.0 * e.length) as usize).max(64)).transpose())
        .collect::<anosovlab::Result<_>>()?;
    println!("{} closed geodesics", pool.len());
    let model = TensorModel::Octagon(oct.clone());
    let one = C64::new(1.0, 0.0);

    let mut basis = Vec::new();
    let mut potentials = Vec::new();
    for c in octagon_centers(4) {
        let atom = Atom::DiskGaussian { center: c, sigma: 3.0 };
        for k in [-1, 1] {
            let d = potential_tensor(&SymTensorField::atom(1, k, atom, one)?)?;
            potentials.push(d.clone());
            basis.push(d);
        }
        for k in [-2, 0, 2] {
            basis.push(SymTensorField::atom(2, k, atom, one)?);
        }
    }
    let p = PreparedField::new(&model, &potentials[0])?;
    let worst = pool
        .iter()
        .map(|g| Ok(ray_transform_prepared(&p, g)?.norm() / ray_transform_abs(&p, g)?))
        .collect::<anosovlab::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    println!("max |I(dh)| / I|dh| = {worst:.2e}");

    let (pts, wts) = octagon_quadrature(&oct, 0.2);
    let rep = sinjectivity_experiment(&model, &basis, &potentials, &pool, &pts, &wts, SInjectivityConfig::default())?;
    println!(
        "{} basis tensors, kernel dimension {} ({} potentials), distance from potentials {:.1e}",
        rep.n_basis, rep.kernel_dim, rep.n_potential, rep.non_potential_residual
    );
    Ok(())
}
