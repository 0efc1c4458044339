//! Runs the trapping surrogate and the terminator bracket on three surfaces.

use anosovlab::cocycle::{anosov_verdict, AnosovConfig};
use anosovlab::flow::TrappingConfig;
use anosovlab::geometry::{build_octagon, SurfaceModel, TorusMetric};

fn main() -> anosovlab::Result<()> {
    let cfg = AnosovConfig {
        trapping: TrappingConfig { n_dir: 64, t_window: 30.0, ..TrappingConfig::default() },
        n_closed: 8,
        n_random: 4,
        ..AnosovConfig::default()
    };
    let surfaces = [
        SurfaceModel::FuchsianOctagon(build_octagon()),
        SurfaceModel::ConformalTorus(TorusMetric::flat(1.0, 1.0, 16, 16)),
        SurfaceModel::ConstantCurvature { k0: 1.0 },
    ];
    for s in &surfaces {
        let rep = anosov_verdict(s, &cfg)?;
        println!("{}: {:?}", rep.surface, rep.verdict);
        for n in &rep.notes {
            println!("    {n}");
        }
    }
    Ok(())
}
