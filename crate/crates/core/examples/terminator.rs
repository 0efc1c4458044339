use anosovlab::cocycle::{terminator_bisect, two_piece_profile, TerminatorConfig};
use anosovlab::flow::CurvatureProfile;

fn main() -> anosovlab::Result<()> {
    let cfg = TerminatorConfig::default();
    let pools = [
        ("sphere", vec![CurvatureProfile::constant("K=1", 1.0)]),
        ("flat", vec![CurvatureProfile::constant("K=0", 0.0)]),
        ("hyperbolic", vec![CurvatureProfile::constant("K=-1", -1.0)]),
        ("cap + collar", vec![two_piece_profile("cap", 2.0, 0.25, 3.0, -1.0)]),
    ];
    for (name, pool) in pools {
        let cert = terminator_bisect(&pool, cfg)?;
        println!("{name:>13}: {}", cert.summary());
    }
    Ok(())
}
