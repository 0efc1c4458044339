//! Hopf solutions of `r' + r² + βK = 0` and the hyperbolicity test on a few
//! periodic curvature profiles.

use anosovlab::cocycle::{hyperbolicity_test, riccati_hopf, two_piece_profile, HyperbolicityConfig};
use anosovlab::flow::CurvatureProfile;
use anosovlab::Error;

fn main() -> anosovlab::Result<()> {
    let hyp = CurvatureProfile::constant("K=-1", -1.0);
    for beta in [0.25, 1.0, 2.25, 4.0] {
        let h = riccati_hopf(&hyp, beta, 20.0, 1e6)?;
        println!("K=-1 beta={beta}: r+ = {:.8}, r- = {:.8}, gap = {:.8}", h.r_plus[0], h.r_minus[0], h.gap_min);
    }
    let cap = two_piece_profile("cap", 1.0, 0.5, 4.0, -1.0);
    // past the terminator value of this profile (about 4.89) the Riccati
    // solutions blow up and no Hopf pair exists
    for beta in [0.5, 2.0, 8.0] {
        match hyperbolicity_test(&cap, beta, HyperbolicityConfig::default()) {
            Ok(rep) => println!("cap profile beta={beta}: {:?} (gaps {:?})", rep.verdict, rep.gaps),
            Err(Error::ConjugatePoint { time, .. }) => println!("cap profile beta={beta}: conjugate point, t = {time:.3}"),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
