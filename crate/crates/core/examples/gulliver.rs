use anosovlab::cocycle::TerminatorConfig;
use anosovlab::gulliver::{certify, search_params, SearchConfig};

fn main() -> anosovlab::Result<()> {
    for beta in [1.55, 1.75, 1.95] {
        let p = search_params(beta, SearchConfig::default())?;
        let cert = certify(&p, TerminatorConfig::default())?;
        println!(
            "beta_target {beta}: b = {:.4e}, r1 = {:.3}, collar = {:.3}; {} (window ok: {})",
            p.b,
            p.r1,
            p.collar,
            cert.terminator.summary(),
            cert.window_ok
        );
    }
    // outside (3/2, 2) the construction does not apply
    println!("beta_target 2.05: {}", search_params(2.05, SearchConfig::default()).unwrap_err());
    Ok(())
}
