use anosovlab::flow::find_closed_geodesics;
use anosovlab::geometry::{build_octagon, closed_geodesic_from_word, word_pool, TorusMetric};

fn main() -> anosovlab::Result<()> {
    let oct = build_octagon();
    let pool = word_pool(&oct, 4);
    println!("octagon: {} distinct lengths from words of length <= 4", pool.len());
    for e in pool.iter().take(5) {
        let g = closed_geodesic_from_word(&oct, &e.word, 128)?.expect("hyperbolic word");
        println!("  word {:?}  length {:.6}  closure error {:.1e}", e.word, g.period, g.closure_error);
    }

    // shooting for homotopy classes on a conformal torus
    let m = TorusMetric::from_expr(1.0, 1.0, 32, 32, "0.15*cos(2*pi*x)")?;
    for class in [(1, 0), (0, 1), (1, 1), (2, -1)] {
        match find_closed_geodesics(&m, class, 1e-10, 256) {
            Ok(g) => println!("torus class {class:?}: length {:.6}, closure {:.1e}", g.period, g.closure_error),
            Err(e) => println!("torus class {class:?}: {e}"),
        }
    }
    Ok(())
}
