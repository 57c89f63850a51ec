// The sparse tester on a 2-sparse function over `Z_4`.

use abelian_iso::estimators::stream_rng;
use abelian_iso::sieve::Stage;
use abelian_iso::{test_isomorphism_sparse, BooleanFunction, GroupSpec, QueryOracle, Result, TesterConfig};

pub fn run() -> Result<()> {
    let grp = GroupSpec::from_moduli(&[4])?;
    let g = BooleanFunction::new(&grp, vec![1, -1, -1, 1])?;
    println!("sparsity {}", g.fourier().sparsity(1e-9));
    let cfg = TesterConfig::new(0.05, 0.4).with_theta(0.5);
    for (name, f) in [("same", g.clone()), ("negated", g.negate())] {
        let v = test_isomorphism_sparse(&QueryOracle::new(f), &g, 2, &cfg, &mut stream_rng(8, 0))?;
        println!(
            "{name}: {:?}, best correlation {:.3}, wt4 samples {}",
            v.decision,
            v.best_correlation,
            v.ledger.samples(Stage::Wt4)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
