// Heavy coefficients by coordinate-prefix refinement.

use abelian_iso::estimators::stream_rng;
use abelian_iso::sieve::{gl_prefix_search, PrefixConfig};
use abelian_iso::{BooleanFunction, GroupSpec, QueryOracle, Result};

pub fn run() -> Result<()> {
    let g = GroupSpec::from_moduli(&[2, 2, 3])?;
    // f(x) = (-1)^(x1 + x2): one coefficient of size 1.
    let f = BooleanFunction::from_fn(&g, |x| (g.coord(x, 0) + g.coord(x, 1)) % 2 == 1);
    let out = gl_prefix_search(&QueryOracle::new(f), &PrefixConfig::new(0.5, 0.01), &mut stream_rng(4, 0))?;
    for level in &out.levels {
        println!("level {}: {} candidates, {} kept", level.level, level.candidates, level.kept);
    }
    for (r, w) in &out.survivors {
        println!("heavy {} with weight {w:.3}", g.element(*r)?);
    }
    println!("{} queries", out.ledger.total_queries());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
