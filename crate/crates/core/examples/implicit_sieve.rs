// The implicit sieve on a subgroup indicator, checked against the truth.

use abelian_iso::cosets::Subgroup;
use abelian_iso::estimators::stream_rng;
use abelian_iso::sieve::Stage;
use abelian_iso::{implicit_sieve, BooleanFunction, GroupElement, GroupSpec, QueryOracle, Result, SieveConfig};

pub fn run() -> Result<()> {
    let g = GroupSpec::from_moduli(&[4, 2])?;
    let h = Subgroup::span(&g, &[g.index_of(&GroupElement(vec![2, 0]))?]);
    let f = BooleanFunction::indicator_idx(&g, h.members());
    println!("support {:?}", f.fourier().support(1e-9));
    let oracle = QueryOracle::new(f);
    let mut rng = stream_rng(1, 0);
    let points: Vec<usize> = (0..20).map(|_| g.sample_idx(&mut rng)).collect();
    let out = implicit_sieve(&oracle, &points, &SieveConfig::desk(0.5, 8, 20), &mut rng)?;
    let truth = out.debug_truth.clone().unwrap_or_default();
    for (j, &r) in truth.iter().enumerate() {
        println!("column {j}: character {}, exact {}", g.element(r)?, out.column_matches(j, r));
    }
    for stage in [Stage::Wt2, Stage::Wt4, Stage::Projection, Stage::Magnitude, Stage::Labels] {
        println!("{stage:?}: {} queries", out.ledger.queries(stage));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
