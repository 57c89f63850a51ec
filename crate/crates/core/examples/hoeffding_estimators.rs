// Sampling estimators against their exact values, with query counts.

use abelian_iso::estimators::{estimate_coefficient, estimate_projection, estimate_wt2, estimate_wt4, stream_rng};
use abelian_iso::fourier::{bucket_weights, exact_projection};
use abelian_iso::{BooleanFunction, CosetStructure, EstimatorConfig, GroupSpec, QueryOracle, Result};

pub fn run() -> Result<()> {
    let g = GroupSpec::from_moduli(&[4, 3])?;
    let f = BooleanFunction::random(&g, &mut stream_rng(2, 0));
    let t = f.fourier();
    let cs = CosetStructure::random(&g, 1, &mut stream_rng(2, 1))?;
    let coset = cs.buckets().swap_remove(0).coset;
    let (w2, w4) = bucket_weights(&t, &coset.members(&g));
    let cfg = EstimatorConfig::new(0.1, 0.05)?;
    let oracle = QueryOracle::new(f);
    let mut rng = stream_rng(2, 2);
    println!("N = {}", cfg.samples());
    let e = estimate_wt2(&oracle, &coset, &cfg, &mut rng);
    println!("wt2 {:.4} (exact {w2:.4}), {} queries", e.real(), e.queries);
    let e = estimate_wt4(&oracle, &coset, &cfg, &mut rng);
    println!("wt4 {:.4} (exact {w4:.4}), {} queries", e.real(), e.queries);
    let e = estimate_projection(&oracle, &coset, 5, &cfg, &mut rng);
    println!("P f(5) {:.4} (exact {:.4})", e.value, exact_projection(&t, &coset, 5));
    let e = estimate_coefficient(&oracle, 1, &cfg, &mut rng);
    println!("f^(1) {:.4} (exact {:.4})", e.value, t.coeff(1));
    println!("total queries {}", oracle.queries());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
