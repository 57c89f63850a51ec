// A random coset structure on `Z_9` and its buckets.

use abelian_iso::estimators::stream_rng;
use abelian_iso::{CosetStructure, GroupSpec, Result};

pub fn run() -> Result<()> {
    let g = GroupSpec::from_moduli(&[9])?;
    let cs = CosetStructure::random(&g, 2, &mut stream_rng(3, 0))?;
    println!("betas {:?}, shift {:?}", cs.betas(), cs.shift());
    println!("|H| = {}, |H^perp| = {}", cs.subgroup().len(), cs.annihilator().len());
    for b in cs.buckets() {
        println!("bucket {:?}: {:?}", b.label, b.members);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
