// Exact distance between a function and every automorphic image of another.

use abelian_iso::estimators::stream_rng;
use abelian_iso::{enumerate_automorphisms, exact_automorphism_distance, AutCaps, BooleanFunction, GroupSpec, Result};

pub fn run() -> Result<()> {
    let g = GroupSpec::from_moduli(&[4, 2])?;
    let auts = enumerate_automorphisms(&g, AutCaps::default())?;
    println!("|Aut({g})| = {}", auts.len());
    let f = BooleanFunction::random(&g, &mut stream_rng(5, 0));
    let image = auts[3].apply_to(&f)?;
    let (d, a) = exact_automorphism_distance(&image, &f, AutCaps::default())?;
    println!("distance to an image: {d}, via generator images {:?}", a.generator_images());
    let (d, _) = exact_automorphism_distance(&f.negate(), &f, AutCaps::default())?;
    println!("distance of -f: {d}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
