// Characters of `Z_4 x Z_3` as exact roots of unity.

use abelian_iso::{GroupElement, GroupSpec, Result};

pub fn run() -> Result<()> {
    let g = GroupSpec::new(&[(2, 2), (3, 1)])?;
    println!("{g}: order {}, L = {}", g.order(), g.lcm());
    let x = GroupElement(vec![1, 2]);
    for r in g.elements().take(6) {
        let chi = g.character(&r, &x)?;
        println!("chi_{r}({x}) = w_{}^{}", chi.order(), chi.exponent());
    }
    let a = g.element_from(&[3, 1])?;
    let b = g.element_from(&[1, 1])?;
    println!("{a} * {b} = {} in Z_{}", g.pseudo_inner(&a, &b)?.value(), g.lcm());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
