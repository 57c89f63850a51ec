//! `Aut(G)` by generator images, double duals, and the exact automorphism
//! distance `min_A delta(f, g o A)`.
//!
//! An automorphism is stored both by the images of the canonical generators
//! and as the full permutation of element indices. The double dual `A^^`
//! is the adjoint of `A` under the pairing: `A^^(r) * x = r * A(x)`.

use crate::error::{Error, Result};
use crate::fourier::{hamming_distance, same_group, BooleanFunction, FourierTable};
use crate::group::{GroupElement, GroupSpec};

/// Size limits for exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AutCaps {
    pub max_order: usize,
    pub max_count: usize,
}

impl Default for AutCaps {
    fn default() -> Self {
        AutCaps {
            max_order: 64,
            max_count: 100_000,
        }
    }
}

/// A bijective homomorphism of `G`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automorphism {
    group: GroupSpec,
    images: Vec<usize>,
    map: Vec<usize>,
}

fn extend(g: &GroupSpec, images: &[usize]) -> Vec<usize> {
    (0..g.order())
        .map(|x| {
            images.iter().enumerate().fold(0usize, |acc, (i, &img)| {
                g.lin_idx(acc, img, 1, g.coord(x, i) as i64)
            })
        })
        .collect()
}

impl Automorphism {
    pub fn identity(g: &GroupSpec) -> Self {
        Automorphism {
            group: g.clone(),
            images: (0..g.rank()).map(|i| g.strides()[i]).collect(),
            map: (0..g.order()).collect(),
        }
    }

    /// Builds `A` from `A(e_i)`; fails unless the images define an
    /// automorphism.
    pub fn from_images(g: &GroupSpec, images: &[GroupElement]) -> Result<Self> {
        if images.len() != g.rank() {
            return Err(Error::Shape(format!(
                "{} generator images for rank {}",
                images.len(),
                g.rank()
            )));
        }
        let idx = images
            .iter()
            .map(|e| g.index_of(e))
            .collect::<Result<Vec<_>>>()?;
        for (i, &img) in idx.iter().enumerate() {
            if g.factors()[i].modulus % g.element_order_idx(img) != 0 {
                return Err(Error::InvalidFunction(format!(
                    "image {} of e_{i} has order not dividing {}",
                    images[i],
                    g.factors()[i].modulus
                )));
            }
        }
        let map = extend(g, &idx);
        let mut hit = vec![false; g.order()];
        for &y in &map {
            if std::mem::replace(&mut hit[y], true) {
                return Err(Error::InvalidFunction("generator images are not bijective".into()));
            }
        }
        Ok(Automorphism {
            group: g.clone(),
            images: idx,
            map,
        })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn generator_images(&self) -> Vec<GroupElement> {
        self.images.iter().map(|&i| self.group.element(i).unwrap()).collect()
    }

    #[inline]
    pub fn apply_idx(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn apply(&self, x: &GroupElement) -> Result<GroupElement> {
        self.group.element(self.map[self.group.index_of(x)?])
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &m)| i == m)
    }

    /// `self o other`: apply `other` first.
    pub fn compose(&self, other: &Automorphism) -> Result<Automorphism> {
        same_group(&self.group, &other.group)?;
        let map: Vec<usize> = other.map.iter().map(|&y| self.map[y]).collect();
        Ok(Automorphism {
            group: self.group.clone(),
            images: self.images_of(&map),
            map,
        })
    }

    pub fn invert(&self) -> Automorphism {
        let mut map = vec![0; self.map.len()];
        for (x, &y) in self.map.iter().enumerate() {
            map[y] = x;
        }
        Automorphism {
            group: self.group.clone(),
            images: self.images_of(&map),
            map,
        }
    }

    fn images_of(&self, map: &[usize]) -> Vec<usize> {
        (0..self.group.rank())
            .map(|i| map[self.group.strides()[i]])
            .collect()
    }

    /// The double dual: `A^^(r) * x = r * A(x)` for all `r, x`.
    pub fn dual_double(&self) -> Automorphism {
        let g = &self.group;
        let l = g.lcm();
        let weights: Vec<u64> = g.factors().iter().map(|f| l / f.modulus).collect();
        let map: Vec<usize> = (0..g.order())
            .map(|r| {
                self.images.iter().enumerate().fold(0usize, |acc, (i, &img)| {
                    let s = g.pairing_idx(r, img) / weights[i];
                    acc + (s % g.factors()[i].modulus) as usize * g.strides()[i]
                })
            })
            .collect();
        Automorphism {
            group: g.clone(),
            images: self.images_of(&map),
            map,
        }
    }

    /// `f o A`.
    pub fn apply_to(&self, f: &BooleanFunction) -> Result<BooleanFunction> {
        same_group(&self.group, f.group())?;
        let values = self.map.iter().map(|&y| f.value(y)).collect();
        BooleanFunction::new(&self.group, values)
    }

    /// Fourier table of `f o A` obtained by permuting `f^`:
    /// `(f o A)^(r) = f^((A^-1)^^(r))`.
    pub fn permute_table(&self, t: &FourierTable) -> Result<FourierTable> {
        same_group(&self.group, t.group())?;
        let d = self.invert().dual_double();
        let coeffs = (0..self.group.order()).map(|r| t.coeff(d.map[r])).collect();
        FourierTable::new(&self.group, coeffs)
    }
}

/// All automorphisms of `G`, identity first.
pub fn enumerate_automorphisms(g: &GroupSpec, caps: AutCaps) -> Result<Vec<Automorphism>> {
    if g.order() > caps.max_order {
        return Err(Error::GroupTooLarge(format!(
            "|G| = {} exceeds the enumeration cap {}",
            g.order(),
            caps.max_order
        )));
    }
    let candidates: Vec<Vec<usize>> = g
        .factors()
        .iter()
        .map(|f| {
            (0..g.order())
                .filter(|&c| f.modulus % g.element_order_idx(c) == 0)
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(g.rank());
    search(g, &candidates, &mut chosen, &mut out, caps.max_count)?;
    out.sort_by_key(|a: &Automorphism| !a.is_identity());
    Ok(out)
}

fn search(
    g: &GroupSpec,
    candidates: &[Vec<usize>],
    chosen: &mut Vec<usize>,
    out: &mut Vec<Automorphism>,
    cap: usize,
) -> Result<()> {
    let j = chosen.len();
    if j == g.rank() {
        if out.len() >= cap {
            return Err(Error::GroupTooLarge(format!(
                "|Aut(G)| exceeds the enumeration cap {cap}"
            )));
        }
        let map = extend(g, chosen);
        out.push(Automorphism {
            group: g.clone(),
            images: chosen.clone(),
            map,
        });
        return Ok(());
    }
    for &c in &candidates[j] {
        chosen.push(c);
        if injective_on_prefix(g, chosen) {
            search(g, candidates, chosen, out, cap)?;
        }
        chosen.pop();
    }
    Ok(())
}

/// Whether the map `e_i -> chosen[i]` is injective on `<e_1, .., e_k>`.
fn injective_on_prefix(g: &GroupSpec, chosen: &[usize]) -> bool {
    let moduli: Vec<u64> = g.factors()[..chosen.len()].iter().map(|f| f.modulus).collect();
    let size: usize = moduli.iter().product::<u64>() as usize;
    let mut hit = vec![false; g.order()];
    let mut coords = vec![0u64; chosen.len()];
    for _ in 0..size {
        let y = chosen
            .iter()
            .zip(&coords)
            .fold(0usize, |acc, (&img, &c)| g.lin_idx(acc, img, 1, c as i64));
        if std::mem::replace(&mut hit[y], true) {
            return false;
        }
        for (c, &m) in coords.iter_mut().zip(&moduli).rev() {
            *c += 1;
            if *c < m {
                break;
            }
            *c = 0;
        }
    }
    true
}

/// `min_A delta(f, g o A)` with a minimizing `A`.
pub fn exact_automorphism_distance(
    f: &BooleanFunction,
    g: &BooleanFunction,
    caps: AutCaps,
) -> Result<(f64, Automorphism)> {
    same_group(f.group(), g.group())?;
    let auts = enumerate_automorphisms(f.group(), caps)?;
    distance_over(f, g, &auts)
}

/// The minimum of `delta(f, g o A)` over a given automorphism list.
pub fn distance_over(
    f: &BooleanFunction,
    g: &BooleanFunction,
    auts: &[Automorphism],
) -> Result<(f64, Automorphism)> {
    let mut best: Option<(f64, &Automorphism)> = None;
    for a in auts {
        let d = hamming_distance(f, &a.apply_to(g)?)?;
        if best.is_none_or(|(b, _)| d < b) {
            best = Some((d, a));
        }
    }
    best.map(|(d, a)| (d, a.clone()))
        .ok_or_else(|| Error::Config("empty automorphism list".into()))
}
