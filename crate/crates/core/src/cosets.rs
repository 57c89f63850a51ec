//! Subgroups cut out by pairing constraints, annihilators, random coset
//! structures (the buckets of the sieve) and pseudo-independence.
//!
//! Element sets are held as sorted index lists in the group's enumeration
//! order. `H` and `H^perp` are materialized by exhaustive scan.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{gcd, root_value, GroupElement, GroupSpec, ZModL};

/// Default cap on the number of relation checks in exhaustive searches.
pub const DEFAULT_SEARCH_CAP: u128 = 50_000_000;

/// A subgroup of `G`, as a sorted member list plus a membership mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    members: Vec<usize>,
    mask: Vec<bool>,
}

impl Subgroup {
    fn from_mask(mask: Vec<bool>) -> Self {
        let members = mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect();
        Subgroup { members, mask }
    }

    /// Checks that the given indices form a subgroup: contains 0 and is
    /// closed under subtraction.
    pub fn from_members(g: &GroupSpec, members: &[usize]) -> Result<Self> {
        let mut mask = vec![false; g.order()];
        for &m in members {
            if m >= g.order() {
                return Err(Error::Index {
                    index: m,
                    order: g.order(),
                });
            }
            mask[m] = true;
        }
        if !mask[0] {
            return Err(Error::NotASubgroup("does not contain the identity".into()));
        }
        let h = Subgroup::from_mask(mask);
        for &a in &h.members {
            for &b in &h.members {
                if !h.mask[g.sub_idx(a, b)] {
                    return Err(Error::NotASubgroup(format!(
                        "{} - {} escapes the set",
                        g.element(a)?,
                        g.element(b)?
                    )));
                }
            }
        }
        Ok(h)
    }

    pub fn from_elements(g: &GroupSpec, elems: &[GroupElement]) -> Result<Self> {
        let idx = elems
            .iter()
            .map(|e| g.index_of(e))
            .collect::<Result<Vec<_>>>()?;
        Self::from_members(g, &idx)
    }

    pub fn whole(g: &GroupSpec) -> Self {
        Subgroup::from_mask(vec![true; g.order()])
    }

    pub fn zero(g: &GroupSpec) -> Self {
        let mut mask = vec![false; g.order()];
        mask[0] = true;
        Subgroup::from_mask(mask)
    }

    /// Subgroup generated by the given elements.
    pub fn span(g: &GroupSpec, gens: &[usize]) -> Self {
        let mut mask = vec![false; g.order()];
        mask[0] = true;
        let mut members = vec![0usize];
        let mut frontier = vec![0usize];
        while let Some(x) = frontier.pop() {
            for &s in gens {
                let y = g.add_idx(x, s);
                if !mask[y] {
                    mask[y] = true;
                    members.push(y);
                    frontier.push(y);
                }
            }
        }
        Subgroup::from_mask(mask)
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.mask.get(idx).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn elements(&self, g: &GroupSpec) -> Vec<GroupElement> {
        self.members.iter().map(|&i| g.element(i).unwrap()).collect()
    }

    /// Draws a uniform member.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.members[rng.gen_range(0..self.members.len())]
    }
}

/// `H^perp = { x : x * y = 0 for all y in H }`.
pub fn annihilator(g: &GroupSpec, h: &Subgroup) -> Subgroup {
    let mask = (0..g.order())
        .map(|x| h.members().iter().all(|&y| g.pairing_idx(x, y) == 0))
        .collect();
    Subgroup::from_mask(mask)
}

/// Annihilator of an element set, which must be a subgroup.
pub fn annihilator_of(g: &GroupSpec, h: &[GroupElement]) -> Result<Subgroup> {
    let h = Subgroup::from_elements(g, h)?;
    Ok(annihilator(g, &h))
}

/// `sum_{b in H} w_L^(b * z)`.
pub fn character_sum(g: &GroupSpec, h: &Subgroup, z: usize) -> Complex64 {
    h.members()
        .iter()
        .map(|&b| root_value(g.pairing_idx(b, z), g.lcm()))
        .sum()
}

/// `V_{b, r_1..r_k} = { x : r_j * x = b_j for all j }`.
#[derive(Debug, Clone)]
pub struct ConstraintSubgroup {
    group: GroupSpec,
    constraints: Vec<(GroupElement, ZModL)>,
    members: OnceLock<Vec<usize>>,
}

impl ConstraintSubgroup {
    pub fn new(g: &GroupSpec, constraints: Vec<(GroupElement, i64)>) -> Result<Self> {
        let constraints = constraints
            .into_iter()
            .map(|(r, b)| {
                g.validate(&r)?;
                Ok((r, ZModL::new(b, g.lcm())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ConstraintSubgroup {
            group: g.clone(),
            constraints,
            members: OnceLock::new(),
        })
    }

    pub fn constraints(&self) -> &[(GroupElement, ZModL)] {
        &self.constraints
    }

    /// Member indices, by exhaustive scan. May be empty when some `b_j != 0`.
    pub fn members(&self) -> &[usize] {
        self.members.get_or_init(|| {
            let g = &self.group;
            let rs: Vec<(usize, u64)> = self
                .constraints
                .iter()
                .map(|(r, b)| (g.index_of(r).unwrap(), b.value()))
                .collect();
            (0..g.order())
                .filter(|&x| rs.iter().all(|&(r, b)| g.pairing_idx(r, x) == b))
                .collect()
        })
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        self.members()
            .iter()
            .map(|&i| self.group.element(i).unwrap())
            .collect()
    }

    /// The member set as a subgroup; fails when some `b_j != 0` makes it a
    /// proper coset or empty.
    pub fn subgroup(&self) -> Result<Subgroup> {
        Subgroup::from_members(&self.group, self.members())
    }
}

/// A coset `r + H`, carrying `H` and `H^perp`.
#[derive(Debug, Clone)]
pub struct Coset {
    pub rep: usize,
    pub subgroup: Arc<Subgroup>,
    pub annihilator: Arc<Subgroup>,
}

impl Coset {
    pub fn new(g: &GroupSpec, rep: usize, subgroup: Arc<Subgroup>) -> Self {
        let annihilator = Arc::new(annihilator(g, &subgroup));
        Coset {
            rep,
            subgroup,
            annihilator,
        }
    }

    pub fn with_annihilator(rep: usize, subgroup: Arc<Subgroup>, annihilator: Arc<Subgroup>) -> Self {
        Coset {
            rep,
            subgroup,
            annihilator,
        }
    }

    /// The whole group as the single coset `0 + G`.
    pub fn whole(g: &GroupSpec) -> Self {
        Coset {
            rep: 0,
            subgroup: Arc::new(Subgroup::whole(g)),
            annihilator: Arc::new(Subgroup::zero(g)),
        }
    }

    pub fn contains(&self, g: &GroupSpec, x: usize) -> bool {
        self.subgroup.contains(g.sub_idx(x, self.rep))
    }

    pub fn members(&self, g: &GroupSpec) -> Vec<usize> {
        let mut m: Vec<usize> = self
            .subgroup
            .members()
            .iter()
            .map(|&h| g.add_idx(self.rep, h))
            .collect();
        m.sort_unstable();
        m
    }
}

/// A shifted bucket label in `Z_L^t`.
pub type BucketLabel = Vec<u64>;

/// A nonempty bucket of a coset structure.
#[derive(Debug, Clone)]
pub struct Bucket {
    pub label: BucketLabel,
    pub coset: Coset,
    pub members: Vec<usize>,
}

/// Random `beta_1..beta_t` with a random nonzero shift `u`. Labels are stored
/// shifted: `label_i(a) = a * beta_i + u_i (mod L)`.
#[derive(Debug, Clone)]
pub struct CosetStructure {
    group: GroupSpec,
    betas: Vec<usize>,
    shift: Vec<u64>,
    subgroup: Arc<Subgroup>,
    annihilator: Arc<Subgroup>,
}

impl CosetStructure {
    /// Draws a structure of dimension `t`.
    pub fn random<R: Rng + ?Sized>(g: &GroupSpec, t: usize, rng: &mut R) -> Result<Self> {
        if t == 0 {
            return Err(Error::Config("coset structure dimension t must be >= 1".into()));
        }
        let l = g.lcm();
        if l.checked_pow(t as u32).is_none() {
            return Err(Error::Config(format!(
                "L^t = {l}^{t} overflows the bucket index type"
            )));
        }
        let betas: Vec<usize> = (0..t).map(|_| g.sample_idx(rng)).collect();
        let shift = if l <= 1 {
            // Z_1^t has no nonzero vector; the trivial group keeps the zero shift.
            vec![0; t]
        } else {
            loop {
                let u: Vec<u64> = (0..t).map(|_| rng.gen_range(0..l)).collect();
                if u.iter().any(|&x| x != 0) {
                    break u;
                }
            }
        };
        Self::from_parts(g, betas, shift)
    }

    pub fn from_parts(g: &GroupSpec, betas: Vec<usize>, shift: Vec<u64>) -> Result<Self> {
        if betas.len() != shift.len() {
            return Err(Error::Shape("shift length differs from t".into()));
        }
        let mask: Vec<bool> = (0..g.order())
            .map(|a| betas.iter().all(|&b| g.pairing_idx(a, b) == 0))
            .collect();
        let subgroup = Arc::new(Subgroup::from_mask(mask));
        let annihilator = Arc::new(Subgroup::span(g, &betas));
        Ok(CosetStructure {
            group: g.clone(),
            betas,
            shift,
            subgroup,
            annihilator,
        })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn t(&self) -> usize {
        self.betas.len()
    }

    pub fn betas(&self) -> Vec<GroupElement> {
        self.betas.iter().map(|&b| self.group.element(b).unwrap()).collect()
    }

    pub fn shift(&self) -> &[u64] {
        &self.shift
    }

    /// `H = { a : a * beta_i = 0 for all i }`.
    pub fn subgroup(&self) -> &Arc<Subgroup> {
        &self.subgroup
    }

    /// `H^perp`, the span of the betas.
    pub fn annihilator(&self) -> &Arc<Subgroup> {
        &self.annihilator
    }

    pub fn label_idx(&self, a: usize) -> BucketLabel {
        let l = self.group.lcm().max(1);
        self.betas
            .iter()
            .zip(&self.shift)
            .map(|(&b, &u)| (self.group.pairing_idx(a, b) + u) % l)
            .collect()
    }

    pub fn bucket_of(&self, a: &GroupElement) -> Result<BucketLabel> {
        Ok(self.label_idx(self.group.index_of(a)?))
    }

    /// All nonempty buckets, ordered by label.
    pub fn buckets(&self) -> Vec<Bucket> {
        let mut map: BTreeMap<BucketLabel, Vec<usize>> = BTreeMap::new();
        for a in 0..self.group.order() {
            map.entry(self.label_idx(a)).or_default().push(a);
        }
        map.into_iter()
            .map(|(label, members)| Bucket {
                coset: Coset::with_annihilator(
                    members[0],
                    self.subgroup.clone(),
                    self.annihilator.clone(),
                ),
                label,
                members,
            })
            .collect()
    }

    /// The coset `r + H` carrying the given label, or `None` for an empty
    /// bucket.
    pub fn coset_for(&self, label: &[u64]) -> Option<Coset> {
        if label.len() != self.t() {
            return None;
        }
        (0..self.group.order())
            .find(|&a| self.label_idx(a) == label)
            .map(|rep| Coset::with_annihilator(rep, self.subgroup.clone(), self.annihilator.clone()))
    }
}

/// Integer relations `sum_k c_k v_k = 0` among a family of items in a
/// `Z_L`-module. Items are group elements, or the unknown characters behind
/// columns of exact roots of unity.
pub trait Relations {
    fn len(&self) -> usize;
    fn modulus(&self) -> u64;
    /// Whether `sum_k coeffs[k] * item[items[k]]` vanishes.
    fn vanishes(&self, items: &[usize], coeffs: &[u64]) -> bool;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Relations among group elements given by index.
pub struct ElementRelations<'a> {
    pub group: &'a GroupSpec,
    pub elems: &'a [usize],
}

impl Relations for ElementRelations<'_> {
    fn len(&self) -> usize {
        self.elems.len()
    }

    fn modulus(&self) -> u64 {
        self.group.lcm()
    }

    fn vanishes(&self, items: &[usize], coeffs: &[u64]) -> bool {
        let mut acc = 0usize;
        for (&i, &c) in items.iter().zip(coeffs) {
            acc = self.group.lin_idx(acc, self.elems[i], 1, c as i64);
        }
        acc == 0
    }
}

/// Outcome of a pseudo-independence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Dependence {
    Independent,
    /// `sum_i lambdas[i] * r_i = 0` with `lambdas[unit_index]` a unit mod `L`.
    Dependent { lambdas: Vec<u64>, unit_index: usize },
}

fn is_unit(x: u64, l: u64) -> bool {
    gcd(x, l) == 1
}

fn units(l: u64) -> Vec<u64> {
    (1..l.max(2)).filter(|&x| is_unit(x, l)).collect()
}

/// Advances a base-`l` odometer; returns false after the last vector.
fn next_vector(v: &mut [u64], l: u64) -> bool {
    for x in v.iter_mut() {
        *x += 1;
        if *x < l {
            return true;
        }
        *x = 0;
    }
    false
}

/// Exhaustive pseudo-independence check over `Z_L^k`, capped by `k * L^k`.
pub fn pseudo_independence<R: Relations>(rel: &R, cap: u128) -> Result<Dependence> {
    let k = rel.len();
    let l = rel.modulus();
    let needed = (k as u128).saturating_mul((l as u128).saturating_pow(k as u32));
    if needed > cap {
        return Err(Error::SearchCapExceeded { needed, cap });
    }
    if k == 0 {
        return Ok(Dependence::Independent);
    }
    let items: Vec<usize> = (0..k).collect();
    let mut lambdas = vec![0u64; k];
    while next_vector(&mut lambdas, l) {
        if let Some(unit_index) = lambdas.iter().position(|&x| is_unit(x, l)) {
            if rel.vanishes(&items, &lambdas) {
                return Ok(Dependence::Dependent {
                    lambdas,
                    unit_index,
                });
            }
        }
    }
    // l == 1: Z_1 has the single unit 0, and every combination vanishes.
    if l == 1 {
        return Ok(Dependence::Dependent {
            lambdas: vec![0; k],
            unit_index: 0,
        });
    }
    Ok(Dependence::Independent)
}

/// Pseudo-independence of group elements.
pub fn is_pseudo_independent(g: &GroupSpec, elems: &[GroupElement], cap: u128) -> Result<Dependence> {
    if elems.is_empty() {
        return Err(Error::Shape("need at least one element".into()));
    }
    let idx = elems
        .iter()
        .map(|e| g.index_of(e))
        .collect::<Result<Vec<_>>>()?;
    pseudo_independence(&ElementRelations { group: g, elems: &idx }, cap)
}

/// How a non-basis item is expressed: `lambda * item + sum_i coeffs[i] * basis[i] = 0`
/// with `lambda` a unit, so `item = -lambda^-1 * sum_i coeffs[i] * basis[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expression {
    pub item: usize,
    pub lambda: u64,
    pub coeffs: Vec<u64>,
}

impl Expression {
    /// Integer coefficients `c_i` with `item = sum_i c_i * basis[i]`.
    pub fn solved(&self, l: u64) -> Vec<u64> {
        let inv = crate::group::mod_inverse(self.lambda, l).unwrap_or(0);
        self.coeffs
            .iter()
            .map(|&c| ((l as u128 - (c as u128 * inv as u128) % l as u128) % l as u128) as u64)
            .collect()
    }
}

/// A smallest spanning subset and the expression of every other item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningSet {
    pub basis: Vec<usize>,
    pub expressions: Vec<Expression>,
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn express<R: Relations>(
    rel: &R,
    item: usize,
    basis: &[usize],
    budget: &mut u128,
    cap: u128,
) -> Result<Option<Expression>> {
    let l = rel.modulus();
    let mut items = Vec::with_capacity(basis.len() + 1);
    items.push(item);
    items.extend_from_slice(basis);
    for lambda in units(l) {
        let mut coeffs = vec![0u64; basis.len()];
        loop {
            *budget += 1;
            if *budget > cap {
                return Err(Error::SearchCapExceeded {
                    needed: *budget,
                    cap,
                });
            }
            let mut all = Vec::with_capacity(items.len());
            all.push(lambda);
            all.extend_from_slice(&coeffs);
            if rel.vanishes(&items, &all) {
                return Ok(Some(Expression {
                    item,
                    lambda,
                    coeffs,
                }));
            }
            if !next_vector(&mut coeffs, l) {
                break;
            }
        }
    }
    Ok(None)
}

/// Finds the smallest subset such that every other item satisfies
/// `lambda * r + sum lambda_i * b_i = 0` with `lambda` a unit. Subsets are
/// tried in increasing size, lexicographically within a size.
pub fn minimal_spanning_set<R: Relations>(rel: &R, cap: u128) -> Result<SpanningSet> {
    let n = rel.len();
    let mut budget = 0u128;
    for k in 0..=n {
        'subsets: for basis in combinations(n, k) {
            let mut expressions = Vec::new();
            for item in (0..n).filter(|i| !basis.contains(i)) {
                match express(rel, item, &basis, &mut budget, cap)? {
                    Some(e) => expressions.push(e),
                    None => continue 'subsets,
                }
            }
            return Ok(SpanningSet { basis, expressions });
        }
    }
    unreachable!("the full item set always spans itself")
}

/// Spanning-set search over explicit group elements.
pub fn minimal_spanning_set_of(g: &GroupSpec, cols: &[GroupElement], cap: u128) -> Result<SpanningSet> {
    if cols.is_empty() {
        return Err(Error::Shape("need at least one element".into()));
    }
    let idx = cols
        .iter()
        .map(|e| g.index_of(e))
        .collect::<Result<Vec<_>>>()?;
    minimal_spanning_set(&ElementRelations { group: g, elems: &idx }, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn el(c: &[u64]) -> GroupElement {
        GroupElement(c.to_vec())
    }

    #[test]
    fn subgroup_members_examples() {
        let g = GroupSpec::from_moduli(&[4]).unwrap();
        let v = ConstraintSubgroup::new(&g, vec![]).unwrap();
        assert_eq!(v.members().len(), 4);
        let v = ConstraintSubgroup::new(&g, vec![(el(&[1]), 0)]).unwrap();
        assert_eq!(v.elements(), vec![el(&[0])]);

        let g = GroupSpec::from_moduli(&[2, 2]).unwrap();
        let v = ConstraintSubgroup::new(&g, vec![(el(&[1, 0]), 1)]).unwrap();
        assert_eq!(v.elements(), vec![el(&[1, 0]), el(&[1, 1])]);
        assert!(v.subgroup().is_err());
    }

    #[test]
    fn constraint_sets_are_subgroups_or_cosets() {
        let g = GroupSpec::from_moduli(&[2, 4, 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let rs: Vec<GroupElement> = (0..2).map(|_| g.sample_uniform(&mut rng)).collect();
            let v0 = ConstraintSubgroup::new(&g, rs.iter().map(|r| (r.clone(), 0)).collect()).unwrap();
            let h = v0.subgroup().unwrap();
            let b: Vec<i64> = (0..2).map(|_| rng.gen_range(0..12)).collect();
            let vb = ConstraintSubgroup::new(&g, rs.iter().cloned().zip(b).collect()).unwrap();
            if let Some(&rep) = vb.members().first() {
                let coset = Coset::new(&g, rep, Arc::new(h));
                assert_eq!(coset.members(&g), vb.members());
            }
        }
    }

    #[test]
    fn annihilator_examples() {
        let g = GroupSpec::from_moduli(&[4]).unwrap();
        assert_eq!(annihilator(&g, &Subgroup::zero(&g)).len(), 4);
        assert_eq!(annihilator(&g, &Subgroup::whole(&g)).members(), &[0]);
        let h = annihilator_of(&g, &[el(&[0]), el(&[2])]).unwrap();
        assert_eq!(h.elements(&g), vec![el(&[0]), el(&[2])]);
        assert!(matches!(
            annihilator_of(&g, &[el(&[0]), el(&[1])]),
            Err(Error::NotASubgroup(_))
        ));
        assert!(matches!(
            annihilator_of(&g, &[el(&[2])]),
            Err(Error::NotASubgroup(_))
        ));
    }

    #[test]
    fn coset_structure_is_seeded_and_shift_nonzero() {
        let g = GroupSpec::from_moduli(&[2, 4]).unwrap();
        let a = CosetStructure::random(&g, 2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = CosetStructure::random(&g, 2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a.betas(), b.betas());
        assert_eq!(a.shift(), b.shift());
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..1000 {
            let cs = CosetStructure::random(&g, 1, &mut rng).unwrap();
            assert!(cs.shift().iter().any(|&u| u != 0));
        }
        assert!(CosetStructure::random(&g, 0, &mut rng).is_err());
        assert!(matches!(
            CosetStructure::random(&g, 40, &mut rng),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn buckets_partition_into_cosets() {
        let g = GroupSpec::from_moduli(&[2, 4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let cs = CosetStructure::random(&g, 2, &mut rng).unwrap();
            assert_eq!(cs.label_idx(0), cs.shift());
            let buckets = cs.buckets();
            let mut seen = vec![false; g.order()];
            for b in &buckets {
                assert_eq!(b.coset.members(&g), b.members);
                for &m in &b.members {
                    assert!(!seen[m]);
                    seen[m] = true;
                }
                for &a in &b.members {
                    for &c in &b.members {
                        assert!(cs.subgroup().contains(g.sub_idx(a, c)));
                    }
                }
                let rep = cs.coset_for(&b.label).unwrap();
                assert!(rep.contains(&g, b.members[0]));
            }
            assert!(seen.iter().all(|&s| s));
            // H from the representation equals the annihilator of the betas' span.
            let span = Subgroup::span(&g, &cs.betas().iter().map(|b| g.index_of(b).unwrap()).collect::<Vec<_>>());
            assert_eq!(&annihilator(&g, &span), cs.subgroup().as_ref());
        }
    }

    #[test]
    fn cyclic_nine_buckets_cover() {
        let g = GroupSpec::from_moduli(&[9]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let cs = CosetStructure::random(&g, 2, &mut rng).unwrap();
        let total: usize = cs.buckets().iter().map(|b| b.members.len()).sum();
        assert_eq!(total, 9);
        let mut label = cs.shift().to_vec();
        label[0] = (label[0] + 1) % 9;
        // Either empty or a coset; never panics.
        if let Some(c) = cs.coset_for(&label) {
            assert_eq!(cs.label_idx(c.rep), label);
        }
    }

    #[test]
    fn pseudo_independence_examples() {
        let g = GroupSpec::from_moduli(&[4]).unwrap();
        assert_eq!(is_pseudo_independent(&g, &[el(&[3])], 1000).unwrap(), Dependence::Independent);
        assert_eq!(is_pseudo_independent(&g, &[el(&[2])], 1000).unwrap(), Dependence::Independent);
        match is_pseudo_independent(&g, &[el(&[2]), el(&[3])], 1000).unwrap() {
            Dependence::Dependent { lambdas, unit_index } => {
                assert!(is_unit(lambdas[unit_index], 4));
                assert_eq!((2 * lambdas[0] + 3 * lambdas[1]) % 4, 0);
            }
            Dependence::Independent => panic!("{{2,3}} is dependent in Z_4"),
        }
        assert!(matches!(
            is_pseudo_independent(&g, &[el(&[1]), el(&[3])], 1000).unwrap(),
            Dependence::Dependent { .. }
        ));
        let g = GroupSpec::from_moduli(&[2, 2]).unwrap();
        assert_eq!(
            is_pseudo_independent(&g, &[el(&[1, 0]), el(&[0, 1])], 1000).unwrap(),
            Dependence::Independent
        );
        assert!(matches!(
            is_pseudo_independent(&g, &[el(&[1, 0]), el(&[0, 1])], 3),
            Err(Error::SearchCapExceeded { .. })
        ));
    }

    #[test]
    fn spanning_set_examples() {
        let g = GroupSpec::from_moduli(&[2, 2]).unwrap();
        let s = minimal_spanning_set_of(&g, &[el(&[1, 0])], 1000).unwrap();
        assert_eq!(s.basis, vec![0]);
        assert!(s.expressions.is_empty());

        let g4 = GroupSpec::from_moduli(&[4]).unwrap();
        let s = minimal_spanning_set_of(&g4, &[el(&[1]), el(&[3])], 1000).unwrap();
        assert_eq!(s.basis, vec![0]);
        assert_eq!(s.expressions[0].solved(4), vec![3]);

        // 3 cannot be expressed through 2, but 2 = 2 * 3.
        let s = minimal_spanning_set_of(&g4, &[el(&[2]), el(&[3])], 1000).unwrap();
        assert_eq!(s.basis, vec![1]);
        assert_eq!(s.expressions[0].solved(4), vec![2]);

        let s = minimal_spanning_set_of(&g, &[el(&[1, 0]), el(&[0, 1]), el(&[1, 1])], 1000).unwrap();
        assert_eq!(s.basis.len(), 2);
        assert_eq!(s.expressions.len(), 1);
        assert_eq!(s.expressions[0].lambda, 1);

        // The zero element needs no basis at all.
        let s = minimal_spanning_set_of(&g, &[el(&[0, 0])], 1000).unwrap();
        assert!(s.basis.is_empty());
    }

    #[test]
    fn spanning_basis_is_pseudo_independent_and_expressions_hold() {
        let g = GroupSpec::from_moduli(&[2, 4, 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..15 {
            let cols: Vec<GroupElement> = (0..4).map(|_| g.sample_uniform(&mut rng)).collect();
            let s = minimal_spanning_set_of(&g, &cols, DEFAULT_SEARCH_CAP).unwrap();
            let basis: Vec<GroupElement> = s.basis.iter().map(|&i| cols[i].clone()).collect();
            if !basis.is_empty() {
                assert_eq!(is_pseudo_independent(&g, &basis, DEFAULT_SEARCH_CAP).unwrap(), Dependence::Independent);
            }
            for e in &s.expressions {
                let mut acc = g.identity();
                for (b, c) in basis.iter().zip(e.solved(g.lcm())) {
                    acc = g.combine(&acc, b, 1, c as i64).unwrap();
                }
                assert_eq!(acc, cols[e.item]);
            }
        }
    }
}
