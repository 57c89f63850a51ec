//! Finite Abelian groups `Z_{p1^m1} x ... x Z_{pn^mn}` and their characters.
//!
//! Characters are handled as exponents of a primitive `L`-th root of unity,
//! where `L` is the least common multiple of the moduli. The pairing
//! `r * x = sum_i (L / p_i^m_i) r_i x_i (mod L)` gives `chi_r(x) = w_L^(r * x)`.
//!
//! Elements are enumerated in mixed radix with the first modulus most
//! significant: index `sum_i x_i * stride_i`, where the last stride is 1 and
//! `stride_i = prod_{j > i} p_j^m_j`. On `Z_2 x Z_3` index 5 is `(1, 2)`.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// One cyclic factor `Z_{p^m}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimePower {
    pub prime: u64,
    pub exponent: u32,
    pub modulus: u64,
}

/// A finite Abelian group given as a product of cyclic prime-power factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSpec {
    factors: Vec<PrimePower>,
    order: usize,
    lcm: u64,
    strides: Vec<usize>,
    // L / p_i^m_i, the per-coordinate pairing weight.
    weights: Vec<u64>,
}

/// A group element as its coordinate tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(pub Vec<u64>);

/// A residue modulo `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ZModL {
    value: u64,
    modulus: u64,
}

/// `w_L^exponent` for the primitive root `w_L = exp(2 pi i / L)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RootOfUnity {
    exponent: ZModL,
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Inverse of `a` modulo `m`, if `a` is a unit.
pub(crate) fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Splits a modulus into `(p, m)` with `modulus = p^m`, if it is a prime power.
pub fn prime_power_of(modulus: u64) -> Option<(u64, u32)> {
    if modulus < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= modulus && modulus % p != 0 {
        p += 1;
    }
    if modulus % p != 0 {
        p = modulus;
    }
    let (mut rest, mut m) = (modulus, 0);
    while rest % p == 0 {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

impl ZModL {
    pub fn new(value: i64, modulus: u64) -> Self {
        let value = if modulus <= 1 {
            0
        } else {
            (value as i128).rem_euclid(modulus as i128) as u64
        };
        ZModL { value, modulus }
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn add(self, other: ZModL) -> ZModL {
        debug_assert_eq!(self.modulus, other.modulus);
        ZModL::new(self.value as i64 + other.value as i64, self.modulus)
    }

    pub fn neg(self) -> ZModL {
        ZModL::new(-(self.value as i64), self.modulus)
    }
}

impl RootOfUnity {
    pub fn new(exponent: i64, order: u64) -> Self {
        RootOfUnity {
            exponent: ZModL::new(exponent, order),
        }
    }

    pub fn one(order: u64) -> Self {
        Self::new(0, order)
    }

    pub fn exponent(self) -> u64 {
        self.exponent.value
    }

    pub fn order(self) -> u64 {
        self.exponent.modulus
    }

    pub fn mul(self, other: RootOfUnity) -> RootOfUnity {
        RootOfUnity {
            exponent: self.exponent.add(other.exponent),
        }
    }

    pub fn conj(self) -> RootOfUnity {
        RootOfUnity {
            exponent: self.exponent.neg(),
        }
    }

    pub fn pow(self, k: u64) -> RootOfUnity {
        let l = self.order().max(1);
        let e = ((self.exponent() as u128 * k as u128) % l as u128) as i64;
        RootOfUnity::new(e, l)
    }

    pub fn to_complex(self) -> Complex64 {
        root_value(self.exponent(), self.order())
    }
}

pub(crate) fn root_value(exponent: u64, order: u64) -> Complex64 {
    if order <= 1 {
        return Complex64::new(1.0, 0.0);
    }
    let angle = 2.0 * std::f64::consts::PI * (exponent % order) as f64 / order as f64;
    Complex64::from_polar(1.0, angle)
}

/// Table of `w_L^k` for `k in 0..L`.
pub(crate) fn root_table(order: u64) -> Vec<Complex64> {
    (0..order.max(1)).map(|k| root_value(k, order)).collect()
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl GroupElement {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }
}

impl GroupSpec {
    /// Builds the group from `(prime, exponent)` pairs.
    pub fn new(moduli: &[(u64, u32)]) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::InvalidGroup("no cyclic factors given".into()));
        }
        let mut factors = Vec::with_capacity(moduli.len());
        for &(p, m) in moduli {
            if !is_prime(p) {
                return Err(Error::InvalidGroup(format!("{p} is not prime")));
            }
            if m == 0 {
                return Err(Error::InvalidGroup(format!("exponent of {p} must be >= 1")));
            }
            let modulus = p
                .checked_pow(m)
                .ok_or_else(|| Error::InvalidGroup(format!("{p}^{m} overflows")))?;
            factors.push(PrimePower {
                prime: p,
                exponent: m,
                modulus,
            });
        }
        Self::from_factors(factors)
    }

    /// Builds the group from cyclic moduli, each of which must be a prime power.
    pub fn from_moduli(moduli: &[u64]) -> Result<Self> {
        let pairs = moduli
            .iter()
            .map(|&q| {
                prime_power_of(q)
                    .ok_or_else(|| Error::InvalidGroup(format!("{q} is not a prime power")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&pairs)
    }

    /// The group of order 1.
    pub fn trivial() -> Self {
        GroupSpec {
            factors: Vec::new(),
            order: 1,
            lcm: 1,
            strides: Vec::new(),
            weights: Vec::new(),
        }
    }

    fn from_factors(factors: Vec<PrimePower>) -> Result<Self> {
        let mut order: usize = 1;
        let mut lcm: u64 = 1;
        for f in &factors {
            order = order
                .checked_mul(f.modulus as usize)
                .ok_or_else(|| Error::InvalidGroup("group order overflows".into()))?;
            lcm = lcm / gcd(lcm, f.modulus) * f.modulus;
        }
        let mut strides = vec![1usize; factors.len()];
        for i in (0..factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * factors[i + 1].modulus as usize;
        }
        let weights = factors.iter().map(|f| lcm / f.modulus).collect();
        Ok(GroupSpec {
            factors,
            order,
            lcm,
            strides,
            weights,
        })
    }

    pub fn factors(&self) -> &[PrimePower] {
        &self.factors
    }

    pub fn moduli(&self) -> Vec<u64> {
        self.factors.iter().map(|f| f.modulus).collect()
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `L`, the exponent of the group.
    pub fn lcm(&self) -> u64 {
        self.lcm
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(vec![0; self.rank()])
    }

    /// The canonical generator `e_i` of the `i`-th factor.
    pub fn generator(&self, i: usize) -> GroupElement {
        let mut c = vec![0; self.rank()];
        c[i] = 1 % self.factors[i].modulus;
        GroupElement(c)
    }

    pub fn validate(&self, x: &GroupElement) -> Result<()> {
        if x.0.len() != self.rank() {
            return Err(Error::Shape(format!(
                "element {x} has {} coordinates, group has {}",
                x.0.len(),
                self.rank()
            )));
        }
        for (c, f) in x.0.iter().zip(&self.factors) {
            if *c >= f.modulus {
                return Err(Error::Shape(format!(
                    "coordinate {c} not reduced mod {}",
                    f.modulus
                )));
            }
        }
        Ok(())
    }

    /// Reduces arbitrary integer coordinates into an element.
    pub fn element_from(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.rank() {
            return Err(Error::Shape(format!(
                "{} coordinates given, group has {}",
                coords.len(),
                self.rank()
            )));
        }
        Ok(GroupElement(
            coords
                .iter()
                .zip(&self.factors)
                .map(|(&c, f)| (c as i128).rem_euclid(f.modulus as i128) as u64)
                .collect(),
        ))
    }

    pub fn element(&self, index: usize) -> Result<GroupElement> {
        if index >= self.order {
            return Err(Error::Index {
                index,
                order: self.order,
            });
        }
        Ok(GroupElement(
            (0..self.rank()).map(|i| self.coord(index, i)).collect(),
        ))
    }

    pub fn index_of(&self, x: &GroupElement) -> Result<usize> {
        self.validate(x)?;
        Ok(x
            .0
            .iter()
            .zip(&self.strides)
            .map(|(&c, &s)| c as usize * s)
            .sum())
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order).map(move |i| GroupElement((0..self.rank()).map(|k| self.coord(i, k)).collect()))
    }

    /// `i`-th coordinate of the element with the given index.
    #[inline]
    pub fn coord(&self, index: usize, i: usize) -> u64 {
        ((index / self.strides[i]) as u64) % self.factors[i].modulus
    }

    /// Pseudo inner product `r * x`.
    pub fn pseudo_inner(&self, r: &GroupElement, x: &GroupElement) -> Result<ZModL> {
        self.validate(r)?;
        self.validate(x)?;
        let mut acc = 0u64;
        for i in 0..self.rank() {
            let q = self.factors[i].modulus;
            let term = ((r.0[i] as u128 * x.0[i] as u128) % q as u128) as u64;
            acc = (acc + self.weights[i] * term) % self.lcm;
        }
        Ok(ZModL::new(acc as i64, self.lcm))
    }

    /// `chi_r(x)` as an exact root of unity.
    pub fn character(&self, r: &GroupElement, x: &GroupElement) -> Result<RootOfUnity> {
        let e = self.pseudo_inner(r, x)?;
        Ok(RootOfUnity { exponent: e })
    }

    /// Coordinate-wise `sa * a + sb * b`.
    pub fn combine(&self, a: &GroupElement, b: &GroupElement, sa: i64, sb: i64) -> Result<GroupElement> {
        self.validate(a)?;
        self.validate(b)?;
        Ok(GroupElement(
            self.factors
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let v = sa as i128 * a.0[i] as i128 + sb as i128 * b.0[i] as i128;
                    v.rem_euclid(f.modulus as i128) as u64
                })
                .collect(),
        ))
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        GroupElement(self.factors.iter().map(|f| rng.gen_range(0..f.modulus)).collect())
    }

    // Index-level arithmetic used by the sampling loops.

    #[inline]
    pub fn pairing_idx(&self, r: usize, x: usize) -> u64 {
        let mut acc = 0u64;
        for i in 0..self.rank() {
            let q = self.factors[i].modulus;
            let term = (self.coord(r, i) * self.coord(x, i)) % q;
            acc += self.weights[i] * term;
        }
        acc % self.lcm
    }

    #[inline]
    pub fn add_idx(&self, a: usize, b: usize) -> usize {
        self.lin_idx(a, b, 1, 1)
    }

    #[inline]
    pub fn sub_idx(&self, a: usize, b: usize) -> usize {
        self.lin_idx(a, b, 1, -1)
    }

    #[inline]
    pub fn neg_idx(&self, a: usize) -> usize {
        self.lin_idx(a, 0, -1, 0)
    }

    /// `k * a` for an integer `k`.
    #[inline]
    pub fn scale_idx(&self, a: usize, k: i64) -> usize {
        self.lin_idx(a, 0, k, 0)
    }

    #[inline]
    pub fn lin_idx(&self, a: usize, b: usize, sa: i64, sb: i64) -> usize {
        let mut out = 0usize;
        for i in 0..self.rank() {
            let q = self.factors[i].modulus as i64;
            let v = (sa.rem_euclid(q) * self.coord(a, i) as i64
                + sb.rem_euclid(q) * self.coord(b, i) as i64)
                % q;
            out += v as usize * self.strides[i];
        }
        out
    }

    /// Order of the element with the given index.
    pub fn element_order_idx(&self, a: usize) -> u64 {
        let mut ord = 1u64;
        for i in 0..self.rank() {
            let q = self.factors[i].modulus;
            let c = self.coord(a, i);
            let o = q / gcd(c, q);
            ord = ord / gcd(ord, o) * o;
        }
        ord
    }

    #[inline]
    pub fn sample_idx<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.gen_range(0..self.order)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "Z_1");
        }
        for (i, p) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "x")?;
            }
            write!(f, "Z_{}", p.modulus)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z4z3() -> GroupSpec {
        GroupSpec::new(&[(2, 2), (3, 1)]).unwrap()
    }

    #[test]
    fn build_examples() {
        let g = GroupSpec::new(&[(2, 1)]).unwrap();
        assert_eq!((g.order(), g.lcm()), (2, 2));
        let g = z4z3();
        assert_eq!((g.order(), g.lcm()), (12, 12));
        let g = GroupSpec::new(&[(2, 1), (2, 1)]).unwrap();
        assert_eq!((g.order(), g.lcm()), (4, 2));
    }

    #[test]
    fn build_rejects_bad_input() {
        assert!(matches!(GroupSpec::new(&[]), Err(Error::InvalidGroup(_))));
        assert!(matches!(GroupSpec::new(&[(4, 1)]), Err(Error::InvalidGroup(_))));
        assert!(matches!(GroupSpec::new(&[(3, 0)]), Err(Error::InvalidGroup(_))));
        assert!(GroupSpec::from_moduli(&[6]).is_err());
        assert_eq!(GroupSpec::from_moduli(&[4, 3]).unwrap(), z4z3());
    }

    #[test]
    fn pseudo_inner_examples() {
        let g = z4z3();
        let e = |c: &[u64]| GroupElement(c.to_vec());
        assert_eq!(g.pseudo_inner(&e(&[0, 0]), &e(&[3, 2])).unwrap().value(), 0);
        assert_eq!(g.pseudo_inner(&e(&[1, 0]), &e(&[1, 0])).unwrap().value(), 3);
        assert_eq!(g.pseudo_inner(&e(&[1, 1]), &e(&[1, 1])).unwrap().value(), 7);
        assert_eq!(g.character(&e(&[1, 1]), &e(&[1, 1])).unwrap().exponent(), 7);
        assert!(matches!(
            g.pseudo_inner(&e(&[1]), &e(&[1, 1])),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn trivial_character_and_character_sums() {
        let g = GroupSpec::new(&[(2, 1), (2, 2), (3, 1)]).unwrap();
        let l = g.lcm();
        for r in g.elements() {
            let sum: Complex64 = g
                .elements()
                .map(|x| g.character(&r, &x).unwrap().to_complex())
                .sum();
            if r == g.identity() {
                assert!((sum - Complex64::new(g.order() as f64, 0.0)).norm() < 1e-9);
                for x in g.elements() {
                    assert_eq!(g.character(&r, &x).unwrap(), RootOfUnity::one(l));
                }
            } else {
                assert!(sum.norm() < 1e-9, "sum for {r} = {sum}");
            }
        }
    }

    #[test]
    fn combine_examples() {
        let g = GroupSpec::new(&[(2, 2)]).unwrap();
        let a = GroupElement(vec![3]);
        assert_eq!(g.combine(&a, &g.identity(), 1, 0).unwrap(), a);
        assert_eq!(g.combine(&a, &a, 1, -1).unwrap(), g.identity());
        assert_eq!(g.combine(&a, &a, 1, 1).unwrap(), GroupElement(vec![2]));
    }

    #[test]
    fn index_bijection_examples() {
        let g = GroupSpec::new(&[(2, 1), (3, 1)]).unwrap();
        assert_eq!(g.element(0).unwrap(), g.identity());
        assert_eq!(g.element(5).unwrap(), GroupElement(vec![1, 2]));
        assert!(matches!(g.element(6), Err(Error::Index { .. })));
        let g = GroupSpec::new(&[(2, 1), (2, 1), (3, 1)]).unwrap();
        for i in 0..g.order() {
            assert_eq!(g.index_of(&g.element(i).unwrap()).unwrap(), i);
        }
    }

    #[test]
    fn sampling_is_seeded_and_uniform() {
        let g = GroupSpec::new(&[(2, 1), (3, 1)]).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20).map(|_| g.sample_uniform(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));

        let n = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut counts = [[0usize; 3]; 2];
        for _ in 0..n {
            let x = g.sample_uniform(&mut rng);
            counts[0][x.0[0] as usize] += 1;
            counts[1][x.0[1] as usize] += 1;
        }
        for (i, q) in [2usize, 3].iter().enumerate() {
            let p = 1.0 / *q as f64;
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            for c in &counts[i][..*q] {
                assert!((*c as f64 - n as f64 * p).abs() < 5.0 * sigma);
            }
        }

        let t = GroupSpec::trivial();
        assert_eq!(t.order(), 1);
        assert_eq!(t.sample_uniform(&mut rng), t.identity());
        assert_eq!(t.pseudo_inner(&t.identity(), &t.identity()).unwrap().value(), 0);
    }

    #[test]
    fn nondegenerate_pairing() {
        for moduli in [vec![4u64, 3], vec![2, 2, 2], vec![9], vec![2, 4, 8], vec![5, 5]] {
            let g = GroupSpec::from_moduli(&moduli).unwrap();
            for r in 1..g.order() {
                assert!((0..g.order()).any(|x| g.pairing_idx(r, x) != 0));
            }
        }
    }

    #[test]
    fn root_of_unity_laws() {
        let a = RootOfUnity::new(5, 12);
        let b = RootOfUnity::new(9, 12);
        assert_eq!(a.mul(b).exponent(), 2);
        assert_eq!(a.conj().exponent(), 7);
        assert!((a.to_complex().norm() - 1.0).abs() < 1e-12);
        let z = a.to_complex() * b.to_complex();
        assert!((z - a.mul(b).to_complex()).norm() < 1e-12);
    }

    #[test]
    fn mod_inverse_units() {
        assert_eq!(mod_inverse(3, 4), Some(3));
        assert_eq!(mod_inverse(2, 4), None);
        assert_eq!(mod_inverse(5, 12), Some(5));
    }

    fn arb_group() -> impl Strategy<Value = GroupSpec> {
        prop::collection::vec(prop::sample::select(vec![2u64, 3, 4, 5, 8, 9]), 1..4)
            .prop_map(|m| GroupSpec::from_moduli(&m).unwrap())
    }

    proptest! {
        #[test]
        fn pairing_bilinear_and_symmetric(g in arb_group(), a in any::<usize>(), b in any::<usize>(), c in any::<usize>()) {
            let (r, x, y) = (a % g.order(), b % g.order(), c % g.order());
            let lhs = g.pairing_idx(r, g.add_idx(x, y));
            let rhs = (g.pairing_idx(r, x) + g.pairing_idx(r, y)) % g.lcm();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(g.pairing_idx(r, x), g.pairing_idx(x, r));
            let (er, ex) = (g.element(r).unwrap(), g.element(x).unwrap());
            prop_assert_eq!(g.pseudo_inner(&er, &ex).unwrap().value(), g.pairing_idx(r, x));
        }

        #[test]
        fn index_arithmetic_matches_coordinates(g in arb_group(), a in any::<usize>(), b in any::<usize>(), s in -7i64..7, t in -7i64..7) {
            let (a, b) = (a % g.order(), b % g.order());
            let (ea, eb) = (g.element(a).unwrap(), g.element(b).unwrap());
            let c = g.combine(&ea, &eb, s, t).unwrap();
            prop_assert_eq!(g.index_of(&c).unwrap(), g.lin_idx(a, b, s, t));
        }
    }
}
