//! Boolean functions and the exact Fourier layer.
//!
//! `f^(r) = (1/|G|) sum_x f(x) conj(chi_r(x))`, computed by the direct
//! `O(|G|^2)` sum. Everything here is brute force and serves as the
//! reference the randomized layers are checked against.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::cosets::Coset;
use crate::error::{Error, Result};
use crate::group::{root_table, GroupElement, GroupSpec};

/// Default magnitude below which a coefficient counts as zero.
pub const ZERO_TOL: f64 = 1e-9;

/// A function `G -> {-1, +1}` stored as its truth table in enumeration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanFunction {
    group: GroupSpec,
    values: Vec<i8>,
}

impl BooleanFunction {
    pub fn new(group: &GroupSpec, values: Vec<i8>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::Shape(format!(
                "{} values for a group of order {}",
                values.len(),
                group.order()
            )));
        }
        if let Some(v) = values.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::InvalidFunction(format!("value {v} is not +1 or -1")));
        }
        Ok(BooleanFunction {
            group: group.clone(),
            values,
        })
    }

    pub fn from_fn(group: &GroupSpec, mut f: impl FnMut(usize) -> bool) -> Self {
        let values = (0..group.order()).map(|i| if f(i) { -1 } else { 1 }).collect();
        BooleanFunction {
            group: group.clone(),
            values,
        }
    }

    pub fn constant(group: &GroupSpec, value: i8) -> Self {
        let v = if value < 0 { -1 } else { 1 };
        BooleanFunction {
            group: group.clone(),
            values: vec![v; group.order()],
        }
    }

    pub fn random<R: Rng + ?Sized>(group: &GroupSpec, rng: &mut R) -> Self {
        Self::from_fn(group, |_| rng.gen::<bool>())
    }

    /// `-1` on the subset, `+1` elsewhere.
    pub fn indicator(group: &GroupSpec, subset: &[GroupElement]) -> Result<Self> {
        let idx = subset
            .iter()
            .map(|e| group.index_of(e))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::indicator_idx(group, &idx))
    }

    pub fn indicator_idx(group: &GroupSpec, subset: &[usize]) -> Self {
        let mut values = vec![1i8; group.order()];
        for &i in subset {
            values[i] = -1;
        }
        BooleanFunction {
            group: group.clone(),
            values,
        }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    #[inline]
    pub fn value(&self, idx: usize) -> i8 {
        self.values[idx]
    }

    pub fn at(&self, x: &GroupElement) -> Result<i8> {
        Ok(self.values[self.group.index_of(x)?])
    }

    pub fn negate(&self) -> Self {
        BooleanFunction {
            group: self.group.clone(),
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    /// Flips the sign at the given points.
    pub fn flipped(&self, points: &[usize]) -> Self {
        let mut values = self.values.clone();
        for &p in points {
            values[p] = -values[p];
        }
        BooleanFunction {
            group: self.group.clone(),
            values,
        }
    }

    pub fn as_real(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }

    pub fn fourier(&self) -> FourierTable {
        FourierTable::dft_real(&self.group, &self.as_real()).expect("length checked at construction")
    }
}

/// Exact Fourier coefficients, indexed like the group elements.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierTable {
    group: GroupSpec,
    coeffs: Vec<Complex64>,
}

impl FourierTable {
    pub fn new(group: &GroupSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != group.order() {
            return Err(Error::Shape(format!(
                "{} coefficients for a group of order {}",
                coeffs.len(),
                group.order()
            )));
        }
        Ok(FourierTable {
            group: group.clone(),
            coeffs,
        })
    }

    /// Table with the given nonzero entries.
    pub fn from_sparse(group: &GroupSpec, support: &[(usize, Complex64)]) -> Result<Self> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); group.order()];
        for &(r, c) in support {
            if r >= group.order() {
                return Err(Error::Index {
                    index: r,
                    order: group.order(),
                });
            }
            coeffs[r] += c;
        }
        Ok(FourierTable {
            group: group.clone(),
            coeffs,
        })
    }

    pub fn dft_real(group: &GroupSpec, values: &[f64]) -> Result<Self> {
        let v: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::dft(group, &v)
    }

    /// Direct transform of a complex-valued function.
    pub fn dft(group: &GroupSpec, values: &[Complex64]) -> Result<Self> {
        let n = group.order();
        if values.len() != n {
            return Err(Error::Shape(format!(
                "{} values for a group of order {n}",
                values.len()
            )));
        }
        let l = group.lcm();
        let roots = root_table(l);
        let scale = 1.0 / n as f64;
        let coeffs = (0..n)
            .into_par_iter()
            .map(|r| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (x, v) in values.iter().enumerate() {
                    let e = group.pairing_idx(r, x);
                    acc += v * roots[((l - e) % l.max(1)) as usize];
                }
                acc * scale
            })
            .collect();
        Ok(FourierTable {
            group: group.clone(),
            coeffs,
        })
    }

    /// `f(x) = sum_r f^(r) chi_r(x)`.
    pub fn idft(&self) -> Vec<Complex64> {
        let g = &self.group;
        let roots = root_table(g.lcm());
        let support: Vec<(usize, Complex64)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(r, &c)| (r, c))
            .collect();
        (0..g.order())
            .into_par_iter()
            .map(|x| {
                support
                    .iter()
                    .map(|&(r, c)| c * roots[g.pairing_idx(r, x) as usize])
                    .sum()
            })
            .collect()
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeff(&self, r: usize) -> Complex64 {
        self.coeffs[r]
    }

    pub fn at(&self, r: &GroupElement) -> Result<Complex64> {
        Ok(self.coeffs[self.group.index_of(r)?])
    }

    /// `sum_r |f^(r)|^2`.
    pub fn parseval_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `||f^||_1`.
    pub fn spectral_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn sparsity(&self, tol: f64) -> usize {
        self.coeffs.iter().filter(|c| c.norm() > tol).count()
    }

    /// Indices with `|f^(r)| > tol`.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(r, _)| r)
            .collect()
    }

    /// Indices with `|f^(r)| >= threshold`.
    pub fn heavy(&self, threshold: f64) -> Vec<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() >= threshold)
            .map(|(r, _)| r)
            .collect()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.norm()).collect()
    }
}

/// Exact `(wt2, wt4)` of each bucket. The buckets must partition `G`.
pub fn exact_bucket_weights(t: &FourierTable, buckets: &[Vec<usize>]) -> Result<Vec<(f64, f64)>> {
    let n = t.group.order();
    let mut seen = vec![false; n];
    for b in buckets {
        for &r in b {
            if r >= n {
                return Err(Error::Partition(format!("index {r} outside the group")));
            }
            if seen[r] {
                return Err(Error::Partition(format!("index {r} in two buckets")));
            }
            seen[r] = true;
        }
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::Partition(format!("index {missing} in no bucket")));
    }
    Ok(buckets.iter().map(|b| bucket_weights(t, b)).collect())
}

/// `(sum |f^|^2, sum |f^|^4)` over one bucket.
pub fn bucket_weights(t: &FourierTable, bucket: &[usize]) -> (f64, f64) {
    bucket.iter().fold((0.0, 0.0), |(w2, w4), &r| {
        let m = t.coeffs[r].norm_sqr();
        (w2 + m, w4 + m * m)
    })
}

/// `P_C f(x) = sum_{b in C} f^(b) chi_b(x)`, from the coefficient table.
pub fn exact_projection(t: &FourierTable, coset: &Coset, x: usize) -> Complex64 {
    let g = &t.group;
    let roots = root_table(g.lcm());
    coset
        .members(g)
        .into_iter()
        .map(|b| t.coeffs[b] * roots[g.pairing_idx(b, x) as usize])
        .sum()
}

/// `E_{z in H^perp} [f(x - z) chi_r(z)]`, the same projection evaluated in
/// the spatial domain.
pub fn projection_average(f: &BooleanFunction, coset: &Coset, x: usize) -> Complex64 {
    let g = &f.group;
    let roots = root_table(g.lcm());
    let perp = coset.annihilator.members();
    let sum: Complex64 = perp
        .iter()
        .map(|&z| f.values[g.sub_idx(x, z)] as f64 * roots[g.pairing_idx(coset.rep, z) as usize])
        .sum();
    sum / perp.len() as f64
}

/// Fraction of points where `f` and `g` differ.
pub fn hamming_distance(f: &BooleanFunction, g: &BooleanFunction) -> Result<f64> {
    same_group(f.group(), g.group())?;
    let diff = f.values.iter().zip(&g.values).filter(|(a, b)| a != b).count();
    Ok(diff as f64 / f.values.len() as f64)
}

/// `E_x [f(x) g(x)]`, evaluated as `1 - 2 delta(f, g)`.
pub fn correlation(f: &BooleanFunction, g: &BooleanFunction) -> Result<f64> {
    Ok(1.0 - 2.0 * hamming_distance(f, g)?)
}

/// `sum_r a^(r) conj(b^(r))`, which equals `E_x [a(x) conj(b(x))]`.
pub fn spectral_correlation(a: &FourierTable, b: &FourierTable) -> Result<Complex64> {
    same_group(a.group(), b.group())?;
    Ok(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * y.conj()).sum())
}

pub(crate) fn same_group(a: &GroupSpec, b: &GroupSpec) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!("functions live on {a} and {b}")));
    }
    Ok(())
}
