//! The query boundary: a counting oracle over `f` and Hoeffding-driven
//! estimators for `wt2`, `wt4`, projections and single coefficients.
//!
//! Every estimator averages `N = ceil(4 ln(4/delta) / eps^2)` complex
//! summands of modulus at most 1. The number of oracle calls an estimator
//! makes is fixed by its formula: `2N` for `wt2`, `4N` for `wt4`, `N` for a
//! projection (a single call when `H^perp = {0}`) and `N` for a coefficient.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cosets::Coset;
use crate::error::{Error, Result};
use crate::fourier::BooleanFunction;
use crate::group::{root_table, GroupElement, GroupSpec};

const ADD_TABLE_MAX_ORDER: usize = 1024;

/// How the oracle tallies calls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMode {
    /// Every evaluation counts.
    #[default]
    EveryCall,
    /// Repeated evaluations of a point count once.
    Distinct,
}

/// Index arithmetic with an addition table for small groups.
pub(crate) struct Arith {
    group: GroupSpec,
    add: Option<Vec<u32>>,
    neg: Vec<u32>,
}

impl Arith {
    pub(crate) fn new(g: &GroupSpec) -> Self {
        let n = g.order();
        let add = (n <= ADD_TABLE_MAX_ORDER).then(|| {
            let mut t = Vec::with_capacity(n * n);
            for a in 0..n {
                for b in 0..n {
                    t.push(g.add_idx(a, b) as u32);
                }
            }
            t
        });
        let neg = (0..n).map(|a| g.neg_idx(a) as u32).collect();
        Arith {
            group: g.clone(),
            add,
            neg,
        }
    }

    #[inline]
    pub(crate) fn add(&self, a: usize, b: usize) -> usize {
        match &self.add {
            Some(t) => t[a * self.group.order() + b] as usize,
            None => self.group.add_idx(a, b),
        }
    }

    #[inline]
    pub(crate) fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg[b] as usize)
    }
}

/// Counting query access to a Boolean function.
pub struct QueryOracle {
    f: BooleanFunction,
    mode: CountMode,
    count: AtomicU64,
    seen: Vec<AtomicBool>,
    arith: OnceLock<Arith>,
}

impl QueryOracle {
    pub fn new(f: BooleanFunction) -> Self {
        Self::with_mode(f, CountMode::EveryCall)
    }

    pub fn with_mode(f: BooleanFunction, mode: CountMode) -> Self {
        let seen = match mode {
            CountMode::EveryCall => Vec::new(),
            CountMode::Distinct => (0..f.group().order()).map(|_| AtomicBool::new(false)).collect(),
        };
        QueryOracle {
            f,
            mode,
            count: AtomicU64::new(0),
            seen,
            arith: OnceLock::new(),
        }
    }

    pub fn group(&self) -> &GroupSpec {
        self.f.group()
    }

    pub fn mode(&self) -> CountMode {
        self.mode
    }

    /// `f(x)` for the element with index `x`.
    #[inline]
    pub fn query(&self, x: usize) -> i8 {
        match self.mode {
            CountMode::EveryCall => {
                self.count.fetch_add(1, Ordering::Relaxed);
            }
            CountMode::Distinct => {
                if !self.seen[x].swap(true, Ordering::Relaxed) {
                    self.count.fetch_add(1, Ordering::Relaxed);
                }
            }
        }
        self.f.value(x)
    }

    pub fn query_element(&self, x: &GroupElement) -> Result<i8> {
        Ok(self.query(self.group().index_of(x)?))
    }

    /// Queries charged so far.
    pub fn queries(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    /// The wrapped truth table, for ground-truth diagnostics. Reading it is
    /// not a query.
    pub fn target(&self) -> &BooleanFunction {
        &self.f
    }

    pub(crate) fn arith(&self) -> &Arith {
        self.arith.get_or_init(|| Arith::new(self.f.group()))
    }
}

/// Accuracy `eps` with failure probability `delta`, or an explicit sample count.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EstimatorConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub samples: Option<usize>,
}

impl EstimatorConfig {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 2.0) {
            return Err(Error::Config(format!("epsilon {epsilon} outside (0, 2]")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Config(format!("delta {delta} outside (0, 1)")));
        }
        Ok(EstimatorConfig {
            epsilon,
            delta,
            samples: None,
        })
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.samples = Some(n.max(1));
        self
    }

    pub fn samples(&self) -> usize {
        self.samples
            .unwrap_or_else(|| sample_count(self.epsilon, self.delta))
    }
}

/// `N = ceil(4 ln(4/delta) / eps^2)`.
pub fn sample_count(epsilon: f64, delta: f64) -> usize {
    samples_from_log(epsilon, (4.0 / delta).ln())
}

/// `ceil(4 ln_term / eps^2)` with `ln_term = ln(4/delta)` supplied directly,
/// for confidences too small to represent.
pub fn samples_from_log(epsilon: f64, ln_term: f64) -> usize {
    let n = 4.0 * ln_term / (epsilon * epsilon);
    ((n - 1e-9).ceil().max(1.0)) as usize
}

/// A sample mean together with its cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub samples: usize,
    pub queries: u64,
}

impl Estimate {
    pub fn real(&self) -> f64 {
        self.value.re
    }

    /// Imaginary part of a real-valued target; tends to 0.
    pub fn imag_residue(&self) -> f64 {
        self.value.im
    }
}

/// A master-seeded independent stream.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `H^perp` of a coset with the character values `chi_r(z)` precomputed.
pub(crate) struct PerpSampler {
    members: Vec<usize>,
    chi: Vec<Complex64>,
}

impl PerpSampler {
    pub(crate) fn new(g: &GroupSpec, coset: &Coset) -> Self {
        let roots = root_table(g.lcm());
        let members = coset.annihilator.members().to_vec();
        let chi = members
            .iter()
            .map(|&z| roots[g.pairing_idx(coset.rep, z) as usize])
            .collect();
        PerpSampler { members, chi }
    }

    #[inline]
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, Complex64) {
        let k = rng.gen_range(0..self.members.len());
        (self.members[k], self.chi[k])
    }

    fn len(&self) -> usize {
        self.members.len()
    }
}

/// `wt2(r + H)` as the mean of `f(x) f(x+z) chi_r(z)`, `x` in `G`, `z` in `H^perp`.
pub fn estimate_wt2<R: Rng + ?Sized>(
    oracle: &QueryOracle,
    coset: &Coset,
    cfg: &EstimatorConfig,
    rng: &mut R,
) -> Estimate {
    let g = oracle.group();
    let perp = PerpSampler::new(g, coset);
    wt2_with(oracle, &perp, cfg.samples(), rng)
}

pub(crate) fn wt2_with<R: Rng + ?Sized>(
    oracle: &QueryOracle,
    perp: &PerpSampler,
    n: usize,
    rng: &mut R,
) -> Estimate {
    let ar = oracle.arith();
    let order = oracle.group().order();
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..n {
        let x = rng.gen_range(0..order);
        let (z, chi) = perp.draw(rng);
        let v = oracle.query(x) * oracle.query(ar.add(x, z));
        acc += chi * v as f64;
    }
    Estimate {
        value: acc / n as f64,
        samples: n,
        queries: 2 * n as u64,
    }
}

/// `wt4(r + H)` as the mean of
/// `f(z1) f(x - z1 - z) f(y1) f(x - y1 - y) chi_r(z - y)`.
pub fn estimate_wt4<R: Rng + ?Sized>(
    oracle: &QueryOracle,
    coset: &Coset,
    cfg: &EstimatorConfig,
    rng: &mut R,
) -> Estimate {
    let g = oracle.group();
    let perp = PerpSampler::new(g, coset);
    wt4_with(oracle, &perp, cfg.samples(), rng)
}

pub(crate) fn wt4_with<R: Rng + ?Sized>(
    oracle: &QueryOracle,
    perp: &PerpSampler,
    n: usize,
    rng: &mut R,
) -> Estimate {
    let ar = oracle.arith();
    let order = oracle.group().order();
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..n {
        let x = rng.gen_range(0..order);
        let z1 = rng.gen_range(0..order);
        let y1 = rng.gen_range(0..order);
        let (z, chi_z) = perp.draw(rng);
        let (y, chi_y) = perp.draw(rng);
        let v = oracle.query(z1)
            * oracle.query(ar.sub(ar.sub(x, z1), z))
            * oracle.query(y1)
            * oracle.query(ar.sub(ar.sub(x, y1), y));
        acc += chi_z * chi_y.conj() * v as f64;
    }
    Estimate {
        value: acc / n as f64,
        samples: n,
        queries: 4 * n as u64,
    }
}

/// `P_{r+H} f(x)` as the mean of `f(x - z) chi_r(z)` over `z` in `H^perp`.
pub fn estimate_projection<R: Rng + ?Sized>(
    oracle: &QueryOracle,
    coset: &Coset,
    x: usize,
    cfg: &EstimatorConfig,
    rng: &mut R,
) -> Estimate {
    let g = oracle.group();
    let perp = PerpSampler::new(g, coset);
    projection_with(oracle, &perp, x, cfg.samples(), rng)
}

pub(crate) fn projection_with<R: Rng + ?Sized>(
    oracle: &QueryOracle,
    perp: &PerpSampler,
    x: usize,
    n: usize,
    rng: &mut R,
) -> Estimate {
    if perp.len() == 1 {
        let v = oracle.query(x) as f64;
        return Estimate {
            value: perp.chi[0] * v,
            samples: 1,
            queries: 1,
        };
    }
    let ar = oracle.arith();
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..n {
        let (z, chi) = perp.draw(rng);
        acc += chi * oracle.query(ar.sub(x, z)) as f64;
    }
    Estimate {
        value: acc / n as f64,
        samples: n,
        queries: n as u64,
    }
}

/// `f^(r)` as the mean of `f(x) conj(chi_r(x))`.
pub fn estimate_coefficient<R: Rng + ?Sized>(
    oracle: &QueryOracle,
    r: usize,
    cfg: &EstimatorConfig,
    rng: &mut R,
) -> Estimate {
    let g = oracle.group();
    let l = g.lcm();
    let roots = root_table(l);
    let n = cfg.samples();
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..n {
        let x = g.sample_idx(rng);
        let e = g.pairing_idx(r, x);
        acc += roots[((l - e) % l.max(1)) as usize] * oracle.query(x) as f64;
    }
    Estimate {
        value: acc / n as f64,
        samples: n,
        queries: n as u64,
    }
}

/// Exact mean of the `wt2` integrand over its whole sample space `G x H^perp`.
pub fn wt2_integrand_mean(f: &BooleanFunction, coset: &Coset) -> Complex64 {
    let g = f.group();
    let perp = PerpSampler::new(g, coset);
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 0..g.order() {
        for (&z, &chi) in perp.members.iter().zip(&perp.chi) {
            acc += chi * (f.value(x) * f.value(g.add_idx(x, z))) as f64;
        }
    }
    acc / (g.order() * perp.len()) as f64
}

/// Exact mean of the `wt4` integrand over `G^3 x (H^perp)^2`.
pub fn wt4_integrand_mean(f: &BooleanFunction, coset: &Coset) -> Complex64 {
    let g = f.group();
    let n = g.order();
    let perp = PerpSampler::new(g, coset);
    let ar = Arith::new(g);
    // Inner sums over (z1, z) depend on x only: S(x) = sum f(z1) f(x - z1 - z) chi(z).
    let s: Vec<Complex64> = (0..n)
        .map(|x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for z1 in 0..n {
                for (&z, &chi) in perp.members.iter().zip(&perp.chi) {
                    acc += chi * (f.value(z1) * f.value(ar.sub(ar.sub(x, z1), z))) as f64;
                }
            }
            acc
        })
        .collect();
    let total: Complex64 = s.iter().map(|v| v * v.conj()).sum();
    total / (n as f64 * (n * perp.len()) as f64 * (n * perp.len()) as f64)
}
