//! The implicit sieve, its sparse specialization, the coordinate-prefix
//! heavy-coefficient search, and rounding to exact roots of unity.
//!
//! The sieve never names the heavy characters it finds. For each surviving
//! bucket `C_j` it returns the column `Q_ij ~ chi_{a(C_j)}(x_i)` over the
//! caller's points `x_1..x_m`, rounded to an exact `L`-th root, together
//! with the labels `f(x_i)`.
//!
//! Stages and their oracle cost, per estimate:
//!
//! | stage      | estimates            | queries per estimate |
//! |------------|----------------------|----------------------|
//! | wt2        | nonempty buckets     | `2 N`                |
//! | wt4        | wt2 survivors        | `4 N`                |
//! | projection | `2 m` per survivor   | `N` (1 if `H^perp = {0}`) |
//! | magnitude  | survivors            | `2 N`                |
//! | labels     | 1                    | `m`                  |

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cosets::{BucketLabel, Coset, CosetStructure, Subgroup};
use crate::error::{Error, Result};
use crate::estimators::{projection_with, samples_from_log, stream_rng, wt2_with, wt4_with, Estimate, PerpSampler, QueryOracle};
use crate::group::{GroupSpec, RootOfUnity};

const STREAM_STRUCTURE: u64 = 1;
const STREAM_WT2: u64 = 2;
const STREAM_WT4: u64 = 3;
const STREAM_POINTS: u64 = 4;
const STREAM_PROJECTION: u64 = 5;
const STREAM_MAGNITUDE: u64 = 6;

fn stream(stage: u64, index: u64) -> u64 {
    stage << 48 | index
}

/// A sieve stage, as recorded in the query ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Wt2,
    Wt4,
    Projection,
    Magnitude,
    Labels,
    /// Prefix search level `k`, estimating buckets fixed on `k` coordinates.
    Prefix(usize),
}

/// Oracle cost of one stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub estimates: usize,
    /// Largest per-estimate sample count in the stage.
    pub samples_per_estimate: usize,
    pub samples: u64,
    pub queries: u64,
}

/// Per-stage accounting of oracle evaluations.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct QueryLedger {
    pub stages: Vec<StageRecord>,
}

impl QueryLedger {
    pub fn record(&mut self, stage: Stage, estimates: &[Estimate]) {
        self.stages.push(StageRecord {
            stage,
            estimates: estimates.len(),
            samples_per_estimate: estimates.iter().map(|e| e.samples).max().unwrap_or(0),
            samples: estimates.iter().map(|e| e.samples as u64).sum(),
            queries: estimates.iter().map(|e| e.queries).sum(),
        });
    }

    pub fn record_reads(&mut self, stage: Stage, reads: u64) {
        self.stages.push(StageRecord {
            stage,
            estimates: 1,
            samples_per_estimate: reads as usize,
            samples: reads,
            queries: reads,
        });
    }

    pub fn get(&self, stage: Stage) -> Option<&StageRecord> {
        self.stages.iter().find(|r| r.stage == stage)
    }

    pub fn queries(&self, stage: Stage) -> u64 {
        self.get(stage).map_or(0, |r| r.queries)
    }

    pub fn samples(&self, stage: Stage) -> u64 {
        self.get(stage).map_or(0, |r| r.samples)
    }

    pub fn total_queries(&self) -> u64 {
        self.stages.iter().map(|r| r.queries).sum()
    }

    pub fn extend(&mut self, other: &QueryLedger) {
        self.stages.extend(other.stages.iter().cloned());
    }
}

/// Failure probability of each estimate in a stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Confidence {
    /// Each estimate fails with probability at most `delta`.
    PerEstimate(f64),
    /// A stage budget divided by the number of estimates the analysis
    /// union-bounds over (`L^t`, `m N` or `N` depending on the stage).
    Split(f64),
}

/// Accuracy, confidence and an optional sample-count override for one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageBudget {
    pub error: f64,
    pub confidence: Confidence,
    pub samples: Option<usize>,
}

impl StageBudget {
    pub fn new(error: f64, delta: f64) -> Self {
        StageBudget {
            error,
            confidence: Confidence::PerEstimate(delta),
            samples: None,
        }
    }

    /// Samples for error `error` when a split budget is divided by
    /// `exp(ln_divisor)`.
    pub fn samples_for(&self, error: f64, ln_divisor: f64) -> usize {
        if let Some(n) = self.samples {
            return n.max(1);
        }
        let ln_term = match self.confidence {
            Confidence::PerEstimate(d) => (4.0 / d).ln(),
            Confidence::Split(b) => (4.0 / b).ln() + ln_divisor.max(0.0),
        };
        samples_from_log(error, ln_term)
    }

    pub fn samples(&self, ln_divisor: f64) -> usize {
        self.samples_for(self.error, ln_divisor)
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.error > 0.0) {
            return Err(Error::Config(format!("{name} error must be positive")));
        }
        let d = match self.confidence {
            Confidence::PerEstimate(d) | Confidence::Split(d) => d,
        };
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::Config(format!("{name} confidence {d} outside (0, 1)")));
        }
        Ok(())
    }
}

/// Parameters of the implicit sieve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SieveConfig {
    pub theta: f64,
    pub t: usize,
    pub m_tilde: usize,
    pub wt2: StageBudget,
    pub wt4: StageBudget,
    /// When set, the wt4 error is `wt4.error * (wt2 estimate)` per bucket.
    pub wt4_relative: bool,
    pub projection: StageBudget,
    pub magnitude: StageBudget,
    pub rounding_tolerance: f64,
    pub paper_defaults: bool,
    /// Exponent `k` of `theta` in `t >= log_L(100^4 m^4 / theta^k)`.
    pub t_exponent: u32,
    /// Attach the true dominating characters to the output.
    pub debug_truth: bool,
}

impl SieveConfig {
    /// Desk-scale parameters: every estimate at confidence `1 - delta`,
    /// `wt2` to `theta^2/4`, `wt4` to `theta^4/2`, projections to `theta/4`.
    pub fn desk(theta: f64, t: usize, m_tilde: usize) -> Self {
        let delta = 0.01;
        SieveConfig {
            theta,
            t,
            m_tilde,
            wt2: StageBudget::new(theta * theta / 4.0, delta),
            wt4: StageBudget::new(theta.powi(4) / 2.0, delta),
            wt4_relative: false,
            projection: StageBudget::new(theta / 4.0, delta),
            magnitude: StageBudget::new(theta * theta / 4.0, delta),
            rounding_tolerance: 23.0 * theta.powi(4) / 32.0,
            paper_defaults: false,
            t_exponent: 64,
            debug_truth: true,
        }
    }

    /// The analysis constants: `t = ceil(log_L(100^4 m^4 / theta^k))` and
    /// split confidences of total `1/100` per stage.
    pub fn paper(theta: f64, m_tilde: usize, lcm: u64, t_exponent: u32) -> Self {
        let split = Confidence::Split(0.01);
        let budget = |error: f64| StageBudget {
            error,
            confidence: split,
            samples: None,
        };
        SieveConfig {
            theta,
            t: paper_t(theta, m_tilde, lcm, t_exponent),
            m_tilde,
            wt2: budget(theta * theta / 4.0),
            wt4: budget(theta.powi(4) / 8.0),
            wt4_relative: true,
            projection: budget(theta / 2.0),
            magnitude: budget(theta.powi(4) / 32.0),
            rounding_tolerance: 23.0 * theta.powi(4) / 32.0,
            paper_defaults: true,
            t_exponent,
            debug_truth: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0) {
            return Err(Error::Config(format!("theta {} must be positive", self.theta)));
        }
        if self.t == 0 {
            return Err(Error::Config("t must be >= 1".into()));
        }
        if self.m_tilde == 0 {
            return Err(Error::Config("m_tilde must be >= 1".into()));
        }
        self.wt2.validate("wt2")?;
        self.wt4.validate("wt4")?;
        self.projection.validate("projection")?;
        self.magnitude.validate("magnitude")?;
        Ok(())
    }

    pub fn wt2_keep(&self) -> f64 {
        3.0 * self.theta * self.theta / 4.0
    }

    pub fn wt4_keep(&self) -> f64 {
        3.0 * self.theta.powi(4) / 4.0
    }

    /// Survivor bound `16 / theta^4`.
    pub fn survivor_bound(&self) -> f64 {
        16.0 / self.theta.powi(4)
    }

    fn wt4_samples(&self, wt2_estimate: f64, ln_divisor: f64) -> usize {
        let error = if self.wt4_relative {
            self.wt4.error * wt2_estimate.max(f64::MIN_POSITIVE)
        } else {
            self.wt4.error
        };
        self.wt4.samples_for(error, ln_divisor)
    }
}

/// `ceil(log_L(100^4 m^4 / theta^k))`.
pub fn paper_t(theta: f64, m_tilde: usize, lcm: u64, exponent: u32) -> usize {
    let num = 4.0 * 100f64.ln() + 4.0 * (m_tilde as f64).ln() - exponent as f64 * theta.ln();
    ((num / (lcm.max(2) as f64).ln()) - 1e-9).ceil().max(1.0) as usize
}

/// `ceil(log_L(100 s^2))`.
pub fn sparse_t(s: usize, lcm: u64) -> usize {
    let num = 100f64.ln() + 2.0 * (s.max(1) as f64).ln();
    ((num / (lcm.max(2) as f64).ln()) - 1e-9).ceil().max(1.0) as usize
}

/// `ceil(log_p(100 s^2))` for the smallest prime `p` dividing `|G|`. A pair
/// of characters whose difference has order `o` shares a label coordinate
/// with probability `1/o`, so this `t` separates `s + 1` characters with
/// probability at least `99/100` on every group.
pub fn separating_t(s: usize, g: &GroupSpec) -> usize {
    let p = g.factors().iter().map(|f| f.prime).min().unwrap_or(2);
    let num = 100f64.ln() + 2.0 * (s.max(1) as f64).ln();
    ((num / (p as f64).ln()) - 1e-9).ceil().max(1.0) as usize
}

/// One entry of the rounded matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QEntry {
    /// `None` when the entry is indeterminate.
    pub root: Option<RootOfUnity>,
    pub raw: Complex64,
    pub displacement: f64,
}

/// A bucket that survived every filter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Survivor {
    pub label: BucketLabel,
    pub rep: usize,
    pub bucket_size: usize,
    pub wt2: f64,
    pub wt4: Option<f64>,
    pub magnitude_sq: Option<f64>,
}

/// Result of a sieve run.
#[derive(Debug, Clone)]
pub struct SieveOutput {
    pub group: GroupSpec,
    pub points: Vec<usize>,
    pub f_column: Vec<i8>,
    /// `m x N`, row `i` for point `x_i`, column `j` for survivor `j`.
    pub q: Vec<Vec<QEntry>>,
    pub survivors: Vec<Survivor>,
    /// Rows with an indeterminate entry.
    pub suspect_rows: Vec<bool>,
    /// Rows whose every displacement is within the rounding tolerance.
    pub clean_rows: Vec<bool>,
    pub nonempty_buckets: usize,
    pub structure: CosetStructure,
    /// The true dominating character of each survivor (largest `|f^|` in
    /// its bucket), read from the oracle's truth table.
    pub debug_truth: Option<Vec<usize>>,
    pub ledger: QueryLedger,
    /// Sparsity promised for `f` by the caller of the sparse sieve; not
    /// checked against the oracle.
    pub sparsity_promise: Option<usize>,
}

impl SieveOutput {
    pub fn n_survivors(&self) -> usize {
        self.survivors.len()
    }

    /// Exponents of the rounded entries, `None` where indeterminate.
    pub fn exponents(&self) -> Vec<Vec<Option<u64>>> {
        self.q
            .iter()
            .map(|row| row.iter().map(|e| e.root.map(|r| r.exponent())).collect())
            .collect()
    }

    /// Whether column `j` equals `chi_r(x_i)` on every row.
    pub fn column_matches(&self, j: usize, r: usize) -> bool {
        self.points.iter().zip(&self.q).all(|(&x, row)| {
            row[j].root.map(|q| q.exponent()) == Some(self.group.pairing_idx(r, x))
        })
    }
}

/// Nearest `L`-th root by angle, ties toward the smaller exponent, with the
/// distance `|z - root|`.
pub fn round_to_root(z: Complex64, l: u64) -> Result<(RootOfUnity, f64)> {
    if !(z.norm() > 0.0) || !z.is_finite() {
        return Err(Error::Indeterminate(format!("cannot round {z} to a root of unity")));
    }
    let l = l.max(1);
    let angle = z.arg().rem_euclid(2.0 * PI);
    let k = angle * l as f64 / (2.0 * PI);
    let lo = k.floor();
    let frac = k - lo;
    let mut e = if frac > 0.5 { lo as u64 + 1 } else { lo as u64 };
    if e >= l || (frac == 0.5 && lo as u64 == l - 1) {
        e = 0;
    }
    let root = RootOfUnity::new(e as i64, l);
    Ok((root, (z - root.to_complex()).norm()))
}

fn ln_u(x: usize) -> f64 {
    (x.max(1) as f64).ln()
}

struct Prepared {
    structure: CosetStructure,
    buckets: Vec<(BucketLabel, Coset, usize)>,
}

fn prepare<R: Rng + ?Sized>(g: &GroupSpec, t: usize, base: u64, _rng: &mut R) -> Result<Prepared> {
    let structure = CosetStructure::random(g, t, &mut stream_rng(base, stream(STREAM_STRUCTURE, 0)))?;
    let buckets = structure
        .buckets()
        .into_iter()
        .map(|b| (b.label, b.coset, b.members.len()))
        .collect();
    Ok(Prepared { structure, buckets })
}

fn wt2_stage(
    oracle: &QueryOracle,
    buckets: &[(BucketLabel, Coset, usize)],
    n: usize,
    base: u64,
) -> Vec<Estimate> {
    let g = oracle.group();
    buckets
        .par_iter()
        .enumerate()
        .map(|(j, (_, c, _))| {
            let perp = PerpSampler::new(g, c);
            wt2_with(oracle, &perp, n, &mut stream_rng(base, stream(STREAM_WT2, j as u64)))
        })
        .collect()
}

/// Projections `P_j f(y_i)` and `P_j f(y_i - x_i)` for every survivor `j`.
fn projection_stage(
    oracle: &QueryOracle,
    cosets: &[Coset],
    points: &[usize],
    ys: &[usize],
    n: usize,
    base: u64,
) -> Vec<Vec<(Estimate, Estimate)>> {
    let g = oracle.group();
    let ar = oracle.arith();
    cosets
        .par_iter()
        .enumerate()
        .map(|(j, c)| {
            let perp = PerpSampler::new(g, c);
            let mut rng = stream_rng(base, stream(STREAM_PROJECTION, j as u64));
            points
                .iter()
                .zip(ys)
                .map(|(&x, &y)| {
                    let a = projection_with(oracle, &perp, y, n, &mut rng);
                    let b = projection_with(oracle, &perp, ar.sub(y, x), n, &mut rng);
                    (a, b)
                })
                .collect()
        })
        .collect()
}

fn dominating_characters(oracle: &QueryOracle, cosets: &[Coset]) -> Vec<usize> {
    let g = oracle.group();
    let table = oracle.target().fourier();
    cosets
        .iter()
        .map(|c| {
            c.members(g)
                .into_iter()
                .max_by(|&a, &b| table.coeff(a).norm().total_cmp(&table.coeff(b).norm()).then(b.cmp(&a)))
                .unwrap()
        })
        .collect()
}

fn read_labels(oracle: &QueryOracle, points: &[usize]) -> Vec<i8> {
    points.iter().map(|&x| oracle.query(x)).collect()
}

fn validate_points(g: &GroupSpec, points: &[usize]) -> Result<()> {
    if let Some(&x) = points.iter().find(|&&x| x >= g.order()) {
        return Err(Error::Index {
            index: x,
            order: g.order(),
        });
    }
    Ok(())
}

struct Rounded {
    q: Vec<Vec<QEntry>>,
    suspect: Vec<bool>,
    clean: Vec<bool>,
}

fn round_matrix(raw: Vec<Vec<Option<Complex64>>>, l: u64, tolerance: f64) -> Rounded {
    let mut suspect = vec![false; raw.len()];
    let mut clean = vec![true; raw.len()];
    let q = raw
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .map(|z| match z.map(|z| (z, round_to_root(z, l))) {
                    Some((z, Ok((root, d)))) => {
                        if d > tolerance {
                            clean[i] = false;
                        }
                        QEntry {
                            root: Some(root),
                            raw: z,
                            displacement: d,
                        }
                    }
                    other => {
                        suspect[i] = true;
                        clean[i] = false;
                        QEntry {
                            root: None,
                            raw: other.map_or(Complex64::new(0.0, 0.0), |(z, _)| z),
                            displacement: f64::INFINITY,
                        }
                    }
                })
                .collect()
        })
        .collect();
    Rounded { q, suspect, clean }
}

/// The generalized implicit sieve.
///
/// `points` are the element indices `x_1..x_m`; the caller draws them
/// uniformly. Zero survivors is a valid outcome.
pub fn implicit_sieve<R: Rng + ?Sized>(
    oracle: &QueryOracle,
    points: &[usize],
    cfg: &SieveConfig,
    rng: &mut R,
) -> Result<SieveOutput> {
    cfg.validate()?;
    let g = oracle.group().clone();
    validate_points(&g, points)?;
    let l = g.lcm();
    let m = points.len();
    let base: u64 = rng.gen();
    let prep = prepare(&g, cfg.t, base, rng)?;
    let mut ledger = QueryLedger::default();
    let ln_buckets = cfg.t as f64 * (l.max(1) as f64).ln();

    let n2 = cfg.wt2.samples(ln_buckets);
    let wt2 = wt2_stage(oracle, &prep.buckets, n2, base);
    ledger.record(Stage::Wt2, &wt2);
    let after_wt2: Vec<usize> = (0..prep.buckets.len())
        .filter(|&j| wt2[j].real() >= cfg.wt2_keep())
        .collect();

    let wt4: Vec<Estimate> = after_wt2
        .par_iter()
        .map(|&j| {
            let n4 = cfg.wt4_samples(wt2[j].real(), ln_buckets);
            let perp = PerpSampler::new(&g, &prep.buckets[j].1);
            wt4_with(oracle, &perp, n4, &mut stream_rng(base, stream(STREAM_WT4, j as u64)))
        })
        .collect();
    ledger.record(Stage::Wt4, &wt4);
    let kept: Vec<(usize, f64)> = after_wt2
        .iter()
        .zip(&wt4)
        .filter(|(_, e)| e.real() >= cfg.wt4_keep())
        .map(|(&j, e)| (j, e.real()))
        .collect();
    let n_surv = kept.len();
    if n_surv as f64 > cfg.survivor_bound() {
        return Err(Error::Config(format!(
            "{n_surv} survivors exceed the bound 16/theta^4 = {}",
            cfg.survivor_bound()
        )));
    }

    let mut yrng = stream_rng(base, stream(STREAM_POINTS, 0));
    let ys: Vec<usize> = (0..m).map(|_| g.sample_idx(&mut yrng)).collect();
    let cosets: Vec<Coset> = kept.iter().map(|&(j, _)| prep.buckets[j].1.clone()).collect();

    let np = cfg.projection.samples(ln_u(m * n_surv));
    let proj = projection_stage(oracle, &cosets, points, &ys, np, base);
    let flat: Vec<Estimate> = proj.iter().flatten().flat_map(|(a, b)| [*a, *b]).collect();
    ledger.record(Stage::Projection, &flat);

    let nm = cfg.magnitude.samples(ln_u(n_surv));
    let mags: Vec<Estimate> = cosets
        .par_iter()
        .enumerate()
        .map(|(j, c)| {
            let perp = PerpSampler::new(&g, c);
            wt2_with(oracle, &perp, nm, &mut stream_rng(base, stream(STREAM_MAGNITUDE, j as u64)))
        })
        .collect();
    ledger.record(Stage::Magnitude, &mags);

    let raw: Vec<Vec<Option<Complex64>>> = (0..m)
        .map(|i| {
            (0..n_surv)
                .map(|j| {
                    let (a, b) = proj[j][i];
                    let prod = a.value * b.value.conj();
                    let mag = mags[j].real();
                    (prod.norm() > 0.0 && mag > 0.0).then(|| prod / mag)
                })
                .collect()
        })
        .collect();
    let rounded = round_matrix(raw, l, cfg.rounding_tolerance);

    let f_column = read_labels(oracle, points);
    ledger.record_reads(Stage::Labels, m as u64);

    let survivors = kept
        .iter()
        .zip(&wt4)
        .enumerate()
        .map(|(k, (&(j, w4), _))| Survivor {
            label: prep.buckets[j].0.clone(),
            rep: prep.buckets[j].1.rep,
            bucket_size: prep.buckets[j].2,
            wt2: wt2[j].real(),
            wt4: Some(w4),
            magnitude_sq: Some(mags[k].real()),
        })
        .collect();
    let debug_truth = cfg.debug_truth.then(|| dominating_characters(oracle, &cosets));

    Ok(SieveOutput {
        group: g,
        points: points.to_vec(),
        f_column,
        q: rounded.q,
        survivors,
        suspect_rows: rounded.suspect,
        clean_rows: rounded.clean,
        nonempty_buckets: prep.buckets.len(),
        structure: prep.structure,
        debug_truth,
        ledger,
        sparsity_promise: None,
    })
}

/// The implicit sieve for functions promised to be `s`-sparse: no wt4
/// stage, keep buckets with `wt2 > theta^2/2`, and entries normalized by
/// their own modulus. A split wt2 confidence is divided by `s^2`.
pub fn sparse_implicit_sieve<R: Rng + ?Sized>(
    oracle: &QueryOracle,
    points: &[usize],
    s: usize,
    cfg: &SieveConfig,
    rng: &mut R,
) -> Result<SieveOutput> {
    cfg.validate()?;
    let g = oracle.group().clone();
    validate_points(&g, points)?;
    let l = g.lcm();
    let m = points.len();
    let base: u64 = rng.gen();
    let prep = prepare(&g, cfg.t, base, rng)?;
    let mut ledger = QueryLedger::default();

    let n2 = cfg.wt2.samples(2.0 * ln_u(s));
    let wt2 = wt2_stage(oracle, &prep.buckets, n2, base);
    ledger.record(Stage::Wt2, &wt2);
    let keep = cfg.theta * cfg.theta / 2.0;
    let kept: Vec<usize> = (0..prep.buckets.len())
        .filter(|&j| wt2[j].real() > keep)
        .collect();
    let n_surv = kept.len();

    let mut yrng = stream_rng(base, stream(STREAM_POINTS, 0));
    let ys: Vec<usize> = (0..m).map(|_| g.sample_idx(&mut yrng)).collect();
    let cosets: Vec<Coset> = kept.iter().map(|&j| prep.buckets[j].1.clone()).collect();

    let np = cfg.projection.samples(ln_u(m * n_surv));
    let proj = projection_stage(oracle, &cosets, points, &ys, np, base);
    let flat: Vec<Estimate> = proj.iter().flatten().flat_map(|(a, b)| [*a, *b]).collect();
    ledger.record(Stage::Projection, &flat);

    let raw: Vec<Vec<Option<Complex64>>> = (0..m)
        .map(|i| {
            (0..n_surv)
                .map(|j| {
                    let (a, b) = proj[j][i];
                    let prod = a.value * b.value.conj();
                    let r = prod.norm();
                    (r > cfg.rounding_tolerance && r > 0.0).then(|| prod / r)
                })
                .collect()
        })
        .collect();
    let rounded = round_matrix(raw, l, cfg.rounding_tolerance);

    let f_column = read_labels(oracle, points);
    ledger.record_reads(Stage::Labels, m as u64);

    let survivors = kept
        .iter()
        .map(|&j| Survivor {
            label: prep.buckets[j].0.clone(),
            rep: prep.buckets[j].1.rep,
            bucket_size: prep.buckets[j].2,
            wt2: wt2[j].real(),
            wt4: None,
            magnitude_sq: None,
        })
        .collect();
    let debug_truth = cfg.debug_truth.then(|| dominating_characters(oracle, &cosets));

    Ok(SieveOutput {
        group: g,
        points: points.to_vec(),
        f_column,
        q: rounded.q,
        survivors,
        suspect_rows: rounded.suspect,
        clean_rows: rounded.clean,
        nonempty_buckets: prep.buckets.len(),
        structure: prep.structure,
        debug_truth,
        ledger,
        sparsity_promise: Some(s),
    })
}

/// Closed-form ledger of an implicit-sieve run, from the bucket counts and
/// the wt2 estimates of the buckets that entered the wt4 stage.
pub fn planned_ledger(
    cfg: &SieveConfig,
    lcm: u64,
    nonempty_buckets: usize,
    wt2_survivor_estimates: &[f64],
    survivors: usize,
    perp_size: usize,
) -> QueryLedger {
    let ln_buckets = cfg.t as f64 * (lcm.max(1) as f64).ln();
    let m = cfg.m_tilde;
    let row = |stage, estimates: usize, per: usize, qper: u64| StageRecord {
        stage,
        estimates,
        samples_per_estimate: if estimates == 0 { 0 } else { per },
        samples: (estimates * per) as u64,
        queries: estimates as u64 * per as u64 * qper,
    };
    let n2 = cfg.wt2.samples(ln_buckets);
    let n4: Vec<usize> = wt2_survivor_estimates
        .iter()
        .map(|&w| cfg.wt4_samples(w, ln_buckets))
        .collect();
    let np = if perp_size == 1 {
        1
    } else {
        cfg.projection.samples(ln_u(m * survivors))
    };
    let nm = cfg.magnitude.samples(ln_u(survivors));
    let wt4 = StageRecord {
        stage: Stage::Wt4,
        estimates: n4.len(),
        samples_per_estimate: n4.iter().copied().max().unwrap_or(0),
        samples: n4.iter().map(|&n| n as u64).sum(),
        queries: n4.iter().map(|&n| 4 * n as u64).sum(),
    };
    QueryLedger {
        stages: vec![
            row(Stage::Wt2, nonempty_buckets, n2, 2),
            wt4,
            row(Stage::Projection, 2 * m * survivors, np, 1),
            row(Stage::Magnitude, survivors, nm, 2),
            StageRecord {
                stage: Stage::Labels,
                estimates: 1,
                samples_per_estimate: m,
                samples: m as u64,
                queries: m as u64,
            },
        ],
    }
}

/// Parameters of the prefix search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrefixConfig {
    pub eta: f64,
    pub delta: f64,
    pub samples: Option<usize>,
}

impl PrefixConfig {
    pub fn new(eta: f64, delta: f64) -> Self {
        PrefixConfig {
            eta,
            delta,
            samples: None,
        }
    }

    /// Samples per bucket estimate, at error `eta^2/4`.
    pub fn samples(&self) -> usize {
        self.samples
            .unwrap_or_else(|| samples_from_log(self.eta * self.eta / 4.0, (4.0 / self.delta).ln()))
    }
}

/// Worklist size at one level of the prefix search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelRecord {
    pub level: usize,
    pub candidates: usize,
    pub kept: usize,
}

/// Result of the prefix search.
#[derive(Debug, Clone)]
pub struct PrefixOutput {
    /// Surviving characters with their final wt2 estimate.
    pub survivors: Vec<(usize, f64)>,
    pub levels: Vec<LevelRecord>,
    pub ledger: QueryLedger,
    /// Whether every level kept at most `4 / eta^2` buckets.
    pub within_bound: bool,
}

/// Heavy-coefficient search by coordinate prefixes.
///
/// Level `k` holds buckets `{r : r_1..r_k fixed}`, the cosets of
/// `H_k = {g : g_1 = .. = g_k = 0}`, whose annihilator is the set of
/// elements supported on the first `k` coordinates. Each survivor is split
/// on the next coordinate; buckets with estimated weight at most `eta^2/2`
/// are dropped.
pub fn gl_prefix_search<R: Rng + ?Sized>(
    oracle: &QueryOracle,
    cfg: &PrefixConfig,
    rng: &mut R,
) -> Result<PrefixOutput> {
    if !(cfg.eta > 0.0) {
        return Err(Error::Config(format!("eta {} must be positive", cfg.eta)));
    }
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::Config(format!("delta {} outside (0, 1)", cfg.delta)));
    }
    let g = oracle.group().clone();
    let base: u64 = rng.gen();
    let n = cfg.samples();
    let drop_at = cfg.eta * cfg.eta / 2.0;
    let bound = 4.0 / (cfg.eta * cfg.eta);
    let mut ledger = QueryLedger::default();
    let mut levels = Vec::new();
    let mut within_bound = true;
    // Worklist entries are representatives: prefix coordinates, zeros after.
    let mut work: Vec<(usize, f64)> = vec![(0, 1.0)];
    for k in 0..g.rank() {
        let fixed = k + 1;
        let h_mask: Vec<usize> = (0..g.order())
            .filter(|&x| (0..fixed).all(|i| g.coord(x, i) == 0))
            .collect();
        let perp_mask: Vec<usize> = (0..g.order())
            .filter(|&x| (fixed..g.rank()).all(|i| g.coord(x, i) == 0))
            .collect();
        let h = std::sync::Arc::new(Subgroup::from_members(&g, &h_mask)?);
        let perp = std::sync::Arc::new(Subgroup::from_members(&g, &perp_mask)?);
        let stride = g.strides()[k];
        let children: Vec<usize> = work
            .iter()
            .flat_map(|&(rep, _)| (0..g.factors()[k].modulus as usize).map(move |v| rep + v * stride))
            .collect();
        let estimates: Vec<Estimate> = children
            .par_iter()
            .enumerate()
            .map(|(c, &rep)| {
                let coset = Coset::with_annihilator(rep, h.clone(), perp.clone());
                let sampler = PerpSampler::new(&g, &coset);
                wt2_with(oracle, &sampler, n, &mut stream_rng(base, stream(k as u64 + 1, c as u64)))
            })
            .collect();
        ledger.record(Stage::Prefix(fixed), &estimates);
        work = children
            .iter()
            .zip(&estimates)
            .filter(|(_, e)| e.real() > drop_at)
            .map(|(&rep, e)| (rep, e.real()))
            .collect();
        if work.len() as f64 > bound {
            within_bound = false;
        }
        levels.push(LevelRecord {
            level: fixed,
            candidates: children.len(),
            kept: work.len(),
        });
    }
    Ok(PrefixOutput {
        survivors: work,
        levels,
        ledger,
        within_bound,
    })
}
