//! Tolerant isomorphism testing against a known `g`.
//!
//! The pipeline runs the implicit sieve on `f`, treats the sieve columns as
//! unknown characters, finds a smallest spanning set among them by exact
//! root-product tests, relabels, reconstructs a sparse surrogate `f~`, and
//! sweeps `Aut(G)` spectrally. The sweep makes no oracle queries.
//!
//! Relabeling. Every column is first decoded to the character `a` whose
//! values `chi_a(x_i)` agree with it on the most rows, which costs nothing.
//! The decoded characters are then moved by the automorphism that sends the
//! spanning set closest to the canonical generators `e_1, e_2, ..`, so the
//! surrogate approximates `f o B0` for a known `B0` and any witness found
//! by the sweep transfers back to `f`.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::automorphisms::{enumerate_automorphisms, AutCaps, Automorphism};
use crate::cosets::{minimal_spanning_set, Relations, SpanningSet, DEFAULT_SEARCH_CAP};
use crate::error::{Error, Result};
use crate::estimators::{stream_rng, QueryOracle};
use crate::fourier::{same_group, BooleanFunction, FourierTable, ZERO_TOL};
use crate::group::{root_table, GroupSpec};
use crate::sieve::{implicit_sieve, separating_t, sparse_implicit_sieve, QueryLedger, SieveConfig, SieveOutput};

/// How `theta` is derived from `tau` and `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaRule {
    /// `tau / (12 s)`.
    Proof,
    /// `tau / (12 s) * 10 pi / L`.
    WithLcmFactor,
    Fixed(f64),
}

/// How the number of labeled points is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MTildeRule {
    /// `ceil(c * s^2 / tau^2 * ln(s / tau))`.
    Formula { c: f64 },
    Fixed(usize),
}

/// Parameters of the isomorphism testers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TesterConfig {
    pub epsilon: f64,
    pub tau: f64,
    /// Spectral-norm bound, or sparsity for the sparse tester. `None` uses
    /// the exact value computed from `g`.
    pub s: Option<f64>,
    pub theta_rule: ThetaRule,
    pub m_tilde_rule: MTildeRule,
    /// Coset-structure dimension; `None` picks a separating default.
    pub t: Option<usize>,
    /// Per-estimate failure probability in desk mode.
    pub delta: f64,
    pub paper_defaults: bool,
    pub t_exponent: u32,
    #[serde(skip)]
    pub aut_caps: AutCaps,
    pub span_cap: u128,
}

impl TesterConfig {
    pub fn new(epsilon: f64, tau: f64) -> Self {
        TesterConfig {
            epsilon,
            tau,
            s: None,
            theta_rule: ThetaRule::Proof,
            m_tilde_rule: MTildeRule::Formula { c: 8.0 },
            t: None,
            delta: 0.01,
            paper_defaults: false,
            t_exponent: 64,
            aut_caps: AutCaps::default(),
            span_cap: DEFAULT_SEARCH_CAP,
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta_rule = ThetaRule::Fixed(theta);
        self
    }

    pub fn with_m_tilde(mut self, m: usize) -> Self {
        self.m_tilde_rule = MTildeRule::Fixed(m);
        self
    }

    pub fn with_t(mut self, t: usize) -> Self {
        self.t = Some(t);
        self
    }

    pub fn with_s(mut self, s: f64) -> Self {
        self.s = Some(s);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.tau > 0.0 && self.tau <= 0.5) {
            return Err(Error::Config(format!(
                "need epsilon >= 0 and tau in (0, 1/2], got {} and {}",
                self.epsilon, self.tau
            )));
        }
        if self.epsilon + self.tau > 1.0 {
            return Err(Error::Config("epsilon + tau must be at most 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta {} outside (0, 1)", self.delta)));
        }
        Ok(())
    }

    pub fn theta(&self, s: f64, lcm: u64) -> f64 {
        let base = self.tau / (12.0 * s.max(f64::MIN_POSITIVE));
        match self.theta_rule {
            ThetaRule::Proof => base,
            ThetaRule::WithLcmFactor => base * 10.0 * std::f64::consts::PI / lcm as f64,
            ThetaRule::Fixed(t) => t,
        }
    }

    pub fn m_tilde(&self, s: f64) -> usize {
        match self.m_tilde_rule {
            MTildeRule::Fixed(m) => m.max(1),
            MTildeRule::Formula { c } => {
                let r = s / self.tau;
                ((c * r * r * r.ln().max(1.0)) - 1e-9).ceil().max(1.0) as usize
            }
        }
    }

    fn sieve_config(&self, theta: f64, m: usize, lcm: u64, default_t: usize) -> SieveConfig {
        if self.paper_defaults {
            return SieveConfig::paper(theta, m, lcm, self.t_exponent);
        }
        let mut cfg = SieveConfig::desk(theta, self.t.unwrap_or(default_t), m);
        for b in [&mut cfg.wt2, &mut cfg.wt4, &mut cfg.projection, &mut cfg.magnitude] {
            b.confidence = crate::sieve::Confidence::PerEstimate(self.delta);
        }
        cfg
    }
}

/// A function given by finitely many Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSurrogate {
    pub group: GroupSpec,
    pub support: Vec<(usize, Complex64)>,
}

impl SparseSurrogate {
    /// Merges repeated support elements by adding their coefficients.
    pub fn new(group: &GroupSpec, entries: Vec<(usize, Complex64)>) -> Result<Self> {
        let mut support: Vec<(usize, Complex64)> = Vec::new();
        for (r, c) in entries {
            if r >= group.order() {
                return Err(Error::Index {
                    index: r,
                    order: group.order(),
                });
            }
            if !c.is_finite() {
                return Err(Error::InvalidFunction(format!("coefficient {c} is not finite")));
            }
            match support.iter_mut().find(|(s, _)| *s == r) {
                Some(e) => e.1 += c,
                None => support.push((r, c)),
            }
        }
        Ok(SparseSurrogate {
            group: group.clone(),
            support,
        })
    }

    /// The exact table of a function, keeping coefficients above `ZERO_TOL`.
    pub fn from_table(t: &FourierTable) -> Self {
        SparseSurrogate {
            group: t.group().clone(),
            support: t.support(ZERO_TOL).into_iter().map(|r| (r, t.coeff(r))).collect(),
        }
    }

    pub fn to_table(&self) -> FourierTable {
        FourierTable::from_sparse(&self.group, &self.support).expect("support lies in the group")
    }
}

/// Relations among the unknown characters behind the columns of a rounded
/// matrix: a combination vanishes when its exponent sum is `0 mod L` on
/// every row.
pub struct ColumnRelations {
    pub columns: Vec<Vec<u64>>,
    pub lcm: u64,
}

impl ColumnRelations {
    /// Columns of a sieve output over its non-suspect rows.
    pub fn from_sieve(out: &SieveOutput) -> Self {
        let rows: Vec<usize> = usable_rows(out);
        let columns = (0..out.n_survivors())
            .map(|j| rows.iter().map(|&i| out.q[i][j].root.unwrap().exponent()).collect())
            .collect();
        ColumnRelations {
            columns,
            lcm: out.group.lcm(),
        }
    }
}

impl Relations for ColumnRelations {
    fn len(&self) -> usize {
        self.columns.len()
    }

    fn modulus(&self) -> u64 {
        self.lcm
    }

    fn vanishes(&self, items: &[usize], coeffs: &[u64]) -> bool {
        let rows = self.columns.first().map_or(0, |c| c.len());
        let l = self.lcm as u128;
        (0..rows).all(|i| {
            items
                .iter()
                .zip(coeffs)
                .map(|(&k, &c)| self.columns[k][i] as u128 * c as u128)
                .sum::<u128>()
                % l
                == 0
        })
    }
}

fn usable_rows(out: &SieveOutput) -> Vec<usize> {
    (0..out.points.len()).filter(|&i| !out.suspect_rows[i]).collect()
}

/// Output of the span, relabel and coefficient steps.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub surrogate: SparseSurrogate,
    pub spanning: SpanningSet,
    /// Character decoded from each column.
    pub decoded: Vec<usize>,
    /// Fraction of usable rows on which each decoded character matches its column.
    pub agreement: Vec<f64>,
    /// Relabeled characters `S_j`.
    pub labels: Vec<usize>,
    pub coefficients: Vec<Complex64>,
    /// The surrogate approximates `f o relabel`.
    pub relabel: Automorphism,
    /// Whether the labels satisfy every recorded column relation.
    pub relations_consistent: bool,
}

/// Spanning set, relabel and coefficients from a sieve output. `auts` must
/// list `Aut(G)`.
pub fn reconstruct_surrogate(out: &SieveOutput, auts: &[Automorphism], cap: u128) -> Result<Reconstruction> {
    let g = &out.group;
    let l = g.lcm();
    let rel = ColumnRelations::from_sieve(out);
    let spanning = minimal_spanning_set(&rel, cap)?;
    let rows = usable_rows(out);

    let (decoded, agreement): (Vec<usize>, Vec<f64>) = rel
        .columns
        .iter()
        .map(|col| decode_column(g, &out.points, &rows, col))
        .unzip();

    let relabel = choose_relabel(g, auts, &spanning.basis, &decoded);
    let t = relabel.invert().dual_double().invert();
    let labels: Vec<usize> = decoded.iter().map(|&a| t.apply_idx(a)).collect();

    let relations_consistent = spanning.expressions.iter().all(|e| {
        let c = e.solved(l);
        let sum = spanning
            .basis
            .iter()
            .zip(&c)
            .fold(0usize, |acc, (&b, &ci)| g.lin_idx(acc, labels[b], 1, ci as i64));
        sum == labels[e.item]
    });

    let roots = root_table(l);
    let coefficients: Vec<Complex64> = (0..out.n_survivors())
        .map(|j| {
            let sum: Complex64 = rows
                .iter()
                .map(|&i| roots[out.q[i][j].root.unwrap().exponent() as usize].conj() * out.f_column[i] as f64)
                .sum();
            sum / rows.len().max(1) as f64
        })
        .collect();
    let surrogate = SparseSurrogate::new(g, labels.iter().copied().zip(coefficients.iter().copied()).collect())?;
    Ok(Reconstruction {
        surrogate,
        spanning,
        decoded,
        agreement,
        labels,
        coefficients,
        relabel,
        relations_consistent,
    })
}

fn decode_column(g: &GroupSpec, points: &[usize], rows: &[usize], col: &[u64]) -> (usize, f64) {
    let mut best = (0usize, 0usize);
    for r in 0..g.order() {
        let hits = rows
            .iter()
            .zip(col)
            .filter(|(&i, &e)| g.pairing_idx(r, points[i]) == e)
            .count();
        if hits > best.1 {
            best = (r, hits);
        }
    }
    (best.0, if rows.is_empty() { 0.0 } else { best.1 as f64 / rows.len() as f64 })
}

/// The `B0` whose character action sends the decoded spanning set to the
/// most canonical generators `e_1, e_2, ..` in order, ties broken by the
/// smallest label sequence.
fn choose_relabel(g: &GroupSpec, auts: &[Automorphism], basis: &[usize], decoded: &[usize]) -> Automorphism {
    let gens: Vec<usize> = (0..g.rank()).map(|i| g.strides()[i]).collect();
    auts.par_iter()
        .map(|b0| {
            let t = b0.invert().dual_double().invert();
            let images: Vec<usize> = basis.iter().map(|&b| t.apply_idx(decoded[b])).collect();
            let hits = images.iter().zip(&gens).filter(|(a, e)| a == e).count();
            (std::cmp::Reverse(hits), images, b0)
        })
        .min_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)))
        .map(|(_, _, b0)| b0.clone())
        .unwrap_or_else(|| Automorphism::identity(g))
}

/// Correlations `Re sum_r (f~ o A)^(r) conj(g^(r))` for every `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub correlations: Vec<f64>,
    pub best: usize,
}

impl SweepTable {
    pub fn best_value(&self) -> f64 {
        self.correlations.get(self.best).copied().unwrap_or(f64::NEG_INFINITY)
    }
}

/// Spectral sweep over `auts`, by `(f~ o A)^(r) = f~^((A^-1)^^(r))`.
pub fn correlation_sweep(surrogate: &SparseSurrogate, g_table: &FourierTable, auts: &[Automorphism]) -> Result<SweepTable> {
    same_group(&surrogate.group, g_table.group())?;
    if auts.is_empty() {
        return Err(Error::Config("empty automorphism list".into()));
    }
    let correlations: Vec<f64> = auts
        .par_iter()
        .map(|a| {
            // Coefficient of f~ at s sits at r = D^-1(s) in f~ o A, D = (A^-1)^^.
            let dinv = a.invert().dual_double().invert();
            surrogate
                .support
                .iter()
                .map(|&(s, c)| (c * g_table.coeff(dinv.apply_idx(s)).conj()).re)
                .sum()
        })
        .collect();
    let best = correlations
        .iter()
        .enumerate()
        .fold(0, |b, (i, &c)| if c > correlations[b] { i } else { b });
    Ok(SweepTable { correlations, best })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Decision {
    Accept,
    Reject,
    Fail,
}

/// Outcome of an isomorphism test.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub decision: Decision,
    /// `B` with `f ~ g o B`, present on Accept.
    pub witness: Option<Automorphism>,
    pub best_correlation: f64,
    pub accept_threshold: f64,
    pub reject_threshold: f64,
    pub theta: f64,
    pub m_tilde: usize,
    pub s: f64,
    pub survivors: usize,
    pub ledger: QueryLedger,
    pub total_queries: u64,
    /// Oracle queries made during the automorphism sweep.
    pub sweep_queries: u64,
    pub warnings: Vec<String>,
    pub fail_reason: Option<String>,
    pub reconstruction: Option<Reconstruction>,
}

struct Plan {
    sparse: Option<usize>,
    accept: f64,
    reject: f64,
}

/// Tolerant test of `f ~ g o A` for some `A`. Accepts when the best
/// surrogate correlation reaches `1 - 2 eps - tau/2`, rejects when it is at
/// most `1 - 2 eps - 3 tau/2`, and fails otherwise.
pub fn test_isomorphism<R: Rng + ?Sized>(
    oracle: &QueryOracle,
    g: &BooleanFunction,
    cfg: &TesterConfig,
    rng: &mut R,
) -> Result<Verdict> {
    let base = 1.0 - 2.0 * cfg.epsilon;
    let plan = Plan {
        sparse: None,
        accept: base - cfg.tau / 2.0,
        reject: base - 1.5 * cfg.tau,
    };
    run(oracle, g, cfg, plan, rng)
}

/// The sparse tester: `f` and `g` are promised `s`-sparse, the sieve skips
/// the wt4 stage and the thresholds are `tau/4` and `7 tau/4`.
pub fn test_isomorphism_sparse<R: Rng + ?Sized>(
    oracle: &QueryOracle,
    g: &BooleanFunction,
    s: usize,
    cfg: &TesterConfig,
    rng: &mut R,
) -> Result<Verdict> {
    let base = 1.0 - 2.0 * cfg.epsilon;
    let plan = Plan {
        sparse: Some(s.max(1)),
        accept: base - cfg.tau / 4.0,
        reject: base - 1.75 * cfg.tau,
    };
    run(oracle, g, cfg, plan, rng)
}

fn run<R: Rng + ?Sized>(oracle: &QueryOracle, g: &BooleanFunction, cfg: &TesterConfig, plan: Plan, rng: &mut R) -> Result<Verdict> {
    cfg.validate()?;
    let grp = oracle.group().clone();
    same_group(&grp, g.group())?;
    let l = grp.lcm();
    let g_table = g.fourier();
    let mut warnings = Vec::new();

    let s = match plan.sparse {
        Some(s) => {
            let exact = g_table.sparsity(ZERO_TOL);
            if exact > s {
                warnings.push(format!("g has {exact} nonzero coefficients, above the promised sparsity {s}"));
            }
            s as f64
        }
        None => {
            let norm = g_table.spectral_norm();
            let s = cfg.s.unwrap_or(norm);
            if norm > s + ZERO_TOL {
                warnings.push(format!("spectral norm of g is {norm:.6}, above s = {s}"));
            }
            s
        }
    };
    let theta = cfg.theta(s, l);
    if !(theta > 0.0) {
        return Err(Error::Config(format!("derived theta {theta} must be positive")));
    }
    let m = cfg.m_tilde(s);
    let auts = enumerate_automorphisms(&grp, cfg.aut_caps)?;

    let base: u64 = rng.gen();
    let mut prng = stream_rng(base, 0);
    let points: Vec<usize> = (0..m).map(|_| grp.sample_idx(&mut prng)).collect();
    let mut srng = stream_rng(base, 1);
    let out = match plan.sparse {
        Some(s) => {
            let sieve = cfg.sieve_config(theta, m, l, separating_t(s, &grp));
            sparse_implicit_sieve(oracle, &points, s, &sieve, &mut srng)?
        }
        None => {
            let heavy = (4.0 / (theta * theta)).ceil() as usize;
            let sieve = cfg.sieve_config(theta, m, l, separating_t(heavy, &grp));
            implicit_sieve(oracle, &points, &sieve, &mut srng)?
        }
    };
    if out.suspect_rows.iter().any(|&s| s) {
        let k = out.suspect_rows.iter().filter(|&&s| s).count();
        warnings.push(format!("{k} rows had indeterminate entries and were dropped"));
    }
    let target = cfg.tau / (12.0 * out.n_survivors().max(1) as f64);
    let achieved = (4.0 * (4.0 / cfg.delta).ln() / m as f64).sqrt();
    if achieved > target {
        warnings.push(format!(
            "coefficient error bound {achieved:.4} from {m} points exceeds tau/(12 N) = {target:.4}"
        ));
    }

    let mut verdict = Verdict {
        decision: Decision::Fail,
        witness: None,
        best_correlation: f64::NEG_INFINITY,
        accept_threshold: plan.accept,
        reject_threshold: plan.reject,
        theta,
        m_tilde: m,
        s,
        survivors: out.n_survivors(),
        ledger: out.ledger.clone(),
        total_queries: out.ledger.total_queries(),
        sweep_queries: 0,
        warnings,
        fail_reason: None,
        reconstruction: None,
    };

    let rec = match reconstruct_surrogate(&out, &auts, cfg.span_cap) {
        Ok(r) => r,
        Err(Error::SearchCapExceeded { needed, cap }) => {
            verdict.fail_reason = Some(format!("spanning-set search needs {needed} steps, cap {cap}"));
            return Ok(verdict);
        }
        Err(e) => return Err(e),
    };
    if !rec.relations_consistent {
        verdict
            .warnings
            .push("decoded characters disagree with a column relation".into());
    }

    let before = oracle.queries();
    let sweep = correlation_sweep(&rec.surrogate, &g_table, &auts)?;
    verdict.sweep_queries = oracle.queries() - before;
    assert_eq!(verdict.sweep_queries, 0, "the sweep must not query f");

    verdict.best_correlation = sweep.best_value();
    if verdict.best_correlation >= plan.accept {
        verdict.decision = Decision::Accept;
        verdict.witness = Some(rec.relabel.compose(&auts[sweep.best])?.invert());
    } else if verdict.best_correlation <= plan.reject {
        verdict.decision = Decision::Reject;
    } else {
        verdict.fail_reason = Some(format!(
            "best correlation {:.4} lies between the thresholds",
            verdict.best_correlation
        ));
    }
    verdict.reconstruction = Some(rec);
    Ok(verdict)
}
