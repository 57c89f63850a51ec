//! Function files, generators and the `abelian-iso` command line.
//!
//! A function file is a JSON document:
//!
//! ```json
//! {"group": [4, 2], "enumeration": "mixed-radix-msf", "representation": "dense",
//!  "values": [1, -1, -1, 1, 1, 1, 1, 1]}
//! ```
//!
//! or, spectrally, `"representation": "sparse"` with
//! `"coefficients": [[[1, 0], [0.5, 0.0]], ...]` listing `(r, [re, im])`.
//! Values are enumerated mixed-radix with the first coordinate most
//! significant. Exit codes: 0 success, 2 input error, 3 resource cap.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::automorphisms::{enumerate_automorphisms, exact_automorphism_distance, AutCaps, Automorphism};
use crate::cosets::Subgroup;
use crate::error::Error;
use crate::estimators::{stream_rng, QueryOracle};
use crate::fourier::{hamming_distance, BooleanFunction, FourierTable, ZERO_TOL};
use crate::group::{GroupElement, GroupSpec};
use crate::sieve::{implicit_sieve, separating_t, sparse_implicit_sieve, QueryLedger, SieveConfig, SieveOutput, Stage};
use crate::tester::{test_isomorphism, test_isomorphism_sparse, Decision, TesterConfig, Verdict};

pub const ENUMERATION: &str = "mixed-radix-msf";
const BOOLEAN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "representation", rename_all = "kebab-case")]
pub enum Payload {
    Dense {
        values: Vec<i64>,
    },
    Sparse {
        coefficients: Vec<(Vec<u64>, [f64; 2])>,
        #[serde(default = "yes")]
        boolean: bool,
    },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionFile {
    pub group: Vec<u64>,
    pub enumeration: String,
    #[serde(flatten)]
    pub payload: Payload,
}

impl FunctionFile {
    pub fn dense(f: &BooleanFunction) -> Self {
        FunctionFile {
            group: f.group().moduli(),
            enumeration: ENUMERATION.into(),
            payload: Payload::Dense {
                values: f.values().iter().map(|&v| v as i64).collect(),
            },
        }
    }

    pub fn sparse(t: &FourierTable) -> Self {
        let g = t.group();
        FunctionFile {
            group: g.moduli(),
            enumeration: ENUMERATION.into(),
            payload: Payload::Sparse {
                coefficients: t
                    .support(ZERO_TOL)
                    .into_iter()
                    .map(|r| {
                        let c = t.coeff(r);
                        (g.element(r).expect("index in range").0, [c.re, c.im])
                    })
                    .collect(),
                boolean: true,
            },
        }
    }

    pub fn group_spec(&self) -> crate::Result<GroupSpec> {
        GroupSpec::from_moduli(&self.group)
    }

    /// Validates and loads the file as a Boolean function.
    pub fn load(&self) -> crate::Result<BooleanFunction> {
        if self.enumeration != ENUMERATION {
            return Err(Error::InvalidFunction(format!(
                "unsupported enumeration {:?}, expected {ENUMERATION:?}",
                self.enumeration
            )));
        }
        let g = self.group_spec()?;
        match &self.payload {
            Payload::Dense { values } => {
                let v = values
                    .iter()
                    .map(|&x| match x {
                        1 => Ok(1i8),
                        -1 => Ok(-1i8),
                        _ => Err(Error::InvalidFunction(format!("value {x} is not +1 or -1"))),
                    })
                    .collect::<crate::Result<Vec<_>>>()?;
                BooleanFunction::new(&g, v)
            }
            Payload::Sparse { coefficients, boolean } => {
                if !boolean {
                    return Err(Error::InvalidFunction("only Boolean functions can be loaded".into()));
                }
                let mut support = Vec::with_capacity(coefficients.len());
                for (coords, [re, im]) in coefficients {
                    let r = g.index_of(&GroupElement(coords.clone()))?;
                    if support.iter().any(|&(s, _)| s == r) {
                        return Err(Error::InvalidFunction(format!("repeated support element {coords:?}")));
                    }
                    support.push((r, Complex64::new(*re, *im)));
                }
                let values = FourierTable::from_sparse(&g, &support)?.idft();
                let v = values
                    .iter()
                    .map(|z| {
                        if z.im.abs() < BOOLEAN_TOL && (z.re.abs() - 1.0).abs() < BOOLEAN_TOL {
                            Ok(if z.re > 0.0 { 1 } else { -1 })
                        } else {
                            Err(Error::InvalidFunction(format!("synthesized value {z} is not +1 or -1")))
                        }
                    })
                    .collect::<crate::Result<Vec<i8>>>()?;
                BooleanFunction::new(&g, v)
            }
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "abelian-iso", version, about = "Tolerant isomorphism testing of Boolean functions over finite Abelian groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include wall-clock time in the report.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args, Clone)]
pub struct SieveArgs {
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long = "m-tilde", default_value_t = 20)]
    pub m_tilde: usize,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    /// Run the sparse sieve with this sparsity.
    #[arg(long)]
    pub sparse: Option<usize>,
    #[arg(long = "paper-defaults")]
    pub paper_defaults: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Constant,
    SubgroupIndicator,
    Random,
    AutomorphicImage,
    FarPerturbation,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact Fourier transform of a function file.
    Dft {
        input: PathBuf,
        /// Also emit the function in the sparse spectral representation.
        #[arg(long)]
        sparse_out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the implicit sieve on a function file.
    Sieve {
        input: PathBuf,
        #[command(flatten)]
        sieve: SieveArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Test whether f is close to an automorphic image of g.
    TestIso {
        f: PathBuf,
        g: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.4)]
        tau: f64,
        /// Spectral-norm bound, or sparsity with --sparse.
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        t: Option<usize>,
        #[arg(long = "m-tilde")]
        m_tilde: Option<usize>,
        #[arg(long)]
        sparse: bool,
        #[arg(long = "paper-defaults")]
        paper_defaults: bool,
        /// Add the exact automorphism distance and promise side.
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a function file.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        /// Group moduli, e.g. 4,2.
        #[arg(long, value_delimiter = ',')]
        group: Vec<u64>,
        /// Source function for automorphic-image and far-perturbation.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Fraction of points flipped by far-perturbation.
        #[arg(long, default_value_t = 0.25)]
        fraction: f64,
        /// Subgroup generators as coordinate lists, e.g. "2,0;0,1".
        #[arg(long)]
        generators: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a scenario grid and emit one CSV row per run.
    Bench {
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Exact ground truth for a pair of function files.
    Verify {
        f: PathBuf,
        g: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.4)]
        tau: f64,
        #[command(flatten)]
        common: Common,
    },
}

/// An error with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::GroupTooLarge(_) | Error::SearchCapExceeded { .. } => 3,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

pub fn read_function(path: &Path) -> CliResult<BooleanFunction> {
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let file: FunctionFile =
        serde_json::from_str(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    Ok(file.load()?)
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn pretty(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}

fn coords(g: &GroupSpec, idx: usize) -> Vec<u64> {
    g.element(idx).expect("index in range").0
}

fn complex(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn aut_json(a: &Automorphism) -> Value {
    json!(a.generator_images().into_iter().map(|e| e.0).collect::<Vec<_>>())
}

fn ledger_json(ledger: &QueryLedger) -> Value {
    json!({ "stages": ledger.stages, "total_queries": ledger.total_queries() })
}

/// Parses and runs a command line; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let out = match &cli.command {
        Command::Dft { common, .. }
        | Command::Sieve { common, .. }
        | Command::TestIso { common, .. }
        | Command::Gen { common, .. }
        | Command::Bench { common, .. }
        | Command::Verify { common, .. } => common.out.clone(),
    };
    match execute(&cli.command) {
        Ok(text) => match out {
            Some(path) => match write_text(&path, &text) {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("error: {}", e.message);
                    e.code
                }
            },
            None => {
                print!("{text}");
                0
            }
        },
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

/// Runs a parsed command and returns its report text.
pub fn execute(cmd: &Command) -> CliResult<String> {
    let start = Instant::now();
    let (mut report, timing) = match cmd {
        Command::Dft { input, sparse_out, common } => (cmd_dft(input, sparse_out.as_deref())?, common.timing),
        Command::Sieve { input, sieve, common } => (cmd_sieve(input, sieve, common.seed)?, common.timing),
        Command::TestIso {
            f,
            g,
            epsilon,
            tau,
            s,
            theta,
            t,
            m_tilde,
            sparse,
            paper_defaults,
            verify,
            common,
        } => {
            let mut cfg = TesterConfig::new(*epsilon, *tau);
            cfg.s = *s;
            cfg.t = *t;
            cfg.paper_defaults = *paper_defaults;
            if let Some(th) = theta {
                cfg = cfg.with_theta(*th);
            }
            if let Some(m) = m_tilde {
                cfg = cfg.with_m_tilde(*m);
            }
            (cmd_test_iso(f, g, &cfg, *sparse, *verify, common.seed)?, common.timing)
        }
        Command::Gen {
            kind,
            group,
            input,
            fraction,
            generators,
            common,
        } => {
            let (file, sidecar) = cmd_gen(*kind, group, input.as_deref(), *fraction, generators.as_deref(), common.seed)?;
            if let (Some(a), Some(out)) = (sidecar, &common.out) {
                let mut path = out.clone().into_os_string();
                path.push(".aut.json");
                write_text(Path::new(&path), &pretty(&json!({ "generator_images": aut_json(&a) })))?;
            }
            return Ok(pretty(&file));
        }
        Command::Bench { scenario, common } => return cmd_bench(scenario, common.seed, common.timing),
        Command::Verify {
            f,
            g,
            epsilon,
            tau,
            common,
        } => (cmd_verify(f, g, *epsilon, *tau)?, common.timing),
    };
    if timing {
        report["timing_ms"] = json!(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(pretty(&report))
}

pub fn cmd_dft(input: &Path, sparse_out: Option<&Path>) -> CliResult<Value> {
    let f = read_function(input)?;
    let g = f.group();
    let t = f.fourier();
    if let Some(path) = sparse_out {
        write_text(path, &pretty(&FunctionFile::sparse(&t)))?;
    }
    let coefficients: Vec<Value> = (0..g.order())
        .map(|r| json!([coords(g, r), complex(t.coeff(r))]))
        .collect();
    let support: Vec<Vec<u64>> = t.support(ZERO_TOL).into_iter().map(|r| coords(g, r)).collect();
    Ok(json!({
        "group": g.moduli(),
        "coefficients": coefficients,
        "support": support,
        "spectral_norm": t.spectral_norm(),
        "sparsity": t.sparsity(ZERO_TOL),
        "parseval_sum": t.parseval_sum(),
    }))
}

fn sieve_config(args: &SieveArgs, g: &GroupSpec) -> SieveConfig {
    let l = g.lcm();
    if args.paper_defaults {
        return SieveConfig::paper(args.theta, args.m_tilde, l, 64);
    }
    let t = args
        .t
        .unwrap_or_else(|| separating_t(args.sparse.unwrap_or((4.0 / (args.theta * args.theta)).ceil() as usize), g));
    let mut cfg = SieveConfig::desk(args.theta, t, args.m_tilde);
    for b in [&mut cfg.wt2, &mut cfg.wt4, &mut cfg.projection, &mut cfg.magnitude] {
        b.confidence = crate::sieve::Confidence::PerEstimate(args.delta);
    }
    cfg
}

fn sieve_json(out: &SieveOutput) -> Value {
    let g = &out.group;
    json!({
        "group": g.moduli(),
        "points": out.points.iter().map(|&x| coords(g, x)).collect::<Vec<_>>(),
        "f_column": out.f_column,
        "survivors": out.survivors.iter().map(|s| json!({
            "label": s.label,
            "representative": coords(g, s.rep),
            "bucket_size": s.bucket_size,
            "wt2": s.wt2,
            "wt4": s.wt4,
            "magnitude_sq": s.magnitude_sq,
        })).collect::<Vec<_>>(),
        "q_exponents": out.exponents(),
        "q_raw": out.q.iter().map(|row| row.iter().map(|e| complex(e.raw)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "suspect_rows": out.suspect_rows,
        "clean_rows": out.clean_rows,
        "nonempty_buckets": out.nonempty_buckets,
        "debug_truth": out.debug_truth.as_ref().map(|v| v.iter().map(|&r| coords(g, r)).collect::<Vec<_>>()),
        "sparsity_promise": out.sparsity_promise,
        "ledger": ledger_json(&out.ledger),
    })
}

pub fn cmd_sieve(input: &Path, args: &SieveArgs, seed: u64) -> CliResult<Value> {
    let f = read_function(input)?;
    let g = f.group().clone();
    let cfg = sieve_config(args, &g);
    let mut rng = stream_rng(seed, 0);
    let points: Vec<usize> = (0..cfg.m_tilde).map(|_| g.sample_idx(&mut rng)).collect();
    let oracle = QueryOracle::new(f);
    let out = match args.sparse {
        Some(s) => sparse_implicit_sieve(&oracle, &points, s, &cfg, &mut rng)?,
        None => implicit_sieve(&oracle, &points, &cfg, &mut rng)?,
    };
    let mut report = sieve_json(&out);
    report["seed"] = json!(seed);
    report["config"] = json!(cfg);
    Ok(report)
}

fn verdict_json(v: &Verdict) -> Value {
    json!({
        "decision": v.decision,
        "witness": v.witness.as_ref().map(aut_json),
        "best_correlation": v.best_correlation,
        "accept_threshold": v.accept_threshold,
        "reject_threshold": v.reject_threshold,
        "theta": v.theta,
        "m_tilde": v.m_tilde,
        "s": v.s,
        "survivors": v.survivors,
        "total_queries": v.total_queries,
        "sweep_queries": v.sweep_queries,
        "ledger": ledger_json(&v.ledger),
        "warnings": v.warnings,
        "fail_reason": v.fail_reason,
    })
}

fn promise_side(d: f64, epsilon: f64, tau: f64) -> &'static str {
    if d <= epsilon + ZERO_TOL {
        "close"
    } else if d >= epsilon + tau - ZERO_TOL {
        "far"
    } else {
        "gap"
    }
}

pub fn cmd_test_iso(f: &Path, g: &Path, cfg: &TesterConfig, sparse: bool, verify: bool, seed: u64) -> CliResult<Value> {
    let ff = read_function(f)?;
    let gf = read_function(g)?;
    if ff.group() != gf.group() {
        return Err(input_error(format!("group mismatch: {} vs {}", ff.group(), gf.group())));
    }
    let oracle = QueryOracle::new(ff.clone());
    let mut rng = stream_rng(seed, 0);
    let v = if sparse {
        let s = cfg.s.map_or_else(|| gf.fourier().sparsity(ZERO_TOL), |s| s.round() as usize);
        test_isomorphism_sparse(&oracle, &gf, s, cfg, &mut rng)?
    } else {
        test_isomorphism(&oracle, &gf, cfg, &mut rng)?
    };
    let mut report = verdict_json(&v);
    report["seed"] = json!(seed);
    report["sparse"] = json!(sparse);
    report["config"] = json!(cfg);
    if verify {
        let (d, a) = exact_automorphism_distance(&ff, &gf, cfg.aut_caps)?;
        let mut truth = json!({
            "distance": d,
            "closest": aut_json(&a),
            "promise_side": promise_side(d, cfg.epsilon, cfg.tau),
        });
        if let Some(w) = &v.witness {
            truth["witness_distance"] = json!(hamming_distance(&ff, &w.apply_to(&gf)?)?);
        }
        report["verify"] = truth;
    }
    Ok(report)
}

fn parse_generators(g: &GroupSpec, text: &str) -> CliResult<Vec<usize>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|part| {
            let c = part
                .split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|e| input_error(format!("generator {part:?}: {e}"))))
                .collect::<CliResult<Vec<_>>>()?;
            Ok(g.index_of(&g.element_from(&c)?)?)
        })
        .collect()
}

/// Generates a function; automorphic images also return the automorphism.
pub fn cmd_gen(
    kind: GenKind,
    group: &[u64],
    input: Option<&Path>,
    fraction: f64,
    generators: Option<&str>,
    seed: u64,
) -> CliResult<(FunctionFile, Option<Automorphism>)> {
    let mut rng = stream_rng(seed, 0);
    let source = || -> CliResult<BooleanFunction> {
        read_function(input.ok_or_else(|| input_error("this generator needs --input"))?)
    };
    let from_group = || -> CliResult<GroupSpec> {
        if group.is_empty() {
            return Err(input_error("this generator needs --group"));
        }
        Ok(GroupSpec::from_moduli(group)?)
    };
    let (f, a) = match kind {
        GenKind::Constant => (BooleanFunction::constant(&from_group()?, 1), None),
        GenKind::Random => (BooleanFunction::random(&from_group()?, &mut rng), None),
        GenKind::SubgroupIndicator => {
            let g = from_group()?;
            let gens = match generators {
                Some(text) => parse_generators(&g, text)?,
                None if g.order() > 1 => vec![rng.gen_range(1..g.order())],
                None => vec![0],
            };
            let h = Subgroup::span(&g, &gens);
            (BooleanFunction::indicator_idx(&g, h.members()), None)
        }
        GenKind::AutomorphicImage => {
            let f = source()?;
            let auts = enumerate_automorphisms(f.group(), AutCaps::default())?;
            let a = auts[rng.gen_range(0..auts.len())].clone();
            (a.apply_to(&f)?, Some(a))
        }
        GenKind::FarPerturbation => {
            let f = source()?;
            if !(0.0..=1.0).contains(&fraction) {
                return Err(input_error(format!("fraction {fraction} outside [0, 1]")));
            }
            let n = f.group().order();
            let k = (fraction * n as f64).round() as usize;
            let pts = sample(&mut rng, n, k).into_vec();
            (f.flipped(&pts), None)
        }
    };
    Ok((FunctionFile::dense(&f), a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchMode {
    #[default]
    Sieve,
    TestIso,
}

/// One run of a bench scenario.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct BenchRun {
    pub group: Vec<u64>,
    #[serde(default = "random_kind")]
    pub kind: String,
    #[serde(default)]
    pub mode: BenchMode,
    pub theta: f64,
    pub t: usize,
    pub m_tilde: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
}

fn random_kind() -> String {
    "random".into()
}

fn default_delta() -> f64 {
    0.01
}

fn default_epsilon() -> f64 {
    0.05
}

fn default_tau() -> f64 {
    0.4
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub runs: Vec<BenchRun>,
}

pub const BENCH_HEADER: &str =
    "group,kind,mode,theta,t,m_tilde,delta,wt2_samples,wt4_samples,projection_samples,magnitude_samples,queries,decision,wall_ms";

fn stage_samples(ledger: &QueryLedger, stage: Stage) -> usize {
    ledger.get(stage).map_or(0, |r| r.samples_per_estimate)
}

fn bench_function(kind: &str, g: &GroupSpec, seed: u64) -> CliResult<BooleanFunction> {
    let mut rng = stream_rng(seed, 1);
    Ok(match kind {
        "constant" => BooleanFunction::constant(g, 1),
        "random" => BooleanFunction::random(g, &mut rng),
        "subgroup-indicator" => {
            let gen = if g.order() > 1 { rng.gen_range(1..g.order()) } else { 0 };
            BooleanFunction::indicator_idx(g, Subgroup::span(g, &[gen]).members())
        }
        other => return Err(input_error(format!("unknown bench kind {other:?}"))),
    })
}

pub fn cmd_bench(scenario: &Path, seed: u64, timing: bool) -> CliResult<String> {
    let text = fs::read_to_string(scenario).map_err(|e| input_error(format!("{}: {e}", scenario.display())))?;
    let sc: Scenario = serde_json::from_str(&text).map_err(|e| input_error(format!("{}: {e}", scenario.display())))?;
    let mut csv = String::from(BENCH_HEADER);
    csv.push('\n');
    let mut master = stream_rng(seed, 0);
    for run in &sc.runs {
        let run_seed: u64 = master.gen();
        let g = GroupSpec::from_moduli(&run.group)?;
        let f = bench_function(&run.kind, &g, run_seed)?;
        let start = Instant::now();
        let mut rng = stream_rng(run_seed, 2);
        let (ledger, decision) = match run.mode {
            BenchMode::Sieve => {
                let mut cfg = SieveConfig::desk(run.theta, run.t, run.m_tilde);
                for b in [&mut cfg.wt2, &mut cfg.wt4, &mut cfg.projection, &mut cfg.magnitude] {
                    b.confidence = crate::sieve::Confidence::PerEstimate(run.delta);
                }
                cfg.debug_truth = false;
                let points: Vec<usize> = (0..run.m_tilde).map(|_| g.sample_idx(&mut rng)).collect();
                let out = implicit_sieve(&QueryOracle::new(f), &points, &cfg, &mut rng)?;
                let decision = format!("survivors={}", out.n_survivors());
                (out.ledger, decision)
            }
            BenchMode::TestIso => {
                let auts = enumerate_automorphisms(&g, AutCaps::default())?;
                let a = &auts[rng.gen_range(0..auts.len())];
                let oracle = QueryOracle::new(a.apply_to(&f)?);
                let mut cfg = TesterConfig::new(run.epsilon, run.tau)
                    .with_theta(run.theta)
                    .with_m_tilde(run.m_tilde)
                    .with_t(run.t);
                cfg.delta = run.delta;
                let v = test_isomorphism(&oracle, &f, &cfg, &mut rng)?;
                (v.ledger, format!("{:?}", v.decision))
            }
        };
        let wall = if timing {
            format!("{:.3}", start.elapsed().as_secs_f64() * 1e3)
        } else {
            String::new()
        };
        let mode = match run.mode {
            BenchMode::Sieve => "sieve",
            BenchMode::TestIso => "test-iso",
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            g,
            run.kind,
            mode,
            run.theta,
            run.t,
            run.m_tilde,
            run.delta,
            stage_samples(&ledger, Stage::Wt2),
            stage_samples(&ledger, Stage::Wt4),
            stage_samples(&ledger, Stage::Projection),
            stage_samples(&ledger, Stage::Magnitude),
            ledger.total_queries(),
            decision,
            wall
        ));
    }
    Ok(csv)
}

pub fn cmd_verify(f: &Path, g: &Path, epsilon: f64, tau: f64) -> CliResult<Value> {
    let ff = read_function(f)?;
    let gf = read_function(g)?;
    if ff.group() != gf.group() {
        return Err(input_error(format!("group mismatch: {} vs {}", ff.group(), gf.group())));
    }
    let (d, a) = exact_automorphism_distance(&ff, &gf, AutCaps::default())?;
    let (ft, gt) = (ff.fourier(), gf.fourier());
    Ok(json!({
        "group": ff.group().moduli(),
        "distance": d,
        "correlation": 1.0 - 2.0 * d,
        "closest": aut_json(&a),
        "promise_side": promise_side(d, epsilon, tau),
        "f_spectral_norm": ft.spectral_norm(),
        "g_spectral_norm": gt.spectral_norm(),
        "f_sparsity": ft.sparsity(ZERO_TOL),
        "g_sparsity": gt.sparsity(ZERO_TOL),
    }))
}

impl Decision {
    pub fn as_str(&self) -> &'static str {
        match self {
            Decision::Accept => "Accept",
            Decision::Reject => "Reject",
            Decision::Fail => "Fail",
        }
    }
}
