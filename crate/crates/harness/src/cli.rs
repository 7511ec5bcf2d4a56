//! Command-line surface of the `koszul` binary.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use koszul_core::ample::{is_p_very_ample, witness_reverifies, AmplenessConfig, AmplenessOutcome, AmplenessVerdict};
use koszul_core::curve::{CurveModel, CurveSpec};
use koszul_core::field::{PrimeField, DEFAULT_PRIME};
use koszul_core::koszul::{table_complex, BettiTable, KoszulComplex};
use koszul_core::sections::{h0_h1, DivisorSpec, SectionSpace};
use koszul_core::sparse::{
    rank_dense_oracle, rank_sparse, rank_wiedemann, Budget, OracleArithmetic, RankResult, RankStats, SparseMatrix,
};
use serde::Serialize;

use crate::cache::MatrixCache;
use crate::checks::{CheckContext, CheckId, CheckRequest};
use crate::compute;
use crate::config::{run_requests, CurveEntry, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::presets::resolve_curve;
use crate::ranker::{HarnessRanker, DEFAULT_BUDGET_SECONDS, DEFAULT_MAX_NNZ};
use crate::report::{timestamp, Report, AMPLENESS_SCHEMA, BENCH_SCHEMA, BETTI_SCHEMA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "koszul", version, about = "Koszul cohomology of curves over prime fields")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Prime of the base field [default: 10007, or the curve spec's prime].
    #[arg(long, global = true)]
    pub prime: Option<u32>,
    /// Recompute at this prime and fail on any dimension mismatch.
    #[arg(long, global = true)]
    pub second_prime: Option<u32>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Wall-clock budget per check or command [default: 1800].
    #[arg(long, global = true)]
    pub budget_seconds: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Include wall-clock timings in JSON output (breaks byte-identical reruns).
    #[arg(long, global = true)]
    pub timings: bool,
    /// Directory for the binary matrix cache.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads for sweeps and parallel rank computation.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Per-matrix nonzero cap [default: 100000000].
    #[arg(long, global = true)]
    pub max_nnz: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Betti table of K_{p,q}(C, B; L).
    Betti(BettiArgs),
    /// Run one named check (sweeps expand to a grid).
    Check(CheckArgs),
    /// Run an experiment config file.
    Sweep(SweepArgs),
    /// p-very-ampleness verdict for a divisor.
    Pample(PampleArgs),
    /// Benchmark rank methods on the largest differential or a random matrix.
    RankBench(RankBenchArgs),
}

#[derive(Args, Debug)]
pub struct BettiArgs {
    /// Preset name, curve JSON file, or inline JSON.
    #[arg(long)]
    pub curve: String,
    #[arg(long = "B", alias = "b", default_value = "trivial")]
    pub b: String,
    #[arg(long = "L", alias = "l")]
    pub l: String,
    /// Largest p [default: r].
    #[arg(long)]
    pub pmax: Option<i64>,
    #[arg(long = "q", value_delimiter = ',', default_value = "0,1,2")]
    pub qs: Vec<i64>,
    /// Write the section space bases as CSV files into this directory.
    #[arg(long)]
    pub dump_spaces: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(value_enum)]
    pub name: CheckId,
    #[arg(long)]
    pub curve: String,
    #[arg(long = "B", alias = "b")]
    pub b: Option<String>,
    #[arg(long = "L", alias = "l")]
    pub l: Option<String>,
    #[arg(long)]
    pub p: Option<i64>,
    #[arg(long)]
    pub q: Option<i64>,
    /// Overrides the curve's gonality metadata.
    #[arg(long)]
    pub gonality: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub ps: Option<Vec<i64>>,
    #[arg(long, value_delimiter = ',')]
    pub b_degrees: Option<Vec<i64>>,
    #[arg(long, value_delimiter = ',')]
    pub l_degrees: Option<Vec<i64>>,
    #[arg(long)]
    pub variants: Option<u32>,
    #[command(flatten)]
    pub ampleness: AmplenessArgs,
}

#[derive(Args, Debug, Clone)]
pub struct AmplenessArgs {
    #[arg(long)]
    pub max_multiplicity: Option<u32>,
    #[arg(long)]
    pub exhaustive_cap: Option<u64>,
    #[arg(long)]
    pub random_divisors: Option<usize>,
    #[arg(long)]
    pub point_pool: Option<usize>,
}

impl AmplenessArgs {
    fn apply(&self, mut c: AmplenessConfig) -> AmplenessConfig {
        c.max_multiplicity = self.max_multiplicity.or(c.max_multiplicity);
        c.exhaustive_cap = self.exhaustive_cap.unwrap_or(c.exhaustive_cap);
        c.random_divisors = self.random_divisors.unwrap_or(c.random_divisors);
        c.point_pool = self.point_pool.unwrap_or(c.point_pool);
        c
    }
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    pub config: PathBuf,
}

#[derive(Args, Debug)]
pub struct PampleArgs {
    #[arg(long)]
    pub curve: String,
    #[arg(long = "B", alias = "b")]
    pub b: String,
    #[arg(long)]
    pub p: usize,
    #[command(flatten)]
    pub ampleness: AmplenessArgs,
}

#[derive(Args, Debug)]
pub struct RankBenchArgs {
    #[arg(long, required_unless_present = "random")]
    pub curve: Option<String>,
    #[arg(long = "B", alias = "b", default_value = "trivial")]
    pub b: String,
    #[arg(long = "L", alias = "l")]
    pub l: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub q: i64,
    #[arg(long)]
    pub pmax: Option<i64>,
    /// Random matrix `ROWSxCOLS` instead of a curve differential.
    #[arg(long, conflicts_with = "curve")]
    pub random: Option<String>,
    #[arg(long, default_value_t = 0.01)]
    pub density: f64,
    /// Also run Wiedemann.
    #[arg(long)]
    pub wiedemann: bool,
    /// Also run the dense mod-p oracle.
    #[arg(long)]
    pub oracle: bool,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                eprintln!("run `koszul --help` for usage");
                EXIT_USAGE
            } else {
                EXIT_INTERNAL
            }
        }
    }
}

pub fn execute(cli: Cli) -> Result<i32> {
    let g = cli.global;
    if let Some(p) = g.second_prime {
        PrimeField::new(p)?;
    }
    match cli.command {
        Command::Betti(a) => betti(&g, a),
        Command::Check(a) => check(&g, a),
        Command::Sweep(a) => sweep(&g, a),
        Command::Pample(a) => pample(&g, a),
        Command::RankBench(a) => rank_bench(&g, a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| HarnessError::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn curve_arg(g: &GlobalOpts, arg: &str) -> Result<CurveModel> {
    resolve_curve(arg, g.prime)
}

fn parse_divisor(curve: &CurveModel, recipe: &str) -> Result<DivisorSpec> {
    DivisorSpec::parse(curve, recipe).map_err(|e| HarnessError::Usage(format!("divisor `{recipe}`: {e}")))
}

fn open_cache(g: &GlobalOpts) -> Result<Option<MatrixCache>> {
    g.cache_dir.as_ref().map(MatrixCache::open).transpose()
}

fn context(g: &GlobalOpts, config: Option<&ExperimentConfig>, ampleness: AmplenessConfig) -> Result<CheckContext> {
    Ok(CheckContext {
        seed: g.seed.or(config.and_then(|c| c.seed)).unwrap_or(0),
        second_prime: g.second_prime.or(config.and_then(|c| c.second_prime)),
        budget_seconds: Some(g.budget_seconds.or(config.and_then(|c| c.budget_seconds)).unwrap_or(DEFAULT_BUDGET_SECONDS)),
        max_nnz: g.max_nnz.or(config.and_then(|c| c.max_nnz)).unwrap_or(DEFAULT_MAX_NNZ),
        timings: g.timings,
        cache: open_cache(g)?,
        ampleness,
    })
}

fn worker_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| HarnessError::Usage(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

#[derive(Serialize)]
struct EulerCheck {
    diagonal: i64,
    holds: bool,
}

#[derive(Serialize)]
struct CellError {
    p: i64,
    q: i64,
    message: String,
}

#[derive(Serialize)]
struct BettiCrossPrime {
    prime: u32,
    agree: bool,
    csv: String,
}

#[derive(Serialize)]
struct BettiDoc {
    schema: &'static str,
    generated_at: String,
    curve: CurveSpec,
    b: String,
    l: String,
    table: BettiTable,
    euler_checks: Vec<EulerCheck>,
    errors: Vec<CellError>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cross_prime: Option<BettiCrossPrime>,
}

fn betti(g: &GlobalOpts, a: BettiArgs) -> Result<i32> {
    let curve = curve_arg(g, &a.curve)?;
    let b = parse_divisor(&curve, &a.b)?;
    let l = parse_divisor(&curve, &a.l)?;
    if a.qs.is_empty() {
        return Err(HarnessError::Usage("--q needs at least one value".into()));
    }
    let seed = g.seed.unwrap_or(0);
    let n = h0_h1(&curve, &l)?.h0;
    let pmax = a.pmax.unwrap_or(n - 1);
    if pmax < 0 {
        return Err(HarnessError::Usage("--pmax must be nonnegative".into()));
    }
    let cache = open_cache(g)?;
    let budget = Some(g.budget_seconds.unwrap_or(DEFAULT_BUDGET_SECONDS));
    let max_nnz = g.max_nnz.unwrap_or(DEFAULT_MAX_NNZ);
    let table_at = |curve: &CurveModel, b: &DivisorSpec, l: &DivisorSpec| {
        let ranker = HarnessRanker::new(budget, max_nnz, g.timings, cache.as_ref());
        worker_pool(g.workers, || compute::betti_table(curve, b, l, pmax, &a.qs, seed, &ranker))
    };
    let run = table_at(&curve, &b, &l)??;
    let table = run.table;
    let euler: Vec<EulerCheck> =
        table.euler_checks(n as usize).into_iter().map(|(diagonal, holds)| EulerCheck { diagonal, holds }).collect();
    let errors: Vec<CellError> =
        run.errors.iter().map(|((p, q), e)| CellError { p: *p, q: *q, message: e.to_string() }).collect();
    for e in &errors {
        eprintln!("warning: differential ({}, {}) not ranked: {}", e.p, e.q, e.message);
    }

    let cross_prime = match g.second_prime.filter(|&p| p != curve.field().modulus()) {
        Some(p2) => {
            let other = curve.with_prime(p2)?;
            let t2 = table_at(&other, &parse_divisor(&other, &a.b)?, &parse_divisor(&other, &a.l)?)??.table;
            let agree = t2.cells.iter().zip(&table.cells).all(|(x, y)| match (x.dim(), y.dim()) {
                (Some(u), Some(v)) => u == v,
                _ => true,
            });
            if !agree {
                eprintln!("dimensions differ at prime {p2}");
            }
            Some(BettiCrossPrime { prime: p2, agree, csv: t2.to_csv() })
        }
        None => None,
    };

    if let Some(dir) = &a.dump_spaces {
        let complex = table_complex(&curve, &b, &l, &a.qs, seed)?;
        dump_spaces(&complex, dir)?;
    }

    let failed = euler.iter().any(|e| !e.holds) || cross_prime.as_ref().is_some_and(|c| !c.agree);
    let text = match g.format.unwrap_or(Format::Csv) {
        Format::Csv => table.to_csv(),
        Format::Json => to_json(&BettiDoc {
            schema: BETTI_SCHEMA,
            generated_at: timestamp(),
            curve: curve.spec().clone(),
            b: a.b.clone(),
            l: a.l.clone(),
            table,
            euler_checks: euler,
            errors,
            cross_prime,
        })?,
    };
    emit(g.out.as_deref(), &text)?;
    Ok(if failed { EXIT_CHECK_FAILED } else { EXIT_OK })
}

/// One CSV per space: `section,x_exp,y_exp,z_exp,coefficient`.
fn dump_spaces(complex: &KoszulComplex, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let write = |name: String, space: &SectionSpace| -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| HarnessError::Usage(e.to_string());
        w.write_record(["section", "x_exp", "y_exp", "z_exp", "coefficient"]).map_err(io)?;
        let monomials = space.ambient().monomials();
        for (s, v) in space.basis().iter().enumerate() {
            for &(i, c) in v {
                let m = monomials[i as usize];
                let row = [s.to_string(), m[0].to_string(), m[1].to_string(), m[2].to_string(), c.value().to_string()];
                w.write_record(&row).map_err(io)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Usage(e.to_string()))?;
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| HarnessError::io(&path, e))
    };
    write("V.csv".into(), complex.v())?;
    let (lo, hi) = complex.q_range();
    for q in lo..=hi {
        if let Some(w) = complex.w(q) {
            write(format!("W_{q}.csv"), w)?;
        }
    }
    Ok(())
}

fn finish_report(g: &GlobalOpts, report: Report, out: Option<&Path>) -> Result<i32> {
    match (g.format.unwrap_or(Format::Json), out) {
        (Format::Json, Some(path)) => {
            emit(Some(path), &to_json(&report)?)?;
            emit(Some(&path.with_extension("csv")), &report.to_csv())?;
        }
        (Format::Json, None) => emit(None, &to_json(&report)?)?,
        (Format::Csv, out) => emit(out, &report.to_csv())?,
    }
    let s = &report.summary;
    eprintln!(
        "{} checks: {} pass, {} fail, {} hypothesis_unmet, {} budget_exceeded",
        s.total, s.pass, s.fail, s.hypothesis_unmet, s.budget_exceeded
    );
    for &i in &s.counterexamples {
        eprintln!("COUNTEREXAMPLE in report {i}: {:?}", report.reports[i].inputs);
    }
    Ok(if report.any_failed() { EXIT_CHECK_FAILED } else { EXIT_OK })
}

fn check(g: &GlobalOpts, a: CheckArgs) -> Result<i32> {
    let curve = curve_arg(g, &a.curve)?;
    let ctx = context(g, None, a.ampleness.apply(AmplenessConfig::default()))?;
    let req = CheckRequest {
        check: Some(a.name),
        b: a.b,
        l: a.l,
        p: a.p,
        q: a.q,
        gonality: a.gonality,
        ps: a.ps,
        b_degrees: a.b_degrees,
        l_degrees: a.l_degrees,
        variants: a.variants,
    };
    let reports = run_requests(&ctx, std::slice::from_ref(&curve), &[req], g.workers)?;
    finish_report(g, Report::new(reports), g.out.as_deref())
}

fn sweep(g: &GlobalOpts, a: SweepArgs) -> Result<i32> {
    let config = ExperimentConfig::load(&a.config)?;
    let prime = g.prime.or(config.prime);
    let base_dir = a.config.parent();
    let curves: Vec<CurveModel> =
        config.curves.iter().map(|c: &CurveEntry| c.resolve(prime, base_dir)).collect::<Result<_>>()?;
    let ctx = context(g, Some(&config), config.ampleness.unwrap_or_default())?;
    let reports = run_requests(&ctx, &curves, &config.checks, g.workers.or(config.workers))?;
    let out = g.out.clone().or(config.out.clone());
    finish_report(g, Report::new(reports), out.as_deref())
}

#[derive(Serialize)]
struct AmplenessDoc {
    schema: &'static str,
    generated_at: String,
    curve: CurveSpec,
    curve_id: String,
    b: String,
    verdict: AmplenessVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness_reverified: Option<bool>,
}

fn pample(g: &GlobalOpts, a: PampleArgs) -> Result<i32> {
    let curve = curve_arg(g, &a.curve)?;
    let b = parse_divisor(&curve, &a.b)?;
    let seed = g.seed.unwrap_or(0);
    let config = a.ampleness.apply(AmplenessConfig::default());
    let verdict = is_p_very_ample(&curve, &b, a.p, &config, seed)?;
    let witness_reverified = match &verdict.outcome {
        AmplenessOutcome::FailureWitness { divisor, .. } => Some(witness_reverifies(&curve, &b, divisor, seed)?),
        AmplenessOutcome::NoFailureFound => None,
    };
    let text = match g.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&AmplenessDoc {
            schema: AMPLENESS_SCHEMA,
            generated_at: timestamp(),
            curve: curve.spec().clone(),
            curve_id: curve.id(),
            b: a.b.clone(),
            verdict,
            witness_reverified,
        })?,
        Format::Csv => ampleness_csv(&a.b, &verdict)?,
    };
    emit(g.out.as_deref(), &text)?;
    Ok(if witness_reverified == Some(false) { EXIT_CHECK_FAILED } else { EXIT_OK })
}

fn ampleness_csv(b: &str, v: &AmplenessVerdict) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| HarnessError::Usage(e.to_string());
    w.write_record([
        "p", "b", "h0", "outcome", "witness", "jet_rank", "exhaustive_points", "exhaustive_divisors", "sampled_divisors",
        "max_multiplicity", "all_rational_divisors",
    ])
    .map_err(err)?;
    let (outcome, witness, jet_rank) = match &v.outcome {
        AmplenessOutcome::FailureWitness { divisor, jet_rank } => {
            let pts: Vec<String> = divisor
                .points()
                .iter()
                .map(|(p, m)| {
                    let c = p.raw();
                    format!("{m}*P[{},{},{}]", c[0], c[1], c[2])
                })
                .collect();
            ("failure_witness", pts.join(" + "), jet_rank.to_string())
        }
        AmplenessOutcome::NoFailureFound => ("no_failure_found", String::new(), String::new()),
    };
    let c = &v.coverage;
    w.write_record([
        v.p.to_string(),
        b.to_string(),
        v.h0.to_string(),
        outcome.to_string(),
        witness,
        jet_rank,
        c.exhaustive_points.to_string(),
        c.exhaustive_divisors.to_string(),
        c.sampled_divisors.to_string(),
        c.max_multiplicity.to_string(),
        c.all_rational_divisors.to_string(),
    ])
    .map_err(err)?;
    let bytes = w.into_inner().map_err(|e| HarnessError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[derive(Serialize)]
struct DifferentialShape {
    p: i64,
    q: i64,
    rows: usize,
    cols: usize,
    nnz: usize,
}

#[derive(Serialize)]
struct BenchRun {
    method: String,
    rank: usize,
    probabilistic: bool,
    /// `peak_nnz - initial_nnz` is the fill-in of elimination.
    stats: RankStats,
    elapsed_seconds: f64,
}

#[derive(Serialize)]
struct BenchDoc {
    schema: &'static str,
    generated_at: String,
    source: String,
    prime: u32,
    differentials: Vec<DifferentialShape>,
    largest: DifferentialShape,
    runs: Vec<BenchRun>,
}

fn timed(method: &str, f: impl FnOnce() -> koszul_core::Result<RankResult>) -> Result<BenchRun> {
    let start = Instant::now();
    let r = f()?;
    Ok(BenchRun {
        method: method.into(),
        rank: r.rank,
        probabilistic: r.probabilistic,
        stats: r.stats,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

fn parse_shape(s: &str) -> Result<(usize, usize)> {
    let bad = || HarnessError::Usage(format!("--random expects ROWSxCOLS, got `{s}`"));
    let (r, c) = s.split_once('x').ok_or_else(bad)?;
    Ok((r.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?))
}

fn rank_bench(g: &GlobalOpts, a: RankBenchArgs) -> Result<i32> {
    let seed = g.seed.unwrap_or(0);
    let (field, source, differentials, matrix, largest) = match (&a.random, &a.curve) {
        (Some(shape), _) => {
            let (rows, cols) = parse_shape(shape)?;
            if !(0.0..=1.0).contains(&a.density) {
                return Err(HarnessError::Usage("--density must lie in [0, 1]".into()));
            }
            let field = PrimeField::new(g.prime.unwrap_or(DEFAULT_PRIME))?;
            let m = SparseMatrix::random(field, rows, cols, a.density, seed);
            let shape = DifferentialShape { p: 0, q: 0, rows, cols, nnz: m.nnz() };
            (field, format!("random {rows}x{cols} density {}", a.density), Vec::new(), m, shape)
        }
        (None, Some(curve_arg_s)) => {
            let curve = curve_arg(g, curve_arg_s)?;
            let l_recipe = a.l.as_deref().ok_or_else(|| HarnessError::Usage("--L is required with --curve".into()))?;
            let b = parse_divisor(&curve, &a.b)?;
            let l = parse_divisor(&curve, l_recipe)?;
            let complex = KoszulComplex::new(&curve, &b, &l, a.q - 1, a.q + 1, seed)?;
            let pmax = a.pmax.unwrap_or(complex.r());
            let mut shapes = Vec::new();
            let mut best: Option<(usize, SparseMatrix)> = None;
            for p in 0..=pmax {
                let m = complex.differential(p, a.q)?;
                shapes.push(DifferentialShape { p, q: a.q, rows: m.rows(), cols: m.cols(), nnz: m.nnz() });
                if best.as_ref().is_none_or(|(_, bm)| m.nnz() > bm.nnz()) {
                    best = Some((shapes.len() - 1, m));
                }
            }
            let (i, m) = best.ok_or_else(|| HarnessError::Usage("no differentials in range".into()))?;
            let s = &shapes[i];
            let largest = DifferentialShape { p: s.p, q: s.q, rows: s.rows, cols: s.cols, nnz: s.nnz };
            let source = format!("{} B={} L={}", curve.id(), a.b, l_recipe);
            (curve.field(), source, shapes, m, largest)
        }
        (None, None) => return Err(HarnessError::Usage("rank-bench needs --curve or --random".into())),
    };
    let mut runs = vec![timed("elimination", || rank_sparse(field, &matrix, Budget::UNLIMITED))?];
    if a.wiedemann {
        runs.push(timed("wiedemann", || rank_wiedemann(field, &matrix, seed, 2))?);
    }
    if a.oracle {
        runs.push(timed("dense_oracle", || rank_dense_oracle(field, &matrix, OracleArithmetic::ModP))?);
    }
    let agree = runs.iter().all(|r| r.rank == runs[0].rank);
    let text = match g.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&BenchDoc {
            schema: BENCH_SCHEMA,
            generated_at: timestamp(),
            source,
            prime: field.modulus(),
            differentials,
            largest,
            runs,
        })?,
        Format::Csv => {
            let mut s = String::from("method,rows,cols,nnz,rank,peak_nnz,elapsed_seconds\n");
            for r in &runs {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{:.6}\n",
                    r.method, largest.rows, largest.cols, largest.nnz, r.rank, r.stats.peak_nnz, r.elapsed_seconds
                ));
            }
            s
        }
    };
    emit(g.out.as_deref(), &text)?;
    Ok(if agree { EXIT_OK } else { EXIT_CHECK_FAILED })
}
