//! Named theorem checks. Each check audits its hypotheses by computation,
//! refuses to conclude when they fail, and records the cells it computed.

use std::time::Instant;

use koszul_core::ample::{is_p_very_ample, AmplenessConfig, AmplenessVerdict};
use koszul_core::curve::{CurveKind, CurveModel, CurveSpec};
use koszul_core::koszul::{strand_boundary, KoszulCell, KoszulComplex, StrandBoundary, StrandStrategy};
use koszul_core::sections::{h0_h1, Cohomology, DivisorSpec};
use koszul_core::Error;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cache::MatrixCache;
use crate::compute;
use crate::error::{HarnessError, Result};
use crate::ranker::{is_budget_error, HarnessRanker, DEFAULT_MAX_NNZ};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum CheckId {
    Thm11,
    Thm12,
    Duality,
    GreenRegression,
    VeroneseException,
    Prop32Sweep,
    Prop36Sweep,
    Cor39,
    Remark4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    HypothesisUnmet,
    BudgetExceeded,
}

/// One concrete, re-runnable check: every field a check reads is filled in.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gonality: Option<usize>,
}

/// A check as requested by a config file or the command line. Unset fields
/// take per-check defaults; sweeps expand degree grids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRequest {
    pub check: Option<CheckId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gonality: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ps: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_degrees: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_degrees: Option<Vec<i64>>,
    /// Recipes per degree: variant 0 uses as few subtracted points as possible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variants: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisAudit {
    pub name: String,
    pub holds: bool,
    /// Informational audits do not gate the check.
    pub required: bool,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cohomology: Option<Cohomology>,
}

/// A computed cell with the recipes that reproduce it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub b: String,
    pub l: String,
    pub p: i64,
    pub q: i64,
    pub dim: i64,
    pub cell: KoszulCell,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossPrime {
    pub prime: u32,
    pub agree: bool,
    /// Dimension at the second prime, in the order of `cells`.
    pub dims: Vec<Option<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: CheckId,
    pub status: CheckStatus,
    pub curve: CurveSpec,
    pub curve_id: String,
    pub genus: usize,
    pub prime: u32,
    pub seed: u64,
    pub inputs: Instance,
    pub hypotheses: Vec<HypothesisAudit>,
    pub cells: Vec<CellRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<StrandBoundary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ampleness: Vec<AmplenessVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_prime: Option<CrossPrime>,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

impl CheckReport {
    fn new(check: CheckId, curve: &CurveModel, seed: u64, inputs: Instance) -> Self {
        CheckReport {
            check,
            status: CheckStatus::Pass,
            curve: curve.spec().clone(),
            curve_id: curve.id(),
            genus: curve.genus(),
            prime: curve.field().modulus(),
            seed,
            inputs,
            hypotheses: Vec::new(),
            cells: Vec::new(),
            boundary: None,
            ampleness: Vec::new(),
            cross_prime: None,
            notes: Vec::new(),
            error: None,
            elapsed_seconds: None,
        }
    }

    fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().filter(|h| h.required).all(|h| h.holds)
    }

    fn audit(&mut self, name: impl Into<String>, holds: bool, detail: impl Into<String>) {
        self.hypotheses.push(HypothesisAudit { name: name.into(), holds, required: true, detail: detail.into(), cohomology: None });
    }

    fn info(&mut self, name: impl Into<String>, holds: bool, detail: impl Into<String>) {
        self.hypotheses.push(HypothesisAudit { name: name.into(), holds, required: false, detail: detail.into(), cohomology: None });
    }

    /// Audits `h^1(d) = 0`; an unrepresentable divisor counts as unmet.
    fn audit_h1_zero(&mut self, name: &str, curve: &CurveModel, d: koszul_core::Result<DivisorSpec>) -> koszul_core::Result<()> {
        let d = match d {
            Ok(d) => d,
            Err(Error::NotRepresentable(what)) => {
                self.audit(name, false, format!("not representable: {what}"));
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        let coh = h0_h1(curve, &d)?;
        self.hypotheses.push(HypothesisAudit {
            name: name.into(),
            holds: coh.h1 == 0,
            required: true,
            detail: format!("{}: degree {}, h0 {}, h1 {}", d.recipe(curve), coh.degree, coh.h0, coh.h1),
            cohomology: Some(coh),
        });
        Ok(())
    }

    fn record(&mut self, b: &str, l: &str, cell: KoszulCell) -> i64 {
        let dim = cell.dim;
        self.cells.push(CellRecord { b: b.into(), l: l.into(), p: cell.p, q: cell.q, dim, cell });
        dim
    }
}

/// Settings shared by every check in a run.
#[derive(Clone, Debug)]
pub struct CheckContext {
    pub seed: u64,
    pub second_prime: Option<u32>,
    pub budget_seconds: Option<f64>,
    pub max_nnz: usize,
    pub timings: bool,
    pub cache: Option<MatrixCache>,
    pub ampleness: AmplenessConfig,
}

impl Default for CheckContext {
    fn default() -> Self {
        CheckContext {
            seed: 0,
            second_prime: None,
            budget_seconds: Some(crate::ranker::DEFAULT_BUDGET_SECONDS),
            max_nnz: DEFAULT_MAX_NNZ,
            timings: false,
            cache: None,
            ampleness: AmplenessConfig::default(),
        }
    }
}

impl CheckContext {
    fn ranker(&self) -> HarnessRanker<'_> {
        HarnessRanker::new(self.budget_seconds, self.max_nnz, self.timings, self.cache.as_ref())
    }
}

/// Rational points drawn for generated recipes are taken from this prefix of
/// the enumeration, so recipes stay meaningful at a second prime.
const RECIPE_POINT_POOL: usize = 48;

fn class_name(curve: &CurveModel) -> &'static str {
    match curve.kind() {
        CurveKind::Hyperelliptic => "inf",
        CurveKind::Plane => "H",
    }
}

/// A generated divisor `base * class - sum P<i>` with distinct 1-based indices.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Recipe {
    base: i64,
    points: Vec<usize>,
}

impl Recipe {
    fn render(&self, curve: &CurveModel) -> String {
        let mut s = format!("{}*{}", self.base, class_name(curve));
        for i in &self.points {
            s.push_str(&format!(" - P{i}"));
        }
        s
    }

    fn tensor(&self, other: &Recipe) -> Recipe {
        let mut points = self.points.clone();
        points.extend(&other.points);
        points.sort_unstable();
        Recipe { base: self.base + other.base, points }
    }
}

/// Divisor of degree `d`: the smallest base multiple reaching `d`, raised by
/// `variant`, minus seeded distinct points avoiding `taken`.
fn divisor_of_degree(curve: &CurveModel, d: i64, variant: u32, salt: u64, taken: &[usize]) -> Result<Recipe> {
    let bd = curve.base_degree();
    let base = (d + bd - 1).div_euclid(bd) + variant as i64;
    let k = (base * bd - d) as usize;
    let mut pool: Vec<usize> = (1..=RECIPE_POINT_POOL).filter(|i| !taken.contains(i)).collect();
    let available = curve.enumerate_points(RECIPE_POINT_POOL).points.len();
    pool.retain(|&i| i <= available);
    if pool.len() < k {
        return Err(Error::PointShortfall { required: k, available: pool.len() }.into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(salt);
    pool.shuffle(&mut rng);
    let mut points = pool[..k].to_vec();
    points.sort_unstable();
    Ok(Recipe { base, points })
}

fn salt(seed: u64, parts: &[i64]) -> u64 {
    parts.iter().fold(seed ^ 0x2545_f491_4f6c_dd1d, |acc, &x| {
        (acc ^ x as u64).wrapping_mul(0x1000_0000_01b3).rotate_left(17)
    })
}

fn degree_of(curve: &CurveModel, recipe: &str) -> Result<i64> {
    Ok(DivisorSpec::parse(curve, recipe)?.degree(curve))
}

/// Smallest base multiple of degree at least `d`.
fn base_multiple_at_least(curve: &CurveModel, d: i64) -> String {
    let bd = curve.base_degree();
    format!("{}*{}", (d + bd - 1).div_euclid(bd), class_name(curve))
}

fn exact_degree(curve: &CurveModel, d: i64, seed: u64, role: i64) -> Result<String> {
    Ok(divisor_of_degree(curve, d, 0, salt(seed, &[role, d]), &[])?.render(curve))
}

fn range(lo: i64, hi: i64) -> Vec<i64> {
    (lo..=hi).collect()
}

fn missing(check: CheckId, what: &str) -> HarnessError {
    HarnessError::Usage(format!("{check:?} needs {what}"))
}

/// Expands a request into concrete instances in deterministic grid order.
pub fn expand(curve: &CurveModel, req: &CheckRequest, seed: u64) -> Result<Vec<(CheckId, Instance)>> {
    let check = req.check.ok_or_else(|| HarnessError::Usage("check entry without a `check` name".into()))?;
    let g = curve.genus() as i64;
    let f = &Instance { b: req.b.clone(), l: req.l.clone(), p: req.p, q: req.q, gonality: req.gonality };
    let variants = req.variants.unwrap_or(2).max(1);
    let mut out = Vec::new();
    let one = |inst: Instance| vec![(check, inst)];
    match check {
        CheckId::Thm11 => {
            let l = f.l.clone().unwrap_or_else(|| base_multiple_at_least(curve, 4 * g - 3));
            return Ok(one(Instance { l: Some(l), gonality: f.gonality, ..Default::default() }));
        }
        CheckId::Duality => {
            let l = f.l.clone().unwrap_or_else(|| base_multiple_at_least(curve, 2 * g + 1));
            let b = f.b.clone().unwrap_or_else(|| "trivial".into());
            return Ok(one(Instance { b: Some(b), l: Some(l), p: f.p, q: f.q, gonality: None }));
        }
        CheckId::VeroneseException => {
            let l = f.l.clone().unwrap_or_else(|| "2*K".into());
            return Ok(one(Instance { l: Some(l), ..Default::default() }));
        }
        CheckId::GreenRegression => {
            let degrees = match (&f.l, &req.l_degrees) {
                (Some(l), _) => return Ok(one(Instance { l: Some(l.clone()), gonality: f.gonality, ..Default::default() })),
                (None, Some(d)) => d.clone(),
                (None, None) => range(2 * g + 1, 2 * g + 3),
            };
            for d in degrees {
                let l = exact_degree(curve, d, seed, 1)?;
                out.push((check, Instance { l: Some(l), gonality: f.gonality, ..Default::default() }));
            }
        }
        CheckId::Thm12 => {
            if let (Some(b), Some(l), Some(p)) = (&f.b, &f.l, f.p) {
                return Ok(one(Instance { b: Some(b.clone()), l: Some(l.clone()), p: Some(p), ..Default::default() }));
            }
            if f.b.is_some() || f.l.is_some() || (f.p.is_some() && req.ps.is_some()) {
                return Err(missing(check, "--B, --L and --p together, or none of them"));
            }
            // B of degree >= 2g + p, and L = B + A with deg A >= 2g - 1 so that
            // L - B is representable
            let ps = req.ps.clone().or(f.p.map(|p| vec![p])).unwrap_or_else(|| vec![1, 2]);
            for p in ps {
                let b_degrees = req.b_degrees.clone().unwrap_or_else(|| range(2 * g + p, 2 * g + p + 1));
                for db in b_degrees {
                    let a_degrees = req.l_degrees.clone().map_or_else(
                        || range(2 * g - 1, 2 * g),
                        |ls| ls.iter().map(|dl| dl - db).collect(),
                    );
                    for da in a_degrees {
                        for v in 0..variants {
                            let b = divisor_of_degree(curve, db, v, salt(seed, &[2, p, db, da, v as i64]), &[])?;
                            let a = divisor_of_degree(curve, da, v, salt(seed, &[3, p, db, da, v as i64]), &b.points)?;
                            let l = b.tensor(&a);
                            out.push((
                                check,
                                Instance { b: Some(b.render(curve)), l: Some(l.render(curve)), p: Some(p), ..Default::default() },
                            ));
                        }
                    }
                }
            }
        }
        CheckId::Prop32Sweep | CheckId::Prop36Sweep => {
            let ps = req.ps.clone().or(f.p.map(|p| vec![p])).unwrap_or_else(|| {
                if check == CheckId::Prop32Sweep { vec![1, 2] } else { vec![1] }
            });
            for p in ps {
                let (b_lo, l_lo) = if check == CheckId::Prop32Sweep {
                    (2 * g + 2 * p + 1, 2 * g + 2 * p)
                } else {
                    (2 * g + p + 1, 2 * g + 2 * p + 1)
                };
                let b_degrees = req.b_degrees.clone().unwrap_or_else(|| range(b_lo, b_lo + 2));
                let l_degrees = req.l_degrees.clone().unwrap_or_else(|| range(l_lo, l_lo + 3));
                for &db in &b_degrees {
                    for &dl in &l_degrees {
                        for v in 0..variants {
                            let s = salt(seed, &[check as i64, p, db, dl, v as i64]);
                            let b = divisor_of_degree(curve, db, v, s, &[])?;
                            let l = divisor_of_degree(curve, dl, v, s.rotate_left(7), &[])?;
                            out.push((
                                check,
                                Instance { b: Some(b.render(curve)), l: Some(l.render(curve)), p: Some(p), ..Default::default() },
                            ));
                        }
                    }
                }
            }
        }
        CheckId::Cor39 | CheckId::Remark4 => {
            let ps = req.ps.clone().or(f.p.map(|p| vec![p])).unwrap_or_else(|| vec![0, 1]);
            for p in ps {
                let lo = if check == CheckId::Cor39 { 2 * g + 4 * p + 1 } else { 4 * g - 5 };
                let degrees = match (&f.l, &req.l_degrees) {
                    (Some(l), _) => vec![degree_of(curve, l)?],
                    (None, Some(d)) => d.clone(),
                    (None, None) => range(lo, lo + 1),
                };
                for d in degrees {
                    let l = match &f.l {
                        Some(l) => l.clone(),
                        None => exact_degree(curve, d, seed, 4 + p)?,
                    };
                    out.push((check, Instance { l: Some(l), p: Some(p), gonality: f.gonality, ..Default::default() }));
                }
            }
        }
    }
    Ok(out)
}

/// Parses every recipe of an instance, so malformed input surfaces before
/// any computation.
pub fn validate(curve: &CurveModel, inst: &Instance) -> Result<()> {
    for r in [&inst.b, &inst.l].into_iter().flatten() {
        DivisorSpec::parse(curve, r)?;
    }
    if inst.p.is_some_and(|p| p < 0) {
        return Err(HarnessError::Usage("p must be nonnegative".into()));
    }
    Ok(())
}

/// Runs one instance. Budget exhaustion maps to `budget_exceeded`; any other
/// engine error is an inconsistency and reported as `fail`.
pub fn run(ctx: &CheckContext, curve: &CurveModel, check: CheckId, inst: &Instance) -> CheckReport {
    let start = Instant::now();
    let mut report = CheckReport::new(check, curve, ctx.seed, inst.clone());
    let outcome = match check {
        CheckId::Thm11 => thm11(ctx, curve, inst, &mut report),
        CheckId::Thm12 => thm12(ctx, curve, inst, &mut report),
        CheckId::Duality => duality(ctx, curve, inst, &mut report),
        CheckId::GreenRegression => green(ctx, curve, inst, &mut report),
        CheckId::VeroneseException => veronese(ctx, curve, inst, &mut report),
        CheckId::Prop32Sweep | CheckId::Prop36Sweep => degree_bound(ctx, curve, check, inst, &mut report),
        CheckId::Cor39 => cor39(ctx, curve, inst, &mut report),
        CheckId::Remark4 => remark4(ctx, curve, inst, &mut report),
    };
    match outcome {
        Ok(status) => report.status = status,
        Err(e) => {
            report.status = if is_budget_error(&e) { CheckStatus::BudgetExceeded } else { CheckStatus::Fail };
            report.error = Some(e.to_string());
        }
    }
    if matches!(report.status, CheckStatus::Pass | CheckStatus::Fail) && !report.cells.is_empty() {
        if let Some(p2) = ctx.second_prime.filter(|&p2| p2 != curve.field().modulus()) {
            let cp = cross_prime(ctx, curve, p2, &report.cells);
            if !cp.agree {
                report.status = CheckStatus::Fail;
                report.notes.push(format!("dimensions differ at prime {p2}"));
            }
            report.cross_prime = Some(cp);
        }
    }
    if ctx.timings {
        report.elapsed_seconds = Some(start.elapsed().as_secs_f64());
    }
    report
}

fn recipe<'a>(inst: &'a Option<String>, what: &str) -> koszul_core::Result<&'a str> {
    inst.as_deref().ok_or_else(|| Error::Parse(format!("missing {what}")))
}

fn gonality_of(curve: &CurveModel, inst: &Instance, report: &mut CheckReport) -> Option<usize> {
    let gon = inst.gonality.or(curve.gonality());
    report.audit(
        "gonality known",
        gon.is_some(),
        gon.map_or("no gonality metadata; pass --gonality".into(), |g| format!("gonality {g}")),
    );
    gon
}

fn strand_records(report: &mut CheckReport, l: &str, boundary: &StrandBoundary) {
    for w in &boundary.witnesses {
        let b = if w.via_dual { "canonical" } else { "trivial" };
        report.record(b, l, w.cell.clone());
    }
}

/// `dim K_{p,1}(C; L)` through the cheaper side of duality.
fn strand_cell(ctx: &CheckContext, curve: &CurveModel, l: &DivisorSpec, r: i64, p: i64) -> koszul_core::Result<(KoszulCell, bool)> {
    let ranker = ctx.ranker();
    if 2 * p > r {
        let k = DivisorSpec::canonical(curve);
        Ok((compute::linear_cell(curve, &k, l, r - 1 - p, ctx.seed, &ranker)?, true))
    } else {
        Ok((compute::linear_cell(curve, &DivisorSpec::trivial(), l, p, ctx.seed, &ranker)?, false))
    }
}

fn thm11(ctx: &CheckContext, curve: &CurveModel, inst: &Instance, report: &mut CheckReport) -> koszul_core::Result<CheckStatus> {
    let l_recipe = recipe(&inst.l, "L")?;
    let l = DivisorSpec::parse(curve, l_recipe)?;
    let g = curve.genus() as i64;
    let Some(gon) = gonality_of(curve, inst, report) else { return Ok(CheckStatus::HypothesisUnmet) };
    let k = DivisorSpec::canonical(curve);
    report.audit_h1_zero("h1(L - K) = 0", curve, l.difference(&k))?;
    let deg = l.degree(curve);
    report.info("deg L >= 4g - 3", deg >= 4 * g - 3, format!("deg L = {deg}, 4g - 3 = {}", 4 * g - 3));

    // computed even when the hypothesis fails, to record the deviation
    let boundary = strand_boundary(curve, &l, StrandStrategy::Auto, Some(gon), ctx.seed, &ctx.ranker())?;
    strand_records(report, l_recipe, &boundary);
    let expected = boundary.expected.max(0);
    let k11 = match boundary.witnesses.iter().find(|w| w.p == 1) {
        Some(w) => w.dim,
        None if boundary.r >= 2 => {
            let (cell, _) = strand_cell(ctx, curve, &l, boundary.r, 1)?;
            report.record("trivial", l_recipe, cell)
        }
        None => 0,
    };
    let k11_ok = (k11 != 0) == (expected >= 1);
    report.notes.push(format!(
        "strand ends at p = {}, r - gon = {}, dim K_1,1 = {k11}",
        boundary.last_nonzero_p, boundary.expected
    ));
    let agrees = boundary.last_nonzero_p == expected && k11_ok;
    report.boundary = Some(boundary);
    if !report.hypotheses_hold() {
        if !agrees {
            report.notes.push("boundary deviates from r - gon outside the theorem's hypothesis".into());
        }
        return Ok(CheckStatus::HypothesisUnmet);
    }
    Ok(if agrees { CheckStatus::Pass } else { CheckStatus::Fail })
}

fn record_verdict(report: &mut CheckReport, name: &str, v: AmplenessVerdict) -> bool {
    let ok = !v.failed();
    let c = &v.coverage;
    let detail = if ok {
        format!(
            "no failing rational divisor among {} exhaustive (first {} points, multiplicity <= {}) and {} sampled; {}",
            c.exhaustive_divisors,
            c.exhaustive_points,
            c.max_multiplicity,
            c.sampled_divisors,
            if c.all_rational_divisors { "all rational divisors covered" } else { "not exhaustive over rational divisors" }
        )
    } else {
        "failure witness found".to_string()
    };
    report.audit(name, ok, detail);
    report.ampleness.push(v);
    ok
}

fn thm12(ctx: &CheckContext, curve: &CurveModel, inst: &Instance, report: &mut CheckReport) -> koszul_core::Result<CheckStatus> {
    let (b_recipe, l_recipe) = (recipe(&inst.b, "B")?, recipe(&inst.l, "L")?);
    let p = inst.p.ok_or_else(|| Error::Parse("missing p".into()))?;
    let b = DivisorSpec::parse(curve, b_recipe)?;
    let l = DivisorSpec::parse(curve, l_recipe)?;
    let v = is_p_very_ample(curve, &b, p as usize, &ctx.ampleness, ctx.seed)?;
    record_verdict(report, &format!("B is {p}-very ample"), v);
    report.audit_h1_zero("h1(L) = 0", curve, Ok(l.clone()))?;
    report.audit_h1_zero("h1(L - B) = 0", curve, l.difference(&b))?;
    if !report.hypotheses_hold() {
        return Ok(CheckStatus::HypothesisUnmet);
    }
    let cell = compute::linear_cell(curve, &b, &l, p, ctx.seed, &ctx.ranker())?;
    Ok(if report.record(b_recipe, l_recipe, cell) == 0 { CheckStatus::Pass } else { CheckStatus::Fail })
}

fn duality(ctx: &CheckContext, curve: &CurveModel, inst: &Instance, report: &mut CheckReport) -> koszul_core::Result<CheckStatus> {
    let (b_recipe, l_recipe) = (recipe(&inst.b, "B")?, recipe(&inst.l, "L")?);
    let b = DivisorSpec::parse(curve, b_recipe)?;
    let l = DivisorSpec::parse(curve, l_recipe)?;
    let kb = match DivisorSpec::canonical(curve).difference(&b) {
        Ok(kb) => {
            report.audit("K - B representable", true, kb.recipe(curve));
            kb
        }
        Err(e) => {
            report.audit("K - B representable", false, e.to_string());
            return Ok(CheckStatus::HypothesisUnmet);
        }
    };
    let kb_recipe = kb.recipe(curve);
    let ranker = ctx.ranker();
    let direct = KoszulComplex::new(curve, &b, &l, -1, 3, ctx.seed)?;
    let dual = KoszulComplex::new(curve, &kb, &l, -1, 3, ctx.seed)?;
    let r = direct.r();
    let pairs: Vec<(i64, i64)> = match (inst.p, inst.q) {
        (Some(p), Some(q)) => vec![(p, q)],
        (None, None) => (0..r).flat_map(|p| (0..=2).map(move |q| (p, q))).collect(),
        _ => return Err(Error::Parse("duality takes both p and q, or neither".into())),
    };
    if pairs.iter().any(|&(p, q)| !(0..r).contains(&p) || !(0..=2).contains(&q)) {
        return Err(Error::Parse(format!("(p, q) must lie in [0, {}] x [0, 2]", r - 1)));
    }
    let mirrored: Vec<(i64, i64)> = pairs.iter().map(|&(p, q)| (r - 1 - p, 2 - q)).collect();
    let lhs = compute::cells(&direct, &pairs, &ranker)?;
    let rhs = compute::cells(&dual, &mirrored, &ranker)?;
    let mut all_equal = true;
    for (a, b) in lhs.into_iter().zip(rhs) {
        let (da, db) = (report.record(b_recipe, l_recipe, a), report.record(&kb_recipe, l_recipe, b));
        all_equal &= da == db;
    }
    report.notes.push(format!("{} pairs compared, r = {r}", pairs.len()));
    Ok(if all_equal { CheckStatus::Pass } else { CheckStatus::Fail })
}

fn green(ctx: &CheckContext, curve: &CurveModel, inst: &Instance, report: &mut CheckReport) -> koszul_core::Result<CheckStatus> {
    let l_recipe = recipe(&inst.l, "L")?;
    let l = DivisorSpec::parse(curve, l_recipe)?;
    let g = curve.genus() as i64;
    let deg = l.degree(curve);
    report.audit("deg L >= 2g + 1", deg >= 2 * g + 1, format!("deg L = {deg}"));
    if !report.hypotheses_hold() {
        return Ok(CheckStatus::HypothesisUnmet);
    }
    let r = h0_h1(curve, &l)?.h0 - 1;
    let (top, via_dual) = strand_cell(ctx, curve, &l, r, r - 1)?;
    let top_dim = report.record(if via_dual { "canonical" } else { "trivial" }, l_recipe, top);
    report.notes.push(format!("dim K_{},1 = {top_dim} (r = {r})", r - 1));
    let mut ok = top_dim == 0;

    // p = r - 2: nonvanishing exactly for hyperelliptic curves, for deg L >= 2g + 2 and r != 5
    let gon = inst.gonality.or(curve.gonality());
    match gon {
        Some(gon) if deg >= 2 * g + 2 && r != 5 && r >= 3 => {
            let (cell, via_dual) = strand_cell(ctx, curve, &l, r, r - 2)?;
            let dim = report.record(if via_dual { "canonical" } else { "trivial" }, l_recipe, cell);
            let expect_nonzero = gon == 2;
            report.notes.push(format!("dim K_{},1 = {dim}, gonality {gon}", r - 2));
            ok &= (dim != 0) == expect_nonzero;
        }
        Some(_) => report.notes.push("p = r - 2 case skipped: needs deg L >= 2g + 2 and r != 5".into()),
        None => report.notes.push("p = r - 2 case skipped: gonality unknown".into()),
    }
    Ok(if ok { CheckStatus::Pass } else { CheckStatus::Fail })
}

fn veronese(ctx: &CheckContext, curve: &CurveModel, inst: &Instance, report: &mut CheckReport) -> koszul_core::Result<CheckStatus> {
    let l_recipe = recipe(&inst.l, "L")?;
    let l = DivisorSpec::parse(curve, l_recipe)?;
    let g = curve.genus();
    let deg = l.degree(curve);
    let r = h0_h1(curve, &l)?.h0 - 1;
    report.audit("(g, deg L, r) = (3, 8, 5)", (g, deg, r) == (3, 8, 5), format!("(g, deg L, r) = ({g}, {deg}, {r})"));
    report.audit("non-hyperelliptic", curve.kind() == CurveKind::Plane, format!("{:?} model", curve.kind()));
    report.audit("L = 2K", l == DivisorSpec::canonical(curve).power(2)?, l.recipe(curve));
    if !report.hypotheses_hold() {
        return Ok(CheckStatus::HypothesisUnmet);
    }
    let k = DivisorSpec::canonical(curve);
    let h1 = h0_h1(curve, &l.difference(&k)?)?.h1;
    report.notes.push(format!("h1(L - K) = {h1}, so the degree hypothesis for the gonality equivalence fails"));
    let cell = compute::linear_cell(curve, &DivisorSpec::trivial(), &l, 3, ctx.seed, &ctx.ranker())?;
    let dim = report.record("trivial", l_recipe, cell);
    let gon = curve.gonality().map_or(-1, |g| g as i64);
    report.notes.push(format!("dim K_3,1 = {dim} with r - gon = {}", r - gon));
    Ok(if dim != 0 { CheckStatus::Pass } else { CheckStatus::Fail })
}

fn degree_bound(
    ctx: &CheckContext,
    curve: &CurveModel,
    check: CheckId,
    inst: &Instance,
    report: &mut CheckReport,
) -> koszul_core::Result<CheckStatus> {
    let (b_recipe, l_recipe) = (recipe(&inst.b, "B")?, recipe(&inst.l, "L")?);
    let p = inst.p.ok_or_else(|| Error::Parse("missing p".into()))?;
    let b = DivisorSpec::parse(curve, b_recipe)?;
    let l = DivisorSpec::parse(curve, l_recipe)?;
    let g = curve.genus() as i64;
    let (db, dl) = (b.degree(curve), l.degree(curve));
    let (b_lo, l_lo) = if check == CheckId::Prop32Sweep { (2 * g + 2 * p + 1, 2 * g + 2 * p) } else { (2 * g + p + 1, 2 * g + 2 * p + 1) };
    report.audit(format!("deg B >= {b_lo}"), db >= b_lo, format!("deg B = {db}"));
    report.audit(format!("deg L >= {l_lo}"), dl >= l_lo, format!("deg L = {dl}"));
    if !report.hypotheses_hold() {
        return Ok(CheckStatus::HypothesisUnmet);
    }
    let cell = compute::linear_cell(curve, &b, &l, p, ctx.seed, &ctx.ranker())?;
    let dim = report.record(b_recipe, l_recipe, cell);
    if dim != 0 && check == CheckId::Prop36Sweep {
        report.notes.push(format!("COUNTEREXAMPLE: dim K_{p},1(B; L) = {dim} under the stated degree bounds"));
    }
    Ok(if dim == 0 { CheckStatus::Pass } else { CheckStatus::Fail })
}

/// Candidates `K - E` for the special divisor: `E` runs over reduced sums of
/// distinct enumerated points, in lexicographic index order.
const COR39_CANDIDATES: usize = 8;

fn cor39(ctx: &CheckContext, curve: &CurveModel, inst: &Instance, report: &mut CheckReport) -> koszul_core::Result<CheckStatus> {
    let l_recipe = recipe(&inst.l, "L")?;
    let p = inst.p.ok_or_else(|| Error::Parse("missing p".into()))?;
    let l = DivisorSpec::parse(curve, l_recipe)?;
    let g = curve.genus() as i64;
    let dl = l.degree(curve);
    report.audit(format!("deg L >= {}", 2 * g + 4 * p + 1), dl >= 2 * g + 4 * p + 1, format!("deg L = {dl}"));
    let e_degree = g - 2 - 2 * p;
    if e_degree < 0 {
        report.audit("special D of degree g + 2p exists as K - E", false, format!("deg E = {e_degree} < 0"));
        return Ok(CheckStatus::HypothesisUnmet);
    }
    let k = DivisorSpec::canonical(curve);
    let pts = curve.enumerate_points(RECIPE_POINT_POOL).points;
    let mut found = None;
    let mut tried = Vec::new();
    for start in 0..COR39_CANDIDATES.min(pts.len().saturating_sub(e_degree as usize) + 1) {
        let chosen: Vec<_> = pts[start..start + e_degree as usize].iter().map(|&pt| (pt, 1)).collect();
        let d = k.minus_points(&chosen);
        let coh = h0_h1(curve, &d)?;
        if coh.h1 != 1 {
            tried.push(format!("{}: h1 = {}", d.recipe(curve), coh.h1));
            continue;
        }
        let v = is_p_very_ample(curve, &d, p as usize, &ctx.ampleness, ctx.seed)?;
        if v.failed() {
            tried.push(format!("{}: not {p}-very ample", d.recipe(curve)));
            continue;
        }
        found = Some((d, coh, v));
        break;
    }
    let Some((d, coh, v)) = found else {
        report.audit("special D of degree g + 2p with h1 = 1, p-very ample", false, tried.join("; "));
        return Ok(CheckStatus::HypothesisUnmet);
    };
    report.hypotheses.push(HypothesisAudit {
        name: "h1(D) = 1".into(),
        holds: true,
        required: true,
        detail: d.recipe(curve),
        cohomology: Some(coh),
    });
    record_verdict(report, &format!("D is {p}-very ample"), v);
    if !report.hypotheses_hold() {
        return Ok(CheckStatus::HypothesisUnmet);
    }
    let cell = compute::linear_cell(curve, &k, &l, p, ctx.seed, &ctx.ranker())?;
    Ok(if report.record("canonical", l_recipe, cell) == 0 { CheckStatus::Pass } else { CheckStatus::Fail })
}

fn remark4(ctx: &CheckContext, curve: &CurveModel, inst: &Instance, report: &mut CheckReport) -> koszul_core::Result<CheckStatus> {
    let l_recipe = recipe(&inst.l, "L")?;
    let p = inst.p.ok_or_else(|| Error::Parse("missing p".into()))?;
    let l = DivisorSpec::parse(curve, l_recipe)?;
    let g = curve.genus() as i64;
    let dl = l.degree(curve);
    report.audit(format!("deg L >= {}", 4 * g - 5), dl >= 4 * g - 5, format!("deg L = {dl}"));
    let Some(gon) = gonality_of(curve, inst, report) else { return Ok(CheckStatus::HypothesisUnmet) };
    report.audit("gon >= p + 3", gon as i64 >= p + 3, format!("gonality {gon}, p = {p}"));
    if !report.hypotheses_hold() {
        return Ok(CheckStatus::HypothesisUnmet);
    }
    let k = DivisorSpec::canonical(curve);
    let v = is_p_very_ample(curve, &k, (p + 1) as usize, &ctx.ampleness, ctx.seed)?;
    record_verdict(report, &format!("K is {}-very ample", p + 1), v);
    if !report.hypotheses_hold() {
        return Ok(CheckStatus::HypothesisUnmet);
    }
    let cell = compute::linear_cell(curve, &k, &l, p, ctx.seed, &ctx.ranker())?;
    Ok(if report.record("canonical", l_recipe, cell) == 0 { CheckStatus::Pass } else { CheckStatus::Fail })
}

/// Recomputes every recorded cell at `prime` from the same recipes.
fn cross_prime(ctx: &CheckContext, curve: &CurveModel, prime: u32, cells: &[CellRecord]) -> CrossPrime {
    let skip = |why: String| CrossPrime { prime, agree: true, dims: Vec::new(), skipped: Some(why) };
    let other = match curve.with_prime(prime) {
        Ok(c) => c,
        Err(e) => return skip(e.to_string()),
    };
    let ranker = ctx.ranker();
    let mut dims = Vec::with_capacity(cells.len());
    for c in cells {
        let dim = (|| -> koszul_core::Result<i64> {
            let b = DivisorSpec::parse(&other, &c.b)?;
            let l = DivisorSpec::parse(&other, &c.l)?;
            let complex = KoszulComplex::new(&other, &b, &l, c.q - 1, c.q + 1, ctx.seed)?;
            Ok(compute::cells(&complex, &[(c.p, c.q)], &ranker)?[0].dim)
        })();
        match dim {
            Ok(d) => dims.push(Some(d)),
            Err(e) if is_budget_error(&e) => dims.push(None),
            Err(e) => return skip(format!("cell ({}, {}) not reproducible: {e}", c.p, c.q)),
        }
    }
    let agree = cells.iter().zip(&dims).all(|(c, d)| d.is_none_or(|d| d == c.dim));
    CrossPrime { prime, agree, dims, skipped: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;

    #[test]
    fn generated_recipes_have_the_requested_degree() {
        let c = preset("g3quartic", 10007).unwrap();
        for d in 5..14 {
            for v in 0..2 {
                let r = divisor_of_degree(&c, d, v, salt(1, &[d]), &[]).unwrap();
                assert_eq!(degree_of(&c, &r.render(&c)).unwrap(), d);
            }
        }
    }

    #[test]
    fn thm12_grid_keeps_l_minus_b_representable() {
        let c = preset("g3quartic", 10007).unwrap();
        let req = CheckRequest { check: Some(CheckId::Thm12), ..Default::default() };
        let grid = expand(&c, &req, 3).unwrap();
        assert_eq!(grid.len(), 16);
        for (_, inst) in grid {
            let b = DivisorSpec::parse(&c, inst.b.as_deref().unwrap()).unwrap();
            let l = DivisorSpec::parse(&c, inst.l.as_deref().unwrap()).unwrap();
            assert!(l.difference(&b).is_ok());
        }
    }

    #[test]
    fn expansion_is_deterministic() {
        let c = preset("g2hyp", 10007).unwrap();
        let req = CheckRequest { check: Some(CheckId::Prop32Sweep), ..Default::default() };
        assert_eq!(expand(&c, &req, 9).unwrap(), expand(&c, &req, 9).unwrap());
    }
}
