//! Koszul complexes `wedge^p H^0(L) (x) H^0(B + qL)` and the dimensions of
//! their cohomology `K_{p,q}(C, B; L)`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::curve::CurveModel;
use crate::error::{Error, Result};
use crate::field::{Fp, PrimeField};
use crate::sections::{choose_sample, product_table, riemann_roch_space, DivisorSpec, ProductTable, SampleSet, SectionSpace};
use crate::sparse::{rank_sparse, Budget, RankResult, SparseMatrix};

/// Binomial coefficient, 0 outside `0 <= k <= n`.
pub fn binomial(n: i64, k: i64) -> u64 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Strictly increasing `p`-subsets of `{0, ..., n-1}` in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WedgeBasis {
    n: usize,
    p: usize,
    size: usize,
    /// `false` when the requested `p` was outside `0..=n`; the basis is then empty.
    pub in_range: bool,
}

impl WedgeBasis {
    pub fn new(n: usize, p: i64) -> Self {
        if p < 0 || p as usize > n {
            return WedgeBasis { n, p: p.max(0) as usize, size: 0, in_range: false };
        }
        WedgeBasis { n, p: p as usize, size: binomial(n as i64, p) as usize, in_range: true }
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// `rank(S) = C(n, p) - 1 - sum_i C(n - 1 - s_i, p - i)`.
    pub fn rank(&self, subset: &[u32]) -> usize {
        let (n, p) = (self.n as i64, self.p as i64);
        let tail: u64 = subset.iter().enumerate().map(|(i, &s)| binomial(n - 1 - s as i64, p - i as i64)).sum();
        (self.size as u64 - 1 - tail) as usize
    }

    pub fn unrank(&self, mut idx: usize) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.p);
        let mut next = 0u32;
        for i in 0..self.p {
            let mut s = next;
            loop {
                let count = binomial(self.n as i64 - 1 - s as i64, (self.p - 1 - i) as i64) as usize;
                if idx < count {
                    break;
                }
                idx -= count;
                s += 1;
            }
            out.push(s);
            next = s + 1;
        }
        out
    }

    pub fn iter(&self) -> WedgeIter {
        WedgeIter { n: self.n as u32, current: if self.size == 0 { None } else { Some((0..self.p as u32).collect()) } }
    }
}

pub struct WedgeIter {
    n: u32,
    current: Option<Vec<u32>>,
}

impl Iterator for WedgeIter {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let cur = self.current.take()?;
        let mut next = cur.clone();
        let p = next.len();
        let mut i = p;
        while i > 0 {
            i -= 1;
            if next[i] < self.n - (p - i) as u32 {
                next[i] += 1;
                for j in i + 1..p {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                return Some(cur);
            }
        }
        Some(cur)
    }
}

/// Computes matrix ranks for the engine; implementations decide method,
/// budget and caching.
pub trait Ranker: Sync {
    fn rank(&self, field: PrimeField, m: &SparseMatrix) -> Result<RankResult>;

    /// Rank of `delta_{p,q}`; override to fetch the matrix from a cache
    /// instead of assembling it.
    fn rank_differential(&self, complex: &KoszulComplex, p: i64, q: i64) -> Result<RankResult> {
        self.rank(complex.field(), &complex.differential(p, q)?)
    }
}

/// Markowitz elimination without a budget.
#[derive(Clone, Copy, Debug, Default)]
pub struct EliminationRanker;

impl Ranker for EliminationRanker {
    fn rank(&self, field: PrimeField, m: &SparseMatrix) -> Result<RankResult> {
        rank_sparse(field, m, Budget::UNLIMITED)
    }
}

/// The spaces `V = H^0(L)`, `W_q = H^0(B + qL)` over a range of `q`, and the
/// multiplication tables `V x W_q -> W_{q+1}`.
#[derive(Clone, Debug)]
pub struct KoszulComplex {
    curve: CurveModel,
    b: DivisorSpec,
    l: DivisorSpec,
    seed: u64,
    samples: Arc<SampleSet>,
    v: SectionSpace,
    w: BTreeMap<i64, SectionSpace>,
    tables: BTreeMap<i64, ProductTable>,
}

impl KoszulComplex {
    /// Prepares every `W_q` for `q` in `q_lo..=q_hi`.
    pub fn new(curve: &CurveModel, b: &DivisorSpec, l: &DivisorSpec, q_lo: i64, q_hi: i64, seed: u64) -> Result<Self> {
        let mut divisors = BTreeMap::new();
        for q in q_lo..=q_hi {
            divisors.insert(q, twist(curve, b, l, q)?);
        }
        let guard = divisors.values().chain([l]).map(|d| d.base_degree(curve)).max().unwrap_or(0);
        let mut avoid: Vec<_> = b.support().chain(l.support()).copied().collect();
        avoid.sort();
        avoid.dedup();
        let samples = choose_sample(curve, guard, seed, &avoid)?;
        let v = riemann_roch_space(curve, l, &samples)?;
        let mut w = BTreeMap::new();
        for (&q, d) in &divisors {
            w.insert(q, riemann_roch_space(curve, d, &samples)?);
        }
        let mut tables = BTreeMap::new();
        for q in q_lo..q_hi {
            tables.insert(q, product_table(curve, &v, &w[&q], &w[&(q + 1)])?);
        }
        Ok(KoszulComplex { curve: curve.clone(), b: b.clone(), l: l.clone(), seed, samples, v, w, tables })
    }

    pub fn curve(&self) -> &CurveModel {
        &self.curve
    }

    pub fn field(&self) -> PrimeField {
        self.curve.field()
    }

    pub fn b(&self) -> &DivisorSpec {
        &self.b
    }

    pub fn l(&self) -> &DivisorSpec {
        &self.l
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn samples(&self) -> &Arc<SampleSet> {
        &self.samples
    }

    /// `n = h^0(L)`.
    pub fn n(&self) -> usize {
        self.v.dim()
    }

    /// `r = h^0(L) - 1`.
    pub fn r(&self) -> i64 {
        self.n() as i64 - 1
    }

    pub fn v(&self) -> &SectionSpace {
        &self.v
    }

    pub fn w(&self, q: i64) -> Option<&SectionSpace> {
        self.w.get(&q)
    }

    pub fn q_range(&self) -> (i64, i64) {
        (*self.w.keys().next().unwrap(), *self.w.keys().next_back().unwrap())
    }

    /// `h^0(B + qL)`, `None` outside the prepared range.
    pub fn h(&self, q: i64) -> Option<usize> {
        self.w.get(&q).map(|s| s.dim())
    }

    /// `(rows, cols)` of `delta_{p,q}`, or `None` if a needed space is missing.
    pub fn differential_shape(&self, p: i64, q: i64) -> Option<(usize, usize)> {
        let n = self.n() as i64;
        let rows = binomial(n, p - 1) as usize * self.h(q + 1)?;
        let cols = binomial(n, p) as usize * self.h(q)?;
        Some((rows, cols))
    }

    /// Whether `delta_{p,q}` is a zero map for shape reasons.
    pub fn is_trivially_zero(&self, p: i64, q: i64) -> bool {
        match self.differential_shape(p, q) {
            Some((r, c)) => r == 0 || c == 0,
            None => false,
        }
    }

    /// Matrix of `delta_{p,q}: wedge^p V (x) W_q -> wedge^{p-1} V (x) W_{q+1}`,
    /// `e_I (x) w -> sum_k (-1)^(k+1) e_{I - i_k} (x) v_{i_k} w`. Rows are indexed
    /// by `rank(J) * h_{q+1} + l`, columns by `rank(I) * h_q + j`.
    pub fn differential(&self, p: i64, q: i64) -> Result<SparseMatrix> {
        let f = self.field();
        let (rows, cols) = self
            .differential_shape(p, q)
            .ok_or(Error::NotRepresentable(alloc::format!("W_{q} or W_{} not prepared", q + 1)))?;
        if rows == 0 || cols == 0 {
            return Ok(SparseMatrix::zero(rows, cols));
        }
        let table = &self.tables[&q];
        let (hq, hq1) = (self.h(q).unwrap(), self.h(q + 1).unwrap());
        let n = self.n();
        let src = WedgeBasis::new(n, p);
        let dst = WedgeBasis::new(n, p - 1);
        let mut entries: Vec<(u32, u32, Fp)> = Vec::new();
        let mut smaller: Vec<u32> = Vec::with_capacity(p as usize);
        for (ci, subset) in src.iter().enumerate() {
            for (k, &ik) in subset.iter().enumerate() {
                smaller.clear();
                smaller.extend(subset.iter().copied().filter(|&s| s != ik));
                let row_base = dst.rank(&smaller) * hq1;
                let negate = k % 2 == 1;
                for j in 0..hq {
                    let col = (ci * hq + j) as u32;
                    for &(l, c) in table.get(ik as usize, j) {
                        let v = if negate { f.neg(c) } else { c };
                        entries.push(((row_base + l as usize) as u32, col, v));
                    }
                }
            }
        }
        SparseMatrix::new(rows, cols, entries)
    }

    /// `delta_{p,q} . delta_{p+1,q-1}`, which must vanish.
    pub fn composite(&self, p: i64, q: i64) -> Result<SparseMatrix> {
        let outer = self.differential(p, q)?;
        let inner = self.differential(p + 1, q - 1)?;
        outer.matmul(self.field(), &inner)
    }
}

/// `B + qL`, or a negative-degree stand-in when `q < 0` would add points.
fn twist(curve: &CurveModel, b: &DivisorSpec, l: &DivisorSpec, q: i64) -> Result<DivisorSpec> {
    match l.power(q) {
        Ok(lq) => Ok(b.tensor(&lq)),
        Err(e) => {
            if b.degree(curve) + q * l.degree(curve) < 0 {
                Ok(DivisorSpec::base_multiple(-1))
            } else {
                Err(e)
            }
        }
    }
}

/// Ranks of differentials keyed by `(p, q)`; each is computed once.
#[derive(Clone, Debug, Default)]
pub struct RankMemo {
    ranks: BTreeMap<(i64, i64), RankResult>,
}

impl RankMemo {
    pub fn get(&self, p: i64, q: i64) -> Option<&RankResult> {
        self.ranks.get(&(p, q))
    }

    pub fn insert(&mut self, p: i64, q: i64, r: RankResult) {
        self.ranks.insert((p, q), r);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(i64, i64), &RankResult)> {
        self.ranks.iter()
    }
}

/// Shape and rank of one differential as recorded in a cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferentialRecord {
    pub p: i64,
    pub q: i64,
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
    pub rank: usize,
    pub method: Option<crate::sparse::RankMethod>,
    pub probabilistic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KoszulCell {
    pub p: i64,
    pub q: i64,
    pub dim_source: u64,
    /// Rank of `delta_{p+1,q-1}` (into the cell).
    pub rank_in: usize,
    /// Rank of `delta_{p,q}` (out of the cell).
    pub rank_out: usize,
    pub dim: i64,
    pub prime: u32,
    pub seed: u64,
    pub incoming: DifferentialRecord,
    pub outgoing: DifferentialRecord,
}

/// Differentials needed for cell `(p, q)`.
pub fn cell_differentials(p: i64, q: i64) -> [(i64, i64); 2] {
    [(p, q), (p + 1, q - 1)]
}

/// Ensures the rank of `delta_{p,q}` is in the memo.
pub fn ensure_rank(complex: &KoszulComplex, p: i64, q: i64, memo: &mut RankMemo, ranker: &dyn Ranker) -> Result<()> {
    if memo.get(p, q).is_some() {
        return Ok(());
    }
    let r = compute_rank(complex, p, q, ranker)?;
    memo.insert(p, q, r);
    Ok(())
}

/// Rank of `delta_{p,q}` without touching a memo (for parallel callers).
pub fn compute_rank(complex: &KoszulComplex, p: i64, q: i64, ranker: &dyn Ranker) -> Result<RankResult> {
    let f = complex.field();
    let (rows, cols) = complex
        .differential_shape(p, q)
        .ok_or(Error::NotRepresentable(alloc::format!("differential ({p},{q}) outside prepared range")))?;
    if rows == 0 || cols == 0 {
        return Ok(RankResult {
            rank: 0,
            method: crate::sparse::RankMethod::Elimination,
            prime: f.modulus(),
            probabilistic: false,
            stats: Default::default(),
            elapsed_seconds: None,
        });
    }
    ranker.rank_differential(complex, p, q)
}

fn record(complex: &KoszulComplex, p: i64, q: i64, memo: &RankMemo) -> DifferentialRecord {
    let (rows, cols) = complex.differential_shape(p, q).unwrap_or((0, 0));
    let r = memo.get(p, q);
    DifferentialRecord {
        p,
        q,
        rows,
        cols,
        nnz: r.map_or(0, |r| r.stats.initial_nnz),
        rank: r.map_or(0, |r| r.rank),
        method: r.filter(|_| rows > 0 && cols > 0).map(|r| r.method),
        probabilistic: r.is_some_and(|r| r.probabilistic),
        elapsed_seconds: r.and_then(|r| r.elapsed_seconds),
    }
}

/// `dim K_{p,q} = C(n,p) h_q - rank delta_{p,q} - rank delta_{p+1,q-1}`.
pub fn koszul_cell(complex: &KoszulComplex, p: i64, q: i64, memo: &mut RankMemo, ranker: &dyn Ranker) -> Result<KoszulCell> {
    for (dp, dq) in cell_differentials(p, q) {
        ensure_rank(complex, dp, dq, memo, ranker)?;
    }
    cell_from_memo(complex, p, q, memo)
}

/// Assembles a cell whose two ranks are already memoized.
pub fn cell_from_memo(complex: &KoszulComplex, p: i64, q: i64, memo: &RankMemo) -> Result<KoszulCell> {
    let h = complex.h(q).ok_or(Error::NotRepresentable(alloc::format!("W_{q} not prepared")))?;
    let dim_source = binomial(complex.n() as i64, p) * h as u64;
    let missing = || Error::NotRepresentable(alloc::format!("rank for cell ({p},{q}) not computed"));
    let rank_out = memo.get(p, q).ok_or_else(missing)?.rank;
    let rank_in = memo.get(p + 1, q - 1).ok_or_else(missing)?.rank;
    let dim = dim_source as i64 - rank_out as i64 - rank_in as i64;
    if dim < 0 {
        return Err(Error::DimensionMismatch { what: "Koszul cohomology dimension", expected: 0, found: dim });
    }
    Ok(KoszulCell {
        p,
        q,
        dim_source,
        rank_in,
        rank_out,
        dim,
        prime: complex.field().modulus(),
        seed: complex.seed(),
        incoming: record(complex, p + 1, q - 1, memo),
        outgoing: record(complex, p, q, memo),
    })
}

/// One-shot `dim K_{p,q}(C, B; L)`.
pub fn koszul_dim(curve: &CurveModel, b: &DivisorSpec, l: &DivisorSpec, p: i64, q: i64, seed: u64) -> Result<KoszulCell> {
    let complex = KoszulComplex::new(curve, b, l, q - 1, q + 1, seed)?;
    koszul_cell(&complex, p, q, &mut RankMemo::default(), &EliminationRanker)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellOutcome {
    Computed(KoszulCell),
    Error { message: String },
    NotComputed,
}

impl CellOutcome {
    pub fn dim(&self) -> Option<i64> {
        match self {
            CellOutcome::Computed(c) => Some(c.dim),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BettiTable {
    pub curve_id: String,
    pub b: DivisorSpec,
    pub l: DivisorSpec,
    pub r: i64,
    pub gonality: Option<usize>,
    pub prime: u32,
    pub seed: u64,
    pub pmax: i64,
    pub qs: Vec<i64>,
    /// `h^0(B + qL)` for every prepared `q`.
    pub h0: BTreeMap<i64, usize>,
    /// Row-major over `p = 0..=pmax`, then `qs`.
    pub cells: Vec<CellOutcome>,
}

impl BettiTable {
    pub fn cell(&self, p: i64, q: i64) -> Option<&CellOutcome> {
        let qi = self.qs.iter().position(|&x| x == q)?;
        if p < 0 || p > self.pmax {
            return None;
        }
        self.cells.get(p as usize * self.qs.len() + qi)
    }

    pub fn dim(&self, p: i64, q: i64) -> Option<i64> {
        self.cell(p, q).and_then(|c| c.dim())
    }

    /// Alternating-sum check along every diagonal `p + q = d` whose cells are
    /// all computed and for which `W_q = 0` when `q < 0`.
    pub fn euler_checks(&self, n: usize) -> Vec<(i64, bool)> {
        let mut out = Vec::new();
        if self.h0.get(&-1).is_some_and(|&h| h != 0) || !self.h0.contains_key(&-1) {
            return out;
        }
        let max_q = *self.qs.iter().max().unwrap_or(&0);
        for d in 0..=max_q {
            let ps: Vec<i64> = (0..=d.min(n as i64)).collect();
            let dims: Option<Vec<i64>> = ps.iter().map(|&p| self.dim(p, d - p)).collect();
            let Some(dims) = dims else { continue };
            let lhs: i64 = ps.iter().zip(&dims).map(|(&p, &k)| if p % 2 == 0 { k } else { -k }).sum();
            let rhs: i64 = ps
                .iter()
                .map(|&p| {
                    let t = binomial(n as i64, p) as i64 * *self.h0.get(&(d - p)).unwrap_or(&0) as i64;
                    if p % 2 == 0 { t } else { -t }
                })
                .sum();
            out.push((d, lhs == rhs));
        }
        out
    }

    /// CSV grid: header `p\q,<qs>`, one row per `p`, `-1` where not computed.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("p\\q");
        for q in &self.qs {
            s.push(',');
            s.push_str(&q.to_string());
        }
        s.push('\n');
        for p in 0..=self.pmax {
            s.push_str(&p.to_string());
            for &q in &self.qs {
                s.push(',');
                s.push_str(&self.dim(p, q).unwrap_or(-1).to_string());
            }
            s.push('\n');
        }
        s
    }
}

/// Cells of a table that are computed; `K_{0,1}(C, O; L)` is tautologically
/// zero and left out.
pub fn table_cells(b: &DivisorSpec, pmax: i64, qs: &[i64]) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for p in 0..=pmax {
        for &q in qs {
            if !(b.is_trivial() && p == 0 && q == 1) {
                out.push((p, q));
            }
        }
    }
    out
}

/// Differentials whose ranks a table needs, deduplicated and sorted.
pub fn table_differentials(b: &DivisorSpec, pmax: i64, qs: &[i64]) -> Vec<(i64, i64)> {
    let mut d: Vec<(i64, i64)> = table_cells(b, pmax, qs).into_iter().flat_map(|(p, q)| cell_differentials(p, q)).collect();
    d.sort();
    d.dedup();
    d
}

pub fn table_complex(curve: &CurveModel, b: &DivisorSpec, l: &DivisorSpec, qs: &[i64], seed: u64) -> Result<KoszulComplex> {
    let lo = qs.iter().min().copied().unwrap_or(0) - 1;
    let hi = qs.iter().max().copied().unwrap_or(0) + 1;
    KoszulComplex::new(curve, b, l, lo, hi, seed)
}

/// Assembles a table from a complex and a memo holding every needed rank;
/// missing ranks become per-cell errors.
pub fn assemble_table(complex: &KoszulComplex, pmax: i64, qs: &[i64], memo: &RankMemo) -> BettiTable {
    let wanted = table_cells(complex.b(), pmax, qs);
    let mut cells = Vec::new();
    for p in 0..=pmax {
        for &q in qs {
            if !wanted.contains(&(p, q)) {
                cells.push(CellOutcome::NotComputed);
                continue;
            }
            cells.push(match cell_from_memo(complex, p, q, memo) {
                Ok(c) => CellOutcome::Computed(c),
                Err(e) => CellOutcome::Error { message: e.to_string() },
            });
        }
    }
    let (lo, hi) = complex.q_range();
    BettiTable {
        curve_id: complex.curve().id(),
        b: complex.b().clone(),
        l: complex.l().clone(),
        r: complex.r(),
        gonality: complex.curve().gonality(),
        prime: complex.field().modulus(),
        seed: complex.seed(),
        pmax,
        qs: qs.to_vec(),
        h0: (lo..=hi).map(|q| (q, complex.h(q).unwrap())).collect(),
        cells,
    }
}

/// Sequential Betti table; per-rank errors are recorded in the affected cells.
pub fn betti_table(
    curve: &CurveModel,
    b: &DivisorSpec,
    l: &DivisorSpec,
    pmax: i64,
    qs: &[i64],
    seed: u64,
    ranker: &dyn Ranker,
) -> Result<BettiTable> {
    let complex = table_complex(curve, b, l, qs, seed)?;
    let mut memo = RankMemo::default();
    for (p, q) in table_differentials(b, pmax, qs) {
        // failures surface as cell errors during assembly
        let _ = ensure_rank(&complex, p, q, &mut memo, ranker);
    }
    Ok(assemble_table(&complex, pmax, qs, &memo))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrandStrategy {
    Direct,
    Dual,
    /// Dual for `p > r / 2`, direct otherwise.
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrandWitness {
    pub p: i64,
    pub dim: i64,
    /// Cell actually computed: `(p, 1)` with `B = O`, or `(r - 1 - p, 1)` with `B = K`.
    pub via_dual: bool,
    pub cell: KoszulCell,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrandBoundary {
    /// Largest `p` with `K_{p,1}(C; L) != 0`, 0 if none.
    pub last_nonzero_p: i64,
    pub r: i64,
    pub gonality: usize,
    pub expected: i64,
    pub witnesses: Vec<StrandWitness>,
}

/// Locates the end of the linear strand `K_{p,1}(C; L)`, starting at
/// `p = r - gon` and scanning in whichever direction the first cell points.
pub fn strand_boundary(
    curve: &CurveModel,
    l: &DivisorSpec,
    strategy: StrandStrategy,
    gonality: Option<usize>,
    seed: u64,
    ranker: &dyn Ranker,
) -> Result<StrandBoundary> {
    let gon = gonality.or(curve.gonality()).ok_or(Error::MissingGonality)?;
    let direct = KoszulComplex::new(curve, &DivisorSpec::trivial(), l, 0, 2, seed)?;
    let r = direct.r();
    let k = DivisorSpec::canonical(curve);
    let mut dual: Option<KoszulComplex> = None;
    let mut direct_memo = RankMemo::default();
    let mut dual_memo = RankMemo::default();
    let mut witnesses: Vec<StrandWitness> = Vec::new();

    let mut eval = |p: i64| -> Result<i64> {
        if let Some(w) = witnesses.iter().find(|w| w.p == p) {
            return Ok(w.dim);
        }
        if p < 1 || p > r - 1 {
            // K_{0,1}(O; L) and K_{p,1} for p >= r vanish
            return Ok(0);
        }
        let use_dual = match strategy {
            StrandStrategy::Direct => false,
            StrandStrategy::Dual => true,
            StrandStrategy::Auto => 2 * p > r,
        };
        let (cell, via_dual) = if use_dual {
            if dual.is_none() {
                dual = Some(KoszulComplex::new(curve, &k, l, 0, 2, seed)?);
            }
            (koszul_cell(dual.as_ref().unwrap(), r - 1 - p, 1, &mut dual_memo, ranker)?, true)
        } else {
            (koszul_cell(&direct, p, 1, &mut direct_memo, ranker)?, false)
        };
        let dim = cell.dim;
        witnesses.push(StrandWitness { p, dim, via_dual, cell });
        Ok(dim)
    };

    let expected = r - gon as i64;
    let start = expected.max(0);
    let last = if start >= 1 && eval(start)? != 0 {
        let mut p = start;
        while p < r && eval(p + 1)? != 0 {
            p += 1;
        }
        p
    } else {
        let mut p = start - 1;
        while p >= 1 && eval(p)? == 0 {
            p -= 1;
        }
        p.max(0)
    };
    if start >= 1 && last == start {
        eval(start + 1)?;
    }
    witnesses.sort_by_key(|w| w.p);
    Ok(StrandBoundary { last_nonzero_p: last, r, gonality: gon, expected, witnesses })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wedge_examples() {
        let w = WedgeBasis::new(4, 2);
        let all: Vec<Vec<u32>> = w.iter().collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], [0, 1]);
        assert_eq!(all[5], [2, 3]);
        let w0 = WedgeBasis::new(4, 0);
        assert_eq!(w0.iter().collect::<Vec<_>>(), [Vec::<u32>::new()]);
        let w6 = WedgeBasis::new(10, 6);
        assert_eq!(w6.len(), 210);
        for (i, s) in w6.iter().enumerate() {
            assert_eq!(w6.rank(&s), i);
            assert_eq!(w6.unrank(i), s);
        }
        let bad = WedgeBasis::new(3, 5);
        assert!(!bad.in_range && bad.is_empty());
        assert!(!WedgeBasis::new(3, -1).in_range);
    }

    fn g2() -> CurveModel {
        CurveModel::hyperelliptic(PrimeField::new(10007).unwrap(), &[1, 0, 0, 0, 0, 1]).unwrap()
    }

    #[test]
    fn genus_two_quintic_cells() {
        let c = g2();
        let l = DivisorSpec::base_multiple(5);
        let o = DivisorSpec::trivial();
        let k11 = koszul_dim(&c, &o, &l, 1, 1, 1).unwrap();
        assert_eq!(k11.dim, 1);
        assert_eq!((k11.outgoing.rows, k11.outgoing.cols), (9, 16));
        // with B = K the sources are H^0(7 inf) and H^0(12 inf)
        let kk = koszul_dim(&c, &DivisorSpec::canonical(&c), &l, 1, 1, 1).unwrap();
        assert_eq!((kk.outgoing.rows, kk.outgoing.cols), (11, 24));
        assert_eq!(koszul_dim(&c, &o, &l, 2, 1, 1).unwrap().dim, 0);
        assert_eq!(koszul_dim(&c, &o, &l, 0, 0, 1).unwrap().dim, 1);
    }

    #[test]
    fn low_differentials() {
        let c = g2();
        let l = DivisorSpec::base_multiple(5);
        let cx = KoszulComplex::new(&c, &DivisorSpec::trivial(), &l, 0, 2, 3).unwrap();
        let f = cx.field();
        assert_eq!(rank_sparse(f, &cx.differential(1, 0).unwrap(), Budget::UNLIMITED).unwrap().rank, 4);
        assert_eq!(rank_sparse(f, &cx.differential(2, 0).unwrap(), Budget::UNLIMITED).unwrap().rank, 6);
        assert!(cx.composite(1, 1).unwrap().is_zero());
    }

    #[test]
    fn table_row_and_csv() {
        let c = g2();
        let t = betti_table(&c, &DivisorSpec::trivial(), &DivisorSpec::base_multiple(5), 3, &[0, 1, 2], 1, &EliminationRanker)
            .unwrap();
        let row: Vec<i64> = (0..=3).map(|p| t.dim(p, 1).unwrap_or(-1)).collect();
        assert_eq!(row, [-1, 1, 0, 0]);
        assert!(t.to_csv().starts_with("p\\q,0,1,2\n0,1,-1,"));
        assert!(t.euler_checks(4).iter().all(|e| e.1));
    }

    #[test]
    fn boundary_genus_two() {
        let c = g2();
        let b = strand_boundary(&c, &DivisorSpec::base_multiple(6), StrandStrategy::Direct, None, 1, &EliminationRanker).unwrap();
        assert_eq!((b.r, b.last_nonzero_p), (4, 2));
        let d = strand_boundary(&c, &DivisorSpec::base_multiple(6), StrandStrategy::Dual, None, 1, &EliminationRanker).unwrap();
        assert_eq!(d.last_nonzero_p, 2);
        let dims: Vec<i64> = b.witnesses.iter().map(|w| w.dim).collect();
        let dual_dims: Vec<i64> = d.witnesses.iter().map(|w| w.dim).collect();
        assert_eq!(dims, dual_dims);
    }
}
