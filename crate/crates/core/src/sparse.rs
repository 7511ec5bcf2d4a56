//! Sparse matrices over `F_p` and exact rank computation.
//!
//! Three independent rank routes are provided: Markowitz elimination with a
//! dense tail ([`rank_sparse`]), black-box Wiedemann ([`rank_wiedemann`]), and
//! a plain dense oracle ([`rank_dense_oracle`]) that can also run over `Q`.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fp, PrimeField};

/// Coordinate-format matrix; entries sorted by `(row, col)`, nonzero, unique.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(u32, u32, Fp)>,
}

impl SparseMatrix {
    /// Validating constructor: rejects out-of-range indices, stored zeros and
    /// duplicate coordinates.
    pub fn new(rows: usize, cols: usize, mut entries: Vec<(u32, u32, Fp)>) -> Result<Self> {
        for &(r, c, v) in &entries {
            let (row, col) = (r as usize, c as usize);
            if row >= rows || col >= cols {
                return Err(Error::IndexOutOfRange { row, col });
            }
            if v.is_zero() {
                return Err(Error::StoredZero { row, col });
            }
        }
        entries.sort_unstable_by_key(|e| (e.0, e.1));
        if let Some(w) = entries.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::DuplicateEntry { row: w[0].0 as usize, col: w[0].1 as usize });
        }
        Ok(SparseMatrix { rows, cols, entries })
    }

    /// Sums repeated coordinates and drops the resulting zeros.
    pub fn accumulate(
        field: PrimeField,
        rows: usize,
        cols: usize,
        raw: impl IntoIterator<Item = (u32, u32, Fp)>,
    ) -> Result<Self> {
        let mut entries: Vec<(u32, u32, Fp)> = raw.into_iter().collect();
        for &(r, c, _) in &entries {
            if r as usize >= rows || c as usize >= cols {
                return Err(Error::IndexOutOfRange { row: r as usize, col: c as usize });
            }
        }
        entries.sort_unstable_by_key(|e| (e.0, e.1));
        let mut out: Vec<(u32, u32, Fp)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match out.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 = field.add(last.2, v),
                _ => out.push((r, c, v)),
            }
        }
        out.retain(|e| !e.2.is_zero());
        Ok(SparseMatrix { rows, cols, entries: out })
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, entries: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix { rows: n, cols: n, entries: (0..n as u32).map(|i| (i, i, Fp::ONE)).collect() }
    }

    pub fn from_dense(rows: &[Vec<Fp>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let entries = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| {
                r.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(move |(j, &v)| (i as u32, j as u32, v))
            })
            .collect();
        SparseMatrix { rows: rows.len(), cols, entries }
    }

    /// Seeded random matrix; each entry is nonzero with probability `density`.
    pub fn random(field: PrimeField, rows: usize, cols: usize, density: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries = Vec::new();
        let p = field.modulus();
        for r in 0..rows as u32 {
            for c in 0..cols as u32 {
                if rng.random::<f64>() < density {
                    entries.push((r, c, Fp::from_reduced(rng.random_range(1..p))));
                }
            }
        }
        SparseMatrix { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(u32, u32, Fp)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every stored value must be a canonical residue modulo the prime.
    pub fn validate(&self, field: PrimeField) -> Result<()> {
        match self.entries.iter().find(|e| e.2.value() >= field.modulus()) {
            Some(e) => Err(Error::UnreducedEntry { value: e.2.value(), prime: field.modulus() }),
            None => Ok(()),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut entries: Vec<_> = self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect();
        entries.sort_unstable_by_key(|e| (e.0, e.1));
        SparseMatrix { rows: self.cols, cols: self.rows, entries }
    }

    /// Row `i` moves to `row_perm[i]`, column `j` to `col_perm[j]`.
    pub fn permute(&self, row_perm: &[usize], col_perm: &[usize]) -> Self {
        let mut entries: Vec<_> = self
            .entries
            .iter()
            .map(|&(r, c, v)| (row_perm[r as usize] as u32, col_perm[c as usize] as u32, v))
            .collect();
        entries.sort_unstable_by_key(|e| (e.0, e.1));
        SparseMatrix { rows: self.rows, cols: self.cols, entries }
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &SparseMatrix) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch);
        }
        let shift = self.cols as u32;
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().map(|&(r, c, v)| (r, c + shift, v)));
        entries.sort_unstable_by_key(|e| (e.0, e.1));
        Ok(SparseMatrix { rows: self.rows, cols: self.cols + other.cols, entries })
    }

    /// Product `self * other`.
    pub fn matmul(&self, field: PrimeField, other: &SparseMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch);
        }
        let other_rows = row_starts(other);
        let p = field.modulus() as u64;
        let mut acc = vec![0u64; other.cols];
        let mut touched: Vec<u32> = Vec::new();
        let mut entries = Vec::new();
        let mut i = 0;
        while i < self.entries.len() {
            let r = self.entries[i].0;
            while i < self.entries.len() && self.entries[i].0 == r {
                let (_, k, a) = self.entries[i];
                let (s, e) = (other_rows[k as usize], other_rows[k as usize + 1]);
                for &(_, c, b) in &other.entries[s..e] {
                    let slot = &mut acc[c as usize];
                    if *slot == 0 {
                        touched.push(c);
                    }
                    // keep slot nonzero while touched so it is listed once
                    *slot = (*slot + a.value() as u64 * b.value() as u64) % p + p;
                }
                i += 1;
            }
            touched.sort_unstable();
            for &c in &touched {
                let v = acc[c as usize] % p;
                if v != 0 {
                    entries.push((r, c, Fp::from_reduced(v as u32)));
                }
                acc[c as usize] = 0;
            }
            touched.clear();
        }
        Ok(SparseMatrix { rows: self.rows, cols: other.cols, entries })
    }

    /// `y = self * x`
    pub fn apply(&self, field: PrimeField, x: &[Fp]) -> Vec<Fp> {
        let p = field.modulus() as u64;
        let mut y = vec![0u64; self.rows];
        for &(r, c, v) in &self.entries {
            y[r as usize] = (y[r as usize] + v.value() as u64 * x[c as usize].value() as u64) % p;
        }
        y.into_iter().map(|v| Fp::from_reduced(v as u32)).collect()
    }

    /// `y = self^T * x`
    pub fn apply_transpose(&self, field: PrimeField, x: &[Fp]) -> Vec<Fp> {
        let p = field.modulus() as u64;
        let mut y = vec![0u64; self.cols];
        for &(r, c, v) in &self.entries {
            y[c as usize] = (y[c as usize] + v.value() as u64 * x[r as usize].value() as u64) % p;
        }
        y.into_iter().map(|v| Fp::from_reduced(v as u32)).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<Fp>> {
        let mut out = vec![vec![Fp::ZERO; self.cols]; self.rows];
        for &(r, c, v) in &self.entries {
            out[r as usize][c as usize] = v;
        }
        out
    }
}

fn row_starts(m: &SparseMatrix) -> Vec<usize> {
    let mut starts = vec![0usize; m.rows + 1];
    for &(r, _, _) in &m.entries {
        starts[r as usize + 1] += 1;
    }
    for i in 0..m.rows {
        starts[i + 1] += starts[i];
    }
    starts
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankMethod {
    Elimination,
    Wiedemann,
    DenseOracle,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankStats {
    pub initial_nnz: usize,
    pub peak_nnz: usize,
    pub sparse_pivots: usize,
    pub dense_rows: usize,
    pub dense_cols: usize,
    pub wiedemann_runs: usize,
    pub fell_back: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankResult {
    pub rank: usize,
    pub method: RankMethod,
    pub prime: u32,
    /// Monte Carlo result (agreement of independent runs, not a proof).
    pub probabilistic: bool,
    pub stats: RankStats,
    /// Filled in by callers that own a clock.
    pub elapsed_seconds: Option<f64>,
}

impl RankResult {
    fn new(rank: usize, method: RankMethod, field: PrimeField, stats: RankStats) -> Self {
        RankResult { rank, method, prime: field.modulus(), probabilistic: false, stats, elapsed_seconds: None }
    }
}

/// Resource limits for elimination. `work` counts scalar row operations.
#[derive(Clone, Copy, Default)]
pub struct Budget<'a> {
    pub max_work: Option<u64>,
    /// Polled between pivots; returning `true` stops the elimination.
    pub expired: Option<&'a (dyn Fn() -> bool + Sync)>,
}

impl core::fmt::Debug for Budget<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Budget").field("max_work", &self.max_work).field("deadline", &self.expired.is_some()).finish()
    }
}

impl Budget<'_> {
    pub const UNLIMITED: Budget<'static> = Budget { max_work: None, expired: None };
}

/// Tuning for [`rank_sparse`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EliminationConfig {
    /// Switch to dense once the active block reaches this fill ratio...
    pub dense_ratio: f64,
    /// ...and has at most this many entries.
    pub dense_cap: usize,
}

impl Default for EliminationConfig {
    fn default() -> Self {
        EliminationConfig { dense_ratio: 0.2, dense_cap: 40_000_000 }
    }
}

pub fn rank_sparse(field: PrimeField, m: &SparseMatrix, budget: Budget<'_>) -> Result<RankResult> {
    rank_sparse_with(field, m, budget, EliminationConfig::default())
}

/// Markowitz elimination: the pivot minimizes `(r - 1)(c - 1)` over active
/// entries, ties broken by lowest row then lowest column. The trailing block
/// is finished densely once it is dense enough to fit [`EliminationConfig`].
pub fn rank_sparse_with(
    field: PrimeField,
    m: &SparseMatrix,
    budget: Budget<'_>,
    config: EliminationConfig,
) -> Result<RankResult> {
    m.validate(field)?;
    let mut e = Markowitz::new(field, m);
    let mut stats = RankStats { initial_nnz: m.nnz(), peak_nnz: m.nnz(), ..RankStats::default() };
    let mut rank = 0usize;
    let mut work = 0u64;
    loop {
        let block = e.active_rows as u64 * e.active_cols as u64;
        if block == 0 {
            break;
        }
        if block <= config.dense_cap as u64 && e.nnz as f64 >= config.dense_ratio * block as f64 {
            let (dense, rows, cols) = e.dense_block();
            stats.dense_rows = rows;
            stats.dense_cols = cols;
            rank += dense_rank_lazy(field, dense, rows, cols);
            break;
        }
        if budget.max_work.is_some_and(|w| work > w)
            || (stats.sparse_pivots.is_multiple_of(64) && budget.expired.is_some_and(|f| f()))
        {
            return Err(Error::BudgetExhausted { rank_so_far: rank, checkpoint: Box::new(e.checkpoint()) });
        }
        let Some(&(_, r, c)) = e.queue.iter().next() else { break };
        work += e.pivot(r, c);
        rank += 1;
        stats.sparse_pivots += 1;
        stats.peak_nnz = stats.peak_nnz.max(e.nnz);
    }
    Ok(RankResult::new(rank, RankMethod::Elimination, field, stats))
}

struct Markowitz {
    field: PrimeField,
    rows: Vec<Vec<(u32, Fp)>>,
    col_rows: Vec<Vec<u32>>,
    col_count: Vec<u32>,
    best: Vec<Option<(u64, u32)>>,
    queue: BTreeSet<(u64, u32, u32)>,
    active_rows: usize,
    active_cols: usize,
    nnz: usize,
    ncols: usize,
}

impl Markowitz {
    fn new(field: PrimeField, m: &SparseMatrix) -> Self {
        let mut rows: Vec<Vec<(u32, Fp)>> = vec![Vec::new(); m.rows];
        let mut col_rows: Vec<Vec<u32>> = vec![Vec::new(); m.cols];
        for &(r, c, v) in &m.entries {
            rows[r as usize].push((c, v));
            col_rows[c as usize].push(r);
        }
        let col_count: Vec<u32> = col_rows.iter().map(|l| l.len() as u32).collect();
        let mut e = Markowitz {
            field,
            active_rows: rows.iter().filter(|r| !r.is_empty()).count(),
            active_cols: col_count.iter().filter(|&&c| c > 0).count(),
            nnz: m.nnz(),
            ncols: m.cols,
            best: vec![None; m.rows],
            queue: BTreeSet::new(),
            rows,
            col_rows,
            col_count,
        };
        for r in 0..e.rows.len() {
            e.refresh(r as u32);
        }
        e
    }

    fn refresh(&mut self, r: u32) {
        if let Some((cost, c)) = self.best[r as usize].take() {
            self.queue.remove(&(cost, r, c));
        }
        let row = &self.rows[r as usize];
        if row.is_empty() {
            return;
        }
        let len = row.len() as u64 - 1;
        let best = row.iter().map(|&(c, _)| (len * (self.col_count[c as usize] as u64 - 1), c)).min().unwrap();
        self.best[r as usize] = Some(best);
        self.queue.insert((best.0, r, best.1));
    }

    fn pivot(&mut self, r: u32, c: u32) -> u64 {
        let f = self.field;
        let p = f.modulus() as u64;
        let prow = core::mem::take(&mut self.rows[r as usize]);
        if let Some((cost, bc)) = self.best[r as usize].take() {
            self.queue.remove(&(cost, r, bc));
        }
        let pval = prow.iter().find(|e| e.0 == c).unwrap().1;
        let inv = f.inv(pval).unwrap();
        let mut work = 0u64;
        for &(j, _) in &prow {
            self.col_count[j as usize] -= 1;
            if self.col_count[j as usize] == 0 {
                self.active_cols -= 1;
            }
        }
        self.nnz -= prow.len();
        self.active_rows -= 1;
        let targets = core::mem::take(&mut self.col_rows[c as usize]);
        let mut merged: Vec<(u32, Fp)> = Vec::new();
        for &i in &targets {
            if i == r {
                continue;
            }
            let row = &self.rows[i as usize];
            let Ok(pos) = row.binary_search_by_key(&c, |e| e.0) else { continue };
            let factor = f.mul(row[pos].1, inv);
            let neg = p - factor.value() as u64;
            merged.clear();
            let (mut a, mut b) = (0, 0);
            let old = &self.rows[i as usize];
            while a < old.len() || b < prow.len() {
                let ca = old.get(a).map_or(u32::MAX, |e| e.0);
                let cb = prow.get(b).map_or(u32::MAX, |e| e.0);
                if ca < cb {
                    merged.push(old[a]);
                    a += 1;
                } else if cb < ca {
                    let v = (neg * prow[b].1.value() as u64 % p) as u32;
                    // fill-in
                    self.col_count[cb as usize] += 1;
                    if self.col_count[cb as usize] == 1 {
                        self.active_cols += 1;
                    }
                    self.col_rows[cb as usize].push(i);
                    merged.push((cb, Fp::from_reduced(v)));
                    b += 1;
                } else {
                    let v = ((old[a].1.value() as u64 + neg * prow[b].1.value() as u64) % p) as u32;
                    if v != 0 {
                        merged.push((ca, Fp::from_reduced(v)));
                    } else {
                        self.col_count[ca as usize] -= 1;
                        if self.col_count[ca as usize] == 0 {
                            self.active_cols -= 1;
                        }
                    }
                    a += 1;
                    b += 1;
                }
            }
            work += (old.len() + prow.len()) as u64;
            self.nnz = self.nnz + merged.len() - old.len();
            let was_empty = merged.is_empty();
            core::mem::swap(&mut self.rows[i as usize], &mut merged);
            if was_empty {
                self.active_rows -= 1;
            }
        }
        // rows whose cost may have changed share a column with the pivot row
        let mut dirty: Vec<u32> = Vec::new();
        for &(j, _) in &prow {
            if j == c {
                continue;
            }
            let rows = &self.rows;
            let list = &mut self.col_rows[j as usize];
            list.retain(|&i| rows[i as usize].binary_search_by_key(&j, |e| e.0).is_ok());
            list.sort_unstable();
            list.dedup();
            dirty.extend_from_slice(list);
            work += list.len() as u64;
        }
        dirty.extend(targets.iter().copied().filter(|&i| i != r));
        dirty.sort_unstable();
        dirty.dedup();
        for i in dirty {
            self.refresh(i);
        }
        work
    }

    /// Active rows and nonempty columns as a compact dense block.
    fn dense_block(&self) -> (Vec<u64>, usize, usize) {
        let mut col_map = vec![u32::MAX; self.ncols];
        let mut cols = 0usize;
        for (j, &cnt) in self.col_count.iter().enumerate() {
            if cnt > 0 {
                col_map[j] = cols as u32;
                cols += 1;
            }
        }
        let active: Vec<&Vec<(u32, Fp)>> = self.rows.iter().filter(|r| !r.is_empty()).collect();
        let mut dense = vec![0u64; active.len() * cols];
        for (i, row) in active.iter().enumerate() {
            for &(j, v) in row.iter() {
                dense[i * cols + col_map[j as usize] as usize] = v.value() as u64;
            }
        }
        (dense, active.len(), cols)
    }

    fn checkpoint(&self) -> SparseMatrix {
        let mut col_map = vec![u32::MAX; self.ncols];
        let mut cols = 0u32;
        for (j, &cnt) in self.col_count.iter().enumerate() {
            if cnt > 0 {
                col_map[j] = cols;
                cols += 1;
            }
        }
        let mut entries = Vec::with_capacity(self.nnz);
        let mut r = 0u32;
        for row in self.rows.iter().filter(|r| !r.is_empty()) {
            for &(j, v) in row {
                entries.push((r, col_map[j as usize], v));
            }
            r += 1;
        }
        SparseMatrix { rows: r as usize, cols: cols as usize, entries }
    }
}

/// Dense rank with delayed reduction: rows hold unreduced `u64` sums and are
/// reduced only when read as a pivot or when they approach overflow.
fn dense_rank_lazy(field: PrimeField, mut a: Vec<u64>, rows: usize, cols: usize) -> usize {
    if rows == 0 || cols == 0 {
        return 0;
    }
    let p = field.modulus() as u64;
    let step = (p - 1) * (p - 1);
    let limit = (u64::MAX - p) / step - 1;
    let mut pending = vec![0u64; rows];
    let mut rank = 0usize;
    let target = rows.min(cols);
    let mut piv = vec![0u64; cols];
    for col in 0..cols {
        let mut found = None;
        for i in rank..rows {
            let v = a[i * cols + col] % p;
            a[i * cols + col] = v;
            if v != 0 {
                found = Some(i);
                break;
            }
        }
        let Some(pr) = found else { continue };
        if pr != rank {
            for j in col..cols {
                a.swap(pr * cols + j, rank * cols + j);
            }
            pending.swap(pr, rank);
        }
        let inv = field.inv(Fp::from_reduced(a[rank * cols + col] as u32)).unwrap().value() as u64;
        for j in col..cols {
            piv[j] = a[rank * cols + j] % p * inv % p;
        }
        for i in rank + 1..rows {
            let v = a[i * cols + col] % p;
            if v == 0 {
                a[i * cols + col] = 0;
                continue;
            }
            let factor = p - v;
            if pending[i] >= limit {
                for x in &mut a[i * cols + col..(i + 1) * cols] {
                    *x %= p;
                }
                pending[i] = 0;
            }
            let row = &mut a[i * cols + col..(i + 1) * cols];
            for (x, &y) in row.iter_mut().zip(&piv[col..]) {
                *x += factor * y;
            }
            pending[i] += 1;
        }
        rank += 1;
        if rank == target {
            break;
        }
    }
    rank
}

/// Arithmetic used by [`rank_dense_oracle`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleArithmetic {
    ModP,
    /// Entries lifted to `(-p/2, p/2]` and eliminated over `Q`.
    ExactRational,
}

pub const MOD_P_ORACLE_CAP: usize = 4_000_000;
pub const RATIONAL_ORACLE_CAP: usize = 10_000;

/// Textbook Gaussian elimination, kept deliberately independent of the
/// sparse code path.
pub fn rank_dense_oracle(field: PrimeField, m: &SparseMatrix, arithmetic: OracleArithmetic) -> Result<RankResult> {
    let size = m.rows * m.cols;
    let cap = match arithmetic {
        OracleArithmetic::ModP => MOD_P_ORACLE_CAP,
        OracleArithmetic::ExactRational => RATIONAL_ORACLE_CAP,
    };
    if size > cap {
        return Err(Error::OracleCapExceeded { size, cap });
    }
    m.validate(field)?;
    let rank = match arithmetic {
        OracleArithmetic::ModP => oracle_mod_p(field, m.to_dense()),
        OracleArithmetic::ExactRational => {
            let dense = m
                .to_dense()
                .into_iter()
                .map(|row| row.into_iter().map(|v| BigRational::from_integer(BigInt::from(field.lift(v)))).collect())
                .collect();
            oracle_rational(dense)
        }
    };
    let stats = RankStats { initial_nnz: m.nnz(), peak_nnz: size, dense_rows: m.rows, dense_cols: m.cols, ..Default::default() };
    Ok(RankResult::new(rank, RankMethod::DenseOracle, field, stats))
}

fn oracle_mod_p(field: PrimeField, mut a: Vec<Vec<Fp>>) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(pr) = (rank..rows).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(rank, pr);
        let inv = field.inv(a[rank][col]).unwrap();
        for i in rank + 1..rows {
            let factor = field.mul(a[i][col], inv);
            if factor.is_zero() {
                continue;
            }
            for j in col..cols {
                let t = field.mul(factor, a[rank][j]);
                a[i][j] = field.sub(a[i][j], t);
            }
        }
        rank += 1;
    }
    rank
}

fn oracle_rational(mut a: Vec<Vec<BigRational>>) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(pr) = (rank..rows).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(rank, pr);
        let inv = BigRational::one() / &a[rank][col];
        for i in rank + 1..rows {
            if a[i][col].is_zero() {
                continue;
            }
            let factor = &a[i][col] * &inv;
            for j in col..cols {
                let t = &factor * &a[rank][j];
                a[i][j] -= t;
            }
        }
        rank += 1;
    }
    rank
}

/// Extra sequence terms past `2L` that must leave the linear complexity
/// unchanged before Berlekamp-Massey stops early.
const EARLY_TERMINATION: usize = 24;

/// Black-box rank: the minimal polynomial of `D1 A^T D2 A D1` (random
/// nonsingular diagonals) is projected to a scalar sequence and recovered by
/// Berlekamp-Massey; the rank is its degree minus the multiplicity of `x`,
/// which for this preconditioner is at most one.
///
/// Runs repeat with fresh seeds until two consecutive runs agree; after
/// `repetitions` runs without agreement the rank is taken from elimination.
pub fn rank_wiedemann(field: PrimeField, m: &SparseMatrix, seed: u64, repetitions: usize) -> Result<RankResult> {
    m.validate(field)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = RankStats { initial_nnz: m.nnz(), peak_nnz: m.nnz(), ..Default::default() };
    if m.is_zero() {
        let mut res = RankResult::new(0, RankMethod::Wiedemann, field, stats);
        res.probabilistic = true;
        return Ok(res);
    }
    let mut previous: Option<usize> = None;
    for _ in 0..repetitions.max(2) {
        let r = wiedemann_once(field, m, &mut rng);
        stats.wiedemann_runs += 1;
        if previous == Some(r) {
            let mut res = RankResult::new(r, RankMethod::Wiedemann, field, stats);
            res.probabilistic = true;
            return Ok(res);
        }
        previous = Some(r);
    }
    let mut res = rank_sparse(field, m, Budget::UNLIMITED)?;
    res.stats.wiedemann_runs = stats.wiedemann_runs;
    res.stats.fell_back = true;
    Ok(res)
}

fn random_units(field: PrimeField, n: usize, rng: &mut ChaCha8Rng) -> Vec<Fp> {
    (0..n).map(|_| Fp::from_reduced(rng.random_range(1..field.modulus()))).collect()
}

fn wiedemann_once(field: PrimeField, m: &SparseMatrix, rng: &mut ChaCha8Rng) -> usize {
    let n = m.cols;
    let d1 = random_units(field, n, rng);
    let d2 = random_units(field, m.rows, rng);
    let u: Vec<Fp> = (0..n).map(|_| Fp::from_reduced(rng.random_range(0..field.modulus()))).collect();
    let mut v: Vec<Fp> = (0..n).map(|_| Fp::from_reduced(rng.random_range(0..field.modulus()))).collect();
    let apply = |x: &[Fp]| -> Vec<Fp> {
        let y: Vec<Fp> = x.iter().zip(&d1).map(|(&a, &b)| field.mul(a, b)).collect();
        let mut z = m.apply(field, &y);
        for (zi, &di) in z.iter_mut().zip(&d2) {
            *zi = field.mul(*zi, di);
        }
        let w = m.apply_transpose(field, &z);
        w.iter().zip(&d1).map(|(&a, &b)| field.mul(a, b)).collect()
    };
    let mut bm = BerlekampMassey::new(field);
    let max_len = 2 * n + 2;
    let mut stable = 0usize;
    for i in 0..max_len {
        let s = u.iter().zip(&v).fold(Fp::ZERO, |acc, (&a, &b)| field.add(acc, field.mul(a, b)));
        let before = bm.len;
        bm.push(s);
        if bm.len == before && i + 1 >= 2 * bm.len {
            stable += 1;
            if stable >= EARLY_TERMINATION {
                break;
            }
        } else {
            stable = 0;
        }
        v = apply(&v);
    }
    let poly = bm.connection();
    // reversed connection polynomial is the minimal polynomial; its trailing
    // zero coefficients count powers of x
    let deg = bm.len;
    let mut x_power = 0;
    while x_power < deg && poly.get(deg - x_power).is_none_or(|c| c.is_zero()) {
        x_power += 1;
    }
    (deg - x_power.min(1)).min(m.rows.min(m.cols))
}

struct BerlekampMassey {
    field: PrimeField,
    seq: Vec<Fp>,
    c: Vec<Fp>,
    b: Vec<Fp>,
    len: usize,
    shift: usize,
    last_disc: Fp,
}

impl BerlekampMassey {
    fn new(field: PrimeField) -> Self {
        BerlekampMassey { field, seq: Vec::new(), c: vec![Fp::ONE], b: vec![Fp::ONE], len: 0, shift: 1, last_disc: Fp::ONE }
    }

    fn push(&mut self, s: Fp) {
        let f = self.field;
        self.seq.push(s);
        let n = self.seq.len() - 1;
        let mut d = s;
        for i in 1..=self.len.min(self.c.len() - 1) {
            d = f.add(d, f.mul(self.c[i], self.seq[n - i]));
        }
        if d.is_zero() {
            self.shift += 1;
            return;
        }
        let coef = f.mul(d, f.inv(self.last_disc).unwrap());
        let old_c = self.c.clone();
        let need = self.b.len() + self.shift;
        if self.c.len() < need {
            self.c.resize(need, Fp::ZERO);
        }
        for (i, &bi) in self.b.iter().enumerate() {
            let t = f.mul(coef, bi);
            self.c[i + self.shift] = f.sub(self.c[i + self.shift], t);
        }
        if 2 * self.len <= n {
            self.len = n + 1 - self.len;
            self.b = old_c;
            self.last_disc = d;
            self.shift = 1;
        } else {
            self.shift += 1;
        }
    }

    /// Connection polynomial `1 + c_1 z + ... + c_L z^L`.
    fn connection(&self) -> Vec<Fp> {
        let mut c = self.c.clone();
        c.resize(self.len + 1, Fp::ZERO);
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f() -> PrimeField {
        PrimeField::new(10007).unwrap()
    }

    fn all_methods(m: &SparseMatrix) -> [usize; 3] {
        let f = f();
        [
            rank_sparse(f, m, Budget::UNLIMITED).unwrap().rank,
            rank_wiedemann(f, m, 3, 6).unwrap().rank,
            rank_dense_oracle(f, m, OracleArithmetic::ModP).unwrap().rank,
        ]
    }

    #[test]
    fn small_examples() {
        assert_eq!(all_methods(&SparseMatrix::identity(100)), [100; 3]);
        let diag = SparseMatrix::from_dense(&[
            vec![Fp::ONE, Fp::ZERO, Fp::ZERO, Fp::ZERO],
            vec![Fp::ZERO, f().elem(2), Fp::ZERO, Fp::ZERO],
            vec![Fp::ZERO; 4],
            vec![Fp::ZERO, Fp::ZERO, Fp::ZERO, f().elem(3)],
        ]);
        assert_eq!(all_methods(&diag), [3; 3]);
        assert_eq!(all_methods(&SparseMatrix::zero(5, 7)), [0; 3]);
        let one_zero = SparseMatrix::zero(1, 1);
        assert_eq!(rank_dense_oracle(f(), &one_zero, OracleArithmetic::ExactRational).unwrap().rank, 0);
    }

    #[test]
    fn hilbert_like_is_nonsingular_over_q() {
        // 1/(i+j+1) scaled by lcm 2520 stays integral and small
        let f = f();
        let rows: Vec<Vec<Fp>> = (0..5).map(|i| (0..5).map(|j| f.elem(2520 / (i + j + 1))).collect()).collect();
        let m = SparseMatrix::from_dense(&rows);
        assert_eq!(rank_dense_oracle(f, &m, OracleArithmetic::ExactRational).unwrap().rank, 5);
    }

    #[test]
    fn validation_errors() {
        let v = Fp::ONE;
        assert_eq!(SparseMatrix::new(2, 2, vec![(0, 0, v), (0, 0, v)]), Err(Error::DuplicateEntry { row: 0, col: 0 }));
        assert_eq!(SparseMatrix::new(2, 2, vec![(1, 0, Fp::ZERO)]), Err(Error::StoredZero { row: 1, col: 0 }));
        assert_eq!(SparseMatrix::new(2, 2, vec![(2, 0, v)]), Err(Error::IndexOutOfRange { row: 2, col: 0 }));
        let big = SparseMatrix::zero(3000, 3000);
        assert!(matches!(
            rank_dense_oracle(f(), &big, OracleArithmetic::ExactRational),
            Err(Error::OracleCapExceeded { .. })
        ));
    }

    #[test]
    fn budget_checkpoint_preserves_rank() {
        let f = f();
        let m = SparseMatrix::random(f, 80, 60, 0.05, 11);
        let full = rank_sparse(f, &m, Budget::UNLIMITED).unwrap().rank;
        let budget = Budget { max_work: Some(50), expired: None };
        let cfg = EliminationConfig { dense_ratio: 2.0, dense_cap: 0 };
        match rank_sparse_with(f, &m, budget, cfg) {
            Err(Error::BudgetExhausted { rank_so_far, checkpoint }) => {
                let rest = rank_sparse(f, &checkpoint, Budget::UNLIMITED).unwrap().rank;
                assert_eq!(rank_so_far + rest, full);
            }
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn pure_sparse_and_dense_tail_agree() {
        let f = f();
        for seed in 0..10 {
            let m = SparseMatrix::random(f, 120, 90, 0.03, seed);
            let sparse_only = rank_sparse_with(f, &m, Budget::UNLIMITED, EliminationConfig { dense_ratio: 2.0, dense_cap: 0 })
                .unwrap()
                .rank;
            let dense_only = rank_sparse_with(f, &m, Budget::UNLIMITED, EliminationConfig { dense_ratio: 0.0, dense_cap: usize::MAX })
                .unwrap()
                .rank;
            let oracle = rank_dense_oracle(f, &m, OracleArithmetic::ModP).unwrap().rank;
            assert_eq!((sparse_only, dense_only), (oracle, oracle));
        }
    }

    #[test]
    fn matmul_matches_dense() {
        let f = f();
        let a = SparseMatrix::random(f, 7, 5, 0.5, 1);
        let b = SparseMatrix::random(f, 5, 6, 0.5, 2);
        let c = a.matmul(f, &b).unwrap().to_dense();
        let (ad, bd) = (a.to_dense(), b.to_dense());
        for i in 0..7 {
            for j in 0..6 {
                let s = (0..5).fold(Fp::ZERO, |acc, k| f.add(acc, f.mul(ad[i][k], bd[k][j])));
                assert_eq!(c[i][j], s);
            }
        }
    }
}
