//! Rank computation policy for the harness: wall-clock deadline, per-matrix
//! size cap, optional matrix cache and optional timings.

use std::time::{Duration, Instant};

use koszul_core::field::PrimeField;
use koszul_core::koszul::{KoszulComplex, Ranker};
use koszul_core::sparse::{rank_sparse_with, Budget, EliminationConfig, RankResult, SparseMatrix};
use koszul_core::Error;

use crate::cache::{CacheKey, MatrixCache};

/// Per-cell nonzero cap.
pub const DEFAULT_MAX_NNZ: usize = 100_000_000;

/// Default per-check budget: 30 minutes.
pub const DEFAULT_BUDGET_SECONDS: f64 = 1800.0;

#[derive(Clone, Copy, Debug)]
pub struct Deadline {
    start: Instant,
    limit: Option<Duration>,
}

impl Deadline {
    pub fn new(seconds: Option<f64>) -> Self {
        Deadline { start: Instant::now(), limit: seconds.map(Duration::from_secs_f64) }
    }

    pub fn expired(&self) -> bool {
        self.limit.is_some_and(|l| self.start.elapsed() >= l)
    }

    pub fn elapsed_seconds(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

pub struct HarnessRanker<'a> {
    pub deadline: Deadline,
    pub max_nnz: usize,
    pub timings: bool,
    pub cache: Option<&'a MatrixCache>,
}

impl<'a> HarnessRanker<'a> {
    pub fn new(budget_seconds: Option<f64>, max_nnz: usize, timings: bool, cache: Option<&'a MatrixCache>) -> Self {
        HarnessRanker { deadline: Deadline::new(budget_seconds), max_nnz, timings, cache }
    }

    fn cached_matrix(&self, complex: &KoszulComplex, p: i64, q: i64) -> koszul_core::Result<SparseMatrix> {
        let Some(cache) = self.cache else { return complex.differential(p, q) };
        let curve = complex.curve();
        let key = CacheKey {
            curve: curve.id(),
            b: complex.b().recipe(curve),
            l: complex.l().recipe(curve),
            p,
            q,
            prime: complex.field().modulus(),
            seed: complex.seed(),
        };
        // cache IO failures fall back to assembly; the cache is an accelerator only
        if let Ok(Some(m)) = cache.load(&key, complex.field()) {
            return Ok(m);
        }
        let m = complex.differential(p, q)?;
        let _ = cache.store(&key, &m, complex.field().modulus());
        Ok(m)
    }
}

impl Ranker for HarnessRanker<'_> {
    fn rank(&self, field: PrimeField, m: &SparseMatrix) -> koszul_core::Result<RankResult> {
        if m.nnz() > self.max_nnz {
            return Err(Error::MatrixTooLarge { nnz: m.nnz(), cap: self.max_nnz });
        }
        if self.deadline.expired() {
            return Err(Error::BudgetExhausted { rank_so_far: 0, checkpoint: Box::new(m.clone()) });
        }
        let start = Instant::now();
        let expired = || self.deadline.expired();
        let budget = Budget { max_work: None, expired: Some(&expired) };
        let mut r = rank_sparse_with(field, m, budget, EliminationConfig::default())?;
        if self.timings {
            r.elapsed_seconds = Some(start.elapsed().as_secs_f64());
        }
        Ok(r)
    }

    fn rank_differential(&self, complex: &KoszulComplex, p: i64, q: i64) -> koszul_core::Result<RankResult> {
        let m = self.cached_matrix(complex, p, q)?;
        self.rank(complex.field(), &m)
    }
}

/// Budget exhaustion and size caps map to `budget_exceeded`, not failure.
pub fn is_budget_error(e: &Error) -> bool {
    matches!(e, Error::BudgetExhausted { .. } | Error::MatrixTooLarge { .. })
}
