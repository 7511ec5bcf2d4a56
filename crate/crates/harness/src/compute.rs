//! Parallel drivers over the core engine. Every differential's rank is
//! computed once; results are merged in a fixed order, so output does not
//! depend on the schedule.

use koszul_core::curve::CurveModel;
use koszul_core::koszul::{
    assemble_table, compute_rank, koszul_cell, table_complex, table_differentials, BettiTable, KoszulCell,
    KoszulComplex, RankMemo, Ranker,
};
use koszul_core::sections::DivisorSpec;
use koszul_core::Error;
use rayon::prelude::*;

pub struct TableRun {
    pub table: BettiTable,
    /// Differentials whose rank failed, in `(p, q)` order.
    pub errors: Vec<((i64, i64), Error)>,
}

pub fn betti_table(
    curve: &CurveModel,
    b: &DivisorSpec,
    l: &DivisorSpec,
    pmax: i64,
    qs: &[i64],
    seed: u64,
    ranker: &dyn Ranker,
) -> koszul_core::Result<TableRun> {
    let complex = table_complex(curve, b, l, qs, seed)?;
    let diffs = table_differentials(b, pmax, qs);
    let results: Vec<_> = diffs.par_iter().map(|&(p, q)| ((p, q), compute_rank(&complex, p, q, ranker))).collect();
    let mut memo = RankMemo::default();
    let mut errors = Vec::new();
    for (pq, r) in results {
        match r {
            Ok(r) => memo.insert(pq.0, pq.1, r),
            Err(e) => errors.push((pq, e)),
        }
    }
    Ok(TableRun { table: assemble_table(&complex, pmax, qs, &memo), errors })
}

/// `K_{p,1}(C, B; L)` alone; only `W_0, W_1, W_2` are built.
pub fn linear_cell(curve: &CurveModel, b: &DivisorSpec, l: &DivisorSpec, p: i64, seed: u64, ranker: &dyn Ranker) -> koszul_core::Result<KoszulCell> {
    let complex = KoszulComplex::new(curve, b, l, 0, 2, seed)?;
    cells(&complex, &[(p, 1)], ranker).map(|mut v| v.remove(0))
}

/// Several cells of one complex, with both differentials per cell ranked in
/// parallel and shared ranks computed once.
pub fn cells(complex: &KoszulComplex, wanted: &[(i64, i64)], ranker: &dyn Ranker) -> koszul_core::Result<Vec<KoszulCell>> {
    let mut diffs: Vec<(i64, i64)> = wanted.iter().flat_map(|&(p, q)| [(p, q), (p + 1, q - 1)]).collect();
    diffs.sort_unstable();
    diffs.dedup();
    let ranks: Vec<_> = diffs.par_iter().map(|&(p, q)| compute_rank(complex, p, q, ranker)).collect();
    let mut memo = RankMemo::default();
    for (&(p, q), r) in diffs.iter().zip(ranks) {
        memo.insert(p, q, r?);
    }
    wanted.iter().map(|&(p, q)| koszul_cell(complex, p, q, &mut memo, ranker)).collect()
}
