use koszul_core::field::{PrimeField, DEFAULT_PRIME};
use koszul_core::sparse::{
    rank_dense_oracle, rank_sparse, rank_sparse_with, rank_wiedemann, Budget, EliminationConfig, OracleArithmetic,
    RankMethod, SparseMatrix,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field() -> PrimeField {
    PrimeField::new(DEFAULT_PRIME).unwrap()
}

/// Random matrix of rank at most `k`: a product of `rows x k` and `k x cols` factors.
fn low_rank(rows: usize, cols: usize, k: usize, density: f64, seed: u64) -> SparseMatrix {
    let f = field();
    let a = SparseMatrix::random(f, rows, k, density, seed);
    let b = SparseMatrix::random(f, k, cols, density, seed ^ 0xabcdef);
    a.matmul(f, &b).unwrap()
}

fn elimination(m: &SparseMatrix) -> usize {
    rank_sparse(field(), m, Budget::UNLIMITED).unwrap().rank
}

fn oracle(m: &SparseMatrix) -> usize {
    rank_dense_oracle(field(), m, OracleArithmetic::ModP).unwrap().rank
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transpose_and_permutation_invariance(
        rows in 1usize..60, cols in 1usize..60, k in 0usize..40, density in 0.05f64..0.6, seed in any::<u64>(),
    ) {
        let m = low_rank(rows, cols, k, density, seed);
        let r = elimination(&m);
        prop_assert_eq!(r, elimination(&m.transpose()));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rp: Vec<usize> = (0..rows).collect();
        let mut cp: Vec<usize> = (0..cols).collect();
        rp.shuffle(&mut rng);
        cp.shuffle(&mut rng);
        prop_assert_eq!(r, elimination(&m.permute(&rp, &cp)));
    }

    #[test]
    fn methods_agree(
        rows in 1usize..50, cols in 1usize..50, k in 0usize..50, density in 0.02f64..0.5, seed in any::<u64>(),
    ) {
        let m = low_rank(rows, cols, k, density, seed);
        let expected = oracle(&m);
        prop_assert_eq!(elimination(&m), expected);
        let all_sparse = EliminationConfig { dense_ratio: 2.0, ..Default::default() };
        prop_assert_eq!(rank_sparse_with(field(), &m, Budget::UNLIMITED, all_sparse).unwrap().rank, expected);
        prop_assert_eq!(rank_wiedemann(field(), &m, seed, 2).unwrap().rank, expected);
    }

    #[test]
    fn subadditive(rows in 1usize..40, ca in 1usize..30, cb in 1usize..30, seed in any::<u64>()) {
        let a = low_rank(rows, ca, 12, 0.3, seed);
        let b = low_rank(rows, cb, 12, 0.3, seed.wrapping_add(7));
        let ab = a.hcat(&b).unwrap();
        prop_assert!(elimination(&ab) <= elimination(&a) + elimination(&b));
        prop_assert!(elimination(&ab) >= elimination(&a).max(elimination(&b)));
    }
}

#[test]
fn large_sparse_matches_oracle() {
    let m = SparseMatrix::random(field(), 2000, 2000, 0.01, 11);
    let r = rank_sparse(field(), &m, Budget::UNLIMITED).unwrap();
    assert_eq!(r.rank, oracle(&m));
    assert_eq!(r.method, RankMethod::Elimination);
    let deficient = low_rank(2000, 2000, 1500, 0.004, 12);
    assert_eq!(elimination(&deficient), oracle(&deficient));
}

#[test]
fn wiedemann_agrees_on_fifty_matrices() {
    for seed in 0..50u64 {
        let rows = 40 + (seed as usize * 7) % 80;
        let cols = 30 + (seed as usize * 13) % 90;
        let m = low_rank(rows, cols, (seed as usize * 5) % 70, 0.08, seed);
        let w = rank_wiedemann(field(), &m, seed, 2).unwrap();
        assert!(w.probabilistic || w.method == RankMethod::Elimination);
        assert_eq!(w.rank, oracle(&m), "seed {seed}");
    }
}

#[test]
fn rational_oracle_agrees_on_integer_matrices() {
    for seed in 0..20u64 {
        let m = low_rank(30, 25, 10 + seed as usize % 10, 0.3, seed);
        let exact = rank_dense_oracle(field(), &m, OracleArithmetic::ExactRational).unwrap();
        // the rational rank of a lift can only exceed the mod-p rank
        assert!(exact.rank >= oracle(&m));
    }
}

#[test]
fn budget_checkpoint_completes_the_rank() {
    let m = SparseMatrix::random(field(), 300, 300, 0.05, 5);
    let full = elimination(&m);
    let budget = Budget { max_work: Some(2000), expired: None };
    match rank_sparse(field(), &m, budget) {
        Err(koszul_core::Error::BudgetExhausted { rank_so_far, checkpoint }) => {
            assert_eq!(rank_so_far + elimination(&checkpoint), full);
        }
        other => panic!("expected exhaustion, got {other:?}"),
    }
}
