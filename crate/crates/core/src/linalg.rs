//! Small dense helpers for jet matrices and sample-evaluation audits.

use alloc::vec::Vec;

use crate::field::{Fp, PrimeField};

/// Reduces `rows` to reduced row echelon form in place and returns the pivot
/// column of each nonzero row. Zero rows are dropped.
pub fn rref(field: PrimeField, rows: &mut Vec<Vec<Fp>>) -> Vec<usize> {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, pr);
        let inv = field.inv(rows[r][c]).expect("pivot is nonzero");
        for x in rows[r].iter_mut() {
            *x = field.mul(*x, inv);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c];
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x = field.sub(*x, field.mul(factor, y));
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

pub fn rank(field: PrimeField, rows: &[Vec<Fp>]) -> usize {
    let mut copy = rows.to_vec();
    rref(field, &mut copy).len()
}

/// Rank of the matrix whose columns are `cols`.
pub fn column_rank(field: PrimeField, cols: &[Vec<Fp>]) -> usize {
    rank(field, cols)
}
