use std::sync::Arc;

use koszul_core::curve::{CurveModel, PointOnCurve};
use koszul_core::field::{Fp, PrimeField, DEFAULT_PRIME};
use koszul_core::linalg;
use koszul_core::sections::{
    choose_sample, h0_h1, multiply, riemann_roch_space, DivisorSpec, ProductTable, SampleSet, SectionSpace, SparseVec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn g2() -> CurveModel {
    CurveModel::hyperelliptic(PrimeField::new(DEFAULT_PRIME).unwrap(), &[1, 0, 0, 0, 0, 1]).unwrap()
}

fn g3_hyper() -> CurveModel {
    CurveModel::hyperelliptic_seeded(PrimeField::new(DEFAULT_PRIME).unwrap(), 3, 4).unwrap()
}

fn quartic() -> CurveModel {
    CurveModel::plane(PrimeField::new(DEFAULT_PRIME).unwrap(), &[[4, 0, 0, 1], [0, 4, 0, 1], [0, 0, 4, 1]]).unwrap()
}

/// Base multiples from -1 up to past 2g, each also with one to three points removed.
fn divisors(c: &CurveModel) -> Vec<DivisorSpec> {
    let pts = c.enumerate_points(6).points;
    let top = (2 * c.genus() as i64 + 3) / c.base_degree() + 1;
    let mut out = Vec::new();
    for m in -1..=top {
        let d = DivisorSpec::base_multiple(m);
        out.push(d.clone());
        if m >= 0 {
            out.push(d.minus_points(&[(pts[0], 1)]));
            out.push(d.minus_points(&[(pts[1], 2), (pts[4], 1)]));
        }
    }
    out
}

fn space_on(c: &CurveModel, d: &DivisorSpec, samples: &Arc<SampleSet>) -> SectionSpace {
    riemann_roch_space(c, d, samples).unwrap()
}

fn samples(c: &CurveModel, guard: i64, seed: u64) -> Arc<SampleSet> {
    let avoid: Vec<PointOnCurve> = c.enumerate_points(6).points;
    choose_sample(c, guard, seed, &avoid).unwrap()
}

#[test]
fn riemann_roch_and_serre_on_every_space() {
    for c in [g2(), g3_hyper(), quartic()] {
        let g = c.genus() as i64;
        let s = samples(&c, 40, 1);
        for d in divisors(&c) {
            let coh = h0_h1(&c, &d).unwrap();
            assert_eq!(coh.h0 - coh.h1, coh.degree - g + 1, "{d} on {}", c.id());
            if d.base >= 0 {
                let v = space_on(&c, &d, &s);
                assert_eq!(v.dim() as i64, coh.h0);
                assert_eq!(linalg::column_rank(c.field(), v.evaluations()), v.dim());
            }
            if d.base >= 0 && d.degree(&c) <= 2 * g - 2 && d.subtracted.is_empty() {
                assert!(coh.serre_checked, "{d}");
            }
        }
    }
}

#[test]
fn random_sections_vanish_at_most_degree_many_samples() {
    for c in [g2(), quartic()] {
        let s = samples(&c, 40, 2);
        let f = c.field();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in divisors(&c) {
            if d.base < 0 {
                continue;
            }
            let v = space_on(&c, &d, &s);
            if v.dim() == 0 {
                continue;
            }
            for _ in 0..100 {
                let coords: SparseVec = (0..v.dim() as u32).map(|j| (j, f.elem(rng.random_range(0..DEFAULT_PRIME) as i64))).collect();
                let coords: SparseVec = coords.into_iter().filter(|e| !e.1.is_zero()).collect();
                if coords.is_empty() {
                    continue;
                }
                let values = v.evaluate(f, &coords);
                let zeros = values.iter().filter(|x| x.is_zero()).count() as i64;
                assert!(zeros <= d.degree(&c), "{d}: {zeros} zeros");
            }
        }
    }
}

/// Span of the product table's columns inside the target.
fn product_span(_f: PrimeField, t: &ProductTable, target_dim: usize) -> Vec<Vec<Fp>> {
    t.products
        .iter()
        .map(|v| {
            let mut dense = vec![Fp::ZERO; target_dim];
            for &(i, x) in v {
                dense[i as usize] = x;
            }
            dense
        })
        .collect()
}

#[test]
fn multiplication_commutes() {
    for c in [g2(), quartic()] {
        let f = c.field();
        let s = samples(&c, 40, 3);
        let ds: Vec<DivisorSpec> = divisors(&c).into_iter().filter(|d| d.base >= 0 && d.base_degree(&c) <= 12).collect();
        for a in &ds {
            for b in &ds {
                if a.base_degree(&c) + b.base_degree(&c) > 40 {
                    continue;
                }
                let (va, vb) = (space_on(&c, a, &s), space_on(&c, b, &s));
                let ab = multiply(&c, &va, &vb).unwrap();
                let ba = multiply(&c, &vb, &va).unwrap();
                for i in 0..va.dim() {
                    for j in 0..vb.dim() {
                        assert_eq!(ab.table.get(i, j), ba.table.get(j, i));
                    }
                }
                let span = product_span(f, &ab.table, ab.target.dim());
                let mut both = span.clone();
                both.extend(product_span(f, &ba.table, ba.target.dim()));
                assert_eq!(linalg::rank(f, &span), linalg::rank(f, &both));
            }
        }
    }
}

/// Coordinates of `(sum_t v[t] e_t) * c_k` through a product table.
fn times(f: PrimeField, v: &SparseVec, table: &ProductTable, k: usize, dim: usize) -> Vec<Fp> {
    let mut out = vec![Fp::ZERO; dim];
    for &(t, x) in v {
        for &(u, y) in table.get(t as usize, k) {
            out[u as usize] = f.add(out[u as usize], f.mul(x, y));
        }
    }
    out
}

#[test]
fn multiplication_associates() {
    for c in [g2(), quartic()] {
        let f = c.field();
        let s = samples(&c, 40, 4);
        let pts = c.enumerate_points(6).points;
        let a = DivisorSpec::base_multiple(2).minus_points(&[(pts[0], 1)]);
        let b = DivisorSpec::base_multiple(3 - c.base_degree().min(2));
        let d = DivisorSpec::base_multiple(2).minus_points(&[(pts[1], 1)]);
        let (va, vb, vd) = (space_on(&c, &a, &s), space_on(&c, &b, &s), space_on(&c, &d, &s));
        let ab = multiply(&c, &va, &vb).unwrap();
        let ab_d = multiply(&c, &ab.target, &vd).unwrap();
        let bd = multiply(&c, &vb, &vd).unwrap();
        let a_bd = multiply(&c, &va, &bd.target).unwrap();
        assert_eq!(ab_d.target.divisor(), a_bd.target.divisor());
        let dim = ab_d.target.dim();
        for i in 0..va.dim() {
            for j in 0..vb.dim() {
                for k in 0..vd.dim() {
                    let left = times(f, ab.table.get(i, j), &ab_d.table, k, dim);
                    // a_i * (b_j d_k), expanded through the second table's rows
                    let mut right = vec![Fp::ZERO; dim];
                    for &(t, x) in bd.table.get(j, k) {
                        for &(u, y) in a_bd.table.get(i, t as usize) {
                            right[u as usize] = f.add(right[u as usize], f.mul(x, y));
                        }
                    }
                    assert_eq!(left, right);
                }
            }
        }
    }
}
