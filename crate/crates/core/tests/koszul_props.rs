use koszul_core::curve::CurveModel;
use koszul_core::field::{PrimeField, DEFAULT_PRIME, DEFAULT_SECONDARY_PRIME};
use koszul_core::koszul::{
    betti_table, koszul_dim, strand_boundary, table_complex, EliminationRanker, KoszulComplex, StrandStrategy,
};
use koszul_core::sections::DivisorSpec;

fn g2(p: u32) -> CurveModel {
    CurveModel::hyperelliptic(PrimeField::new(p).unwrap(), &[1, 0, 0, 0, 0, 1]).unwrap()
}

fn quartic(p: u32) -> CurveModel {
    CurveModel::plane(PrimeField::new(p).unwrap(), &[[4, 0, 0, 1], [0, 4, 0, 1], [0, 0, 4, 1]]).unwrap()
}

fn parse(c: &CurveModel, r: &str) -> DivisorSpec {
    DivisorSpec::parse(c, r).unwrap()
}

#[test]
fn consecutive_differentials_compose_to_zero() {
    let cases = [(g2(DEFAULT_PRIME), "trivial", "5*inf"), (g2(DEFAULT_PRIME), "K", "6*inf"), (quartic(DEFAULT_PRIME), "trivial", "2*H"), (quartic(DEFAULT_PRIME), "K", "3*H - P1 - P2 - P3")];
    for (c, b, l) in &cases {
        let complex = KoszulComplex::new(c, &parse(c, b), &parse(c, l), -1, 3, 1).unwrap();
        for p in 0..=4 {
            for q in 0..=2 {
                let m = complex.composite(p, q).unwrap();
                assert!(m.is_zero(), "delta({p},{q}) o delta({},{}) on {l}", p + 1, q - 1);
            }
        }
    }
}

#[test]
fn duality_on_genus_two() {
    for l in ["5*inf", "6*inf"] {
        let c = g2(DEFAULT_PRIME);
        let l = parse(&c, l);
        let o = betti_table(&c, &DivisorSpec::trivial(), &l, 4, &[0, 1, 2], 1, &EliminationRanker).unwrap();
        let k = betti_table(&c, &DivisorSpec::canonical(&c), &l, 4, &[0, 1, 2], 1, &EliminationRanker).unwrap();
        let r = o.r;
        for p in 0..=r - 1 {
            for q in 0..=2 {
                if let (Some(a), Some(b)) = (o.dim(p, q), k.dim(r - 1 - p, 2 - q)) {
                    assert_eq!(a, b, "K_({p},{q}) for L = {l}");
                }
            }
        }
    }
}

#[test]
fn euler_characteristic_along_diagonals() {
    let c = quartic(DEFAULT_PRIME);
    for l in ["2*H", "3*H - P1 - P2 - P3"] {
        let t = betti_table(&c, &DivisorSpec::trivial(), &parse(&c, l), 8, &[0, 1, 2], 1, &EliminationRanker).unwrap();
        let n = (t.r + 1) as usize;
        let checks = t.euler_checks(n);
        assert!(!checks.is_empty());
        assert!(checks.iter().all(|c| c.1), "{l}: {checks:?}");
    }
}

#[test]
fn dimensions_agree_across_primes() {
    for (b, l) in [("trivial", "2*H"), ("K", "2*H")] {
        let a = quartic(DEFAULT_PRIME);
        let z = quartic(DEFAULT_SECONDARY_PRIME);
        let ta = betti_table(&a, &parse(&a, b), &parse(&a, l), 5, &[0, 1, 2], 3, &EliminationRanker).unwrap();
        let tz = betti_table(&z, &parse(&z, b), &parse(&z, l), 5, &[0, 1, 2], 3, &EliminationRanker).unwrap();
        assert_eq!(ta.to_csv(), tz.to_csv());
    }
}

#[test]
fn strand_is_an_interval_from_one() {
    let c = g2(DEFAULT_PRIME);
    for m in 5..=8 {
        let l = DivisorSpec::base_multiple(m);
        let t = betti_table(&c, &DivisorSpec::trivial(), &l, m - 1, &[1], 1, &EliminationRanker).unwrap();
        let nonzero: Vec<i64> = (1..m).filter(|&p| t.dim(p, 1).unwrap() != 0).collect();
        let last = *nonzero.last().unwrap();
        assert_eq!(nonzero, (1..=last).collect::<Vec<_>>(), "L = {m}*inf");
        let s = strand_boundary(&c, &l, StrandStrategy::Direct, None, 1, &EliminationRanker).unwrap();
        assert_eq!(s.last_nonzero_p, last);
    }
}

#[test]
fn seeds_do_not_change_dimensions() {
    let c = quartic(DEFAULT_PRIME);
    let l = parse(&c, "3*H - P1 - P2 - P3");
    let a = koszul_dim(&c, &DivisorSpec::trivial(), &l, 3, 1, 1).unwrap();
    let b = koszul_dim(&c, &DivisorSpec::trivial(), &l, 3, 1, 77).unwrap();
    assert_eq!(a.dim, b.dim);
    let complex = table_complex(&c, &DivisorSpec::trivial(), &l, &[1], 5).unwrap();
    assert_eq!(complex.r(), 6);
}
