use koszul_core::field::{Fp, PrimeField, DEFAULT_PRIME, DEFAULT_SECONDARY_PRIME};
use proptest::prelude::*;

fn field() -> PrimeField {
    PrimeField::new(DEFAULT_PRIME).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn ring_axioms(a in 0u32..DEFAULT_PRIME, b in 0u32..DEFAULT_PRIME, c in 0u32..DEFAULT_PRIME) {
        let f = field();
        let (a, b, c) = (f.elem(a as i64), f.elem(b as i64), f.elem(c as i64));
        prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        prop_assert_eq!(f.add(a, f.neg(a)), Fp::ZERO);
    }

    #[test]
    fn inverses(a in 1u32..DEFAULT_SECONDARY_PRIME) {
        let f = PrimeField::new(DEFAULT_SECONDARY_PRIME).unwrap();
        let a = f.elem(a as i64);
        prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), Fp::ONE);
        // Fermat: a^(p-1) = 1
        prop_assert_eq!(f.pow(a, DEFAULT_SECONDARY_PRIME as u64 - 1), Fp::ONE);
    }

    #[test]
    fn lift_is_symmetric(a in 0u32..DEFAULT_PRIME) {
        let f = field();
        let l = f.lift(f.elem(a as i64));
        prop_assert!(l > -(DEFAULT_PRIME as i64) / 2 - 1 && l <= DEFAULT_PRIME as i64 / 2);
        prop_assert_eq!(f.elem(l), f.elem(a as i64));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn batch_inverse_matches_elementwise(xs in prop::collection::vec(1u32..DEFAULT_PRIME, 0..64)) {
        let f = field();
        let xs: Vec<Fp> = xs.into_iter().map(|x| f.elem(x as i64)).collect();
        let batch = f.batch_inverse(&xs).unwrap();
        let single: Vec<Fp> = xs.iter().map(|&x| f.inv(x).unwrap()).collect();
        prop_assert_eq!(batch, single);
    }
}

#[test]
fn zero_has_no_inverse() {
    let f = field();
    assert!(f.inv(Fp::ZERO).is_err());
    assert!(f.batch_inverse(&[Fp::ONE, Fp::ZERO]).is_err());
}
