//! Dense univariate polynomials over `F_p`, coefficients stored low to high.

use alloc::vec;
use alloc::vec::Vec;

use crate::field::{Fp, PrimeField};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Fp>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Fp>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_ints(field: PrimeField, coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| field.elem(c)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![Fp::ONE] }
    }

    /// `x - a`
    pub fn linear(field: PrimeField, a: Fp) -> Self {
        Poly::new(vec![field.neg(a), Fp::ONE])
    }

    pub fn coeffs(&self) -> &[Fp] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Fp {
        self.coeffs.get(i).copied().unwrap_or(Fp::ZERO)
    }

    pub fn leading(&self) -> Fp {
        self.coeffs.last().copied().unwrap_or(Fp::ZERO)
    }

    pub fn eval(&self, field: PrimeField, x: Fp) -> Fp {
        self.coeffs.iter().rev().fold(Fp::ZERO, |acc, &c| field.add(field.mul(acc, x), c))
    }

    pub fn derivative(&self, field: PrimeField) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| field.mul(c, field.from_u64(i as u64)))
                .collect(),
        )
    }

    pub fn add(&self, field: PrimeField, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|i| field.add(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn sub(&self, field: PrimeField, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|i| field.sub(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn scale(&self, field: PrimeField, c: Fp) -> Poly {
        Poly::new(self.coeffs.iter().map(|&a| field.mul(a, c)).collect())
    }

    pub fn mul(&self, field: PrimeField, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Fp::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = field.add(out[i + j], field.mul(a, b));
            }
        }
        Poly::new(out)
    }

    /// Quotient and remainder; panics on division by the zero polynomial.
    pub fn divrem(&self, field: PrimeField, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead_inv = field.inv(divisor.leading()).expect("nonzero leading coefficient");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(), Poly::new(rem));
        }
        let mut quot = vec![Fp::ZERO; rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = field.mul(rem[k + dd], lead_inv);
            quot[k] = c;
            if c.is_zero() {
                continue;
            }
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] = field.sub(rem[k + j], field.mul(c, d));
            }
        }
        rem.truncate(dd);
        (Poly::new(quot), Poly::new(rem))
    }

    pub fn rem(&self, field: PrimeField, divisor: &Poly) -> Poly {
        self.divrem(field, divisor).1
    }

    pub fn monic(&self, field: PrimeField) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let inv = field.inv(self.leading()).expect("nonzero leading coefficient");
        self.scale(field, inv)
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, field: PrimeField, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(field, &b);
            a = b;
            b = r;
        }
        a.monic(field)
    }

    /// `self^e mod modulus`
    pub fn powmod(&self, field: PrimeField, mut e: u64, modulus: &Poly) -> Poly {
        let mut base = self.rem(field, modulus);
        let mut acc = Poly::one().rem(field, modulus);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(field, &base).rem(field, modulus);
            }
            base = base.mul(field, &base).rem(field, modulus);
            e >>= 1;
        }
        acc
    }

    /// Squarefree iff `gcd(f, f')` is constant.
    pub fn is_squarefree(&self, field: PrimeField) -> bool {
        self.gcd(field, &self.derivative(field)).degree() == Some(0)
    }

    /// Distinct roots in `F_p`, ascending.
    ///
    /// Isolates the split part `gcd(f, x^p - x)` and separates it by the
    /// deterministic Cantor-Zassenhaus splits `gcd((x + a)^((p-1)/2) - 1, h)`
    /// for `a = 0, 1, 2, ...`.
    pub fn roots(&self, field: PrimeField) -> Vec<Fp> {
        let mut out = Vec::new();
        let Some(d) = self.degree() else {
            return out;
        };
        if d == 0 {
            return out;
        }
        let f = self.monic(field);
        let p = field.modulus() as u64;
        let x = Poly::new(vec![Fp::ZERO, Fp::ONE]);
        let xp = x.powmod(field, p, &f);
        let split = f.gcd(field, &xp.sub(field, &x));
        if p == 2 {
            for a in field.elements() {
                if split.eval(field, a).is_zero() {
                    out.push(a);
                }
            }
            return out;
        }
        split_roots(field, split, 0, &mut out);
        out.sort();
        out
    }

    /// Multiplicity of `a` as a root.
    pub fn root_multiplicity(&self, field: PrimeField, a: Fp) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let lin = Poly::linear(field, a);
        let mut m = 0;
        let mut g = self.clone();
        loop {
            let (q, r) = g.divrem(field, &lin);
            if !r.is_zero() {
                return m;
            }
            m += 1;
            g = q;
        }
    }
}

fn split_roots(field: PrimeField, h: Poly, mut shift: u32, out: &mut Vec<Fp>) {
    match h.degree() {
        None | Some(0) => return,
        Some(1) => {
            // x + c
            out.push(field.neg(h.monic(field).coeff(0)));
            return;
        }
        _ => {}
    }
    let e = (field.modulus() as u64 - 1) / 2;
    loop {
        let t = Poly::new(vec![field.from_u64(shift as u64), Fp::ONE]);
        let w = t.powmod(field, e, &h).sub(field, &Poly::one());
        let g = h.gcd(field, &w);
        shift += 1;
        let dg = g.degree().unwrap_or(0);
        if dg > 0 && Some(dg) != h.degree() {
            let (q, _) = h.divrem(field, &g);
            split_roots(field, g, shift, out);
            split_roots(field, q.monic(field), shift, out);
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_products() {
        let f = PrimeField::new(10007).unwrap();
        let mut poly = Poly::one();
        let rs = [3u32, 17, 5000, 9999, 0];
        for r in rs {
            poly = poly.mul(f, &Poly::linear(f, f.elem(r as i64)));
        }
        // times an irreducible quadratic x^2 - (non-residue)
        let nr = (2..).find(|&n| !f.is_square(f.elem(n))).unwrap();
        poly = poly.mul(f, &Poly::new(vec![f.neg(f.elem(nr)), Fp::ZERO, Fp::ONE]));
        let mut expected: Vec<Fp> = rs.iter().map(|&r| f.elem(r as i64)).collect();
        expected.sort();
        assert_eq!(poly.roots(f), expected);
    }

    #[test]
    fn squarefree_detection() {
        let f = PrimeField::new(10007).unwrap();
        assert!(Poly::from_ints(f, &[1, 0, 0, 0, 0, 1]).is_squarefree(f));
        assert!(!Poly::from_ints(f, &[0, 0, 0, 0, 1, 1]).is_squarefree(f));
    }

    #[test]
    fn divrem_identity() {
        let f = PrimeField::new(101).unwrap();
        let a = Poly::from_ints(f, &[3, 1, 4, 1, 5, 9, 2, 6]);
        let b = Poly::from_ints(f, &[2, 7, 1]);
        let (q, r) = a.divrem(f, &b);
        assert_eq!(q.mul(f, &b).add(f, &r), a);
        assert!(r.degree().unwrap_or(0) < 2);
    }

    #[test]
    fn multiplicity() {
        let f = PrimeField::new(101).unwrap();
        let a = Poly::linear(f, Fp::ONE);
        let cube = a.mul(f, &a).mul(f, &a).mul(f, &Poly::linear(f, f.elem(5)));
        assert_eq!(cube.root_multiplicity(f, Fp::ONE), 3);
        assert_eq!(cube.root_multiplicity(f, f.elem(5)), 1);
        assert_eq!(cube.root_multiplicity(f, f.elem(6)), 0);
    }
}
