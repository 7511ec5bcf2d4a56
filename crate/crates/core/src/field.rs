//! Prime-field arithmetic with a runtime modulus.
//!
//! Elements are plain [`Fp`] values holding their canonical representative;
//! all arithmetic goes through a [`PrimeField`] context, so one element type
//! serves every prime used in a session.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default working prime.
pub const DEFAULT_PRIME: u32 = 10007;
/// Default prime for cross-checks.
pub const DEFAULT_SECONDARY_PRIME: u32 = 32003;

/// Canonical representative of a residue class, always in `[0, p)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fp(u32);

impl Fp {
    pub const ZERO: Fp = Fp(0);
    pub const ONE: Fp = Fp(1);

    #[inline]
    pub fn value(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Wraps a value the caller has already reduced.
    #[inline]
    pub(crate) fn from_reduced(v: u32) -> Fp {
        debug_assert!(v < 1 << 31);
        Fp(v)
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The field `F_p`. Copyable, so it is passed by value everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct PrimeField {
    p: u32,
}

impl TryFrom<u32> for PrimeField {
    type Error = Error;

    fn try_from(p: u32) -> Result<Self> {
        PrimeField::new(p)
    }
}

impl From<PrimeField> for u32 {
    fn from(f: PrimeField) -> u32 {
        f.p
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let n = n as u64;
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

impl PrimeField {
    /// Moduli are limited to 31 bits so that sums of two residues fit in `u32`.
    pub fn new(p: u32) -> Result<Self> {
        if p >= 1 << 31 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeField { p })
    }

    #[inline]
    pub fn modulus(self) -> u32 {
        self.p
    }

    /// Reduces an arbitrary signed integer.
    #[inline]
    pub fn elem(self, v: i64) -> Fp {
        Fp(v.rem_euclid(self.p as i64) as u32)
    }

    #[inline]
    pub fn from_u64(self, v: u64) -> Fp {
        Fp((v % self.p as u64) as u32)
    }

    /// Lifts to the symmetric range `(-p/2, p/2]`.
    pub fn lift(self, a: Fp) -> i64 {
        let v = a.0 as i64;
        if v > (self.p as i64) / 2 {
            v - self.p as i64
        } else {
            v
        }
    }

    #[inline]
    pub fn add(self, a: Fp, b: Fp) -> Fp {
        let s = a.0 + b.0;
        Fp(if s >= self.p { s - self.p } else { s })
    }

    #[inline]
    pub fn sub(self, a: Fp, b: Fp) -> Fp {
        if a.0 >= b.0 {
            Fp(a.0 - b.0)
        } else {
            Fp(a.0 + self.p - b.0)
        }
    }

    #[inline]
    pub fn neg(self, a: Fp) -> Fp {
        if a.0 == 0 {
            a
        } else {
            Fp(self.p - a.0)
        }
    }

    #[inline]
    pub fn mul(self, a: Fp, b: Fp) -> Fp {
        Fp(((a.0 as u64 * b.0 as u64) % self.p as u64) as u32)
    }

    pub fn pow(self, a: Fp, mut e: u64) -> Fp {
        let mut base = a;
        let mut acc = Fp::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(self, a: Fp) -> Result<Fp> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // extended Euclid on (a, p)
        let (mut r0, mut r1) = (self.p as i64, a.0 as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        Ok(self.elem(t0))
    }

    pub fn div(self, a: Fp, b: Fp) -> Result<Fp> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Inverts every entry with one field inversion (Montgomery's trick).
    pub fn batch_inverse(self, xs: &[Fp]) -> Result<Vec<Fp>> {
        if let Some(index) = xs.iter().position(|x| x.is_zero()) {
            return Err(Error::ZeroEntry { index });
        }
        let mut prefix = Vec::with_capacity(xs.len());
        let mut acc = Fp::ONE;
        for &x in xs {
            prefix.push(acc);
            acc = self.mul(acc, x);
        }
        let mut inv = self.inv(acc)?;
        let mut out = alloc::vec![Fp::ZERO; xs.len()];
        for i in (0..xs.len()).rev() {
            out[i] = self.mul(inv, prefix[i]);
            inv = self.mul(inv, xs[i]);
        }
        Ok(out)
    }

    pub fn is_square(self, a: Fp) -> bool {
        a.is_zero() || self.p == 2 || self.pow(a, (self.p as u64 - 1) / 2) == Fp::ONE
    }

    /// Square root by Tonelli-Shanks; returns the smaller of the two roots.
    pub fn sqrt(self, a: Fp) -> Option<Fp> {
        if a.is_zero() || self.p == 2 {
            return Some(a);
        }
        if !self.is_square(a) {
            return None;
        }
        let p = self.p as u64;
        let mut q = p - 1;
        let mut s = 0u32;
        while q.is_multiple_of(2) {
            q /= 2;
            s += 1;
        }
        let mut z = Fp(2);
        while self.is_square(z) {
            z = Fp(z.0 + 1);
        }
        let mut m = s;
        let mut c = self.pow(z, q);
        let mut t = self.pow(a, q);
        let mut r = self.pow(a, q.div_ceil(2));
        while t != Fp::ONE {
            let mut i = 0;
            let mut t2 = t;
            while t2 != Fp::ONE {
                t2 = self.mul(t2, t2);
                i += 1;
            }
            let b = self.pow(c, 1u64 << (m - i - 1));
            m = i;
            c = self.mul(b, b);
            t = self.mul(t, c);
            r = self.mul(r, b);
        }
        let other = self.neg(r);
        Some(if other.0 < r.0 { other } else { r })
    }

    /// Iterates all field elements in increasing order.
    pub fn elements(self) -> impl Iterator<Item = Fp> {
        (0..self.p).map(Fp)
    }
}

/// Prime pair used by a session: the working prime and the cross-check prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldConfig {
    pub prime: u32,
    pub secondary_prime: u32,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig { prime: DEFAULT_PRIME, secondary_prime: DEFAULT_SECONDARY_PRIME }
    }
}

impl FieldConfig {
    /// Both primes must be prime and exceed twice the largest bundle degree.
    pub fn validate(&self, max_degree: u64) -> Result<(PrimeField, PrimeField)> {
        let f = PrimeField::new(self.prime)?;
        let g = PrimeField::new(self.secondary_prime)?;
        for p in [self.prime, self.secondary_prime] {
            if (p as u64) <= 2 * max_degree {
                return Err(Error::PrimeTooSmall { prime: p, max_degree });
            }
        }
        Ok((f, g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f() -> PrimeField {
        PrimeField::new(10007).unwrap()
    }

    #[test]
    fn wraparound_fermat_and_inverse() {
        let f = f();
        assert_eq!(f.add(Fp(10006), Fp(1)), Fp::ZERO);
        assert_eq!(f.pow(Fp(2), 10006), Fp::ONE);
        let i3 = f.inv(Fp(3)).unwrap();
        assert_eq!(f.mul(i3, Fp(3)), Fp::ONE);
        assert_eq!(f.inv(Fp::ZERO), Err(Error::DivisionByZero));
        assert_eq!(f.div(Fp(1), Fp::ZERO), Err(Error::DivisionByZero));
    }

    #[test]
    fn batch_inverse_examples() {
        let f = f();
        let out = f.batch_inverse(&[Fp(1), Fp(2), Fp(4)]).unwrap();
        // elementwise check against inv
        for (x, y) in [1, 2, 4].iter().zip(&out) {
            assert_eq!(f.inv(Fp(*x)).unwrap(), *y);
        }
        assert_eq!(out, [Fp(1), Fp(5004), Fp(2502)]);
        assert_eq!(f.batch_inverse(&[Fp(1)]).unwrap(), [Fp(1)]);
        assert_eq!(f.batch_inverse(&[Fp(1), Fp(0), Fp(2)]), Err(Error::ZeroEntry { index: 1 }));
        assert!(f.batch_inverse(&[]).unwrap().is_empty());
    }

    #[test]
    fn rejects_composites_and_small_primes() {
        assert_eq!(PrimeField::new(10005), Err(Error::NotPrime(10005)));
        assert!(PrimeField::new(1).is_err());
        let cfg = FieldConfig { prime: 11, secondary_prime: 13 };
        assert!(matches!(cfg.validate(6), Err(Error::PrimeTooSmall { prime: 11, .. })));
        assert!(FieldConfig::default().validate(100).is_ok());
    }

    #[test]
    fn sqrt_roundtrip() {
        for p in [7u32, 13, 10007, 32003] {
            let f = PrimeField::new(p).unwrap();
            for a in f.elements().take(500) {
                match f.sqrt(a) {
                    Some(r) => assert_eq!(f.mul(r, r), a),
                    None => assert!(!f.is_square(a)),
                }
            }
        }
    }

    #[test]
    fn lift_is_symmetric() {
        let f = PrimeField::new(7).unwrap();
        assert_eq!(f.lift(Fp(3)), 3);
        assert_eq!(f.lift(Fp(4)), -3);
        assert_eq!(f.elem(-3), Fp(4));
    }
}
