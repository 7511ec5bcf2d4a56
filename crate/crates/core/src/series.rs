//! Truncated power series `a_0 + a_1 t + ... + a_m t^m` over `F_p`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{Fp, PrimeField};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    coeffs: Vec<Fp>,
}

impl Series {
    /// Series known modulo `t^(order + 1)`.
    pub fn zero(order: usize) -> Self {
        Series { coeffs: vec![Fp::ZERO; order + 1] }
    }

    pub fn constant(c: Fp, order: usize) -> Self {
        let mut s = Series::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// `c + t`
    pub fn shifted_variable(c: Fp, order: usize) -> Self {
        let mut s = Series::constant(c, order);
        if order >= 1 {
            s.coeffs[1] = Fp::ONE;
        }
        s
    }

    pub fn from_coeffs(mut coeffs: Vec<Fp>, order: usize) -> Self {
        coeffs.resize(order + 1, Fp::ZERO);
        Series { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Fp] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Fp {
        self.coeffs.get(i).copied().unwrap_or(Fp::ZERO)
    }

    /// Same series known to a lower order.
    pub fn truncate(&self, order: usize) -> Series {
        Series::from_coeffs(self.coeffs[..=order.min(self.order())].to_vec(), order)
    }

    /// Index of the first nonzero coefficient, if any within the known range.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_none()
    }

    pub fn add(&self, f: PrimeField, o: &Series) -> Series {
        let n = self.order().min(o.order());
        Series { coeffs: (0..=n).map(|i| f.add(self.coeffs[i], o.coeffs[i])).collect() }
    }

    pub fn sub(&self, f: PrimeField, o: &Series) -> Series {
        let n = self.order().min(o.order());
        Series { coeffs: (0..=n).map(|i| f.sub(self.coeffs[i], o.coeffs[i])).collect() }
    }

    pub fn scale(&self, f: PrimeField, c: Fp) -> Series {
        Series { coeffs: self.coeffs.iter().map(|&a| f.mul(a, c)).collect() }
    }

    pub fn mul(&self, f: PrimeField, o: &Series) -> Series {
        let n = self.order().min(o.order());
        let mut out = vec![0u64; n + 1];
        let p = f.modulus() as u64;
        for (i, &a) in self.coeffs.iter().take(n + 1).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in o.coeffs.iter().take(n + 1 - i).enumerate() {
                out[i + j] = (out[i + j] + a.value() as u64 * b.value() as u64) % p;
            }
        }
        Series { coeffs: out.into_iter().map(|v| Fp::from_reduced(v as u32)).collect() }
    }

    /// Multiplicative inverse; requires a unit constant term.
    pub fn inverse(&self, f: PrimeField) -> Result<Series> {
        let a0inv = f.inv(self.coeffs[0])?;
        let n = self.order();
        let mut out = vec![Fp::ZERO; n + 1];
        out[0] = a0inv;
        for k in 1..=n {
            let mut s = Fp::ZERO;
            for i in 1..=k {
                s = f.add(s, f.mul(self.coeffs[i], out[k - i]));
            }
            out[k] = f.neg(f.mul(s, a0inv));
        }
        Ok(Series { coeffs: out })
    }

    /// Square root with prescribed constant term `root0` (`root0^2 = a_0 != 0`),
    /// by Newton iteration `y <- (y + a / y) / 2` doubling the precision each step.
    pub fn sqrt_with(&self, f: PrimeField, root0: Fp) -> Result<Series> {
        let n = self.order();
        let half = f.inv(f.elem(2))?;
        let mut y = Series::constant(root0, 0);
        let mut prec = 0usize;
        while prec < n {
            prec = (2 * prec + 1).min(n);
            let y_ext = Series::from_coeffs(y.coeffs.clone(), prec);
            let a = self.truncate(prec);
            let q = a.mul(f, &y_ext.inverse(f)?);
            y = y_ext.add(f, &q).scale(f, half);
        }
        Ok(Series::from_coeffs(y.coeffs, n))
    }

    /// Evaluates a univariate polynomial (coefficients low to high) at this series.
    pub fn eval_poly(&self, f: PrimeField, poly: &[Fp]) -> Series {
        let n = self.order();
        let mut acc = Series::zero(n);
        for &c in poly.iter().rev() {
            acc = acc.mul(f, self);
            acc.coeffs[0] = f.add(acc.coeffs[0], c);
        }
        acc
    }

    /// Successive powers `1, s, s^2, ..., s^k`.
    pub fn powers(&self, f: PrimeField, k: usize) -> Vec<Series> {
        let mut out = Vec::with_capacity(k + 1);
        out.push(Series::constant(Fp::ONE, self.order()));
        for i in 1..=k {
            let next = out[i - 1].mul(f, self);
            out.push(next);
        }
        out
    }
}

pub(crate) fn check_order(order: usize, max: usize) -> Result<()> {
    if order > max {
        return Err(Error::TruncationTooLarge { order, max });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_sqrt() {
        let f = PrimeField::new(10007).unwrap();
        // 1 + t^5 to order 7
        let mut c = vec![Fp::ZERO; 8];
        c[0] = Fp::ONE;
        c[5] = Fp::ONE;
        let a = Series::from_coeffs(c, 7);
        let y = a.sqrt_with(f, Fp::ONE).unwrap();
        assert_eq!(y.mul(f, &y), a);
        // y = 1 + t^5/2 + O(t^8)
        assert_eq!(y.coeff(5), f.inv(f.elem(2)).unwrap());
        let inv = a.inverse(f).unwrap();
        assert_eq!(inv.mul(f, &a), Series::constant(Fp::ONE, 7));
    }

    #[test]
    fn order_zero_is_constant() {
        let f = PrimeField::new(7).unwrap();
        let a = Series::constant(f.elem(2), 0);
        let y = a.sqrt_with(f, f.elem(3)).unwrap();
        assert_eq!(y, Series::constant(f.elem(3), 0));
    }
}
