//! Laurent polynomials in `q` with integer coefficients.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Rational;

/// Dense Laurent polynomial `sum_i coeffs[i] * q^(low + i)`.
///
/// The first and last stored coefficients are nonzero; the zero polynomial
/// has no coefficients and `low == 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    low: i32,
    coeffs: Vec<BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly { low: 0, coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::monomial(c, 0)
    }

    pub fn monomial(c: BigInt, exp: i32) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentPoly { low: exp, coeffs: vec![c] }
    }

    /// Builds from `coeffs[i] * q^(low + i)`, trimming zeros.
    pub fn from_coeffs(low: i32, coeffs: Vec<BigInt>) -> Self {
        let mut p = LaurentPoly { low, coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead_zeros = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead_zeros == self.coeffs.len() {
            self.coeffs.clear();
            self.low = 0;
            return;
        }
        if lead_zeros > 0 {
            self.coeffs.drain(..lead_zeros);
            self.low += lead_zeros as i32;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.low == 0 && self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Constant value if the polynomial has no `q`-dependence.
    pub fn as_constant(&self) -> Option<BigInt> {
        if self.is_zero() {
            Some(BigInt::zero())
        } else if self.low == 0 && self.coeffs.len() == 1 {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Lowest exponent present (0 for the zero polynomial).
    pub fn low(&self) -> i32 {
        self.low
    }

    /// Highest exponent present.
    pub fn high(&self) -> i32 {
        self.low + self.coeffs.len() as i32 - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, exp: i32) -> BigInt {
        let i = exp - self.low;
        if i < 0 || i as usize >= self.coeffs.len() {
            BigInt::zero()
        } else {
            self.coeffs[i as usize].clone()
        }
    }

    pub fn leading_coeff(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    /// Multiplies by `q^k`.
    pub fn shift(&self, k: i32) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        LaurentPoly { low: self.low + k, coeffs: self.coeffs.clone() }
    }

    /// Same coefficients with the lowest exponent moved to 0.
    pub fn normalized_low(&self) -> Self {
        self.shift(-self.low)
    }

    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentPoly { low: self.low, coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Divides every coefficient by `c`, which must divide all of them.
    pub fn div_exact_scalar(&self, c: &BigInt) -> Self {
        LaurentPoly { low: self.low, coeffs: self.coeffs.iter().map(|a| a / c).collect() }
    }

    pub fn neg(&self) -> Self {
        LaurentPoly { low: self.low, coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let low = self.low.min(other.low);
        let high = self.high().max(other.high());
        let mut coeffs = vec![BigInt::zero(); (high - low + 1) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[(self.low - low) as usize + i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            coeffs[(other.low - low) as usize + i] += c;
        }
        Self::from_coeffs(low, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::from_coeffs(self.low + other.low, coeffs)
    }

    /// Exact evaluation at a rational point; `None` when `q0 = 0` meets a
    /// negative exponent.
    pub fn eval(&self, q0: &Rational) -> Option<Rational> {
        if self.is_zero() {
            return Some(Rational::zero());
        }
        if q0.is_zero() {
            return if self.low < 0 {
                None
            } else {
                Some(Rational::from_integer(self.coeff(0)))
            };
        }
        // Horner on the dense part, then multiply by q0^low.
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * q0 + Rational::from_integer(c.clone());
        }
        Some(acc * rational_pow(q0, self.low))
    }

    /// Dense coefficient vector from exponent 0 upward; requires `low >= 0`.
    fn to_dense(&self) -> Vec<BigInt> {
        assert!(self.low >= 0, "negative exponent in polynomial context");
        let mut v = vec![BigInt::zero(); self.low as usize];
        v.extend(self.coeffs.iter().cloned());
        v
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = self.content();
        if self.leading_coeff().unwrap().is_negative() {
            c = -c;
        }
        self.div_exact_scalar(&c)
    }

    /// Primitive gcd (positive leading coefficient) of two ordinary
    /// polynomials (`low >= 0`), by the primitive pseudo-remainder sequence.
    pub fn poly_gcd(a: &Self, b: &Self) -> Self {
        let g = dense_gcd(a.to_dense(), b.to_dense());
        Self::from_coeffs(0, g)
    }

    /// Exact division of ordinary polynomials over the integers; the divisor
    /// must divide `self`.
    pub fn div_exact_poly(&self, divisor: &Self) -> Self {
        Self::from_coeffs(0, dense_div_exact(self.to_dense(), &divisor.to_dense()))
    }
}

fn dense_trim(v: &mut Vec<BigInt>) {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
}

fn dense_primitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    dense_trim(&mut v);
    let Some(lead) = v.last() else { return v };
    let mut c = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if lead.is_negative() {
        c = -c;
    }
    if !c.is_one() {
        for x in v.iter_mut() {
            *x = &*x / &c;
        }
    }
    v
}

fn dense_prem(mut r: Vec<BigInt>, d: &[BigInt]) -> Vec<BigInt> {
    let dl = d.len();
    let lc = d.last().expect("nonzero divisor");
    dense_trim(&mut r);
    while r.len() >= dl {
        let rl = r.last().unwrap().clone();
        let shift = r.len() - dl;
        for c in r.iter_mut() {
            *c *= lc;
        }
        for (i, dc) in d.iter().enumerate() {
            r[shift + i] -= &rl * dc;
        }
        dense_trim(&mut r);
    }
    r
}

fn dense_gcd(a: Vec<BigInt>, b: Vec<BigInt>) -> Vec<BigInt> {
    let (mut a, mut b) = (dense_primitive(a), dense_primitive(b));
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        let r = dense_prem(a, &b);
        a = b;
        b = dense_primitive(r);
    }
    a
}

fn dense_div_exact(mut r: Vec<BigInt>, d: &[BigInt]) -> Vec<BigInt> {
    dense_trim(&mut r);
    let dl = d.len();
    let lc = d.last().expect("nonzero divisor");
    if r.len() < dl {
        debug_assert!(r.is_empty(), "inexact polynomial division");
        return Vec::new();
    }
    let mut q = vec![BigInt::zero(); r.len() - dl + 1];
    for shift in (0..q.len()).rev() {
        let top = &r[shift + dl - 1];
        if top.is_zero() {
            continue;
        }
        let (quot, rem) = top.div_rem(lc);
        debug_assert!(rem.is_zero(), "inexact polynomial division");
        for (i, dc) in d.iter().enumerate() {
            r[shift + i] -= &quot * dc;
        }
        q[shift] = quot;
    }
    debug_assert!(r.iter().all(|c| c.is_zero()), "nonzero remainder");
    q
}

pub(crate) fn rational_pow(x: &Rational, k: i32) -> Rational {
    let base = if k < 0 { x.recip() } else { x.clone() };
    let mut acc = Rational::one();
    for _ in 0..k.unsigned_abs() {
        acc *= &base;
    }
    acc
}

impl PartialOrd for LaurentPoly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LaurentPoly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.low.cmp(&other.low).then_with(|| self.coeffs.cmp(&other.coeffs))
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let e = self.low + i as i32;
            let mag = c.abs();
            if c.is_negative() {
                write!(f, "-")?;
            } else if !first {
                write!(f, "+")?;
            }
            first = false;
            let unit = mag.is_one();
            match (e, unit) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "q")?,
                (1, false) => write!(f, "{mag}*q")?,
                (_, true) => write!(f, "q^{e}")?,
                (_, false) => write!(f, "{mag}*q^{e}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(low: i32, cs: &[i64]) -> LaurentPoly {
        LaurentPoly::from_coeffs(low, cs.iter().map(|&c| BigInt::from(c)).collect())
    }

    #[test]
    fn trims_zeros_on_both_ends() {
        let p = lp(-2, &[0, 0, 3, 0, 1, 0]);
        assert_eq!(p.low(), 0);
        assert_eq!(p.high(), 2);
        assert!(lp(4, &[0, 0]).is_zero());
    }

    #[test]
    fn product_of_conjugates() {
        // (q - q^-1)(q + q^-1) = q^2 - q^-2
        let a = lp(-1, &[-1, 0, 1]);
        let b = lp(-1, &[1, 0, 1]);
        assert_eq!(a.mul(&b), lp(-2, &[-1, 0, 0, 0, 1]));
    }

    #[test]
    fn gcd_and_exact_division() {
        // (q^2 - 1) = (q - 1)(q + 1); gcd with (q + 1)^2 is q + 1
        let a = lp(0, &[-1, 0, 1]);
        let b = lp(0, &[1, 2, 1]);
        let g = LaurentPoly::poly_gcd(&a, &b);
        assert_eq!(g, lp(0, &[1, 1]));
        assert_eq!(a.div_exact_poly(&g), lp(0, &[-1, 1]));
        assert_eq!(b.div_exact_poly(&g), lp(0, &[1, 1]));
    }

    #[test]
    fn gcd_of_coprime_is_one() {
        let a = lp(0, &[2, 0, 1]);
        let b = lp(0, &[1, 1]);
        assert!(LaurentPoly::poly_gcd(&a, &b).is_one());
    }

    #[test]
    fn evaluation_with_negative_exponents() {
        let p = lp(-1, &[1, 0, 1]); // q + q^-1
        let v = p.eval(&Rational::from_integer(2.into())).unwrap();
        assert_eq!(v, Rational::new(5.into(), 2.into()));
        assert!(p.eval(&Rational::zero()).is_none());
    }

    #[test]
    fn display_descending() {
        assert_eq!(lp(-1, &[-1, 0, 2]).to_string(), "2*q-q^-1");
        assert_eq!(lp(0, &[1, 0, 1]).to_string(), "q^2+1");
    }
}
