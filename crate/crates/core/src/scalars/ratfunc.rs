//! Rational functions in `q` over the rationals, kept in canonical form.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::laurent::LaurentPoly;
use super::Rational;

/// `num / den` with `num` a Laurent polynomial and `den` an ordinary
/// polynomial.
///
/// Canonical form: `den` has a nonzero constant term and a positive leading
/// coefficient, `num` and `den` are coprime over the rationals, and the
/// integer content of the pair is 1. Two equal rational functions therefore
/// have identical representations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: LaurentPoly,
    den: LaurentPoly,
}

impl RatFunc {
    pub fn zero() -> Self {
        RatFunc { num: LaurentPoly::zero(), den: LaurentPoly::one() }
    }

    pub fn from_laurent(p: LaurentPoly) -> Self {
        Self::new(p, LaurentPoly::one())
    }

    pub fn from_rational(r: &Rational) -> Self {
        Self::new(
            LaurentPoly::constant(r.numer().clone()),
            LaurentPoly::constant(r.denom().clone()),
        )
    }

    /// `q^k`.
    pub fn q_pow(k: i32) -> Self {
        RatFunc { num: LaurentPoly::monomial(BigInt::one(), k), den: LaurentPoly::one() }
    }

    /// Canonicalizes `num / den`. Panics on a zero denominator.
    pub fn new(num: LaurentPoly, den: LaurentPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Self::zero();
        }
        let valuation = num.low() - den.low();
        let mut n = num.normalized_low();
        let mut d = den.normalized_low();
        if !(d.coeffs().len() == 1) {
            let g = LaurentPoly::poly_gcd(&n, &d);
            if !g.is_one() {
                n = n.div_exact_poly(&g);
                d = d.div_exact_poly(&g);
            }
        }
        let c = n.content().gcd(&d.content());
        let c = if d.leading_coeff().unwrap().is_negative() { -c } else { c };
        if !c.is_one() {
            n = n.div_exact_scalar(&c);
            d = d.div_exact_scalar(&c);
        }
        RatFunc { num: n.shift(valuation), den: d }
    }

    pub fn numer(&self) -> &LaurentPoly {
        &self.num
    }

    pub fn denom(&self) -> &LaurentPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The constant value, if there is no `q`-dependence.
    pub fn as_rational(&self) -> Option<Rational> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(Rational::new(n, d))
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.den == other.den {
            if self.den.is_one() {
                return RatFunc { num: self.num.add(&other.num), den: LaurentPoly::one() };
            }
            return Self::new(self.num.add(&other.num), self.den.clone());
        }
        Self::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn neg(&self) -> Self {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.den.is_one() && other.den.is_one() {
            return RatFunc { num: self.num.mul(&other.num), den: LaurentPoly::one() };
        }
        Self::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Self::new(self.den.clone(), self.num.clone()))
        }
    }

    /// Exact value at `q0`; `None` at a pole.
    pub fn eval(&self, q0: &Rational) -> Option<Rational> {
        let d = self.den.eval(q0)?;
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(q0)? / d)
    }

    /// Numerator and denominator rescaled so that both are ordinary
    /// polynomials, as used by the string form.
    pub fn polynomial_pair(&self) -> (LaurentPoly, LaurentPoly) {
        let s = (-self.num.low()).max(0);
        (self.num.shift(s), self.den.shift(s))
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = self.polynomial_pair();
        if d.is_one() {
            write!(f, "{n}")
        } else {
            write!(f, "({n})/({d})")
        }
    }
}
