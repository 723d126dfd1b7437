//! Exact coefficient field: rationals, or rational functions in a formal `q`.
//!
//! A [`Field`] fixes the session mode. In specialized mode every scalar is a
//! rational number and `q` stands for the fixed value `q0`; in symbolic mode
//! scalars are canonical rational functions of `q`. Constants are always
//! stored as [`QScalar::Rat`], so equal values compare structurally equal in
//! either mode.

mod laurent;
mod parse;
mod ratfunc;

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub use laurent::LaurentPoly;
pub use ratfunc::RatFunc;

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Session mode of the coefficient field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Symbolic,
    Specialized(Rational),
}

impl Field {
    /// Specialized field at `q0`. Rejects the non-generic values 0 and ±1.
    pub fn specialized(q0: Rational) -> Result<Self> {
        if q0.is_zero() || q0.is_one() || q0 == -Rational::one() {
            return Err(Error::Guard(format!("q0 = {q0} is not generic")));
        }
        Ok(Field::Specialized(q0))
    }

    /// The default specialization `q0 = 2`.
    pub fn default_specialized() -> Self {
        Field::Specialized(Rational::from_integer(2.into()))
    }

    /// Parses a CLI-style mode string: `"symbolic"` or a rational.
    pub fn from_mode_str(s: &str) -> Result<Self> {
        if s.trim() == "symbolic" {
            return Ok(Field::Symbolic);
        }
        let r = parse::parse_rational(s.trim())?;
        Self::specialized(r)
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self, Field::Symbolic)
    }

    /// Mode string, inverse of [`Field::from_mode_str`].
    pub fn mode_str(&self) -> String {
        match self {
            Field::Symbolic => "symbolic".to_string(),
            Field::Specialized(q0) => q0.to_string(),
        }
    }

    pub fn q(&self) -> QScalar {
        self.q_pow(1)
    }

    /// `q^k`.
    pub fn q_pow(&self, k: i32) -> QScalar {
        match self {
            Field::Symbolic => QScalar::from_ratfunc(RatFunc::q_pow(k)),
            Field::Specialized(q0) => QScalar::Rat(laurent::rational_pow(q0, k)),
        }
    }

    /// `q - q^{-1}`.
    pub fn q_minus_qinv(&self) -> QScalar {
        self.q_pow(1) - self.q_pow(-1)
    }

    /// The q-number `[c]_q = (q^c - q^{-c}) / (q - q^{-1})`.
    pub fn qnum(&self, c: i64) -> QScalar {
        // Closed form q^{c-1} + q^{c-3} + ... + q^{1-c}, signed for c < 0.
        let m = c.unsigned_abs() as i32;
        let mut acc = QScalar::zero();
        for i in 0..m {
            acc += self.q_pow(m - 1 - 2 * i);
        }
        if c < 0 {
            -acc
        } else {
            acc
        }
    }

    /// `q^{2c}`, the eigenvalue of the Hecke Jucys-Murphy element on a cell of
    /// content `c`.
    pub fn jm_eigenvalue(&self, c: i64) -> QScalar {
        self.q_pow(2 * c as i32)
    }

    /// Parses a scalar string in this field; `q` evaluates to `q0` in
    /// specialized mode.
    pub fn parse(&self, s: &str) -> Result<QScalar> {
        parse::parse_scalar(s, self)
    }

    /// Maps a scalar from the symbolic field into this one.
    pub fn specialize(&self, s: &QScalar) -> Result<QScalar> {
        match self {
            Field::Symbolic => Ok(s.clone()),
            Field::Specialized(q0) => eval_at(s, q0).map(QScalar::Rat),
        }
    }
}

/// An element of the session coefficient field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum QScalar {
    Rat(Rational),
    /// Never a constant: constants collapse to `Rat`.
    Sym(RatFunc),
}

impl QScalar {
    pub fn zero() -> Self {
        QScalar::Rat(Rational::zero())
    }

    pub fn one() -> Self {
        QScalar::Rat(Rational::one())
    }

    pub fn from_int(n: i64) -> Self {
        QScalar::Rat(Rational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        QScalar::Rat(Rational::new(n.into(), d.into()))
    }

    pub fn from_ratfunc(f: RatFunc) -> Self {
        match f.as_rational() {
            Some(r) => QScalar::Rat(r),
            None => QScalar::Sym(f),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, QScalar::Rat(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, QScalar::Rat(r) if r.is_one())
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            QScalar::Rat(r) => Some(r),
            QScalar::Sym(_) => None,
        }
    }

    fn to_ratfunc(&self) -> RatFunc {
        match self {
            QScalar::Rat(r) => RatFunc::from_rational(r),
            QScalar::Sym(f) => f.clone(),
        }
    }

    pub fn inv(&self) -> Option<Self> {
        match self {
            QScalar::Rat(r) if r.is_zero() => None,
            QScalar::Rat(r) => Some(QScalar::Rat(r.recip())),
            QScalar::Sym(f) => f.inv().map(QScalar::from_ratfunc),
        }
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        let inv = other.inv().ok_or(Error::DivisionByZero)?;
        Ok(self * &inv)
    }

    fn binop(
        &self,
        other: &Self,
        rat: impl Fn(&Rational, &Rational) -> Rational,
        sym: impl Fn(&RatFunc, &RatFunc) -> RatFunc,
    ) -> Self {
        match (self, other) {
            (QScalar::Rat(a), QScalar::Rat(b)) => QScalar::Rat(rat(a, b)),
            (a, b) => QScalar::from_ratfunc(sym(&a.to_ratfunc(), &b.to_ratfunc())),
        }
    }
}

/// Exact evaluation of a scalar at `q = q0`.
pub fn eval_at(s: &QScalar, q0: &Rational) -> Result<Rational> {
    match s {
        QScalar::Rat(r) => Ok(r.clone()),
        QScalar::Sym(f) => f.eval(q0).ok_or_else(|| Error::Pole(q0.to_string())),
    }
}

/// The q-number `[c]_q` in `field`.
pub fn qnum(field: &Field, c: i64) -> QScalar {
    field.qnum(c)
}

/// `q^{2c}` in `field`.
pub fn jm_eigenvalue(field: &Field, c: i64) -> QScalar {
    field.jm_eigenvalue(c)
}

impl Add<&QScalar> for &QScalar {
    type Output = QScalar;
    fn add(self, rhs: &QScalar) -> QScalar {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        self.binop(rhs, |a, b| a + b, |a, b| a.add(b))
    }
}

impl Sub<&QScalar> for &QScalar {
    type Output = QScalar;
    fn sub(self, rhs: &QScalar) -> QScalar {
        if rhs.is_zero() {
            return self.clone();
        }
        self.binop(rhs, |a, b| a - b, |a, b| a.sub(b))
    }
}

impl Mul<&QScalar> for &QScalar {
    type Output = QScalar;
    fn mul(self, rhs: &QScalar) -> QScalar {
        if self.is_one() {
            return rhs.clone();
        }
        if rhs.is_one() {
            return self.clone();
        }
        if self.is_zero() || rhs.is_zero() {
            return QScalar::zero();
        }
        self.binop(rhs, |a, b| a * b, |a, b| a.mul(b))
    }
}

impl Div<&QScalar> for &QScalar {
    type Output = QScalar;
    /// Panics on division by zero; see [`QScalar::checked_div`].
    fn div(self, rhs: &QScalar) -> QScalar {
        self.checked_div(rhs).expect("division by zero scalar")
    }
}

impl Neg for &QScalar {
    type Output = QScalar;
    fn neg(self) -> QScalar {
        match self {
            QScalar::Rat(r) => QScalar::Rat(-r),
            QScalar::Sym(f) => QScalar::Sym(f.neg()),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<QScalar> for QScalar {
            type Output = QScalar;
            fn $m(self, rhs: QScalar) -> QScalar {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&QScalar> for QScalar {
            type Output = QScalar;
            fn $m(self, rhs: &QScalar) -> QScalar {
                (&self).$m(rhs)
            }
        }
        impl $tr<QScalar> for &QScalar {
            type Output = QScalar;
            fn $m(self, rhs: QScalar) -> QScalar {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for QScalar {
    type Output = QScalar;
    fn neg(self) -> QScalar {
        -&self
    }
}

impl AddAssign<&QScalar> for QScalar {
    fn add_assign(&mut self, rhs: &QScalar) {
        match (&mut *self, rhs) {
            (QScalar::Rat(a), QScalar::Rat(b)) => *a += b,
            _ => *self = &*self + rhs,
        }
    }
}

impl AddAssign<QScalar> for QScalar {
    fn add_assign(&mut self, rhs: QScalar) {
        *self += &rhs;
    }
}

impl SubAssign<&QScalar> for QScalar {
    fn sub_assign(&mut self, rhs: &QScalar) {
        match (&mut *self, rhs) {
            (QScalar::Rat(a), QScalar::Rat(b)) => *a -= b,
            _ => *self = &*self - rhs,
        }
    }
}

impl fmt::Display for QScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QScalar::Rat(r) => write!(f, "{r}"),
            QScalar::Sym(g) => write!(f, "{g}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q2() -> Field {
        Field::default_specialized()
    }

    #[test]
    fn qnum_small_values() {
        for field in [Field::Symbolic, q2()] {
            assert!(field.qnum(0).is_zero());
            assert!(field.qnum(1).is_one());
            assert_eq!(field.qnum(2), field.q() + field.q_pow(-1));
        }
        assert_eq!(Field::Symbolic.qnum(2).to_string(), "(q^2+1)/(q)");
    }

    #[test]
    fn jm_eigenvalue_examples() {
        assert!(Field::Symbolic.jm_eigenvalue(0).is_one());
        assert_eq!(Field::Symbolic.jm_eigenvalue(1), Field::Symbolic.q_pow(2));
        assert_eq!(q2().jm_eigenvalue(-1), QScalar::from_ratio(1, 4));
    }

    #[test]
    fn eval_at_examples() {
        let two = Rational::from_integer(2.into());
        let s = Field::Symbolic.qnum(2);
        assert_eq!(eval_at(&s, &two).unwrap(), Rational::new(5.into(), 2.into()));
        let t = Field::Symbolic.q_minus_qinv().inv().unwrap();
        assert_eq!(eval_at(&t, &two).unwrap(), Rational::new(2.into(), 3.into()));
        assert!(matches!(eval_at(&t, &Rational::one()), Err(Error::Pole(_))));
    }

    #[test]
    fn rejects_non_generic_q0() {
        assert!(Field::from_mode_str("1").is_err());
        assert!(Field::from_mode_str("-1").is_err());
        assert!(Field::from_mode_str("0").is_err());
        assert_eq!(Field::from_mode_str("3/2").unwrap().mode_str(), "3/2");
    }

    #[test]
    fn constants_collapse_to_rationals() {
        let f = Field::Symbolic;
        let x = f.q() * f.q_pow(-1);
        assert_eq!(x, QScalar::one());
        let y = (f.q() + QScalar::one()) - f.q();
        assert!(y.is_one());
    }
}
