//! Free associative algebra over [`QScalar`] with a deg-lex monomial order.
//!
//! Letters are one byte. The byte value *is* the precedence: a larger code is
//! a larger letter, so the derived word order is exactly deg-lex with the
//! generator precedence `d > m, x > lhat`, row-major within a kind.

mod cache;
mod rewrite;

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};

use smallvec::SmallVec;

use crate::error::Result;
use crate::scalars::QScalar;

pub use cache::{load_system, store_system, system_key, CacheOutcome};
pub use rewrite::{
    audit_confluence, complete, complete_with_cap, normal_form, normal_word_counts,
    RewriteSystem, Reducer, Rule, DEFAULT_RULE_CAP,
};

/// Generator families. Declaration order is precedence order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenKind {
    /// Abstract mREA generators `lhat_i^j`.
    Lhat = 0,
    /// Classical coordinates `x_i^j`.
    X = 1,
    /// Reflection Equation generators `m_i^j`.
    M = 2,
    /// Classical derivatives, `D(i, j) = d/dx_j^i`.
    DCl = 3,
    /// Quantum derivative generators of `D(R^{-1})`.
    DQ = 4,
}

impl GenKind {
    fn from_index(i: u8) -> Option<Self> {
        Some(match i {
            0 => GenKind::Lhat,
            1 => GenKind::X,
            2 => GenKind::M,
            3 => GenKind::DCl,
            4 => GenKind::DQ,
            _ => return None,
        })
    }

    pub fn symbol(self) -> &'static str {
        match self {
            GenKind::Lhat => "l",
            GenKind::X => "x",
            GenKind::M => "m",
            GenKind::DCl => "dx",
            GenKind::DQ => "d",
        }
    }
}

/// Largest supported matrix dimension for generator alphabets.
pub const MAX_DIM: usize = 4;

/// A matrix generator `(kind, row, col)` with 1-based indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenId {
    pub kind: GenKind,
    pub row: u8,
    pub col: u8,
}

impl GenId {
    pub fn new(kind: GenKind, row: usize, col: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&row) && (1..=MAX_DIM).contains(&col),
            "generator index out of range"
        );
        GenId { kind, row: row as u8, col: col as u8 }
    }

    /// Letter code; its numeric order is the generator precedence.
    pub fn code(self) -> u8 {
        (self.kind as u8) * 16 + (self.row - 1) * 4 + (self.col - 1)
    }

    pub fn from_code(code: u8) -> Option<Self> {
        let kind = GenKind::from_index(code / 16)?;
        let r = code % 16;
        Some(GenId { kind, row: r / 4 + 1, col: r % 4 + 1 })
    }
}

impl fmt::Display for GenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}^{}", self.kind.symbol(), self.row, self.col)
    }
}

/// A monomial: a sequence of letter codes. The empty word is the unit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Word(pub SmallVec<[u8; 8]>);

impl Word {
    pub fn empty() -> Self {
        Word(SmallVec::new())
    }

    pub fn from_slice(s: &[u8]) -> Self {
        Word(SmallVec::from_slice(s))
    }

    pub fn letter(g: GenId) -> Self {
        Word::from_slice(&[g.code()])
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn concat(&self, other: &[u8]) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(other);
        Word(v)
    }

    /// `prefix · middle · suffix`.
    pub fn join3(prefix: &[u8], middle: &[u8], suffix: &[u8]) -> Word {
        let mut v: SmallVec<[u8; 8]> = SmallVec::with_capacity(prefix.len() + middle.len() + suffix.len());
        v.extend_from_slice(prefix);
        v.extend_from_slice(middle);
        v.extend_from_slice(suffix);
        Word(v)
    }

    pub fn letters(&self) -> impl Iterator<Item = GenId> + '_ {
        self.0.iter().map(|&c| GenId::from_code(c).expect("valid letter code"))
    }
}

impl Hash for Word {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.as_slice().hash(state);
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    /// Total degree first, then left-to-right letter precedence.
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.as_slice().cmp(other.0.as_slice()))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, g) in self.letters().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// The monomial order. Only deg-lex on letter codes is supported; the
/// generator precedence is encoded in the codes themselves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum MonomialOrder {
    #[default]
    DegLex,
}

impl MonomialOrder {
    pub fn compare(&self, a: &Word, b: &Word) -> Ordering {
        match self {
            MonomialOrder::DegLex => a.cmp(b),
        }
    }
}

/// A finite linear combination of words.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NCPoly {
    terms: BTreeMap<Word, QScalar>,
}

impl NCPoly {
    pub fn zero() -> Self {
        NCPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(QScalar::one())
    }

    pub fn constant(c: QScalar) -> Self {
        Self::monomial(Word::empty(), c)
    }

    pub fn monomial(w: Word, c: QScalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(w, c);
        }
        NCPoly { terms }
    }

    pub fn gen(g: GenId) -> Self {
        Self::monomial(Word::letter(g), QScalar::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Word, &QScalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, w: &Word) -> QScalar {
        self.terms.get(w).cloned().unwrap_or_else(QScalar::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().next_back().map(Word::degree)
    }

    /// Leading word and coefficient under deg-lex.
    pub fn leading(&self) -> Option<(&Word, &QScalar)> {
        self.terms.iter().next_back()
    }

    /// The value if this is a scalar (degree 0 or zero).
    pub fn as_scalar(&self) -> Option<QScalar> {
        match self.terms.len() {
            0 => Some(QScalar::zero()),
            1 => self.terms.get(&Word::empty()).cloned(),
            _ => None,
        }
    }

    pub fn add_term(&mut self, w: Word, c: &QScalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &NCPoly, c: &QScalar) {
        if c.is_zero() {
            return;
        }
        for (w, a) in &other.terms {
            if c.is_one() {
                self.add_term(w.clone(), a);
            } else {
                self.add_term(w.clone(), &(a * c));
            }
        }
    }

    /// `self += c * prefix · other · suffix`.
    pub fn add_wrapped(&mut self, prefix: &[u8], other: &NCPoly, suffix: &[u8], c: &QScalar) {
        for (w, a) in &other.terms {
            self.add_term(Word::join3(prefix, w.as_slice(), suffix), &(a * c));
        }
    }

    pub fn scale(&self, c: &QScalar) -> NCPoly {
        if c.is_zero() {
            return NCPoly::zero();
        }
        NCPoly { terms: self.terms.iter().map(|(w, a)| (w.clone(), a * c)).collect() }
    }

    /// Applies a fallible map to every coefficient, dropping zeros.
    pub fn try_map_coeffs(&self, mut f: impl FnMut(&QScalar) -> Result<QScalar>) -> Result<NCPoly> {
        let mut out = NCPoly::zero();
        for (w, a) in &self.terms {
            out.add_term(w.clone(), &f(a)?);
        }
        Ok(out)
    }

    /// Every letter code occurring in the polynomial.
    pub fn letters(&self) -> impl Iterator<Item = u8> + '_ {
        self.terms.keys().flat_map(|w| w.0.iter().copied())
    }
}

/// Concatenation product extended bilinearly.
pub fn nc_mul(a: &NCPoly, b: &NCPoly) -> NCPoly {
    let mut out = NCPoly::zero();
    for (u, x) in &a.terms {
        for (v, y) in &b.terms {
            out.add_term(u.concat(v.as_slice()), &(x * y));
        }
    }
    out
}

impl Add<&NCPoly> for &NCPoly {
    type Output = NCPoly;
    fn add(self, rhs: &NCPoly) -> NCPoly {
        let mut out = self.clone();
        out.add_scaled(rhs, &QScalar::one());
        out
    }
}

impl Sub<&NCPoly> for &NCPoly {
    type Output = NCPoly;
    fn sub(self, rhs: &NCPoly) -> NCPoly {
        let mut out = self.clone();
        out.add_scaled(rhs, &-QScalar::one());
        out
    }
}

impl Mul<&NCPoly> for &NCPoly {
    type Output = NCPoly;
    fn mul(self, rhs: &NCPoly) -> NCPoly {
        nc_mul(self, rhs)
    }
}

impl Neg for &NCPoly {
    type Output = NCPoly;
    fn neg(self) -> NCPoly {
        self.scale(&-QScalar::one())
    }
}

impl Add for NCPoly {
    type Output = NCPoly;
    fn add(self, rhs: NCPoly) -> NCPoly {
        &self + &rhs
    }
}

impl Sub for NCPoly {
    type Output = NCPoly;
    fn sub(self, rhs: NCPoly) -> NCPoly {
        &self - &rhs
    }
}

impl Mul for NCPoly {
    type Output = NCPoly;
    fn mul(self, rhs: NCPoly) -> NCPoly {
        nc_mul(&self, &rhs)
    }
}

fn needs_parens(s: &str) -> bool {
    s.trim_start_matches('-').contains(['+', '-'])
}

impl fmt::Display for NCPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let cs = c.to_string();
            let cs = if needs_parens(&cs) { format!("({cs})") } else { cs };
            if w.0.is_empty() {
                write!(f, "{cs}")?;
            } else if c.is_one() {
                write!(f, "{w}")?;
            } else {
                write!(f, "{cs}*{w}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize, j: usize) -> NCPoly {
        NCPoly::gen(GenId::new(GenKind::X, i, j))
    }

    fn d(i: usize, j: usize) -> NCPoly {
        NCPoly::gen(GenId::new(GenKind::DCl, i, j))
    }

    #[test]
    fn codes_round_trip_and_respect_precedence() {
        for kind in [GenKind::Lhat, GenKind::X, GenKind::M, GenKind::DCl, GenKind::DQ] {
            for r in 1..=4 {
                for c in 1..=4 {
                    let g = GenId::new(kind, r, c);
                    assert_eq!(GenId::from_code(g.code()), Some(g));
                }
            }
        }
        let dq = GenId::new(GenKind::DQ, 1, 1).code();
        let m = GenId::new(GenKind::M, 4, 4).code();
        let l = GenId::new(GenKind::Lhat, 4, 4).code();
        assert!(dq > m && m > l);
    }

    #[test]
    fn product_preserves_order() {
        let p = &x(1, 1) * &d(1, 1);
        let (w, c) = p.leading().unwrap();
        assert!(c.is_one());
        assert_eq!(w.to_string(), "x_1^1*dx_1^1");
        assert_ne!(p, &d(1, 1) * &x(1, 1));
    }

    #[test]
    fn unit_and_bilinearity() {
        let a = &x(1, 2) + &d(2, 1);
        let b = x(2, 2).scale(&QScalar::from_int(3));
        let c = &d(1, 1) - &NCPoly::one();
        assert_eq!(&NCPoly::one() * &a, a);
        assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    }

    #[test]
    fn deg_lex_order() {
        let w1 = Word::from_slice(&[1, 2]);
        let w2 = Word::from_slice(&[2, 1]);
        let w3 = Word::from_slice(&[0, 0, 0]);
        assert!(w1 < w2);
        assert!(w2 < w3);
    }
}
