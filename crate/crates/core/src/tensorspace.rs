//! Sparse operators on `(C^N)^{⊗k}` with noncommutative polynomial entries.
//!
//! Basis convention: multi-indices are enumerated row-major with slot 1 the
//! most significant digit, so the linear index of `(i_1, ..., i_k)` (0-based
//! digits) is `i_1 N^{k-1} + ... + i_k`. Entry `(r, c)` of an operator
//! multiplies column vector `c` into row `r`; products keep the left factor's
//! entries on the left.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ncpoly::NCPoly;
use crate::scalars::QScalar;

/// Largest tensor width accepted by the constructors.
pub const MAX_WIDTH: usize = 8;

/// A tuple of 1-based indices, one per tensor slot.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn from_linear(mut index: usize, dim: usize, width: usize) -> Self {
        let mut digits = vec![0; width];
        for slot in (0..width).rev() {
            digits[slot] = index % dim + 1;
            index /= dim;
        }
        MultiIndex(digits)
    }

    pub fn to_linear(&self, dim: usize) -> usize {
        self.0.iter().fold(0, |acc, &d| acc * dim + (d - 1))
    }

    /// Parses the digit-tuple form used in dumps, e.g. `"12"`.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "-" {
            return Ok(MultiIndex(Vec::new()));
        }
        s.chars()
            .map(|c| c.to_digit(10).filter(|&d| d >= 1).map(|d| d as usize))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
            .ok_or_else(|| Error::Parse(format!("bad multi-index {s:?}")))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "-");
        }
        for d in &self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// A sparse `N^k x N^k` operator. Absent entries are zero; stored entries
/// are nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorMat {
    dim: usize,
    width: usize,
    rows: Vec<BTreeMap<usize, NCPoly>>,
}

fn digits(mut index: usize, dim: usize, width: usize) -> Vec<usize> {
    let mut d = vec![0; width];
    for slot in (0..width).rev() {
        d[slot] = index % dim;
        index /= dim;
    }
    d
}

fn linear(digits: &[usize], dim: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * dim + d)
}

impl TensorMat {
    pub fn zero(dim: usize, width: usize) -> Self {
        assert!(dim >= 1 && width <= MAX_WIDTH, "tensor size out of range");
        TensorMat { dim, width, rows: vec![BTreeMap::new(); dim.pow(width as u32)] }
    }

    pub fn identity(dim: usize, width: usize) -> Self {
        Self::scalar_identity(dim, width, &QScalar::one())
    }

    /// `c · Id`.
    pub fn scalar_identity(dim: usize, width: usize, c: &QScalar) -> Self {
        let mut m = Self::zero(dim, width);
        for i in 0..m.size() {
            m.set(i, i, NCPoly::constant(c.clone()));
        }
        m
    }

    /// Builds a width-1 operator from an `N x N` array of entries.
    pub fn from_fn(dim: usize, width: usize, mut f: impl FnMut(usize, usize) -> NCPoly) -> Self {
        let mut m = Self::zero(dim, width);
        for r in 0..m.size() {
            for c in 0..m.size() {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// `N^k`.
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BTreeMap::is_empty)
    }

    pub fn get(&self, r: usize, c: usize) -> Option<&NCPoly> {
        self.rows[r].get(&c)
    }

    /// Entry value, zero if absent.
    pub fn entry(&self, r: usize, c: usize) -> NCPoly {
        self.get(r, c).cloned().unwrap_or_default()
    }

    pub fn set(&mut self, r: usize, c: usize, p: NCPoly) {
        if p.is_zero() {
            self.rows[r].remove(&c);
        } else {
            self.rows[r].insert(c, p);
        }
    }

    pub fn add_to(&mut self, r: usize, c: usize, p: &NCPoly, coeff: &QScalar) {
        let slot = self.rows[r].entry(c).or_default();
        slot.add_scaled(p, coeff);
        if slot.is_zero() {
            self.rows[r].remove(&c);
        }
    }

    /// Nonzero entries in basis order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &NCPoly)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |(&c, p)| (r, c, p)))
    }

    pub fn multi_index(&self, i: usize) -> MultiIndex {
        MultiIndex::from_linear(i, self.dim, self.width)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.width != other.width {
            return Err(Error::Shape(format!(
                "N={} k={} vs N={} k={}",
                self.dim, self.width, other.dim, other.width
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (r, c, p) in other.entries() {
            out.add_to(r, c, p, &QScalar::one());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (r, c, p) in other.entries() {
            out.add_to(r, c, p, &-QScalar::one());
        }
        Ok(out)
    }

    pub fn scale(&self, k: &QScalar) -> Self {
        let mut out = Self::zero(self.dim, self.width);
        for (r, c, p) in self.entries() {
            out.set(r, c, p.scale(k));
        }
        out
    }

    /// `self + c · Id`.
    pub fn add_scalar(&self, c: &QScalar) -> Self {
        let mut out = self.clone();
        let one = NCPoly::one();
        for i in 0..self.size() {
            out.add_to(i, i, &one, c);
        }
        out
    }

    /// Matrix product with entries multiplied left factor first.
    pub fn tmul(&self, other: &Self) -> Result<Self> {
        self.tmul_with(other, Ok)
    }

    /// Product whose output entries are passed through `f` (typically a
    /// normal-form map). Rows are computed in parallel.
    pub fn tmul_with<F>(&self, other: &Self, f: F) -> Result<Self>
    where
        F: Fn(NCPoly) -> Result<NCPoly> + Sync,
    {
        self.check_same_shape(other)?;
        let rows: Result<Vec<BTreeMap<usize, NCPoly>>> = self
            .rows
            .par_iter()
            .map(|row| {
                let mut acc: BTreeMap<usize, NCPoly> = BTreeMap::new();
                for (&s, a) in row {
                    for (&c, b) in &other.rows[s] {
                        let prod = a * b;
                        let slot = acc.entry(c).or_default();
                        slot.add_scaled(&prod, &QScalar::one());
                    }
                }
                let mut out = BTreeMap::new();
                for (c, p) in acc {
                    if p.is_zero() {
                        continue;
                    }
                    let p = f(p)?;
                    if !p.is_zero() {
                        out.insert(c, p);
                    }
                }
                Ok(out)
            })
            .collect();
        Ok(TensorMat { dim: self.dim, width: self.width, rows: rows? })
    }

    /// Applies `f` to every stored entry, in parallel.
    pub fn map_entries<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&NCPoly) -> Result<NCPoly> + Sync,
    {
        let rows: Result<Vec<BTreeMap<usize, NCPoly>>> = self
            .rows
            .par_iter()
            .map(|row| {
                let mut out = BTreeMap::new();
                for (&c, p) in row {
                    let v = f(p)?;
                    if !v.is_zero() {
                        out.insert(c, v);
                    }
                }
                Ok(out)
            })
            .collect();
        Ok(TensorMat { dim: self.dim, width: self.width, rows: rows? })
    }

    /// Places `a` (width `slots.len()`) on the given 1-based slots of a
    /// width-`width` space, identity elsewhere.
    pub fn embed(a: &TensorMat, slots: &[usize], width: usize) -> Result<Self> {
        if slots.len() != a.width {
            return Err(Error::Shape(format!("{} slots for a width-{} operator", slots.len(), a.width)));
        }
        for &s in slots {
            if s == 0 || s > width {
                return Err(Error::SlotOutOfRange { slot: s, width });
            }
        }
        let dim = a.dim;
        let free: Vec<usize> = (1..=width).filter(|s| !slots.contains(s)).collect();
        let n_free = dim.pow(free.len() as u32);
        let mut out = Self::zero(dim, width);
        for (r, c, p) in a.entries() {
            let rd = digits(r, dim, a.width);
            let cd = digits(c, dim, a.width);
            for f in 0..n_free {
                let fd = digits(f, dim, free.len());
                let mut row = vec![0; width];
                let mut col = vec![0; width];
                for (k, &s) in slots.iter().enumerate() {
                    row[s - 1] = rd[k];
                    col[s - 1] = cd[k];
                }
                for (k, &s) in free.iter().enumerate() {
                    row[s - 1] = fd[k];
                    col[s - 1] = fd[k];
                }
                out.set(linear(&row, dim), linear(&col, dim), p.clone());
            }
        }
        Ok(out)
    }

    /// `A_pos`: a width-1 operator placed at slot `pos`.
    pub fn embed_at(a: &TensorMat, pos: usize, width: usize) -> Result<Self> {
        Self::embed(a, &[pos], width)
    }

    /// The permutation `P_{ij}` swapping slots `i` and `j`.
    pub fn perm_matrix(i: usize, j: usize, width: usize, dim: usize) -> Result<Self> {
        for s in [i, j] {
            if s == 0 || s > width {
                return Err(Error::SlotOutOfRange { slot: s, width });
            }
        }
        if i == j {
            return Err(Error::Shape("permutation of a slot with itself".into()));
        }
        let mut out = Self::zero(dim, width);
        for c in 0..out.size() {
            let mut d = digits(c, dim, width);
            d.swap(i - 1, j - 1);
            out.set(linear(&d, dim), c, NCPoly::one());
        }
        Ok(out)
    }

    /// Partial trace over the given 1-based slots. Tracing every slot yields
    /// a width-0 operator whose single entry is the full trace.
    pub fn trace_slots(&self, slots: &[usize]) -> Result<Self> {
        for &s in slots {
            if s == 0 || s > self.width {
                return Err(Error::SlotOutOfRange { slot: s, width: self.width });
            }
        }
        let keep: Vec<usize> = (1..=self.width).filter(|s| !slots.contains(s)).collect();
        let mut out = Self::zero(self.dim, keep.len());
        for (r, c, p) in self.entries() {
            let rd = digits(r, self.dim, self.width);
            let cd = digits(c, self.dim, self.width);
            if slots.iter().any(|&s| rd[s - 1] != cd[s - 1]) {
                continue;
            }
            let rk: Vec<usize> = keep.iter().map(|&s| rd[s - 1]).collect();
            let ck: Vec<usize> = keep.iter().map(|&s| cd[s - 1]).collect();
            out.add_to(linear(&rk, self.dim), linear(&ck, self.dim), p, &QScalar::one());
        }
        Ok(out)
    }

    /// Full trace as an algebra element.
    pub fn trace(&self) -> NCPoly {
        let slots: Vec<usize> = (1..=self.width).collect();
        self.trace_slots(&slots).expect("valid slots").entry(0, 0)
    }

    /// Weighted partial trace `Tr_slots(A · prod_s C_s)` with a width-1
    /// weight matrix `c`.
    pub fn r_trace(&self, slots: &[usize], c: &TensorMat) -> Result<Self> {
        let mut weighted = self.clone();
        for &s in slots {
            weighted = weighted.tmul(&Self::embed_at(c, s, self.width)?)?;
        }
        weighted.trace_slots(slots)
    }

    /// `A_{\bar k} = R_{k-1} ... R_1 A_1 R_1^{-1} ... R_{k-1}^{-1}` where
    /// `r`, `r_inv` are width-2 operators and `R_i` acts on slots `i, i+1`.
    pub fn bar_conjugate(
        a: &TensorMat,
        kslot: usize,
        width: usize,
        r: &TensorMat,
        r_inv: &TensorMat,
    ) -> Result<Self> {
        if kslot == 0 || kslot > width {
            return Err(Error::SlotOutOfRange { slot: kslot, width });
        }
        let mut out = Self::embed_at(a, 1, width)?;
        for i in 1..kslot {
            let ri = Self::embed(r, &[i, i + 1], width)?;
            let ri_inv = Self::embed(r_inv, &[i, i + 1], width)?;
            out = ri.tmul(&out)?.tmul(&ri_inv)?;
        }
        Ok(out)
    }

    /// True if every entry is a scalar.
    pub fn is_scalar(&self) -> bool {
        self.entries().all(|(_, _, p)| p.as_scalar().is_some())
    }

    fn dense_scalars(&self) -> Result<Vec<Vec<QScalar>>> {
        let n = self.size();
        let mut m = vec![vec![QScalar::zero(); n]; n];
        for (r, c, p) in self.entries() {
            m[r][c] = p.as_scalar().ok_or(Error::NotScalar)?;
        }
        Ok(m)
    }

    /// Exact inverse of a scalar operator by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.size();
        let mut a = self.dense_scalars()?;
        let mut inv: Vec<Vec<QScalar>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { QScalar::one() } else { QScalar::zero() }).collect())
            .collect();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(Error::Singular)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let p = a[col][col].inv().ok_or(Error::Singular)?;
            for x in a[col].iter_mut().chain(inv[col].iter_mut()) {
                *x = &*x * &p;
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for j in 0..n {
                    if !a[col][j].is_zero() {
                        let t = &f * &a[col][j];
                        a[r][j] -= &t;
                    }
                    if !inv[col][j].is_zero() {
                        let t = &f * &inv[col][j];
                        inv[r][j] -= &t;
                    }
                }
            }
        }
        let mut out = Self::zero(self.dim, self.width);
        for (r, row) in inv.into_iter().enumerate() {
            for (c, v) in row.into_iter().enumerate() {
                if !v.is_zero() {
                    out.set(r, c, NCPoly::constant(v));
                }
            }
        }
        Ok(out)
    }

    /// First entry (in basis order) where `self` and `other` differ.
    pub fn first_difference(&self, other: &Self) -> Option<(usize, usize, NCPoly)> {
        let diff = self.sub(other).ok()?;
        let first = diff.entries().next().map(|(r, c, p)| (r, c, p.clone()));
        first
    }

    /// Dump format: one line `row col poly` per nonzero entry.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (r, c, p) in self.entries() {
            s.push_str(&format!("{} {} {}\n", self.multi_index(r), self.multi_index(c), p));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncpoly::{GenId, GenKind};

    fn s(n: i64) -> NCPoly {
        NCPoly::constant(QScalar::from_int(n))
    }

    fn scalar_mat(dim: usize, width: usize, vals: &[i64]) -> TensorMat {
        let n = dim.pow(width as u32);
        let mut m = TensorMat::zero(dim, width);
        for r in 0..n {
            for c in 0..n {
                m.set(r, c, s(vals[r * n + c]));
            }
        }
        m
    }

    #[test]
    fn perm_matrix_pattern() {
        let p = TensorMat::perm_matrix(1, 2, 2, 2).unwrap();
        let expected =
            scalar_mat(2, 2, &[1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1]);
        assert_eq!(p, expected);
        assert_eq!(p.tmul(&p).unwrap(), TensorMat::identity(2, 2));
        assert_eq!(p.trace_slots(&[2]).unwrap(), TensorMat::identity(2, 1));
        assert_eq!(p.trace(), s(2));
    }

    #[test]
    fn embed_follows_basis_convention() {
        let a = scalar_mat(2, 1, &[3, 5, 7, 11]);
        let a1 = TensorMat::embed_at(&a, 1, 2).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let (i, j) = (r / 2, r % 2);
                let (i2, j2) = (c / 2, c % 2);
                let expected = if j == j2 { a.entry(i, i2) } else { NCPoly::zero() };
                assert_eq!(a1.entry(r, c), expected);
            }
        }
        assert_eq!(TensorMat::embed_at(&TensorMat::identity(3, 1), 2, 3).unwrap(), TensorMat::identity(3, 3));
        // Tr_(1) A_1 = Tr(A) Id
        assert_eq!(a1.trace_slots(&[1]).unwrap(), TensorMat::scalar_identity(2, 1, &QScalar::from_int(14)));
        assert!(TensorMat::embed_at(&a, 3, 2).is_err());
    }

    #[test]
    fn braid_relation_for_permutations() {
        let p12 = TensorMat::perm_matrix(1, 2, 3, 2).unwrap();
        let p23 = TensorMat::perm_matrix(2, 3, 3, 2).unwrap();
        let lhs = p12.tmul(&p23).unwrap().tmul(&p12).unwrap();
        let rhs = p23.tmul(&p12).unwrap().tmul(&p23).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn bar_conjugation_by_permutation_moves_slot() {
        let a = scalar_mat(2, 1, &[1, 2, 3, 4]);
        let p = TensorMat::perm_matrix(1, 2, 2, 2).unwrap();
        let abar3 = TensorMat::bar_conjugate(&a, 3, 3, &p, &p).unwrap();
        assert_eq!(abar3, TensorMat::embed_at(&a, 3, 3).unwrap());
        let abar1 = TensorMat::bar_conjugate(&a, 1, 2, &p, &p).unwrap();
        assert_eq!(abar1, TensorMat::embed_at(&a, 1, 2).unwrap());
    }

    #[test]
    fn order_preserved_in_products() {
        let x = TensorMat::from_fn(1, 1, |_, _| NCPoly::gen(GenId::new(GenKind::X, 1, 1)));
        let d = TensorMat::from_fn(1, 1, |_, _| NCPoly::gen(GenId::new(GenKind::DCl, 1, 1)));
        let xd = x.tmul(&d).unwrap().entry(0, 0);
        assert_eq!(xd.to_string(), "x_1^1*dx_1^1");
    }

    #[test]
    fn factorized_partial_trace() {
        let a = scalar_mat(2, 1, &[1, 2, 3, 4]);
        let b = scalar_mat(2, 1, &[5, 6, 7, 8]);
        let ab = TensorMat::embed_at(&a, 1, 2).unwrap().tmul(&TensorMat::embed_at(&b, 2, 2).unwrap()).unwrap();
        assert_eq!(ab.trace_slots(&[2]).unwrap(), a.scale(&QScalar::from_int(13)));
    }

    #[test]
    fn inverse_of_scalar_matrix() {
        let a = scalar_mat(2, 1, &[2, 1, 1, 1]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.tmul(&inv).unwrap(), TensorMat::identity(2, 1));
        assert!(matches!(scalar_mat(2, 1, &[1, 2, 2, 4]).inverse(), Err(Error::Singular)));
    }

    #[test]
    fn multi_index_round_trip() {
        let m = MultiIndex::from_linear(5, 2, 3);
        assert_eq!(m.to_string(), "212");
        assert_eq!(m.to_linear(2), 5);
        assert_eq!(MultiIndex::parse("212").unwrap(), m);
    }
}
