//! Partitions, standard Young tableaux, Jucys-Murphy matrices and primitive
//! idempotents built by the fusion recursion.

use std::fmt;

use crate::error::{Error, Result};
use crate::rmatrix::RMatrix;
use crate::scalars::{Field, QScalar};
use crate::tensorspace::TensorMat;

/// Weakly decreasing positive parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        parts.retain(|&p| p > 0);
        if parts.is_empty() || parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Shape(format!("{parts:?} is not a partition")));
        }
        Ok(Partition(parts))
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.iter().sum()
    }

    /// Parses `"2,1"` or `"(2,1)"`.
    pub fn parse(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts = inner
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad partition {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All partitions of `n`, largest first in reverse lex order.
pub fn partitions(n: usize) -> Vec<Partition> {
    fn go(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition(cur.clone()));
            return;
        }
        for p in (1..=rest.min(max)).rev() {
            cur.push(p);
            go(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        go(n, n, &mut Vec::new(), &mut out);
    }
    out
}

/// A standard tableau; `rows[r]` lists the entries of row `r` left to right.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StdTableau {
    shape: Partition,
    rows: Vec<Vec<usize>>,
}

impl StdTableau {
    pub fn shape(&self) -> &Partition {
        &self.shape
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn size(&self) -> usize {
        self.shape.size()
    }

    /// 1-based `(row, col)` of entry `k`.
    pub fn cell(&self, k: usize) -> (usize, usize) {
        for (r, row) in self.rows.iter().enumerate() {
            if let Some(c) = row.iter().position(|&e| e == k) {
                return (r + 1, c + 1);
            }
        }
        panic!("entry {k} not in tableau");
    }

    /// `col - row` of the cell holding `k`.
    pub fn content(&self, k: usize) -> i64 {
        let (r, c) = self.cell(k);
        c as i64 - r as i64
    }

    /// `(c(1), ..., c(n))`.
    pub fn contents(&self) -> Vec<i64> {
        (1..=self.size()).map(|k| self.content(k)).collect()
    }
}

impl fmt::Display for StdTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|row| row.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{}|{}", self.shape, rows.join("/"))
    }
}

/// Contents of the addable corners of the shape with the given row lengths.
pub fn addable_contents(rows: &[usize]) -> Vec<i64> {
    let mut out = Vec::new();
    for r in 0..=rows.len() {
        let len = rows.get(r).copied().unwrap_or(0);
        let above = if r == 0 { usize::MAX } else { rows[r - 1] };
        if len < above {
            out.push(len as i64 - r as i64);
        }
    }
    out
}

/// All standard tableaux of shape `shape`, ordered lexicographically by
/// content sequence.
pub fn standard_tableaux(shape: &Partition) -> Vec<StdTableau> {
    fn go(k: usize, n: usize, shape: &[usize], rows: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if k > n {
            out.push(rows.clone());
            return;
        }
        for r in 0..shape.len() {
            let len = rows[r].len();
            if len < shape[r] && (r == 0 || rows[r - 1].len() > len) {
                rows[r].push(k);
                go(k + 1, n, shape, rows, out);
                rows[r].pop();
            }
        }
    }
    let mut raw = Vec::new();
    go(1, shape.size(), shape.parts(), &mut vec![Vec::new(); shape.parts().len()], &mut raw);
    let mut out: Vec<StdTableau> = raw.into_iter().map(|rows| StdTableau { shape: shape.clone(), rows }).collect();
    out.sort_by_key(StdTableau::contents);
    out
}

/// `j_k = Σ_{i<k} P_{ik}` at width `n`.
pub fn jm_classical(k: usize, n: usize, dim: usize) -> Result<TensorMat> {
    let mut j = TensorMat::zero(dim, n);
    for i in 1..k {
        j = j.add(&TensorMat::perm_matrix(i, k, n, dim)?)?;
    }
    Ok(j)
}

/// `J_k = R_{k-1} ... R_2 R_1^2 R_2 ... R_{k-1}` at width `n`; `J_1 = Id`.
pub fn jm_hecke(k: usize, n: usize, r: &RMatrix) -> Result<TensorMat> {
    let mut j = TensorMat::identity(r.dim(), n);
    for i in 1..k {
        let ri = r.r_at(i, n)?;
        j = if i == 1 { ri.tmul(&ri)? } else { ri.tmul(&j)?.tmul(&ri)? };
    }
    Ok(j)
}

/// Where the idempotents live: the symmetric group acting on `(C^N)^{⊗n}`
/// by permutations, or the Hecke algebra acting through an R-matrix.
#[derive(Clone, Debug)]
pub enum Carrier<'a> {
    Classical { n: usize, dim: usize },
    Hecke { r: &'a RMatrix, n: usize },
}

/// The Jucys-Murphy family of a carrier with its eigenvalue map.
#[derive(Clone, Debug)]
pub struct JmFamily {
    field: Option<Field>,
    /// `jms[k-1]` is the k-th JM matrix.
    jms: Vec<TensorMat>,
}

impl JmFamily {
    pub fn new(carrier: &Carrier<'_>) -> Result<Self> {
        match carrier {
            Carrier::Classical { n, dim } => Ok(JmFamily {
                field: None,
                jms: (1..=*n).map(|k| jm_classical(k, *n, *dim)).collect::<Result<_>>()?,
            }),
            Carrier::Hecke { r, n } => Ok(JmFamily {
                field: Some(r.field().clone()),
                jms: (1..=*n).map(|k| jm_hecke(k, *n, r)).collect::<Result<_>>()?,
            }),
        }
    }

    pub fn n(&self) -> usize {
        self.jms.len()
    }

    pub fn jm(&self, k: usize) -> &TensorMat {
        &self.jms[k - 1]
    }

    /// `c` for the classical carrier, `q^{2c}` for the Hecke one.
    pub fn eigenvalue(&self, c: i64) -> QScalar {
        match &self.field {
            None => QScalar::from_int(c),
            Some(f) => f.jm_eigenvalue(c),
        }
    }

    /// Primitive idempotent of `t`, with `E^2 = E` and `J_k E = ε(c(k)) E`
    /// checked before returning.
    pub fn idempotent(&self, t: &StdTableau) -> Result<TensorMat> {
        let n = self.n();
        if t.size() != n {
            return Err(Error::Shape(format!("tableau of size {} on a width-{n} carrier", t.size())));
        }
        let first = self.jm(1);
        let mut e = TensorMat::identity(first.dim(), n);
        let mut sub_rows: Vec<usize> = Vec::new();
        for k in 1..=n {
            let ck = t.content(k);
            if k > 1 {
                let target = self.eigenvalue(ck);
                for b in addable_contents(&sub_rows) {
                    if b == ck {
                        continue;
                    }
                    let eb = self.eigenvalue(b);
                    let denom = &target - &eb;
                    let inv = denom.inv().ok_or(Error::DegenerateSpectrum(ck, b))?;
                    let factor = self.jm(k).add_scalar(&-eb).scale(&inv);
                    e = e.tmul(&factor)?;
                }
            }
            let (r, _) = t.cell(k);
            if sub_rows.len() < r {
                sub_rows.push(0);
            }
            sub_rows[r - 1] += 1;
        }
        if e.tmul(&e)? != e {
            return Err(Error::Postcondition(format!("E^2 != E for {t}")));
        }
        for k in 1..=n {
            let ev = self.eigenvalue(t.content(k));
            if self.jm(k).tmul(&e)? != e.scale(&ev) {
                return Err(Error::Postcondition(format!("J_{k} E != eps E for {t}")));
            }
        }
        Ok(e)
    }
}

/// Convenience wrapper building the JM family on each call.
pub fn idempotent(t: &StdTableau, carrier: &Carrier<'_>) -> Result<TensorMat> {
    JmFamily::new(carrier)?.idempotent(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmatrix::dj_rmatrix;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn partition_enumeration() {
        let ps: Vec<String> = partitions(3).iter().map(ToString::to_string).collect();
        assert_eq!(ps, ["(3)", "(2,1)", "(1,1,1)"]);
        assert_eq!(partitions(5).len(), 7);
        assert_eq!(Partition::parse("(2,1)").unwrap(), p(&[2, 1]));
        assert!(Partition::new(vec![1, 2]).is_err());
    }

    #[test]
    fn tableau_counts_and_contents() {
        let row = standard_tableaux(&p(&[3]));
        assert_eq!(row.len(), 1);
        assert_eq!(row[0].contents(), vec![0, 1, 2]);
        let col = standard_tableaux(&p(&[1, 1, 1]));
        assert_eq!(col[0].contents(), vec![0, -1, -2]);
        let hook = standard_tableaux(&p(&[2, 1]));
        assert_eq!(hook.len(), 2);
        assert_eq!(hook[0].to_string(), "(2,1)|1,3/2");
        assert_eq!(hook[1].to_string(), "(2,1)|1,2/3");
        // hook length formula for (3,2): 5!/(4*3*1*2*1) = 5
        assert_eq!(standard_tableaux(&p(&[3, 2])).len(), 5);
    }

    #[test]
    fn jm_small_cases() {
        assert!(jm_classical(1, 2, 2).unwrap().is_zero());
        assert_eq!(jm_classical(2, 2, 2).unwrap(), TensorMat::perm_matrix(1, 2, 2, 2).unwrap());
        let f = Field::Symbolic;
        let r = dj_rmatrix(2, &f).unwrap();
        let j2 = jm_hecke(2, 2, &r).unwrap();
        assert_eq!(j2, r.op().scale(&f.q_minus_qinv()).add_scalar(&QScalar::one()));
        assert_eq!(jm_hecke(1, 3, &r).unwrap(), TensorMat::identity(2, 3));
    }

    #[test]
    fn hecke_jm_commute() {
        let r = dj_rmatrix(2, &Field::Symbolic).unwrap();
        let js: Vec<_> = (1..=3).map(|k| jm_hecke(k, 3, &r).unwrap()).collect();
        for a in &js {
            for b in &js {
                assert_eq!(a.tmul(b).unwrap(), b.tmul(a).unwrap());
            }
        }
    }

    #[test]
    fn two_box_hecke_idempotents_are_spectral_projectors() {
        let f = Field::Symbolic;
        let r = dj_rmatrix(2, &f).unwrap();
        let fam = JmFamily::new(&Carrier::Hecke { r: &r, n: 2 }).unwrap();
        let qq = f.q() + f.q_pow(-1);
        let inv = qq.inv().unwrap();
        let sym = fam.idempotent(&standard_tableaux(&p(&[2]))[0]).unwrap();
        assert_eq!(sym, r.op().add_scalar(&f.q_pow(-1)).scale(&inv));
        let alt = fam.idempotent(&standard_tableaux(&p(&[1, 1]))[0]).unwrap();
        assert_eq!(alt, r.op().scale(&-QScalar::one()).add_scalar(&f.q()).scale(&inv));
        assert_eq!(sym.add(&alt).unwrap(), TensorMat::identity(2, 2));
    }

    #[test]
    fn classical_two_box() {
        let fam = JmFamily::new(&Carrier::Classical { n: 2, dim: 2 }).unwrap();
        let pm = TensorMat::perm_matrix(1, 2, 2, 2).unwrap();
        let half = QScalar::from_ratio(1, 2);
        let sym = fam.idempotent(&standard_tableaux(&p(&[2]))[0]).unwrap();
        assert_eq!(sym, pm.add_scalar(&QScalar::one()).scale(&half));
        let alt = fam.idempotent(&standard_tableaux(&p(&[1, 1]))[0]).unwrap();
        assert_eq!(alt, pm.scale(&-half.clone()).add_scalar(&half));
    }

    #[test]
    fn three_box_completeness_and_orthogonality() {
        let r = dj_rmatrix(2, &Field::default_specialized()).unwrap();
        for carrier in [Carrier::Classical { n: 3, dim: 2 }, Carrier::Hecke { r: &r, n: 3 }] {
            let fam = JmFamily::new(&carrier).unwrap();
            let es: Vec<TensorMat> = partitions(3)
                .iter()
                .flat_map(standard_tableaux)
                .map(|t| fam.idempotent(&t).unwrap())
                .collect();
            assert_eq!(es.len(), 4);
            let mut sum = TensorMat::zero(2, 3);
            for (i, a) in es.iter().enumerate() {
                sum = sum.add(a).unwrap();
                for (j, b) in es.iter().enumerate() {
                    if i != j {
                        assert!(a.tmul(b).unwrap().is_zero());
                    }
                }
            }
            // The (1,1,1) idempotent is zero on (C^2)^{⊗3}.
            assert_eq!(sum, TensorMat::identity(2, 3));
        }
    }
}
