//! Hecke R-matrices: the built-in Drinfeld-Jimbo family, file input,
//! validation (braid, Hecke, skew-invertibility) and R-trace weights.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ncpoly::NCPoly;
use crate::scalars::{Field, QScalar};
use crate::tensorspace::{MultiIndex, TensorMat};

/// Which diagonal block carries the `q - q^{-1}` term of the DJ matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DjOrientation {
    /// On `e_ii ⊗ e_jj` with `i < j`.
    Upper,
    /// On `e_ii ⊗ e_jj` with `i > j`.
    Lower,
}

/// A failed defining identity with the first differing entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationFailure {
    pub identity: String,
    pub witness: String,
}

/// `Ψ` with `Tr_(2)(R_12 Ψ_23) = P_13 = Tr_(2)(Ψ_12 R_23)` and the two
/// partial traces of `Ψ`.
#[derive(Clone, Debug)]
pub struct SkewInverse {
    pub psi: TensorMat,
    /// `Tr_(1) Ψ`.
    pub c_first: TensorMat,
    /// `Tr_(2) Ψ`.
    pub c_second: TensorMat,
}

impl SkewInverse {
    /// R-trace weights: the partial trace of `Ψ` for which
    /// `Tr_(2)(R_12 C_2) = Id`, so that R-traces produce invariants.
    pub fn weights(&self) -> &TensorMat {
        &self.c_second
    }
}

#[derive(Clone, Debug)]
pub struct RMatrix {
    field: Field,
    op: TensorMat,
    inverse: Option<TensorMat>,
    pub braid_ok: bool,
    pub hecke_ok: bool,
    pub skew_ok: bool,
    skew: Option<SkewInverse>,
    failures: Vec<ValidationFailure>,
}

fn scalar_entry(m: &TensorMat, r: usize, c: usize) -> QScalar {
    m.get(r, c).and_then(NCPoly::as_scalar).unwrap_or_else(QScalar::zero)
}

fn witness(m: &TensorMat, diff: Option<(usize, usize, NCPoly)>) -> String {
    match diff {
        Some((r, c, p)) => format!("entry ({}, {}) residual {}", m.multi_index(r), m.multi_index(c), p),
        None => "shape mismatch".to_string(),
    }
}

/// The candidate DJ matrix in the given orientation.
pub fn dj_candidate(dim: usize, field: &Field, orientation: DjOrientation) -> TensorMat {
    let mut r = TensorMat::zero(dim, 2);
    let idx = |i: usize, j: usize| i * dim + j;
    let delta = field.q_minus_qinv();
    for i in 0..dim {
        r.set(idx(i, i), idx(i, i), NCPoly::constant(field.q()));
        for j in 0..dim {
            if i == j {
                continue;
            }
            r.set(idx(i, j), idx(j, i), NCPoly::one());
            let on_block = match orientation {
                DjOrientation::Upper => i < j,
                DjOrientation::Lower => i > j,
            };
            if on_block {
                r.set(idx(i, j), idx(i, j), NCPoly::constant(delta.clone()));
            }
        }
    }
    r
}

/// The validated Drinfeld-Jimbo R-matrix; orientations are tried in order
/// `Upper`, `Lower` and the first passing one is returned.
pub fn dj_rmatrix(dim: usize, field: &Field) -> Result<RMatrix> {
    let mut last = None;
    for orientation in [DjOrientation::Upper, DjOrientation::Lower] {
        let r = RMatrix::validate(dj_candidate(dim, field, orientation), field.clone())?;
        if r.braid_ok && r.hecke_ok {
            return Ok(r);
        }
        last = Some(r);
    }
    let failure = last.and_then(|r| r.failures.into_iter().next());
    Err(Error::Postcondition(format!(
        "no DJ orientation validates: {}",
        failure.map(|f| f.identity).unwrap_or_default()
    )))
}

impl RMatrix {
    /// Runs the three validators on a width-2 scalar operator.
    pub fn validate(op: TensorMat, field: Field) -> Result<Self> {
        if op.width() != 2 || !op.is_scalar() {
            return Err(Error::Shape("an R-matrix is a scalar width-2 operator".into()));
        }
        let dim = op.dim();
        let mut failures = Vec::new();

        let r1 = TensorMat::embed(&op, &[1, 2], 3)?;
        let r2 = TensorMat::embed(&op, &[2, 3], 3)?;
        let lhs = r1.tmul(&r2)?.tmul(&r1)?;
        let rhs = r2.tmul(&r1)?.tmul(&r2)?;
        let braid_ok = lhs == rhs;
        if !braid_ok {
            failures.push(ValidationFailure {
                identity: "braid R1 R2 R1 = R2 R1 R2".into(),
                witness: witness(&lhs, lhs.first_difference(&rhs)),
            });
        }

        let delta = field.q_minus_qinv();
        let sq = op.tmul(&op)?;
        let hecke_rhs = op.scale(&delta).add_scalar(&QScalar::one());
        let hecke_ok = sq == hecke_rhs;
        if !hecke_ok {
            failures.push(ValidationFailure {
                identity: "Hecke R^2 = 1 + (q-q^-1) R".into(),
                witness: witness(&sq, sq.first_difference(&hecke_rhs)),
            });
        }

        let inverse = if hecke_ok {
            let inv = op.add_scalar(&-delta);
            debug_assert_eq!(op.tmul(&inv)?, TensorMat::identity(dim, 2));
            Some(inv)
        } else {
            op.inverse().ok()
        };

        let (skew, skew_failure) = match skew_inverse(&op) {
            Ok(s) => (Some(s), None),
            Err(f) => (None, Some(f)),
        };
        let skew_ok = skew.is_some();
        failures.extend(skew_failure);

        Ok(RMatrix { field, op, inverse, braid_ok, hecke_ok, skew_ok, skew, failures })
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn op(&self) -> &TensorMat {
        &self.op
    }

    /// `R^{-1}`; `None` only for a singular input matrix.
    pub fn inverse(&self) -> Option<&TensorMat> {
        self.inverse.as_ref()
    }

    pub fn skew(&self) -> Option<&SkewInverse> {
        self.skew.as_ref()
    }

    pub fn failures(&self) -> &[ValidationFailure] {
        &self.failures
    }

    pub fn is_valid(&self) -> bool {
        self.braid_ok && self.hecke_ok && self.skew_ok
    }

    /// Errors with the first failed identity unless all three flags hold.
    pub fn require_valid(&self) -> Result<()> {
        match self.failures.first() {
            None => Ok(()),
            Some(f) => Err(Error::Validation { identity: f.identity.clone(), witness: f.witness.clone() }),
        }
    }

    /// `R_i`, acting on slots `i, i+1` of a width-`width` space.
    pub fn r_at(&self, i: usize, width: usize) -> Result<TensorMat> {
        TensorMat::embed(&self.op, &[i, i + 1], width)
    }

    /// `R_i^{-1}` at the given width.
    pub fn r_inv_at(&self, i: usize, width: usize) -> Result<TensorMat> {
        let inv = self.inverse.as_ref().ok_or(Error::Singular)?;
        TensorMat::embed(inv, &[i, i + 1], width)
    }

    /// `A_{\bar k}` at the given width.
    pub fn bar(&self, a: &TensorMat, kslot: usize, width: usize) -> Result<TensorMat> {
        let inv = self.inverse.as_ref().ok_or(Error::Singular)?;
        TensorMat::bar_conjugate(a, kslot, width, &self.op, inv)
    }

    /// File form: header `N <N> q <q>` then `i j k l <scalar>` per entry.
    pub fn dump(&self) -> String {
        let mut s = format!("N {} q {}\n", self.dim(), self.field.mode_str());
        for (r, c, p) in self.op.entries() {
            let ri = self.op.multi_index(r).0;
            let ci = self.op.multi_index(c).0;
            let _ = writeln!(s, "{} {} {} {} {}", ri[0], ri[1], ci[0], ci[1], p);
        }
        s
    }
}

/// Parses and validates an R-matrix file. A rational header `q` must agree
/// with a specialized session field and selects it for a symbolic one; the
/// header `q` (symbolic) accepts the session field as is.
pub fn load_rmatrix(path: &Path, session: &Field) -> Result<RMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_rmatrix(&text, session)
}

pub fn parse_rmatrix(text: &str, session: &Field) -> Result<RMatrix> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header: Vec<&str> = lines.next().ok_or_else(|| Error::Parse("empty R-matrix file".into()))?.split_whitespace().collect();
    let (dim, q) = match header.as_slice() {
        ["N", n, "q", q] => (n.parse::<usize>().map_err(|_| Error::Parse(format!("bad N {n:?}")))?, *q),
        _ => return Err(Error::Parse("header must be `N <N> q <q>`".into())),
    };
    if dim == 0 || dim > 4 {
        return Err(Error::Guard(format!("N = {dim} outside 1..=4")));
    }
    let field = match q {
        "q" | "symbolic" => session.clone(),
        value => {
            let declared = Field::from_mode_str(value)?;
            match session {
                Field::Symbolic => declared,
                s if *s == declared => declared,
                s => {
                    return Err(Error::Parse(format!(
                        "file fixes q = {value} but the session uses q = {}",
                        s.mode_str()
                    )))
                }
            }
        }
    };
    let mut op = TensorMat::zero(dim, 2);
    for line in lines {
        let mut parts = line.splitn(5, char::is_whitespace);
        let mut idx = [0usize; 4];
        for slot in idx.iter_mut() {
            let tok = parts.next().ok_or_else(|| Error::Parse(format!("short line {line:?}")))?;
            *slot = tok.parse().map_err(|_| Error::Parse(format!("bad index {tok:?}")))?;
            if *slot == 0 || *slot > dim {
                return Err(Error::Parse(format!("index {tok} out of 1..={dim}")));
            }
        }
        let value = field.parse(parts.next().ok_or_else(|| Error::Parse(format!("missing value in {line:?}")))?.trim())?;
        let row = MultiIndex(vec![idx[0], idx[1]]).to_linear(dim);
        let col = MultiIndex(vec![idx[2], idx[3]]).to_linear(dim);
        op.set(row, col, NCPoly::constant(value));
    }
    RMatrix::validate(op, field)
}

/// Solves `Tr_(2)(R_12 Ψ_23) = P_13` for `Ψ` and checks the mirrored
/// equality. In components the system decouples: for each `(i3, j3)` the
/// unknowns `Ψ[(s,i3),(a,j3)]` satisfy
/// `Σ_{s,a} R[(i1,a),(j1,s)] Ψ[(s,i3),(a,j3)] = δ(i1,j3) δ(i3,j1)`,
/// with the same coefficient matrix for every `(i3, j3)`.
pub fn skew_inverse(r: &TensorMat) -> std::result::Result<SkewInverse, ValidationFailure> {
    let dim = r.dim();
    let pair = |a: usize, b: usize| a * dim + b;
    let mut k = TensorMat::zero(dim, 2);
    for i1 in 0..dim {
        for j1 in 0..dim {
            for s in 0..dim {
                for a in 0..dim {
                    let v = scalar_entry(r, pair(i1, a), pair(j1, s));
                    if !v.is_zero() {
                        k.set(pair(i1, j1), pair(s, a), NCPoly::constant(v));
                    }
                }
            }
        }
    }
    let k_inv = k.inverse().map_err(|_| ValidationFailure {
        identity: "skew-invertibility Tr_(2)(R_12 Psi_23) = P_13".into(),
        witness: "the linear system for Psi is singular".into(),
    })?;
    let mut psi = TensorMat::zero(dim, 2);
    for i3 in 0..dim {
        for j3 in 0..dim {
            // Right-hand side is 1 exactly at (i1, j1) = (j3, i3).
            let rhs = pair(j3, i3);
            for s in 0..dim {
                for a in 0..dim {
                    let v = scalar_entry(&k_inv, pair(s, a), rhs);
                    if !v.is_zero() {
                        psi.set(pair(s, i3), pair(a, j3), NCPoly::constant(v));
                    }
                }
            }
        }
    }
    let p13 = TensorMat::perm_matrix(1, 2, 2, dim).expect("valid slots");
    let check = |lhs: TensorMat, identity: &str| -> std::result::Result<(), ValidationFailure> {
        let traced = lhs.trace_slots(&[2]).expect("valid slots");
        if traced == p13 {
            Ok(())
        } else {
            Err(ValidationFailure { identity: identity.into(), witness: witness(&traced, traced.first_difference(&p13)) })
        }
    };
    let embed = |m: &TensorMat, slots: &[usize]| TensorMat::embed(m, slots, 3).expect("valid slots");
    let first = embed(r, &[1, 2]).tmul(&embed(&psi, &[2, 3])).expect("same shape");
    check(first, "skew-invertibility Tr_(2)(R_12 Psi_23) = P_13")?;
    let second = embed(&psi, &[1, 2]).tmul(&embed(r, &[2, 3])).expect("same shape");
    check(second, "skew-invertibility Tr_(2)(Psi_12 R_23) = P_13")?;
    let c_first = psi.trace_slots(&[1]).expect("valid slots");
    let c_second = psi.trace_slots(&[2]).expect("valid slots");
    Ok(SkewInverse { psi, c_first, c_second })
}
