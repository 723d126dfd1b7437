//! Defining relations of the classical Weyl algebra, the Reflection Equation
//! algebras, the quantum Weyl algebra and the modified REA, plus a cache of
//! their completed rewrite systems.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::ncpoly::{
    complete, load_system, store_system, system_key, CacheOutcome, GenId, GenKind, MonomialOrder, NCPoly,
    RewriteSystem,
};
use crate::rmatrix::RMatrix;
use crate::scalars::Field;
use crate::tensorspace::TensorMat;

/// `N x N` matrix whose `(i, j)` entry is the generator `(kind, i, j)`.
pub fn gen_matrix(kind: GenKind, dim: usize) -> TensorMat {
    TensorMat::from_fn(dim, 1, |i, j| NCPoly::gen(GenId::new(kind, i + 1, j + 1)))
}

/// Letter codes of the `N^2` generators of one kind.
pub fn alphabet(kind: GenKind, dim: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(dim * dim);
    for i in 1..=dim {
        for j in 1..=dim {
            out.push(GenId::new(kind, i, j).code());
        }
    }
    out
}

/// Nonzero entries of `m`, made monic and deduplicated, in a stable order.
pub fn relations_from(m: &TensorMat) -> Vec<NCPoly> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (_, _, p) in m.entries() {
        let Some((_, lc)) = p.leading() else { continue };
        let monic = p.scale(&lc.inv().expect("leading coefficient is nonzero"));
        if seen.insert(monic.to_string()) {
            out.push(monic);
        }
    }
    out
}

/// `X_1 X_2 = X_2 X_1`, `D_1 D_2 = D_2 D_1`, `D_1 X_2 = X_2 D_1 + P_12`
/// in components: `d_i^j x_k^l - x_k^l d_i^j = δ_i^l δ_k^j`.
pub fn weyl_relations(dim: usize) -> Result<Vec<NCPoly>> {
    let x = gen_matrix(GenKind::X, dim);
    let d = gen_matrix(GenKind::DCl, dim);
    let x1 = TensorMat::embed_at(&x, 1, 2)?;
    let x2 = TensorMat::embed_at(&x, 2, 2)?;
    let d1 = TensorMat::embed_at(&d, 1, 2)?;
    let d2 = TensorMat::embed_at(&d, 2, 2)?;
    let p = TensorMat::perm_matrix(1, 2, 2, dim)?;
    let mut out = relations_from(&x1.tmul(&x2)?.sub(&x2.tmul(&x1)?)?);
    out.extend(relations_from(&d1.tmul(&d2)?.sub(&d2.tmul(&d1)?)?));
    out.extend(relations_from(&d1.tmul(&x2)?.sub(&x2.tmul(&d1)?)?.sub(&p)?));
    Ok(out)
}

/// Entries of `R A_1 R A_1 - A_1 R A_1 R` for the generator matrix of `kind`;
/// with `inverse` the matrix `R^{-1}` is used in place of `R`.
pub fn rea_relations(r: &RMatrix, kind: GenKind, inverse: bool) -> Result<Vec<NCPoly>> {
    let rr = if inverse { r.r_inv_at(1, 2)? } else { r.r_at(1, 2)? };
    let a1 = TensorMat::embed_at(&gen_matrix(kind, r.dim()), 1, 2)?;
    let lhs = rr.tmul(&a1)?.tmul(&rr)?.tmul(&a1)?;
    let rhs = a1.tmul(&rr)?.tmul(&a1)?.tmul(&rr)?;
    Ok(relations_from(&lhs.sub(&rhs)?))
}

/// Entries of `D_1 M_{\bar 2} - R_1^{-1} - M_{\bar 2} D_1 R_1^{-2}` with
/// `M_{\bar 2} = R_1 M_1 R_1^{-1}`.
pub fn cross_relations(r: &RMatrix) -> Result<Vec<NCPoly>> {
    let dim = r.dim();
    let m_bar2 = r.bar(&gen_matrix(GenKind::M, dim), 2, 2)?;
    let d1 = TensorMat::embed_at(&gen_matrix(GenKind::DQ, dim), 1, 2)?;
    let r_inv = r.r_inv_at(1, 2)?;
    let lhs = d1.tmul(&m_bar2)?;
    let rhs = m_bar2.tmul(&d1)?.tmul(&r_inv)?.tmul(&r_inv)?.add(&r_inv)?;
    Ok(relations_from(&lhs.sub(&rhs)?))
}

/// `L R L R - R L R L - L R + R L` for a width-1 matrix `l` placed in slot 1.
pub fn mrea_residual(r: &RMatrix, l: &TensorMat) -> Result<TensorMat> {
    let r1 = r.r_at(1, 2)?;
    let l1 = TensorMat::embed_at(l, 1, 2)?;
    let lr = l1.tmul(&r1)?;
    let rl = r1.tmul(&l1)?;
    lr.tmul(&lr)?.sub(&rl.tmul(&rl)?)?.sub(&lr)?.add(&rl)
}

/// Relations of the modified REA in the `lhat` alphabet.
pub fn mrea_relations(r: &RMatrix) -> Result<Vec<NCPoly>> {
    Ok(relations_from(&mrea_residual(r, &gen_matrix(GenKind::Lhat, r.dim()))?))
}

/// A named relation set with its coefficient field and generator alphabet.
#[derive(Clone, Debug)]
pub struct AlgebraPreset {
    name: String,
    field: Field,
    dim: usize,
    kinds: Vec<GenKind>,
    relations: Vec<NCPoly>,
}

impl AlgebraPreset {
    pub fn weyl_classical(dim: usize) -> Result<Self> {
        Ok(AlgebraPreset {
            name: format!("weyl_classical({dim})"),
            field: Field::Symbolic,
            dim,
            kinds: vec![GenKind::X, GenKind::DCl],
            relations: weyl_relations(dim)?,
        })
    }

    pub fn rea(r: &RMatrix) -> Result<Self> {
        Self::quantum("rea", r, vec![GenKind::M], rea_relations(r, GenKind::M, false)?)
    }

    pub fn rea_inv(r: &RMatrix) -> Result<Self> {
        Self::quantum("rea_inv", r, vec![GenKind::DQ], rea_relations(r, GenKind::DQ, true)?)
    }

    pub fn quantum_weyl(r: &RMatrix) -> Result<Self> {
        let mut rels = rea_relations(r, GenKind::M, false)?;
        rels.extend(rea_relations(r, GenKind::DQ, true)?);
        rels.extend(cross_relations(r)?);
        Self::quantum("quantum_weyl", r, vec![GenKind::M, GenKind::DQ], rels)
    }

    pub fn mrea(r: &RMatrix) -> Result<Self> {
        Self::quantum("mrea", r, vec![GenKind::Lhat], mrea_relations(r)?)
    }

    fn quantum(name: &str, r: &RMatrix, kinds: Vec<GenKind>, relations: Vec<NCPoly>) -> Result<Self> {
        r.require_valid()?;
        Ok(AlgebraPreset {
            name: format!("{name}(N={}, q={})", r.dim(), r.field().mode_str()),
            field: r.field().clone(),
            dim: r.dim(),
            kinds,
            relations,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn relations(&self) -> &[NCPoly] {
        &self.relations
    }

    /// Letter codes of all generators of the preset.
    pub fn alphabet(&self) -> Vec<u8> {
        self.kinds.iter().flat_map(|&k| alphabet(k, self.dim)).collect()
    }

    pub fn cache_key(&self, bound: usize) -> String {
        system_key(&self.relations, MonomialOrder::DegLex, bound, &self.field)
    }
}

/// Completes the preset's relations up to `bound`.
pub fn build_system(preset: &AlgebraPreset, bound: usize) -> Result<RewriteSystem> {
    if bound < 2 {
        return Err(Error::Guard(format!("degree bound {bound} below 2")));
    }
    complete(&preset.relations, MonomialOrder::DegLex, bound)
}

/// How a system was obtained from a [`SystemStore`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SystemSource {
    Memory,
    Disk,
    Computed,
    /// A cache file existed but failed validation; the reason is recorded.
    Recomputed(String),
}

/// In-memory and optional on-disk cache of completed systems.
#[derive(Debug, Default)]
pub struct SystemStore {
    dir: Option<PathBuf>,
    memory: Mutex<HashMap<String, Arc<RewriteSystem>>>,
}

impl SystemStore {
    pub fn new(dir: Option<PathBuf>) -> Self {
        SystemStore { dir, memory: Mutex::new(HashMap::new()) }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn get(&self, preset: &AlgebraPreset, bound: usize) -> Result<(Arc<RewriteSystem>, SystemSource)> {
        let key = preset.cache_key(bound);
        if let Some(s) = self.memory.lock().expect("store lock").get(&key) {
            return Ok((Arc::clone(s), SystemSource::Memory));
        }
        let mut source = SystemSource::Computed;
        let mut system = None;
        if let Some(dir) = &self.dir {
            match load_system(dir, &key, &preset.field) {
                CacheOutcome::Hit(s) => {
                    system = Some(s);
                    source = SystemSource::Disk;
                }
                CacheOutcome::Miss => {}
                CacheOutcome::Invalid(reason) => source = SystemSource::Recomputed(reason),
            }
        }
        let system = match system {
            Some(s) => s,
            None => {
                let s = build_system(preset, bound)?;
                if let Some(dir) = &self.dir {
                    store_system(dir, &key, &s, &preset.field)?;
                }
                s
            }
        };
        let system = Arc::new(system);
        self.memory.lock().expect("store lock").insert(key, Arc::clone(&system));
        Ok((system, source))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncpoly::{audit_confluence, normal_form, normal_word_counts, Word};
    use crate::rmatrix::dj_rmatrix;
    use crate::scalars::QScalar;

    fn g(kind: GenKind, i: usize, j: usize) -> NCPoly {
        NCPoly::gen(GenId::new(kind, i, j))
    }

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn weyl_counts_and_delta_pattern() {
        assert_eq!(weyl_relations(1).unwrap().len(), 1);
        assert_eq!(weyl_relations(2).unwrap().len(), 28);
        let s = build_system(&AlgebraPreset::weyl_classical(2).unwrap(), 3).unwrap();
        let p = &g(GenKind::DCl, 1, 1) * &g(GenKind::X, 2, 2);
        assert_eq!(normal_form(&p, &s).unwrap(), &g(GenKind::X, 2, 2) * &g(GenKind::DCl, 1, 1));
        let p = &g(GenKind::DCl, 1, 2) * &g(GenKind::X, 2, 1);
        let expected = &(&g(GenKind::X, 2, 1) * &g(GenKind::DCl, 1, 2)) + &NCPoly::one();
        assert_eq!(normal_form(&p, &s).unwrap(), expected);
    }

    #[test]
    fn one_dimensional_quantum_presets() {
        let f = Field::Symbolic;
        let r = dj_rmatrix(1, &f).unwrap();
        assert!(rea_relations(&r, GenKind::M, false).unwrap().is_empty());
        assert!(mrea_relations(&r).unwrap().is_empty());
        let cross = cross_relations(&r).unwrap();
        let dm = &g(GenKind::DQ, 1, 1) * &g(GenKind::M, 1, 1);
        let md = &g(GenKind::M, 1, 1) * &g(GenKind::DQ, 1, 1);
        let expected = &(&dm - &md.scale(&f.q_pow(-2))) - &NCPoly::constant(f.q_pow(-1));
        assert_eq!(cross, vec![expected]);
        let s = build_system(&AlgebraPreset::quantum_weyl(&r).unwrap(), 4).unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn one_dimensional_q_weyl_normal_form() {
        // d m^k = q^{-2k} m^k d + q^{-1}[k]-type sum; checked for k = 2 by the
        // action of d on m^k: d(m^k) - q^{-2k} m^k d = q^{-1} Σ_{i<k} q^{-2i} m^{k-1}.
        let f = Field::default_specialized();
        let r = dj_rmatrix(1, &f).unwrap();
        let s = build_system(&AlgebraPreset::quantum_weyl(&r).unwrap(), 4).unwrap();
        let (m, d) = (g(GenKind::M, 1, 1), g(GenKind::DQ, 1, 1));
        let nf = normal_form(&(&(&d * &m) * &m), &s).unwrap();
        let expected = &(&(&m * &m) * &d).scale(&f.q_pow(-4))
            + &m.scale(&(f.q_pow(-1) * (QScalar::one() + f.q_pow(-2))));
        assert_eq!(nf, expected);
    }

    #[test]
    fn permutation_cross_relation_is_classical() {
        // With R = P the cross relation must match the classical δ pattern.
        let f = Field::default_specialized();
        let p = TensorMat::perm_matrix(1, 2, 2, 2).unwrap();
        let r = RMatrix::validate(p, f).unwrap();
        let m_bar2 = r.bar(&gen_matrix(GenKind::M, 2), 2, 2).unwrap();
        assert_eq!(m_bar2, TensorMat::embed_at(&gen_matrix(GenKind::M, 2), 2, 2).unwrap());
    }

    #[test]
    fn dj2_quantum_weyl_is_confluent_and_normally_ordered() {
        let f = Field::Symbolic;
        let r = dj_rmatrix(2, &f).unwrap();
        let cross = cross_relations(&r).unwrap();
        assert_eq!(cross.len(), 16);
        let heads: BTreeSet<Word> = cross.iter().map(|p| p.leading().unwrap().0.clone()).collect();
        let mut expected = BTreeSet::new();
        for a in alphabet(GenKind::DQ, 2) {
            for b in alphabet(GenKind::M, 2) {
                expected.insert(Word::from_slice(&[a, b]));
            }
        }
        assert_eq!(heads, expected);
        let preset = AlgebraPreset::quantum_weyl(&r).unwrap();
        let s = build_system(&preset, 4).unwrap();
        audit_confluence(&s).unwrap();
        for rel in preset.relations() {
            assert!(normal_form(rel, &s).unwrap().is_zero());
        }
        // PBW: normal words are counted like commutative monomials in 8 letters.
        let counts = normal_word_counts(&s, &preset.alphabet(), 4);
        for (deg, &c) in counts.iter().enumerate() {
            assert_eq!(c, binom(8 + deg - 1, deg), "degree {deg}");
        }
        let d_codes: Vec<u8> = alphabet(GenKind::DQ, 2);
        for rule in s.rules() {
            for (w, _) in rule.tail.terms() {
                let ws = w.as_slice();
                let first_d = ws.iter().position(|c| d_codes.contains(c)).unwrap_or(ws.len());
                assert!(ws[first_d..].iter().all(|c| d_codes.contains(c)), "{w}");
            }
        }
    }

    #[test]
    fn dj2_mrea_is_pbw() {
        let r = dj_rmatrix(2, &Field::Symbolic).unwrap();
        let preset = AlgebraPreset::mrea(&r).unwrap();
        let s = build_system(&preset, 3).unwrap();
        audit_confluence(&s).unwrap();
        assert!(!s.is_collapsed());
        let counts = normal_word_counts(&s, &preset.alphabet(), 3);
        for (deg, &c) in counts.iter().enumerate() {
            assert_eq!(c, binom(4 + deg - 1, deg), "degree {deg}");
        }
    }

    #[test]
    fn store_hits_memory_and_disk() {
        let dir = std::env::temp_dir().join(format!("capelli-store-{}", std::process::id()));
        let preset = AlgebraPreset::weyl_classical(2).unwrap();
        let store = SystemStore::new(Some(dir.clone()));
        let (a, src) = store.get(&preset, 3).unwrap();
        assert_eq!(src, SystemSource::Computed);
        assert_eq!(store.get(&preset, 3).unwrap().1, SystemSource::Memory);
        let fresh = SystemStore::new(Some(dir.clone()));
        let (b, src) = fresh.get(&preset, 3).unwrap();
        assert_eq!(src, SystemSource::Disk);
        assert_eq!(a.rules(), b.rules());
        std::fs::remove_dir_all(dir).unwrap();
    }
}
