//! Capelli identities: both sides built as operators over the relevant
//! algebra, compared entrywise after reduction to normal form. Also the
//! quantum immanants and their invariance checks.
//!
//! Products are normalized progressively, `P_k = NF(P_{k-1} F_k)`, which is
//! sound because the normal form is linear and a two-sided ideal absorbs
//! multiplication.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::Serialize;

use crate::algebras::{gen_matrix, mrea_residual, AlgebraPreset, SystemSource, SystemStore};
use crate::combinatorics::{standard_tableaux, Carrier, JmFamily, Partition, StdTableau};
use crate::error::{Error, Result};
use crate::ncpoly::{audit_confluence, GenId, GenKind, NCPoly, Reducer};
use crate::rmatrix::RMatrix;
use crate::scalars::{Field, QScalar};
use crate::tensorspace::TensorMat;

pub const EQ1_CDET: &str = "eq1-cdet";
pub const EQ2_CLASSICAL: &str = "eq2-classical";
pub const EQ3_IMMANANT: &str = "eq3-immanant";
pub const EQ6_QUANTUM: &str = "eq6-quantum";
pub const EQ7_CORCAP: &str = "eq7-corcap";
pub const IMMANANT_PROPS: &str = "immanant-props";
pub const MREA_EMBEDDING: &str = "mrea-embedding";

/// All identity ids, in suite order.
pub const IDENTITY_IDS: [&str; 7] =
    [EQ1_CDET, EQ2_CLASSICAL, EQ3_IMMANANT, EQ6_QUANTUM, EQ7_CORCAP, IMMANANT_PROPS, MREA_EMBEDDING];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Verified,
    Failed,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub id: String,
    pub params: BTreeMap<String, String>,
    pub status: Status,
    /// Label and `(row, col)` of the first failing comparison.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entry: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    /// Number of scalar or entry comparisons performed.
    pub compared: usize,
    /// Rule count of the largest system used.
    pub rules: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub ms: u64,
}

impl IdentityReport {
    pub fn verified(&self) -> bool {
        self.status == Status::Verified
    }
}

/// Accumulates comparisons for one report; stops recording at the first
/// failure but keeps counting.
struct Tally {
    id: &'static str,
    params: BTreeMap<String, String>,
    compared: usize,
    rules: usize,
    failure: Option<(String, String)>,
    notes: Vec<String>,
    start: Instant,
}

impl Tally {
    fn new(id: &'static str, params: &[(&str, String)]) -> Self {
        Tally {
            id,
            params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            compared: 0,
            rules: 0,
            failure: None,
            notes: Vec::new(),
            start: Instant::now(),
        }
    }

    fn saw_rules(&mut self, n: usize) {
        self.rules = self.rules.max(n);
    }

    /// `a` and `b` must already be in normal form.
    fn matrices(&mut self, label: &str, a: &TensorMat, b: &TensorMat) -> Result<bool> {
        let diff = a.sub(b)?;
        self.compared += diff.size() * diff.size();
        let first = diff.entries().next().map(|(r, c, p)| (r, c, p.clone()));
        match first {
            None => Ok(true),
            Some((r, c, p)) => {
                if self.failure.is_none() {
                    let entry = format!("{label} ({}, {})", diff.multi_index(r), diff.multi_index(c));
                    self.failure = Some((entry, p.to_string()));
                }
                Ok(false)
            }
        }
    }

    fn polys(&mut self, label: &str, a: &NCPoly, b: &NCPoly) -> bool {
        self.compared += 1;
        let diff = a - b;
        if diff.is_zero() {
            return true;
        }
        if self.failure.is_none() {
            self.failure = Some((label.to_string(), diff.to_string()));
        }
        false
    }

    fn finish(self) -> IdentityReport {
        let (status, entry, residual) = match self.failure {
            None => (Status::Verified, None, None),
            Some((e, r)) => (Status::Failed, Some(e), Some(r)),
        };
        IdentityReport {
            id: self.id.to_string(),
            params: self.params,
            status,
            entry,
            residual,
            compared: self.compared,
            rules: self.rules,
            notes: self.notes,
            ms: self.start.elapsed().as_millis() as u64,
        }
    }
}

/// Record of one rewrite system obtained during a run.
#[derive(Clone, Debug, Serialize)]
pub struct SystemRecord {
    pub preset: String,
    pub bound: usize,
    pub rules: usize,
    pub audit_ok: bool,
    #[serde(skip)]
    pub source: SystemSource,
}

/// Runs identity checks against cached rewrite systems.
pub struct Verifier<'a> {
    store: &'a SystemStore,
    bound: Option<usize>,
    reducers: Mutex<HashMap<String, Arc<Reducer>>>,
    records: Mutex<Vec<SystemRecord>>,
}

/// Signed permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<(Vec<usize>, i64)> {
    fn go(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut perms = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut perms);
    perms
        .into_iter()
        .map(|p| {
            let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            let sign = if inversions % 2 == 0 { 1 } else { -1 };
            (p, sign)
        })
        .collect()
}

/// Column determinant `Σ_σ sgn(σ) A(σ(1),1) A(σ(2),2) ... A(σ(N),N)`.
pub fn cdet(a: &TensorMat) -> NCPoly {
    assert_eq!(a.width(), 1, "cdet takes a width-1 matrix");
    let mut out = NCPoly::zero();
    for (p, sign) in permutations(a.dim()) {
        let mut term = NCPoly::one();
        for (col, &row) in p.iter().enumerate() {
            match a.get(row, col) {
                Some(e) => term = &term * e,
                None => {
                    term = NCPoly::zero();
                    break;
                }
            }
        }
        out.add_scaled(&term, &QScalar::from_int(sign));
    }
    out
}

/// `K = diag(N-1, N-2, ..., 0)`.
pub fn numerical_k(dim: usize) -> TensorMat {
    let mut k = TensorMat::zero(dim, 1);
    for i in 0..dim {
        k.set(i, i, NCPoly::constant(QScalar::from_int((dim - 1 - i) as i64)));
    }
    k
}

/// Product of `factors`, normalized after every step when `reducer` is given.
pub fn reduced_product(reducer: Option<&Reducer>, factors: &[&TensorMat]) -> Result<TensorMat> {
    let (first, rest) = factors.split_first().ok_or_else(|| Error::Shape("empty product".into()))?;
    let mut acc = match reducer {
        Some(r) => first.map_entries(|p| r.normal_form(p))?,
        None => (*first).clone(),
    };
    for f in rest {
        acc = match reducer {
            Some(r) => acc.tmul_with(f, |p| r.normal_form(&p))?,
            None => acc.tmul(f)?,
        };
    }
    Ok(acc)
}

/// Sides of the universal classical identity at width `n`:
/// `L_1 (L_2 - j_2) ... (L_n - j_n)` and `X_1 ... X_n D_1 ... D_n`.
pub fn capelli_classical_factors(dim: usize, n: usize) -> Result<(Vec<TensorMat>, Vec<TensorMat>)> {
    let x = gen_matrix(GenKind::X, dim);
    let d = gen_matrix(GenKind::DCl, dim);
    let l = x.tmul(&d)?;
    let mut lhs = Vec::with_capacity(n);
    for k in 1..=n {
        let lk = TensorMat::embed_at(&l, k, n)?;
        lhs.push(lk.sub(&crate::combinatorics::jm_classical(k, n, dim)?)?);
    }
    let mut rhs = Vec::with_capacity(2 * n);
    for k in 1..=n {
        rhs.push(TensorMat::embed_at(&x, k, n)?);
    }
    for k in 1..=n {
        rhs.push(TensorMat::embed_at(&d, k, n)?);
    }
    Ok((lhs, rhs))
}

/// `(J^{-1} - 1) / (q - q^{-1})`.
fn jm_correction(j: &TensorMat, r: &RMatrix) -> Result<TensorMat> {
    let inv_delta = r.field().q_minus_qinv().inv().ok_or(Error::DivisionByZero)?;
    Ok(j.inverse()?.add_scalar(&-QScalar::one()).scale(&inv_delta))
}

/// `-q^{-c}[c]_q`, the eigenvalue of the correction term on idempotents.
pub fn content_shift(r: &RMatrix, c: i64) -> QScalar {
    let f = r.field();
    -(f.q_pow(-c as i32) * f.qnum(c))
}

/// Factors of both sides of the universal quantum identity at width `n`:
/// `L̂_{\bar 1}`, `L̂_{\bar k} + (J_k^{-1}-1)/(q-q^{-1})` and
/// `M_{\bar 1} ... M_{\bar n} D_{\bar n} ... D_{\bar 1} J_1^{-1} ... J_n^{-1}`.
pub fn capelli_quantum_factors(r: &RMatrix, n: usize) -> Result<(Vec<TensorMat>, Vec<TensorMat>)> {
    r.require_valid()?;
    let dim = r.dim();
    let m = gen_matrix(GenKind::M, dim);
    let d = gen_matrix(GenKind::DQ, dim);
    let lhat = m.tmul(&d)?;
    let fam = JmFamily::new(&Carrier::Hecke { r, n })?;
    let mut lhs = Vec::with_capacity(n);
    for k in 1..=n {
        let lk = r.bar(&lhat, k, n)?;
        lhs.push(if k == 1 { lk } else { lk.add(&jm_correction(fam.jm(k), r)?)? });
    }
    let mut rhs = Vec::with_capacity(3 * n);
    for k in 1..=n {
        rhs.push(r.bar(&m, k, n)?);
    }
    for k in (1..=n).rev() {
        rhs.push(r.bar(&d, k, n)?);
    }
    for k in 2..=n {
        rhs.push(fam.jm(k).inverse()?);
    }
    Ok((lhs, rhs))
}

/// LHS factors of the projected quantum identity for tableau `t`, without
/// the idempotent: `L̂_{\bar 1}` and `L̂_{\bar k} - q^{-c(k)}[c(k)]_q`.
fn corcap_factors(r: &RMatrix, t: &StdTableau, lhat: &TensorMat) -> Result<Vec<TensorMat>> {
    let n = t.size();
    let mut lhs = Vec::with_capacity(n);
    for k in 1..=n {
        let lk = r.bar(lhat, k, n)?;
        lhs.push(if k == 1 { lk } else { lk.add_scalar(&content_shift(r, t.content(k))) });
    }
    Ok(lhs)
}

/// RHS factors `M_{\bar 1} ... M_{\bar n} D_{\bar n} ... D_{\bar 1}` and the
/// prefactor `q^{-2 Σ c(k)}`.
fn corcap_rhs_factors(r: &RMatrix, t: &StdTableau) -> Result<(Vec<TensorMat>, QScalar)> {
    let n = t.size();
    let dim = r.dim();
    let m = gen_matrix(GenKind::M, dim);
    let d = gen_matrix(GenKind::DQ, dim);
    let mut rhs = Vec::with_capacity(2 * n);
    for k in 1..=n {
        rhs.push(r.bar(&m, k, n)?);
    }
    for k in (1..=n).rev() {
        rhs.push(r.bar(&d, k, n)?);
    }
    let total: i64 = t.contents().iter().sum();
    Ok((rhs, r.field().q_pow(-2 * total as i32)))
}

fn params_q(r: &RMatrix) -> String {
    r.field().mode_str()
}

impl<'a> Verifier<'a> {
    pub fn new(store: &'a SystemStore, bound: Option<usize>) -> Self {
        Verifier { store, bound, reducers: Mutex::new(HashMap::new()), records: Mutex::new(Vec::new()) }
    }

    /// Systems obtained so far, in first-use order.
    pub fn records(&self) -> Vec<SystemRecord> {
        self.records.lock().expect("records lock").clone()
    }

    /// Reducer for `preset` completed to `degree` (or the override bound).
    /// Every newly obtained system is audited for confluence.
    pub fn reducer(&self, preset: &AlgebraPreset, degree: usize) -> Result<Arc<Reducer>> {
        let bound = self.bound.unwrap_or(degree);
        let key = preset.cache_key(bound);
        if let Some(r) = self.reducers.lock().expect("reducer lock").get(&key) {
            return Ok(Arc::clone(r));
        }
        let (system, source) = self.store.get(preset, bound)?;
        let audit = audit_confluence(&system);
        self.records.lock().expect("records lock").push(SystemRecord {
            preset: preset.name().to_string(),
            bound,
            rules: system.len(),
            audit_ok: audit.is_ok(),
            source,
        });
        if let Err(w) = audit {
            return Err(Error::Postcondition(format!("confluence audit of {}: {w}", preset.name())));
        }
        if system.is_collapsed() {
            return Err(Error::Postcondition(format!("{} collapsed: 1 lies in the ideal", preset.name())));
        }
        let reducer = Arc::new(Reducer::new(system));
        self.reducers.lock().expect("reducer lock").insert(key, Arc::clone(&reducer));
        Ok(reducer)
    }

    /// `cdet(XD + K) = det X det D` in the Weyl algebra; with `shifted`
    /// false the shift `K` is dropped (a deliberately wrong variant).
    pub fn verify_cdet_capelli(&self, dim: usize, shifted: bool) -> Result<IdentityReport> {
        let mut tally = Tally::new(EQ1_CDET, &[("N", dim.to_string()), ("K", if shifted { "diag" } else { "zero" }.into())]);
        let red = self.reducer(&AlgebraPreset::weyl_classical(dim)?, 2 * dim)?;
        tally.saw_rules(red.system().len());
        let x = gen_matrix(GenKind::X, dim);
        let d = gen_matrix(GenKind::DCl, dim);
        let mut xd = x.tmul(&d)?;
        if shifted {
            xd = xd.add(&numerical_k(dim))?;
        }
        let lhs = red.normal_form(&cdet(&xd))?;
        let rhs = red.normal_form(&(&cdet(&x) * &cdet(&d)))?;
        tally.polys("cdet", &lhs, &rhs);
        Ok(tally.finish())
    }

    pub fn verify_capelli_classical(&self, dim: usize, n: usize) -> Result<IdentityReport> {
        let mut tally = Tally::new(EQ2_CLASSICAL, &[("N", dim.to_string()), ("n", n.to_string())]);
        let red = self.reducer(&AlgebraPreset::weyl_classical(dim)?, (2 * n).max(2))?;
        tally.saw_rules(red.system().len());
        let (lhs, rhs) = capelli_classical_factors(dim, n)?;
        let l = reduced_product(Some(&red), &lhs.iter().collect::<Vec<_>>())?;
        let r = reduced_product(Some(&red), &rhs.iter().collect::<Vec<_>>())?;
        tally.matrices("LHS-RHS", &l, &r)?;
        Ok(tally.finish())
    }

    /// The immanant identity with classical idempotents, for one tableau of
    /// `shape` or all of them; traced values must agree across tableaux.
    pub fn verify_imm(&self, shape: &Partition, tableau: Option<usize>, dim: usize, with_trace: bool) -> Result<IdentityReport> {
        let n = shape.size();
        let tabs = select_tableaux(shape, tableau)?;
        let mut tally = Tally::new(
            EQ3_IMMANANT,
            &[
                ("N", dim.to_string()),
                ("lambda", shape.to_string()),
                ("tableau", tableau.map_or("all".into(), |i| i.to_string())),
                ("trace", with_trace.to_string()),
            ],
        );
        let red = self.reducer(&AlgebraPreset::weyl_classical(dim)?, (2 * n).max(2))?;
        tally.saw_rules(red.system().len());
        let fam = JmFamily::new(&Carrier::Classical { n, dim })?;
        let x = gen_matrix(GenKind::X, dim);
        let d = gen_matrix(GenKind::DCl, dim);
        let l = x.tmul(&d)?;
        let mut rhs_factors = Vec::new();
        for k in 1..=n {
            rhs_factors.push(TensorMat::embed_at(&x, k, n)?);
        }
        for k in 1..=n {
            rhs_factors.push(TensorMat::embed_at(&d, k, n)?);
        }
        let rhs_plain = reduced_product(Some(&red), &rhs_factors.iter().collect::<Vec<_>>())?;
        let mut traces: Vec<(String, NCPoly, NCPoly)> = Vec::new();
        for t in &tabs {
            let e = fam.idempotent(t)?;
            let mut lhs_factors = Vec::new();
            for k in 1..=n {
                let lk = TensorMat::embed_at(&l, k, n)?;
                lhs_factors.push(lk.add_scalar(&QScalar::from_int(-t.content(k))));
            }
            lhs_factors.push(e.clone());
            let lhs = reduced_product(Some(&red), &lhs_factors.iter().collect::<Vec<_>>())?;
            let rhs = reduced_product(Some(&red), &[&rhs_plain, &e])?;
            if with_trace {
                let (a, b) = (lhs.trace(), rhs.trace());
                tally.polys(&format!("trace {t}"), &a, &b);
                traces.push((t.to_string(), a, b));
            } else {
                tally.matrices(&format!("{t}"), &lhs, &rhs)?;
                traces.push((t.to_string(), red.normal_form(&lhs.trace())?, red.normal_form(&rhs.trace())?));
            }
        }
        check_independence(&mut tally, &traces);
        Ok(tally.finish())
    }

    pub fn verify_capelli_quantum(&self, r: &RMatrix, n: usize) -> Result<IdentityReport> {
        let mut tally = Tally::new(EQ6_QUANTUM, &[("N", r.dim().to_string()), ("n", n.to_string()), ("q", params_q(r))]);
        let red = self.reducer(&AlgebraPreset::quantum_weyl(r)?, (2 * n).max(2))?;
        tally.saw_rules(red.system().len());
        let (lhs, rhs) = capelli_quantum_factors(r, n)?;
        let l = reduced_product(Some(&red), &lhs.iter().collect::<Vec<_>>())?;
        let rr = reduced_product(Some(&red), &rhs.iter().collect::<Vec<_>>())?;
        tally.matrices("LHS-RHS", &l, &rr)?;
        Ok(tally.finish())
    }

    /// The idempotent-projected quantum identity for one tableau or all
    /// tableaux of `shape`, plus the matrix-level check that projecting the
    /// universal identity by `E` gives exactly the projected form.
    pub fn verify_corcap(&self, r: &RMatrix, shape: &Partition, tableau: Option<usize>) -> Result<IdentityReport> {
        let n = shape.size();
        let tabs = select_tableaux(shape, tableau)?;
        let mut tally = Tally::new(
            EQ7_CORCAP,
            &[
                ("N", r.dim().to_string()),
                ("lambda", shape.to_string()),
                ("tableau", tableau.map_or("all".into(), |i| i.to_string())),
                ("q", params_q(r)),
            ],
        );
        let red = self.reducer(&AlgebraPreset::quantum_weyl(r)?, (2 * n).max(2))?;
        tally.saw_rules(red.system().len());
        let fam = JmFamily::new(&Carrier::Hecke { r, n })?;
        let lhat = gen_matrix(GenKind::M, r.dim()).tmul(&gen_matrix(GenKind::DQ, r.dim()))?;
        let (univ_lhs, univ_rhs) = capelli_quantum_factors(r, n)?;
        let mut quantum_traces = Vec::new();
        for t in &tabs {
            let e = fam.idempotent(t)?;
            let mut lhs_f = corcap_factors(r, t, &lhat)?;
            lhs_f.push(e.clone());
            let (mut rhs_f, pref) = corcap_rhs_factors(r, t)?;
            rhs_f.push(e.scale(&pref));
            let lhs = reduced_product(Some(&red), &lhs_f.iter().collect::<Vec<_>>())?;
            let rhs = reduced_product(Some(&red), &rhs_f.iter().collect::<Vec<_>>())?;
            tally.matrices(&format!("{t}"), &lhs, &rhs)?;

            // Free-algebra check: (universal sides) E = (projected sides) E.
            let mut a = univ_lhs.iter().collect::<Vec<_>>();
            a.push(&e);
            let b: Vec<&TensorMat> = lhs_f.iter().collect();
            tally.matrices(&format!("projection LHS {t}"), &reduced_product(None, &a)?, &reduced_product(None, &b)?)?;
            let mut a = univ_rhs.iter().collect::<Vec<_>>();
            a.push(&e);
            tally.matrices(
                &format!("projection RHS {t}"),
                &reduced_product(None, &a)?,
                &reduced_product(None, &rhs_f.iter().collect::<Vec<_>>())?,
            )?;
            quantum_traces.push((t.to_string(), red.normal_form(&lhs.trace())?, red.normal_form(&rhs.trace())?));
        }
        if tabs.len() > 1 {
            let agree = quantum_traces.windows(2).all(|w| w[0].1 == w[1].1 && w[0].2 == w[1].2);
            tally.notes.push(format!("plain traces independent of tableau: {agree}"));
        }
        Ok(tally.finish())
    }

    /// `L̂ = MD` satisfies the modified REA relations inside `W(R)`.
    pub fn verify_mrea_embedding(&self, r: &RMatrix) -> Result<IdentityReport> {
        let mut tally = Tally::new(MREA_EMBEDDING, &[("N", r.dim().to_string()), ("q", params_q(r))]);
        let red = self.reducer(&AlgebraPreset::quantum_weyl(r)?, 4)?;
        tally.saw_rules(red.system().len());
        let lhat = gen_matrix(GenKind::M, r.dim()).tmul(&gen_matrix(GenKind::DQ, r.dim()))?;
        let residual = mrea_residual(r, &lhat)?.map_entries(|p| red.normal_form(p))?;
        tally.matrices("residual", &residual, &TensorMat::zero(r.dim(), 2))?;
        Ok(tally.finish())
    }

    /// Quantum immanant of tableau `t`: the full R-trace of
    /// `L̂_{\bar 1}(L̂_{\bar 2} - q^{-c(2)}[c(2)]_q) ... E_T` over the abstract
    /// `lhat` generators, reduced in the modified REA at the given degree.
    pub fn quantum_immanant(&self, r: &RMatrix, t: &StdTableau, weights: &TensorMat, degree: usize) -> Result<NCPoly> {
        let n = t.size();
        let red = self.reducer(&AlgebraPreset::mrea(r)?, degree.max(2))?;
        let fam = JmFamily::new(&Carrier::Hecke { r, n })?;
        let lhat = gen_matrix(GenKind::Lhat, r.dim());
        let mut factors = corcap_factors(r, t, &lhat)?;
        factors.push(fam.idempotent(t)?);
        let prod = reduced_product(Some(&red), &factors.iter().collect::<Vec<_>>())?;
        let slots: Vec<usize> = (1..=n).collect();
        let traced = prod.r_trace(&slots, weights)?.entry(0, 0);
        red.normal_form(&traced)
    }

    /// Independence of the quantum immanant from the tableau, and (when
    /// `centrality`) vanishing commutators with every `lhat` generator.
    pub fn verify_immanant_properties(&self, r: &RMatrix, shape: &Partition, centrality: bool) -> Result<IdentityReport> {
        let n = shape.size();
        let mut tally = Tally::new(
            IMMANANT_PROPS,
            &[
                ("N", r.dim().to_string()),
                ("lambda", shape.to_string()),
                ("centrality", centrality.to_string()),
                ("q", params_q(r)),
            ],
        );
        let skew = r.skew().ok_or_else(|| Error::Validation { identity: "skew-invertibility".into(), witness: "no Psi".into() })?;
        let degree = if centrality { n + 1 } else { n };
        let red = self.reducer(&AlgebraPreset::mrea(r)?, degree.max(2))?;
        tally.saw_rules(red.system().len());
        let tabs = standard_tableaux(shape);
        let imms: Vec<NCPoly> =
            tabs.iter().map(|t| self.quantum_immanant(r, t, skew.weights(), degree)).collect::<Result<_>>()?;
        if imms[0].is_zero() {
            tally.notes.push("immanant is zero".into());
        }
        for (t, imm) in tabs.iter().zip(&imms).skip(1) {
            tally.polys(&format!("independence {t} vs {}", tabs[0]), imm, &imms[0]);
        }
        if centrality {
            for i in 1..=r.dim() {
                for j in 1..=r.dim() {
                    let g = NCPoly::gen(GenId::new(GenKind::Lhat, i, j));
                    let comm = &(&imms[0] * &g) - &(&g * &imms[0]);
                    tally.polys(&format!("[s, {g}]"), &red.normal_form(&comm)?, &NCPoly::zero());
                }
            }
        }
        Ok(tally.finish())
    }
}

/// Id of the R-matrix validation check.
pub const RMATRIX_VALIDATION: &str = "rmatrix-validation";
/// Id of the idempotent property check.
pub const IDEMPOTENTS: &str = "idempotents";

/// Report for the braid, Hecke and skew-invertibility checks of `r`.
pub fn validation_report(r: &RMatrix, source: &str) -> IdentityReport {
    let mut tally = Tally::new(
        RMATRIX_VALIDATION,
        &[("N", r.dim().to_string()), ("q", params_q(r)), ("source", source.to_string())],
    );
    tally.compared = 3;
    tally.notes = vec![
        format!("braid_ok={}", r.braid_ok),
        format!("hecke_ok={}", r.hecke_ok),
        format!("skew_ok={}", r.skew_ok),
    ];
    if let Some(f) = r.failures().first() {
        tally.failure = Some((f.identity.clone(), f.witness.clone()));
    }
    tally.finish()
}

/// Idempotent properties for all standard tableaux of size `n` on a
/// carrier: `E^2 = E`, pairwise orthogonality, completeness, the JM
/// eigenvalues on both sides and, for the Hecke carrier, the eigenvalue
/// `-q^{-c}[c]_q` of `(J_k^{-1} - 1)/(q - q^{-1})`.
pub fn verify_idempotents(carrier: &Carrier<'_>) -> Result<IdentityReport> {
    let (n, dim, name, q) = match carrier {
        Carrier::Classical { n, dim } => (*n, *dim, "classical", "-".to_string()),
        Carrier::Hecke { r, n } => (*n, r.dim(), "hecke", params_q(r)),
    };
    let mut tally = Tally::new(
        IDEMPOTENTS,
        &[("carrier", name.to_string()), ("N", dim.to_string()), ("n", n.to_string()), ("q", q)],
    );
    let fam = JmFamily::new(carrier)?;
    let tabs: Vec<StdTableau> = crate::combinatorics::partitions(n).iter().flat_map(standard_tableaux).collect();
    let mut es = Vec::with_capacity(tabs.len());
    for t in &tabs {
        match fam.idempotent(t) {
            Ok(e) => es.push(e),
            Err(err) => {
                tally.failure.get_or_insert((format!("idempotent {t}"), err.to_string()));
                return Ok(tally.finish());
            }
        }
    }
    let zero = TensorMat::zero(dim, n);
    let mut sum = zero.clone();
    for (i, (t, e)) in tabs.iter().zip(&es).enumerate() {
        tally.matrices(&format!("E^2 {t}"), &e.tmul(e)?, e)?;
        for k in 1..=n {
            let ev = e.scale(&fam.eigenvalue(t.content(k)));
            tally.matrices(&format!("J_{k} E {t}"), &fam.jm(k).tmul(e)?, &ev)?;
            tally.matrices(&format!("E J_{k} {t}"), &e.tmul(fam.jm(k))?, &ev)?;
            if let Carrier::Hecke { r, .. } = carrier {
                let lhs = jm_correction(fam.jm(k), r)?.tmul(e)?;
                tally.matrices(&format!("shift {k} {t}"), &lhs, &e.scale(&content_shift(r, t.content(k))))?;
            }
        }
        for (u, f) in tabs.iter().zip(&es).skip(i + 1) {
            tally.matrices(&format!("E {t} E {u}"), &e.tmul(f)?, &zero)?;
            tally.matrices(&format!("E {u} E {t}"), &f.tmul(e)?, &zero)?;
        }
        sum = sum.add(e)?;
    }
    tally.matrices("sum", &sum, &TensorMat::identity(dim, n))?;
    Ok(tally.finish())
}

/// Combines per-case reports into one: failed if any part failed, first
/// failure kept, counts summed.
pub fn merge_reports(id: &str, params: BTreeMap<String, String>, parts: Vec<IdentityReport>) -> IdentityReport {
    let mut out = IdentityReport {
        id: id.to_string(),
        params,
        status: Status::Verified,
        entry: None,
        residual: None,
        compared: 0,
        rules: 0,
        notes: Vec::new(),
        ms: 0,
    };
    for p in parts {
        out.compared += p.compared;
        out.rules = out.rules.max(p.rules);
        out.ms += p.ms;
        let tag: Vec<String> = p.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let tag = tag.join(" ");
        out.notes.extend(p.notes.iter().map(|n| format!("[{tag}] {n}")));
        if !p.verified() && out.status == Status::Verified {
            out.status = Status::Failed;
            out.entry = p.entry.map(|e| format!("[{tag}] {e}"));
            out.residual = p.residual;
        }
    }
    out
}

/// A failed report carrying an engine error instead of a residual.
pub fn error_report(id: &str, params: BTreeMap<String, String>, err: &Error) -> IdentityReport {
    IdentityReport {
        id: id.to_string(),
        params,
        status: Status::Failed,
        entry: Some("engine error".into()),
        residual: Some(err.to_string()),
        compared: 0,
        rules: 0,
        notes: Vec::new(),
        ms: 0,
    }
}

/// Id of the symbolic/specialized coherence check.
pub const COHERENCE: &str = "coherence";

fn specialize_mat(m: &TensorMat, q0: &Field) -> Result<TensorMat> {
    m.map_entries(|p| p.try_map_coeffs(|c| q0.specialize(c)))
}

impl Verifier<'_> {
    /// Runs the progressive products of the universal and projected quantum
    /// identities (and the quantum immanants) over symbolic `q` and over
    /// `q0`, comparing every intermediate normal form after evaluating the
    /// symbolic one at `q0`.
    pub fn verify_coherence(&self, dim: usize, n: usize, q0: &Field) -> Result<IdentityReport> {
        let mut tally = Tally::new(COHERENCE, &[("N", dim.to_string()), ("n", n.to_string()), ("q0", q0.mode_str())]);
        let r_sym = crate::rmatrix::dj_rmatrix(dim, &Field::Symbolic)?;
        let r_spec = crate::rmatrix::dj_rmatrix(dim, q0)?;
        let bound = (2 * n).max(2);
        let red_sym = self.reducer(&AlgebraPreset::quantum_weyl(&r_sym)?, bound)?;
        let red_spec = self.reducer(&AlgebraPreset::quantum_weyl(&r_spec)?, bound)?;
        tally.saw_rules(red_sym.system().len());

        let mut chains: Vec<(String, Vec<TensorMat>, Vec<TensorMat>)> = Vec::new();
        let (a, b) = capelli_quantum_factors(&r_sym, n)?;
        let (c, d) = capelli_quantum_factors(&r_spec, n)?;
        chains.push(("universal LHS".into(), a, c));
        chains.push(("universal RHS".into(), b, d));
        let fam_sym = JmFamily::new(&Carrier::Hecke { r: &r_sym, n })?;
        let fam_spec = JmFamily::new(&Carrier::Hecke { r: &r_spec, n })?;
        let lhat_sym = gen_matrix(GenKind::M, dim).tmul(&gen_matrix(GenKind::DQ, dim))?;
        for shape in crate::combinatorics::partitions(n) {
            for t in standard_tableaux(&shape) {
                let mut a = corcap_factors(&r_sym, &t, &lhat_sym)?;
                a.push(fam_sym.idempotent(&t)?);
                let mut c = corcap_factors(&r_spec, &t, &lhat_sym)?;
                c.push(fam_spec.idempotent(&t)?);
                chains.push((format!("projected LHS {t}"), a, c));
            }
        }
        for (label, sym, spec) in &chains {
            let mut p_sym = sym[0].map_entries(|p| red_sym.normal_form(p))?;
            let mut p_spec = spec[0].map_entries(|p| red_spec.normal_form(p))?;
            for k in 0..sym.len() {
                if k > 0 {
                    p_sym = p_sym.tmul_with(&sym[k], |p| red_sym.normal_form(&p))?;
                    p_spec = p_spec.tmul_with(&spec[k], |p| red_spec.normal_form(&p))?;
                }
                tally.matrices(&format!("{label} step {k}"), &specialize_mat(&p_sym, q0)?, &p_spec)?;
            }
        }
        if let (Some(sk_sym), Some(sk_spec)) = (r_sym.skew(), r_spec.skew()) {
            for shape in crate::combinatorics::partitions(n) {
                for t in standard_tableaux(&shape) {
                    let a = self.quantum_immanant(&r_sym, &t, sk_sym.weights(), n)?;
                    let b = self.quantum_immanant(&r_spec, &t, sk_spec.weights(), n)?;
                    tally.polys(&format!("immanant {t}"), &a.try_map_coeffs(|c| q0.specialize(c))?, &b);
                }
            }
        }
        Ok(tally.finish())
    }
}

fn select_tableaux(shape: &Partition, index: Option<usize>) -> Result<Vec<StdTableau>> {
    let all = standard_tableaux(shape);
    match index {
        None => Ok(all),
        Some(i) if i < all.len() => Ok(vec![all[i].clone()]),
        Some(i) => Err(Error::Shape(format!("tableau index {i} out of range for {shape} ({} tableaux)", all.len()))),
    }
}

fn check_independence(tally: &mut Tally, traces: &[(String, NCPoly, NCPoly)]) {
    if let Some((t0, a0, b0)) = traces.first() {
        for (t, a, b) in &traces[1..] {
            tally.polys(&format!("independence LHS {t} vs {t0}"), a, a0);
            tally.polys(&format!("independence RHS {t} vs {t0}"), b, b0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmatrix::dj_rmatrix;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn cdet_uses_column_order() {
        let gens: Vec<NCPoly> = (1..=4).map(|i| NCPoly::gen(GenId::new(GenKind::Lhat, 1, i))).collect();
        let a = TensorMat::from_fn(2, 1, |r, c| gens[r * 2 + c].clone());
        // a = gens[0], b = gens[1], c = gens[2], d = gens[3]
        let expected = &(&gens[0] * &gens[3]) - &(&gens[2] * &gens[1]);
        assert_eq!(cdet(&a), expected);
        let s = TensorMat::from_fn(3, 1, |r, c| NCPoly::constant(QScalar::from_int([2, 0, 1, 1, 3, 0, 0, 1, 4][r * 3 + c])));
        assert_eq!(cdet(&s).as_scalar().unwrap(), QScalar::from_int(25));
    }

    #[test]
    fn small_classical_identities() {
        let store = SystemStore::new(None);
        let v = Verifier::new(&store, None);
        for dim in 1..=2 {
            assert!(v.verify_cdet_capelli(dim, true).unwrap().verified());
        }
        let mutant = v.verify_cdet_capelli(2, false).unwrap();
        assert!(!mutant.verified() && mutant.residual.is_some());
        for n in 1..=2 {
            assert!(v.verify_capelli_classical(1, n).unwrap().verified());
            assert!(v.verify_capelli_classical(2, n).unwrap().verified());
        }
    }

    #[test]
    fn small_quantum_identities() {
        let store = SystemStore::new(None);
        let v = Verifier::new(&store, None);
        let r1 = dj_rmatrix(1, &Field::Symbolic).unwrap();
        for n in 1..=2 {
            let rep = v.verify_capelli_quantum(&r1, n).unwrap();
            assert!(rep.verified(), "{rep:?}");
        }
        let r2 = dj_rmatrix(2, &Field::default_specialized()).unwrap();
        assert!(v.verify_capelli_quantum(&r2, 2).unwrap().verified());
        assert!(v.verify_mrea_embedding(&r2).unwrap().verified());
        let rep = v.verify_corcap(&r2, &p(&[1, 1]), None).unwrap();
        assert!(rep.verified(), "{rep:?}");
    }

    #[test]
    fn content_shift_values() {
        let r = dj_rmatrix(2, &Field::Symbolic).unwrap();
        let f = r.field();
        assert_eq!(content_shift(&r, 1), -f.q_pow(-1));
        assert_eq!(content_shift(&r, -1), f.q());
        assert!(content_shift(&r, 0).is_zero());
    }
}
