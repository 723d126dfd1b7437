use std::sync::Arc;

use capelli_core::algebras::{build_system, cross_relations, rea_relations, AlgebraPreset};
use capelli_core::combinatorics::{jm_hecke, standard_tableaux, Partition};
use capelli_core::ncpoly::{nc_mul, GenId, GenKind, NCPoly, Reducer};
use capelli_core::rmatrix::{dj_rmatrix, skew_inverse, RMatrix};
use capelli_core::scalars::{Field, QScalar};
use capelli_core::tensorspace::TensorMat;

fn scalar(m: &TensorMat, r: usize, c: usize) -> QScalar {
    m.entry(r, c).as_scalar().expect("scalar entry")
}

fn permutation(dim: usize) -> TensorMat {
    TensorMat::perm_matrix(1, 2, 2, dim).unwrap()
}

#[test]
fn trace_of_swap_and_identity() {
    let p = permutation(2);
    assert_eq!(p.trace().as_scalar(), Some(QScalar::from_int(2)));
    assert_eq!(TensorMat::identity(2, 3).trace().as_scalar(), Some(QScalar::from_int(8)));
    assert_eq!(p.trace_slots(&[2]).unwrap(), TensorMat::identity(2, 1));
}

#[test]
fn skew_inverse_of_scalar_and_permutation() {
    let f = Field::Symbolic;
    let one = TensorMat::scalar_identity(1, 2, &f.q());
    let s = skew_inverse(&one).unwrap();
    assert_eq!(scalar(&s.psi, 0, 0), f.q_pow(-1));
    assert_eq!(scalar(s.weights(), 0, 0), f.q_pow(-1));

    let s = skew_inverse(&permutation(3)).unwrap();
    assert_eq!(s.psi, permutation(3));
    assert_eq!(s.weights(), &TensorMat::identity(3, 1));
}

#[test]
fn r_trace_of_r_is_proportional_to_identity() {
    let r = dj_rmatrix(2, &Field::Symbolic).unwrap();
    let c = r.skew().unwrap().weights().clone();
    let qdim = TensorMat::identity(2, 1).r_trace(&[1], &c).unwrap().trace().as_scalar().unwrap();
    let tr = r.op().r_trace(&[2], &c).unwrap();
    assert!(tr.is_scalar());
    assert_eq!(tr, TensorMat::identity(2, 1));
    assert!(!qdim.is_zero());
    // Quantum dimension q^{-N}[N]_q for the normalization with eigenvalues q, -q^{-1}.
    let f = Field::Symbolic;
    assert_eq!(qdim, &f.q_pow(-2) * &f.qnum(2));
}

#[test]
fn hecke_jm_family_on_permutation_is_trivial() {
    let f = Field::default_specialized();
    let p = RMatrix::validate(permutation(2), f).unwrap();
    assert!(!p.hecke_ok);
    for k in 1..=3 {
        assert_eq!(jm_hecke(k, 3, &p).unwrap(), TensorMat::identity(2, 3));
    }
}

#[test]
fn hecke_jm_two_is_r_squared() {
    let f = Field::Symbolic;
    let r = dj_rmatrix(2, &f).unwrap();
    let j2 = jm_hecke(2, 2, &r).unwrap();
    let expected = r.op().scale(&f.q_minus_qinv()).add_scalar(&QScalar::one());
    assert_eq!(j2, expected);
}

#[test]
fn single_row_and_column_tableaux() {
    for n in 1..=4 {
        let row = standard_tableaux(&Partition::new(vec![n]).unwrap());
        assert_eq!(row.len(), 1);
        assert_eq!(row[0].contents(), (0..n as i64).collect::<Vec<_>>());
        let col = standard_tableaux(&Partition::new(vec![1; n]).unwrap());
        assert_eq!(col.len(), 1);
        assert_eq!(col[0].contents(), (0..n as i64).map(|c| -c).collect::<Vec<_>>());
    }
}

#[test]
fn quantum_relation_sets_reduce_under_their_own_systems() {
    let r = dj_rmatrix(2, &Field::Symbolic).unwrap();
    for preset in [
        AlgebraPreset::rea(&r).unwrap(),
        AlgebraPreset::rea_inv(&r).unwrap(),
        AlgebraPreset::mrea(&r).unwrap(),
    ] {
        let reducer = Reducer::new(Arc::new(build_system(&preset, 3).unwrap()));
        for rel in preset.relations() {
            assert!(reducer.normal_form(rel).unwrap().is_zero(), "{}: {rel}", preset.name());
        }
    }
}

#[test]
fn dj2_cross_relations_have_dm_heads() {
    let r = dj_rmatrix(2, &Field::Symbolic).unwrap();
    let rels = cross_relations(&r).unwrap();
    assert_eq!(rels.len(), 16);
    let mut heads: Vec<String> = rels
        .iter()
        .map(|p| {
            let (w, _) = p.leading().unwrap();
            let kinds: Vec<GenKind> = w.letters().map(|g| g.kind).collect();
            assert_eq!(kinds, vec![GenKind::DQ, GenKind::M]);
            w.to_string()
        })
        .collect();
    heads.sort();
    heads.dedup();
    assert_eq!(heads.len(), 16);
}

#[test]
fn one_dimensional_reflection_equation_is_empty() {
    let r = dj_rmatrix(1, &Field::Symbolic).unwrap();
    assert!(rea_relations(&r, GenKind::M, false).unwrap().is_empty());
    assert!(AlgebraPreset::mrea(&r).unwrap().relations().is_empty());
}

#[test]
fn quantum_weyl_one_dimensional_normal_form() {
    // Two applications of d m -> q^{-2} m d + q^{-1}.
    let f = Field::default_specialized();
    let r = dj_rmatrix(1, &f).unwrap();
    let preset = AlgebraPreset::quantum_weyl(&r).unwrap();
    let reducer = Reducer::new(Arc::new(build_system(&preset, 4).unwrap()));
    let [m, d] = [GenKind::M, GenKind::DQ].map(|k| NCPoly::gen(GenId::new(k, 1, 1)));
    let dmm = nc_mul(&nc_mul(&d, &m), &m);
    let mmd = nc_mul(&nc_mul(&m, &m), &d);
    let expected = &mmd.scale(&f.q_pow(-4)) + &m.scale(&(&f.q_pow(-1) * &(&QScalar::one() + &f.q_pow(-2))));
    assert_eq!(reducer.normal_form(&dmm).unwrap(), expected);
}
