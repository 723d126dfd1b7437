//! Exact symbolic verification kernel for Capelli-type identities in Weyl
//! algebras, Reflection Equation algebras and their quantum Weyl algebras.
//!
//! The pipeline is: scalars in an exact field ([`scalars`]), noncommutative
//! polynomials with truncated completion to a confluent rewrite system
//! ([`ncpoly`]), sparse tensor operators with polynomial entries
//! ([`tensorspace`]), Hecke R-matrices ([`rmatrix`]), Young tableaux and
//! Jucys-Murphy idempotents ([`combinatorics`]), algebra presentations
//! ([`algebras`]) and finally the identity verifiers ([`capelli`]).

pub mod algebras;
pub mod capelli;
pub mod combinatorics;
pub mod error;
pub mod ncpoly;
pub mod rmatrix;
pub mod scalars;
pub mod tensorspace;

pub use error::{Error, Result};
