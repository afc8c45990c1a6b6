use num_bigint::BigInt;
use thiserror::Error;

use crate::classes::ClassList;
use crate::coset::Coset;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is singular")]
    Singular,

    #[error("module is not contained in the reference lattice")]
    NotSublattice,

    #[error("{x} is not invertible modulo {m}")]
    NotInvertible { x: BigInt, m: BigInt },

    #[error("gram matrix is not symmetric")]
    NotSymmetric,

    #[error("gram matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("bilinear form is not integral on the lattice")]
    NotIntegral,

    #[error("modulus must be positive, got {0}")]
    BadModulus(BigInt),

    #[error("coset has conductor {conductor}, not {requested}; use {refactored} instead")]
    ConductorMismatch {
        requested: BigInt,
        conductor: BigInt,
        refactored: Box<Coset>,
    },

    #[error("prime {p} is not admissible: {reason}")]
    InvalidPrime { p: u64, reason: String },

    #[error("target coset is not in Z_{p} of the source coset")]
    NotInZp { p: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("value {0} exceeds the range supported by the enumeration kernel")]
    Overflow(String),

    #[error("class list is empty")]
    EmptyClassList,

    #[error("inconsistent class data: {0}")]
    Inconsistent(String),

    #[error("class search at p = {prime} disagrees with the candidate class list")]
    ValidationDisagreement {
        prime: u64,
        candidate: Box<ClassList>,
        other: Box<ClassList>,
    },

    #[error("schema violation: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
