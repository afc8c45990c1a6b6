//! Exact arithmetic for positive definite ternary lattice cosets `aL + ν`:
//! theta series, Kneser p-neighbours, class enumeration of proper genera and
//! spinor genera, Hecke operators and the Eisenstein / unary / cuspidal
//! splitting of coset theta series.

pub mod arith;
pub mod classes;
pub mod coset;
pub mod decomposition;
pub mod enumerate;
pub mod error;
pub mod isometry;
pub mod json;
pub mod linalg;
pub mod neighbors;
pub mod qseries;

pub use coset::{AmbientSpace, CanonicalKey, Coset, Lattice};
pub use error::{Error, Result};
pub use qseries::QSeries;
