//! Determinants of power and Legendre-symbol matrices of the quadratic form
//! i^2 + cij + dj^2 over F_p, and the machinery to check congruences about
//! them prime by prime.
//!
//! - [`field`]: F_p arithmetic, primality, Legendre symbols, residue-class prime lists
//! - [`lucas`]: Lucas sequences mod p and their periodic closed forms
//! - [`poly`]: the reduced polynomial of (T^2 + cT + d)^(p-2) and coefficient diagnostics
//! - [`matrix`]: matrix builders and determinants mod p
//! - [`identities`]: verifiers producing [`CheckRecord`]s
//! - [`sweep`]: parallel sweeps and record serialization

pub mod error;
pub mod field;
pub mod identities;
pub mod lucas;
pub mod matrix;
pub mod poly;
pub mod sweep;

pub use error::{Error, Result};
pub use field::{
    is_prime, legendre, mod_inv, mod_pow, primes_in_classes, PrimeCtx, Residue, ResidueClass,
};
pub use identities::{CheckId, CheckRecord, Status};
pub use matrix::{build_matrix, det_mod, FpMatrix, MatrixKind};
pub use poly::{reduce_power_form, QuadForm, ReducedPoly};
