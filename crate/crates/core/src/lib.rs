//! Entanglement measures, local invariants and braid-relation checks for
//! two-qubit gates.
//!
//! Conventions used throughout the crate:
//!
//! * matrices are stored row-major;
//! * the tensor product maps `|i⟩⊗|j⟩` to the basis index `i·d_b + j`, so the
//!   two-qubit computational basis is ordered `|00⟩, |01⟩, |10⟩, |11⟩`;
//! * qubit 0 is the leftmost tensor factor (the most significant bit of the
//!   basis index).

// `!(x <= tol)` is used on purpose so that NaN fails tolerance checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod braid;
pub mod classify;
pub mod cli;
pub mod epower;
pub mod error;
pub mod gates;
pub mod linalg;
pub mod optimize;
pub mod states;

pub use error::{Error, Result};
pub use linalg::{Complex, SquareMatrix};
