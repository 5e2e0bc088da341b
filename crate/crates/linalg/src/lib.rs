//! Exact linear algebra over `Z` and `Z/mZ`.
//!
//! Sparse integer matrices, Smith and Hermite normal forms, linear solving,
//! and finitely presented abelian groups with normal-form coordinates.

pub mod dense;
mod elimination;
pub mod hermite;
pub mod int;
pub mod modular;
pub mod module;
pub mod smith;
pub mod solve;
pub mod sparse;

pub use dense::DenseMatrix;
pub use elimination::CoordKind;
pub use hermite::{hermite_form, lattice_hermite, Hermite};
pub use int::Int;
pub use modular::{LeftSolver, ModEchelon, ModRow};
pub use module::{present_quotient, KernelData, ModuleElement, ModuleHom, PresentedModule};
pub use smith::{smith_normal_form, Smith};
pub use solve::solve_linear;
pub use sparse::{SparseIntMatrix, SparseVec};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("entry ({row}, {col}) outside a {rows}x{cols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("expected {expected} columns, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("not a homomorphism: source relation {relation} does not map to zero")]
    NotAHomomorphism { relation: usize },
    #[error("duplicate generator label")]
    DuplicateLabel,
    #[error("unknown generator label")]
    UnknownLabel,
}

/// Rank of the row span of a sparse integer matrix.
pub fn rank(a: &SparseIntMatrix) -> usize {
    elimination::NormalForm::compute(a).relation_rank()
}
