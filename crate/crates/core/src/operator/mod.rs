//! Operator model: lattice-exact banded operators and dense sections.

mod lattice;
mod ops;
pub mod serialize;
mod vector;
mod window;

pub use lattice::{BandWindow, CoefFn, Coefficient, Diagonal, LatticeOp, RealFn, SectionView};
pub use ops::{commutator, heisenberg_conjugate, operator_norm, ConjugateOp, DenseOperator, Operator, UnitaryOp};
pub use vector::ComplexVector;
pub use window::{
    count_in_window, diagonalize_projection, fejer_polynomial, spectral_projection, upper_half,
    ProjectionMethod, SpectralProjection, SpectralWindow, BOUNDARY_GUARD,
};
