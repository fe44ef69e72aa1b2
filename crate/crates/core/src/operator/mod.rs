//! Small dense complex-matrix kernel.
//!
//! Everything here works on square matrices of modest dimension (up to 16);
//! there are no sparse or blocked code paths.

mod channel;
mod density;
mod matrix;
mod spectrum;

pub use channel::{apply_generator, lindblad_action, unitary_propagator, KrausMap};
pub use density::{validate_density, validate_density_with, DensityMatrix};
pub use matrix::{anticommutator, commutator, ComplexMatrix};
pub use spectrum::{hermitian_eig, Spectrum};
