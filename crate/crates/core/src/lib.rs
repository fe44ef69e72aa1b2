//! Quantum Fisher metric geometry for parameterized density-matrix families.
//!
//! The crate computes symmetric logarithmic derivatives, the quantum Fisher
//! metric and its determinant-based measures:
//!
//! - the intrinsic density of quantum states (IDQS), `sqrt(det g)`,
//! - the intrinsic density flow (IDF), its time derivative,
//! - the relative flow (RIDF), `IDF / IDQS`, which does not depend on the
//!   chosen coordinates.
//!
//! Under a time-local master equation the flow splits into one sub-flow per
//! dissipation channel, whose sign is opposite to the channel's rate. The
//! [`qubit`] module carries closed forms for the Bloch ball and the
//! Lorentzian-bath damping model, and [`witness`] turns flow series into
//! backflow (non-Markovianity) reports.
//!
//! Conventions: the metric is `g = (1/8) Re Tr[{L_mu, L_nu} rho]`, so the QFI
//! matrix is `4 g`.

#![forbid(unsafe_code)]

pub mod dynamics;
mod error;
pub mod families;
pub mod fisher;
pub mod numerics;
pub mod operator;
pub mod qubit;
pub mod witness;

pub use error::{Error, Result};
pub use num_complex::Complex64;
