use super::{hermitian_eig, ComplexMatrix, Spectrum};
use crate::numerics::Tolerances;
use crate::{Error, Result};

/// Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        validate_density(m)
    }

    /// Wraps a matrix already known to be a valid state.
    pub(crate) fn from_valid(m: ComplexMatrix) -> Self {
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn spectrum(&self) -> Spectrum {
        hermitian_eig(&self.0).expect("density matrices are Hermitian")
    }

    pub fn purity(&self) -> f64 {
        self.0.trace_product(&self.0).re
    }
}

impl AsRef<ComplexMatrix> for DensityMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Checks the density-matrix invariants with the default tolerances.
pub fn validate_density(m: ComplexMatrix) -> Result<DensityMatrix> {
    validate_density_with(m, &Tolerances::DEFAULT)
}

/// Checks Hermiticity, unit trace and eigenvalue floor, in that order. The
/// accepted matrix is symmetrized to remove sub-tolerance skew.
pub fn validate_density_with(m: ComplexMatrix, tol: &Tolerances) -> Result<DensityMatrix> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let defect = m.hermiticity_defect();
    if defect > tol.hermitian {
        return Err(Error::NotHermitian { defect });
    }
    let m = m.hermitized();
    let trace = m.trace().re;
    if (trace - 1.0).abs() > tol.trace {
        return Err(Error::TraceNotOne { trace });
    }
    let spectrum = hermitian_eig(&m)?;
    let lowest = spectrum.eigenvalues[0];
    if lowest < -tol.eigen_floor {
        return Err(Error::NegativeEigenvalue { value: lowest });
    }
    Ok(DensityMatrix(m))
}
