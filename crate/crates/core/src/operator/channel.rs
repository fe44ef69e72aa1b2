use num_complex::Complex64;

use super::{hermitian_eig, ComplexMatrix, DensityMatrix};
use crate::dynamics::MasterEquation;
use crate::{Error, Result};

/// `-i[H, m] + sum_i rate_i (A_i m A_i^dag - 1/2 {A_i^dag A_i, m})`.
///
/// Linear in `m`, so it applies equally to states and to their parameter
/// derivatives.
pub fn lindblad_action(
    hamiltonian: &ComplexMatrix,
    channels: &[(&ComplexMatrix, f64)],
    m: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    hamiltonian.check_same_dim(m)?;
    let h = hamiltonian.as_inner();
    let x = m.as_inner();
    let minus_i = Complex64::new(0.0, -1.0);
    let mut out = (h * x - x * h) * minus_i;
    for (a, rate) in channels {
        a.check_same_dim(m)?;
        if *rate == 0.0 {
            continue;
        }
        let a = a.as_inner();
        let ad = a.adjoint();
        let ada = &ad * a;
        let term = a * x * &ad - (&ada * x + x * &ada) * Complex64::new(0.5, 0.0);
        out += term * Complex64::new(*rate, 0.0);
    }
    ComplexMatrix::try_from(out)
}

/// `K(t) rho` for a master equation.
pub fn apply_generator(me: &MasterEquation, t: f64, rho: &DensityMatrix) -> Result<ComplexMatrix> {
    me.generator_at(t)?.apply(rho.matrix())
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn unitary_propagator(hamiltonian: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let s = hermitian_eig(hamiltonian)?;
    Ok(s.map_eigenvalues(|p| Complex64::from_polar(1.0, -p * t)))
}

/// Completely positive map given by Kraus operators, `m -> sum K m K^dag`.
#[derive(Debug, Clone)]
pub struct KrausMap {
    operators: Vec<ComplexMatrix>,
}

impl KrausMap {
    /// Requires a non-empty list of equally sized operators with
    /// `sum K^dag K = I` to `1e-10`.
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let first =
            operators.first().ok_or_else(|| Error::InvalidArgument("Kraus map needs at least one operator".into()))?;
        let dim = first.dim();
        let mut completeness = ComplexMatrix::zeros(dim);
        for k in &operators {
            first.check_same_dim(k)?;
            completeness = &completeness + &(&k.adjoint() * k);
        }
        let defect = (&completeness - &ComplexMatrix::identity(dim)).max_abs();
        if defect > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "Kraus operators are not trace preserving (defect {defect:e})"
            )));
        }
        Ok(Self { operators })
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    pub fn apply(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let mut out = ComplexMatrix::zeros(m.dim());
        for k in &self.operators {
            k.check_same_dim(m)?;
            out = &out + &(&(k * m) * &k.adjoint());
        }
        Ok(out)
    }

    pub fn apply_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(self.apply(rho.matrix())?)
    }
}
