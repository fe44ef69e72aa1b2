use num_complex::Complex64;

use crate::numerics::Tolerances;
use crate::operator::{ComplexMatrix, DensityMatrix, Spectrum};
use crate::{Error, Result};

/// What to do with derivative components inside the kernel of `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SupportPolicy {
    /// Fail with `UnsupportedDerivative` if a dropped component is larger
    /// than the support-leak tolerance (`1e-8`).
    #[default]
    Strict,
    /// Drop kernel components silently (minimal-norm SLD).
    Project,
}

/// The SLDs `L_mu` of a state for every parameter direction.
#[derive(Debug, Clone)]
pub struct SldSet {
    pub operators: Vec<ComplexMatrix>,
    pub kernel_threshold: f64,
}

impl SldSet {
    /// Computes all SLDs from one eigendecomposition of `rho`.
    pub fn compute(rho: &DensityMatrix, drhos: &[ComplexMatrix], kernel_threshold: f64) -> Result<Self> {
        Self::compute_with_policy(rho, drhos, kernel_threshold, SupportPolicy::Strict)
    }

    pub fn compute_with_policy(
        rho: &DensityMatrix,
        drhos: &[ComplexMatrix],
        kernel_threshold: f64,
        policy: SupportPolicy,
    ) -> Result<Self> {
        let spectrum = rho.spectrum();
        let operators = drhos
            .iter()
            .map(|d| sld_from_spectrum(&spectrum, d, kernel_threshold, policy))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { operators, kernel_threshold })
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }
}

/// SLD of `rho` along `drho`, solving `drho = 1/2 {rho, L}`.
///
/// In the eigenbasis of `rho`, `L_jk = 2 drho_jk / (p_j + p_k)`; entries with
/// `p_j + p_k <= kernel_threshold` are set to zero.
pub fn sld(rho: &DensityMatrix, drho: &ComplexMatrix, kernel_threshold: f64) -> Result<ComplexMatrix> {
    sld_with_policy(rho, drho, kernel_threshold, SupportPolicy::Strict)
}

pub fn sld_with_policy(
    rho: &DensityMatrix,
    drho: &ComplexMatrix,
    kernel_threshold: f64,
    policy: SupportPolicy,
) -> Result<ComplexMatrix> {
    sld_from_spectrum(&rho.spectrum(), drho, kernel_threshold, policy)
}

fn sld_from_spectrum(
    spectrum: &Spectrum,
    drho: &ComplexMatrix,
    kernel_threshold: f64,
    policy: SupportPolicy,
) -> Result<ComplexMatrix> {
    let n = spectrum.eigenvalues.len();
    if drho.dim() != n {
        return Err(Error::DimMismatch { left: n, right: drho.dim() });
    }
    let defect = drho.hermiticity_defect();
    if defect > 1e-10 * drho.max_abs().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let p = &spectrum.eigenvalues;
    let d = spectrum.to_eigenbasis(&drho.hermitized());
    let leak = Tolerances::DEFAULT.support_leak;
    let mut l = ComplexMatrix::zeros(n);
    for j in 0..n {
        for k in 0..n {
            let s = p[j] + p[k];
            if s > kernel_threshold {
                l[(j, k)] = d[(j, k)] * (2.0 / s);
            } else if policy == SupportPolicy::Strict && d[(j, k)].norm() > leak {
                return Err(Error::UnsupportedDerivative { magnitude: d[(j, k)].norm() });
            } else {
                l[(j, k)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(spectrum.from_eigenbasis(&l).hermitized())
}
