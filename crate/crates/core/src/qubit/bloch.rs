use num_complex::Complex64;

use crate::fisher::{ParameterPoint, StateFamily};
use crate::operator::{ComplexMatrix, DensityMatrix, KrausMap};
use crate::{Error, Result};

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);
const CI: Complex64 = Complex64::new(0.0, 1.0);

fn qubit(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |i, j| [[a, b], [c, d]][i][j])
}

/// `[sigma_x, sigma_y, sigma_z]` with `sigma_z = diag(1, -1)`.
pub fn pauli() -> [ComplexMatrix; 3] {
    [qubit(C0, C1, C1, C0), qubit(C0, -CI, CI, C0), qubit(C1, C0, C0, -C1)]
}

/// Lowering operator `[[0, 0], [1, 0]]`: drives the Bloch vector to `(0, 0, -1)`.
pub fn sigma_minus() -> ComplexMatrix {
    qubit(C0, C0, C1, C0)
}

pub fn sigma_plus() -> ComplexMatrix {
    qubit(C0, C1, C0, C0)
}

/// Point of the closed Bloch ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector(pub(super) [f64; 3]);

impl BlochVector {
    /// Accepts `|n|^2 <= 1 + 1e-12`.
    pub fn new(n: [f64; 3]) -> Result<Self> {
        if n.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm_sq = n.iter().map(|x| x * x).sum::<f64>();
        if norm_sq > 1.0 + 1e-12 {
            return Err(Error::OutsideBall { norm_sq });
        }
        Ok(Self(n))
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

impl TryFrom<&[f64]> for BlochVector {
    type Error = Error;

    fn try_from(x: &[f64]) -> Result<Self> {
        let n: [f64; 3] = x.try_into().map_err(|_| Error::DimMismatch { left: 3, right: x.len() })?;
        Self::new(n)
    }
}

/// `rho = (I + n . sigma) / 2`.
pub fn bloch_state(n: &BlochVector) -> DensityMatrix {
    let [x, y, z] = n.0;
    let m = qubit(
        Complex64::new(0.5 * (1.0 + z), 0.0),
        Complex64::new(0.5 * x, -0.5 * y),
        Complex64::new(0.5 * x, 0.5 * y),
        Complex64::new(0.5 * (1.0 - z), 0.0),
    );
    DensityMatrix::from_valid(m)
}

/// Closed-form IDQS of the Bloch parameterization, `1 / (8 sqrt(1 - |n|^2))`.
pub fn bloch_idqs(n: &BlochVector) -> Result<f64> {
    let norm = n.norm();
    if norm >= 1.0 - 1e-9 {
        return Err(Error::PureBoundary { norm });
    }
    Ok(1.0 / (8.0 * (1.0 - n.norm_sq()).sqrt()))
}

/// `x -> rho(n = x)`, with the exact derivatives `sigma_mu / 2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BlochFamily;

impl StateFamily for BlochFamily {
    fn dim_param(&self) -> usize {
        3
    }

    fn state(&self, x: &ParameterPoint) -> Result<DensityMatrix> {
        Ok(bloch_state(&BlochVector::try_from(x.coords())?))
    }

    fn analytic_derivative(&self, _x: &ParameterPoint, mu: usize) -> Option<Result<ComplexMatrix>> {
        let sigma = pauli().into_iter().nth(mu)?;
        Some(Ok(sigma.scale(0.5)))
    }
}

/// `rho -> (1 - p) rho + p I/2`, as Kraus operators
/// `sqrt(1 - 3p/4) I` and `sqrt(p/4) sigma_i`.
pub fn depolarizing(p: f64) -> Result<KrausMap> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("depolarizing strength {p} outside [0, 1]")));
    }
    let mut ops = vec![ComplexMatrix::identity(2).scale((1.0 - 0.75 * p).sqrt())];
    ops.extend(pauli().iter().map(|s| s.scale((0.25 * p).sqrt())));
    KrausMap::new(ops)
}
