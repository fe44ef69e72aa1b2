//! Generic full-rank state families with exact derivatives.

use crate::fisher::{ParameterPoint, StateFamily};
use crate::operator::{ComplexMatrix, DensityMatrix};
use crate::{Error, Result};

/// `rho(x) = M M^dag / tr(M M^dag)` with `M(x) = M_0 + sum_mu x_mu M_mu`.
///
/// Full rank wherever `M(x)` is invertible, which holds generically near
/// `x = 0` for random `M_0`.
#[derive(Debug, Clone)]
pub struct FactoredFamily {
    base: ComplexMatrix,
    directions: Vec<ComplexMatrix>,
}

impl FactoredFamily {
    pub fn new(base: ComplexMatrix, directions: Vec<ComplexMatrix>) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::InvalidArgument("family needs at least one direction".into()));
        }
        for d in &directions {
            base.check_same_dim(d)?;
        }
        Ok(Self { base, directions })
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    fn factor(&self, x: &ParameterPoint) -> Result<ComplexMatrix> {
        if x.dim() != self.directions.len() {
            return Err(Error::DimMismatch { left: self.directions.len(), right: x.dim() });
        }
        let mut m = self.base.clone();
        for (c, d) in x.coords().iter().zip(&self.directions) {
            m.add_scaled(*c, d);
        }
        Ok(m)
    }

    fn unnormalized(&self, x: &ParameterPoint) -> Result<(ComplexMatrix, ComplexMatrix, f64)> {
        let m = self.factor(x)?;
        let p = (&m * &m.adjoint()).hermitized();
        let tr = p.trace().re;
        if !(tr > 0.0) {
            return Err(Error::InvalidArgument("factor vanishes".into()));
        }
        Ok((m, p, tr))
    }
}

impl StateFamily for FactoredFamily {
    fn dim_param(&self) -> usize {
        self.directions.len()
    }

    fn state(&self, x: &ParameterPoint) -> Result<DensityMatrix> {
        let (_, p, tr) = self.unnormalized(x)?;
        DensityMatrix::new(p.scale(1.0 / tr))
    }

    fn analytic_derivative(&self, x: &ParameterPoint, mu: usize) -> Option<Result<ComplexMatrix>> {
        let direction = self.directions.get(mu)?;
        Some(self.unnormalized(x).map(|(m, p, tr)| {
            let dp = (&(direction * &m.adjoint()) + &(&m * &direction.adjoint())).hermitized();
            let dtr = dp.trace().re;
            let mut out = dp.scale(1.0 / tr);
            out.add_scaled(-dtr / (tr * tr), &p);
            out.hermitized()
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fisher::{numeric_derivatives_with, DerivativeOptions};
    use num_complex::Complex64;

    fn matrix(dim: usize, seed: f64) -> ComplexMatrix {
        ComplexMatrix::from_fn(dim, |i, j| {
            let k = (i * dim + j) as f64 + seed;
            Complex64::new((1.3 * k).sin(), (0.7 * k + 0.4).cos())
        })
    }

    #[test]
    fn analytic_derivative_matches_finite_difference() {
        let fam = FactoredFamily::new(matrix(3, 0.0), vec![matrix(3, 5.0), matrix(3, 11.0)]).unwrap();
        let x = ParameterPoint::new(vec![0.1, -0.2]).unwrap();
        let opts = DerivativeOptions { step: 1e-4, richardson: true };
        let numeric = numeric_derivatives_with(&fam, &x, &opts).unwrap();
        for (mu, n) in numeric.iter().enumerate() {
            let a = fam.analytic_derivative(&x, mu).unwrap().unwrap();
            assert!((&a - n).max_abs() < 1e-9);
            assert!(a.trace().norm() < 1e-14);
        }
    }

    #[test]
    fn states_are_valid() {
        let fam = FactoredFamily::new(matrix(4, 1.0), vec![matrix(4, 2.0)]).unwrap();
        let rho = fam.state(&ParameterPoint::new(vec![0.3]).unwrap()).unwrap();
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-14);
        assert!(fam.state(&ParameterPoint::new(vec![0.3, 0.1]).unwrap()).is_err());
    }
}
