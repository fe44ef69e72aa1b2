use std::fmt;

use crate::numerics::{Tolerances, DEFAULT_FD_STEP};
use crate::operator::{ComplexMatrix, DensityMatrix};
use crate::{Error, Result};

use super::{qfm, FisherMetric, SldSet};

/// A point `x0` in the parameter space of a family.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPoint(Vec<f64>);

impl ParameterPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("parameter point needs at least one coordinate".into()));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite parameter point {coords:?}")));
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Copy with coordinate `mu` shifted by `delta`.
    pub fn shifted(&self, mu: usize, delta: f64) -> Self {
        let mut c = self.0.clone();
        c[mu] += delta;
        Self(c)
    }
}

impl From<[f64; 3]> for ParameterPoint {
    fn from(c: [f64; 3]) -> Self {
        Self(c.to_vec())
    }
}

/// Differentiable map from parameters to density matrices.
pub trait StateFamily: Send + Sync {
    fn dim_param(&self) -> usize;

    fn state(&self, x: &ParameterPoint) -> Result<DensityMatrix>;

    /// `d rho / d x^mu` in closed form, when the family knows it.
    fn analytic_derivative(&self, _x: &ParameterPoint, _mu: usize) -> Option<Result<ComplexMatrix>> {
        None
    }
}

type StateFn = dyn Fn(&[f64]) -> Result<DensityMatrix> + Send + Sync;

/// Family backed by a closure; derivatives are always numeric.
pub struct FnFamily {
    dim_param: usize,
    f: Box<StateFn>,
}

impl FnFamily {
    pub fn new(dim_param: usize, f: impl Fn(&[f64]) -> Result<DensityMatrix> + Send + Sync + 'static) -> Self {
        Self { dim_param, f: Box::new(f) }
    }
}

impl fmt::Debug for FnFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnFamily").field("dim_param", &self.dim_param).finish_non_exhaustive()
    }
}

impl StateFamily for FnFamily {
    fn dim_param(&self) -> usize {
        self.dim_param
    }

    fn state(&self, x: &ParameterPoint) -> Result<DensityMatrix> {
        (self.f)(x.coords())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeOptions {
    /// Step relative to `max(1, |x^mu|)`.
    pub step: f64,
    /// Combine steps `h` and `h/2` to cancel the `h^2` error term.
    pub richardson: bool,
}

impl Default for DerivativeOptions {
    fn default() -> Self {
        Self { step: DEFAULT_FD_STEP, richardson: false }
    }
}

/// Central-difference derivatives with the default options and a given step.
pub fn numeric_derivatives(family: &dyn StateFamily, x0: &ParameterPoint, step: f64) -> Result<Vec<ComplexMatrix>> {
    numeric_derivatives_with(family, x0, &DerivativeOptions { step, ..Default::default() })
}

/// `(rho(x + h e_mu) - rho(x - h e_mu)) / 2h`, Hermitized.
pub fn numeric_derivatives_with(
    family: &dyn StateFamily,
    x0: &ParameterPoint,
    opts: &DerivativeOptions,
) -> Result<Vec<ComplexMatrix>> {
    check_arity(family, x0)?;
    if !(opts.step > 0.0 && opts.step.is_finite()) {
        return Err(Error::InvalidArgument(format!("finite-difference step {}", opts.step)));
    }
    (0..family.dim_param())
        .map(|mu| {
            let h = opts.step * x0.coords()[mu].abs().max(1.0);
            let coarse = central(family, x0, mu, h)?;
            if !opts.richardson {
                return Ok(coarse);
            }
            let fine = central(family, x0, mu, h / 2.0)?;
            let mut out = fine.scale(4.0 / 3.0);
            out.add_scaled(-1.0 / 3.0, &coarse);
            Ok(out.hermitized())
        })
        .collect()
}

fn central(family: &dyn StateFamily, x0: &ParameterPoint, mu: usize, h: f64) -> Result<ComplexMatrix> {
    let plus = evaluate(family, &x0.shifted(mu, h))?;
    let minus = evaluate(family, &x0.shifted(mu, -h))?;
    Ok((plus.matrix() - minus.matrix()).scale(0.5 / h).hermitized())
}

fn evaluate(family: &dyn StateFamily, x: &ParameterPoint) -> Result<DensityMatrix> {
    family.state(x).map_err(|e| Error::EvaluationFailed { point: x.coords().to_vec(), reason: e.to_string() })
}

fn check_arity(family: &dyn StateFamily, x0: &ParameterPoint) -> Result<()> {
    if family.dim_param() != x0.dim() {
        return Err(Error::DimMismatch { left: family.dim_param(), right: x0.dim() });
    }
    Ok(())
}

/// Parameter derivatives of the family at `x0`: analytic when available,
/// otherwise numeric.
pub fn derivatives(
    family: &dyn StateFamily,
    x0: &ParameterPoint,
    opts: &DerivativeOptions,
) -> Result<Vec<ComplexMatrix>> {
    check_arity(family, x0)?;
    let mut out = Vec::with_capacity(family.dim_param());
    for mu in 0..family.dim_param() {
        match family.analytic_derivative(x0, mu) {
            Some(d) => {
                let d = d?;
                let defect = d.hermiticity_defect();
                if defect > 1e-10 {
                    return Err(Error::NotHermitian { defect });
                }
                let trace = d.trace().norm();
                if trace > 1e-10 {
                    return Err(Error::InvalidArgument(format!("analytic derivative {mu} has trace {trace:e}")));
                }
                out.push(d.hermitized());
            }
            None => return numeric_derivatives_with(family, x0, opts),
        }
    }
    Ok(out)
}

/// Full pipeline at one point: derivatives, SLDs, metric.
pub fn metric_at(family: &dyn StateFamily, x0: &ParameterPoint, opts: &DerivativeOptions) -> Result<FisherMetric> {
    let rho = family.state(x0)?;
    let drhos = derivatives(family, x0, opts)?;
    let slds = SldSet::compute(&rho, &drhos, Tolerances::DEFAULT.kernel_threshold)?;
    let mut g = qfm(&rho, &slds)?;
    g.point = Some(x0.clone());
    Ok(g)
}
