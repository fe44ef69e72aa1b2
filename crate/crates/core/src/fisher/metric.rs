use nalgebra::{DMatrix, SymmetricEigen};

use crate::numerics::Tolerances;
use crate::operator::{ComplexMatrix, DensityMatrix};
use crate::{Error, Result};

use super::{ParameterPoint, SldSet};

/// Real symmetric positive-semidefinite metric `g` on parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMetric {
    pub g: DMatrix<f64>,
    pub point: Option<ParameterPoint>,
}

impl FisherMetric {
    /// Accepts `g` if square, finite and symmetric to `1e-10`; symmetrizes.
    pub fn new(g: DMatrix<f64>) -> Result<Self> {
        if g.nrows() != g.ncols() || g.nrows() == 0 {
            return Err(Error::NotSquare { rows: g.nrows(), cols: g.ncols() });
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let asym = (&g - g.transpose()).amax();
        if asym > 1e-10 * g.amax().max(1.0) {
            return Err(Error::InvalidArgument(format!("metric asymmetric by {asym:e}")));
        }
        Ok(Self { g: (&g + g.transpose()) * 0.5, point: None })
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// QFI matrix, `4 g`.
    pub fn qfi(&self) -> DMatrix<f64> {
        &self.g * 4.0
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.g.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `ln det g`, summed over eigenvalues. `-inf` when singular.
    pub fn log_det(&self) -> Result<f64> {
        let ev = self.checked_eigenvalues()?;
        Ok(ev.iter().map(|p| p.ln()).sum())
    }

    /// `g^-1` by eigendecomposition; refuses when an eigenvalue is at or
    /// below `singular_threshold`.
    pub fn inverse(&self, singular_threshold: f64) -> Result<DMatrix<f64>> {
        let eig = self.invertible_eigen(singular_threshold)?;
        let inv = DMatrix::from_diagonal(&eig.eigenvalues.map(|p| 1.0 / p));
        Ok(&eig.eigenvectors * inv * eig.eigenvectors.transpose())
    }

    /// `tr[g^-1 m]` for symmetric `m`.
    pub fn trace_inverse_times(&self, m: &DMatrix<f64>, singular_threshold: f64) -> Result<f64> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(Error::DimMismatch { left: self.dim(), right: m.nrows() });
        }
        let eig = self.invertible_eigen(singular_threshold)?;
        let o = &eig.eigenvectors;
        let rotated = o.transpose() * m * o;
        Ok((0..self.dim()).map(|k| rotated[(k, k)] / eig.eigenvalues[k]).sum())
    }

    fn invertible_eigen(&self, singular_threshold: f64) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
        let eig = self.g.clone().symmetric_eigen();
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min <= singular_threshold {
            return Err(Error::SingularMetric { min_eigenvalue: min });
        }
        Ok(eig)
    }

    /// Eigenvalues clamped at zero; fails below the PSD floor.
    fn checked_eigenvalues(&self) -> Result<Vec<f64>> {
        let floor = Tolerances::DEFAULT.psd_floor;
        let ev = self.eigenvalues();
        if ev[0] < -floor {
            return Err(Error::NegativeDeterminant { eigenvalue: ev[0] });
        }
        Ok(ev.into_iter().map(|p| p.max(0.0)).collect())
    }
}

/// `g_{mu nu} = (1/8) Re Tr[{L_mu, L_nu} rho]`.
pub fn qfm(rho: &DensityMatrix, slds: &SldSet) -> Result<FisherMetric> {
    let d = slds.len();
    if d == 0 {
        return Err(Error::InvalidArgument("empty SLD set".into()));
    }
    let residue_tol = Tolerances::DEFAULT.imaginary_residue;
    let rho_l: Vec<ComplexMatrix> = slds
        .operators
        .iter()
        .map(|l| {
            l.check_same_dim(rho.matrix())?;
            Ok(rho.matrix() * l)
        })
        .collect::<Result<_>>()?;
    let mut g = DMatrix::zeros(d, d);
    for mu in 0..d {
        for nu in mu..d {
            // Tr[L_mu L_nu rho] + Tr[L_nu L_mu rho]
            let z = slds.operators[nu].trace_product(&rho_l[mu]) + slds.operators[mu].trace_product(&rho_l[nu]);
            let value = z.re / 8.0;
            let residue = z.im.abs() / 8.0;
            if residue > residue_tol * value.abs().max(1.0) {
                return Err(Error::ImaginaryResidue { row: mu, col: nu, residue });
            }
            g[(mu, nu)] = value;
            g[(nu, mu)] = value;
        }
    }
    Ok(FisherMetric { g, point: None })
}

/// IDQS, `sqrt(det g)`, computed from the eigenvalues in log space.
/// Eigenvalues in `[-1e-9, 0)` count as zero.
pub fn idqs(metric: &FisherMetric) -> Result<f64> {
    let ev = metric.checked_eigenvalues()?;
    if ev.contains(&0.0) {
        return Ok(0.0);
    }
    Ok((0.5 * ev.iter().map(|p| p.ln()).sum::<f64>()).exp())
}

/// Time derivative of the metric from the SLDs:
///
/// `dg_{mu nu}/dt = (1/8) Re Tr[2 L_nu d_mu(rho') + 2 L_mu d_nu(rho') - {L_mu, L_nu} rho']`
///
/// where `rho' = d rho / dt` and `d_mu(rho')` is its parameter derivative.
pub fn metric_rate(drho_dt: &ComplexMatrix, slds: &SldSet, d_drho_dt: &[ComplexMatrix]) -> Result<DMatrix<f64>> {
    let d = slds.len();
    if d_drho_dt.len() != d {
        return Err(Error::DimMismatch { left: d, right: d_drho_dt.len() });
    }
    for (l, dd) in slds.operators.iter().zip(d_drho_dt) {
        l.check_same_dim(drho_dt)?;
        l.check_same_dim(dd)?;
    }
    let l_rate: Vec<ComplexMatrix> = slds.operators.iter().map(|l| l * drho_dt).collect();
    let mut out = DMatrix::zeros(d, d);
    for mu in 0..d {
        for nu in mu..d {
            let l_mu = &slds.operators[mu];
            let l_nu = &slds.operators[nu];
            let z = l_nu.trace_product(&d_drho_dt[mu]) * 2.0 + l_mu.trace_product(&d_drho_dt[nu]) * 2.0
                - l_mu.trace_product(&l_rate[nu])
                - l_nu.trace_product(&l_rate[mu]);
            let value = z.re / 8.0;
            out[(mu, nu)] = value;
            out[(nu, mu)] = value;
        }
    }
    Ok(out)
}

/// RIDF, `1/2 tr[g^-1 dg/dt]`, with the default singular threshold.
pub fn ridf(
    rho: &DensityMatrix,
    drho_dt: &ComplexMatrix,
    slds: &SldSet,
    d_drho_dt: &[ComplexMatrix],
    metric: &FisherMetric,
) -> Result<f64> {
    ridf_with(rho, drho_dt, slds, d_drho_dt, metric, Tolerances::DEFAULT.singular_threshold)
}

pub fn ridf_with(
    rho: &DensityMatrix,
    drho_dt: &ComplexMatrix,
    slds: &SldSet,
    d_drho_dt: &[ComplexMatrix],
    metric: &FisherMetric,
    singular_threshold: f64,
) -> Result<f64> {
    rho.matrix().check_same_dim(drho_dt)?;
    let rate = metric_rate(drho_dt, slds, d_drho_dt)?;
    Ok(0.5 * metric.trace_inverse_times(&rate, singular_threshold)?)
}

/// IDF from its relative form: `ridf * idqs`.
pub fn idf(ridf_value: f64, idqs_value: f64) -> f64 {
    ridf_value * idqs_value
}

/// Single-parameter information flow `dF/dt` along a fixed tangent, where
/// `F(t) = 4 x'^T g(t) x'`. Central differences inside the series and
/// second-order one-sided differences at the two ends.
pub fn qfif_single(metric_series: &[FisherMetric], curve_tangent: &[f64], dt: f64) -> Result<Vec<f64>> {
    let n = metric_series.len();
    if n < 3 {
        return Err(Error::GridTooShort { len: n, needed: 3 });
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step {dt}")));
    }
    let tangent = nalgebra::DVector::from_column_slice(curve_tangent);
    let qfi: Vec<f64> = metric_series
        .iter()
        .map(|m| {
            if m.dim() != tangent.len() {
                return Err(Error::DimMismatch { left: m.dim(), right: tangent.len() });
            }
            Ok(4.0 * tangent.dot(&(&m.g * &tangent)))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(n);
    out.push((-3.0 * qfi[0] + 4.0 * qfi[1] - qfi[2]) / (2.0 * dt));
    for k in 1..n - 1 {
        out.push((qfi[k + 1] - qfi[k - 1]) / (2.0 * dt));
    }
    out.push((3.0 * qfi[n - 1] - 4.0 * qfi[n - 2] + qfi[n - 3]) / (2.0 * dt));
    Ok(out)
}
