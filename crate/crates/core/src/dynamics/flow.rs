use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::fisher::{
    derivatives, idf, idqs, qfm, ridf_with, DerivativeOptions, FisherMetric, ParameterPoint, SldSet, StateFamily,
};
use crate::numerics::Tolerances;
use crate::operator::{commutator, validate_density_with, ComplexMatrix, DensityMatrix};
use crate::{Error, Result};

use super::{propagate, IntegratorOptions, MasterEquation};

/// Contribution of one unit-rate channel with jump operator `A` to `dg/dt`:
///
/// `-(1/8) Re Tr{([A, L_nu]^dag [A, L_mu] + [A, L_mu]^dag [A, L_nu]) rho}`.
///
/// Always negative semidefinite.
pub fn channel_metric_derivative(jump: &ComplexMatrix, rho: &DensityMatrix, slds: &SldSet) -> Result<DMatrix<f64>> {
    jump.check_same_dim(rho.matrix())?;
    let d = slds.len();
    let comms = slds.operators.iter().map(|l| commutator(jump, l)).collect::<Result<Vec<_>>>()?;
    let weighted: Vec<ComplexMatrix> = comms.iter().map(|c| c * rho.matrix()).collect();
    let adjoints: Vec<ComplexMatrix> = comms.iter().map(|c| c.adjoint()).collect();
    let mut out = DMatrix::zeros(d, d);
    for mu in 0..d {
        for nu in mu..d {
            let z = adjoints[nu].trace_product(&weighted[mu]) + adjoints[mu].trace_product(&weighted[nu]);
            let value = -z.re / 8.0;
            out[(mu, nu)] = value;
            out[(nu, mu)] = value;
        }
    }
    Ok(out)
}

/// Density flow carried by one channel: `(gamma/2) tr[g^-1 C] * idqs`, where
/// `C` is the unit-rate metric derivative of the channel.
pub fn sub_idf(gamma: f64, channel_derivative: &DMatrix<f64>, metric: &FisherMetric, idqs_value: f64) -> Result<f64> {
    sub_idf_with(gamma, channel_derivative, metric, idqs_value, Tolerances::DEFAULT.singular_threshold)
}

fn sub_idf_with(
    gamma: f64,
    channel_derivative: &DMatrix<f64>,
    metric: &FisherMetric,
    idqs_value: f64,
    singular_threshold: f64,
) -> Result<f64> {
    let tr = metric.trace_inverse_times(channel_derivative, singular_threshold)?;
    Ok(0.5 * gamma * tr * idqs_value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Ok,
    /// The metric is not invertible; only `idqs` is defined.
    SingularMetric,
    /// The state derivative leaves the support of the state.
    UnsupportedDerivative,
    /// The state is (numerically) pure.
    PureBoundary,
    /// A rate diverges at this time.
    Pole,
    /// An earlier record failed; nothing is extrapolated past it.
    AfterRankLoss,
}

/// Density flow quantities at one time. Undefined fields are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub t: f64,
    pub status: RecordStatus,
    pub idqs: Option<f64>,
    pub ridf: Option<f64>,
    pub idf: Option<f64>,
    pub sub_idf: Vec<Option<f64>>,
    pub gamma: Vec<Option<f64>>,
}

impl FlowRecord {
    pub fn undefined(t: f64, status: RecordStatus, gamma: Vec<Option<f64>>) -> Self {
        let channels = gamma.len();
        Self { t, status, idqs: None, ridf: None, idf: None, sub_idf: vec![None; channels], gamma }
    }

    pub fn is_ok(&self) -> bool {
        self.status == RecordStatus::Ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlowOptions {
    pub derivative: DerivativeOptions,
    pub integrator: IntegratorOptions,
}

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Flow record for a state and its parameter derivatives at time `t`.
///
/// Geometric failures (singular metric, unsupported derivative) produce a
/// flagged record. A mismatch between the IDF and the sum over channels is an
/// error.
pub fn flow_record(me: &MasterEquation, t: f64, rho: &ComplexMatrix, drhos: &[ComplexMatrix]) -> Result<FlowRecord> {
    let tol = Tolerances::TRAJECTORY;
    let gamma: Vec<Option<f64>> = me.rates_at(t).into_iter().map(finite_or_none).collect();
    if gamma.iter().any(Option::is_none) {
        return Ok(FlowRecord::undefined(t, RecordStatus::Pole, gamma));
    }
    let generator = me.generator_at(t)?;
    let rho = validate_density_with(rho.clone(), &tol)?;
    let slds = match SldSet::compute(&rho, drhos, tol.kernel_threshold) {
        Ok(s) => s,
        Err(Error::UnsupportedDerivative { .. }) => {
            return Ok(FlowRecord::undefined(t, RecordStatus::UnsupportedDerivative, gamma));
        }
        Err(e) => return Err(e),
    };
    let metric = qfm(&rho, &slds)?;
    let d = match idqs(&metric) {
        Ok(d) => d,
        Err(Error::NegativeDeterminant { .. }) => {
            return Ok(FlowRecord::undefined(t, RecordStatus::SingularMetric, gamma));
        }
        Err(e) => return Err(e),
    };
    let drho_dt = generator.apply(rho.matrix())?;
    let d_drho_dt = drhos.iter().map(|m| generator.apply(m)).collect::<Result<Vec<_>>>()?;
    let r = match ridf_with(&rho, &drho_dt, &slds, &d_drho_dt, &metric, tol.singular_threshold) {
        Ok(r) => r,
        Err(Error::SingularMetric { .. }) => {
            let mut rec = FlowRecord::undefined(t, RecordStatus::SingularMetric, gamma);
            rec.idqs = Some(d);
            return Ok(rec);
        }
        Err(e) => return Err(e),
    };
    let total = idf(r, d);
    let mut subs = Vec::with_capacity(me.channels().len());
    let mut sum = 0.0;
    let mut scale = total.abs().max(1.0);
    for (channel, g) in me.channels().iter().zip(&gamma) {
        let c = channel_metric_derivative(&channel.jump, &rho, &slds)?;
        let s = sub_idf_with(g.unwrap_or(0.0), &c, &metric, d, tol.singular_threshold)?;
        sum += s;
        scale = scale.max(s.abs());
        subs.push(Some(s));
    }
    if (total - sum).abs() > 1e-8 * scale {
        return Err(Error::DecompositionMismatch { t, idf: total, sum });
    }
    Ok(FlowRecord { t, status: RecordStatus::Ok, idqs: Some(d), ridf: Some(r), idf: Some(total), sub_idf: subs, gamma })
}

/// Flow records along the evolution of `family` at `x0`.
///
/// The state and its parameter derivatives are integrated together. After
/// the first record that is not `Ok`, later records are flagged
/// `AfterRankLoss`.
pub fn flow_series(
    me: &MasterEquation,
    family: &dyn StateFamily,
    x0: &ParameterPoint,
    grid: &[f64],
) -> Result<Vec<FlowRecord>> {
    flow_series_with(me, family, x0, grid, &FlowOptions::default())
}

pub fn flow_series_with(
    me: &MasterEquation,
    family: &dyn StateFamily,
    x0: &ParameterPoint,
    grid: &[f64],
    opts: &FlowOptions,
) -> Result<Vec<FlowRecord>> {
    let rho0 = family.state(x0)?;
    let drhos = derivatives(family, x0, &opts.derivative)?;
    let mut bundle = Vec::with_capacity(drhos.len() + 1);
    bundle.push(rho0.into_matrix());
    bundle.extend(drhos);

    let mut records = Vec::with_capacity(grid.len());
    let mut failed = false;
    propagate(me, &bundle, grid, &opts.integrator, |_, t, ys| {
        let rec = if failed {
            let gamma = me.rates_at(t).into_iter().map(finite_or_none).collect();
            FlowRecord::undefined(t, RecordStatus::AfterRankLoss, gamma)
        } else {
            flow_record(me, t, &ys[0], &ys[1..])?
        };
        failed |= !rec.is_ok();
        records.push(rec);
        Ok(())
    })?;
    Ok(records)
}
