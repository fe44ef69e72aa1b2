use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use idflow_core::dynamics::{flow_series, FlowRecord};
use idflow_core::fisher::{idqs, metric_at, qfm as metric, DerivativeOptions, ParameterPoint, SldSet};
use idflow_core::numerics::Tolerances;
use idflow_core::operator::validate_density_with;
use idflow_core::qubit::{dissipative_flow_series, BlochFamily, BlochVector, EvolvedBlochFamily};
use idflow_core::witness::{
    detect_backflow, positive_flow_integral, rate_sign_intervals, rate_sign_intervals_from_samples, witness_agreement,
    AgreementSummary, IntervalReport,
};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::model::{evolved_state, AffineEvolution, Model};

/// Flow records of one initial Bloch vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSeries {
    pub n0: [f64; 3],
    pub records: Vec<FlowRecord>,
}

pub fn evolve(config: &ExperimentConfig, model: &Model) -> Result<Vec<PointSeries>> {
    let grid = config.times.grid();
    config
        .points
        .par_iter()
        .map(|&n0| {
            let records = match model {
                Model::Dissipative(m) => dissipative_flow_series(&BlochVector::new(n0)?, m, &grid),
                Model::Custom(me) => flow_series(me, &BlochFamily, &ParameterPoint::new(n0.to_vec())?, &grid)?,
            };
            Ok(PointSeries { n0, records })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointWitness {
    pub n0: [f64; 3],
    pub backflow: IntervalReport,
    /// Time integral of the positive part of the IDF (summary statistic).
    pub positive_flow_integral: f64,
    pub agreement: AgreementSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRun {
    pub threshold: f64,
    pub rates: Vec<IntervalReport>,
    pub points: Vec<PointWitness>,
}

pub fn witness(config: &ExperimentConfig, model: &Model, series: &[PointSeries]) -> Result<WitnessRun> {
    let grid = config.times.grid();
    let rates = match model {
        Model::Dissipative(m) => {
            let gamma: Vec<f64> = grid.iter().map(|&t| m.gamma(t).unwrap_or(f64::NAN)).collect();
            vec![rate_sign_intervals_from_samples(0, &grid, &gamma)?]
        }
        Model::Custom(me) => rate_sign_intervals(me, &grid)?,
    };
    let threshold = config.witness.threshold;
    let points = series
        .iter()
        .map(|s| {
            let backflow = detect_backflow(&s.records, threshold)?;
            let agreement = witness_agreement(&backflow, &rates);
            Ok(PointWitness {
                n0: s.n0,
                positive_flow_integral: positive_flow_integral(&s.records),
                backflow,
                agreement,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WitnessRun { threshold, rates, points })
}

/// Metric of the initial-state parameterization at one point and time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricEntry {
    pub n0: [f64; 3],
    pub t: f64,
    pub g: Option<Vec<Vec<f64>>>,
    pub eigenvalues: Option<Vec<f64>>,
    pub idqs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl MetricEntry {
    fn failed(n0: [f64; 3], t: f64, e: impl std::fmt::Display) -> Self {
        Self { n0, t, g: None, eigenvalues: None, idqs: None, error: Some(e.to_string()) }
    }

    fn from_metric(n0: [f64; 3], t: f64, g: &idflow_core::fisher::FisherMetric) -> Self {
        let rows = (0..g.dim()).map(|i| g.g.row(i).iter().copied().collect()).collect();
        match idqs(g) {
            Ok(d) => Self { n0, t, g: Some(rows), eigenvalues: Some(g.eigenvalues()), idqs: Some(d), error: None },
            Err(e) => Self {
                n0,
                t,
                g: Some(rows),
                eigenvalues: Some(g.eigenvalues()),
                idqs: None,
                error: Some(e.to_string()),
            },
        }
    }
}

/// Times `0` and every snapshot.
pub fn metric_times(config: &ExperimentConfig) -> Vec<f64> {
    let mut times = vec![0.0];
    times.extend(&config.times.snapshots);
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
}

/// Numeric metric (finite differences, SLDs, QFM) at every point and time.
pub fn metrics(config: &ExperimentConfig, model: &Model) -> Result<Vec<MetricEntry>> {
    let times = metric_times(config);
    let opts = DerivativeOptions::default();
    let evolution = match model {
        Model::Custom(me) => Some(AffineEvolution::compute(me, &times, config.times.step())?),
        Model::Dissipative(_) => None,
    };
    let mut out = Vec::with_capacity(times.len() * config.points.len());
    for &n0 in &config.points {
        for &t in &times {
            let x0 = ParameterPoint::new(n0.to_vec())?;
            let entry = match (model, &evolution) {
                (Model::Dissipative(m), _) => {
                    let family = EvolvedBlochFamily { model: *m, tau: t };
                    match metric_at(&family, &x0, &opts) {
                        Ok(g) => MetricEntry::from_metric(n0, t, &g),
                        Err(e) => MetricEntry::failed(n0, t, e),
                    }
                }
                (Model::Custom(_), Some(evo)) => {
                    let basis = evo.at(t).expect("every metric time was integrated");
                    let (rho, drhos) = evolved_state(basis, n0);
                    let computed = validate_density_with(rho, &Tolerances::TRAJECTORY).and_then(|rho| {
                        let slds = SldSet::compute(&rho, &drhos, Tolerances::DEFAULT.kernel_threshold)?;
                        metric(&rho, &slds)
                    });
                    match computed {
                        Ok(g) => MetricEntry::from_metric(n0, t, &g),
                        Err(e) => MetricEntry::failed(n0, t, e),
                    }
                }
                (Model::Custom(_), None) => unreachable!("custom models always integrate"),
            };
            out.push(entry);
        }
    }
    Ok(out)
}
