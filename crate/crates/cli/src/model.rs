use idflow_core::dynamics::{propagate, Channel, Hamiltonian, IntegratorOptions, MasterEquation, Rate};
use idflow_core::operator::ComplexMatrix;
use idflow_core::qubit::{dissipative_master_equation, pauli, DissipativeModel};
use idflow_core::Complex64;

use crate::config::{ExperimentConfig, MatrixSpec, ModelSpec, RateSpec};
use crate::error::{CliError, Result};

/// The dynamics a run is about.
#[derive(Debug, Clone)]
pub enum Model {
    /// Evaluated through closed forms, in dimensionless time `lambda t`.
    Dissipative(DissipativeModel),
    /// Evaluated through the integrated geometry pipeline.
    Custom(MasterEquation),
}

fn matrix(spec: &MatrixSpec) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<Complex64>> =
        spec.0.iter().map(|row| row.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()).collect();
    Ok(ComplexMatrix::from_rows(&rows)?)
}

fn rate(spec: &RateSpec) -> Result<Rate> {
    Ok(match spec.clone() {
        RateSpec::Constant(g) => Rate::Constant(g),
        RateSpec::Exponential { amplitude, decay } => Rate::function(move |t| amplitude * (-decay * t).exp()),
        RateSpec::Cosine { offset, amplitude, omega, phase } => {
            Rate::function(move |t| offset + amplitude * (omega * t + phase).cos())
        }
        RateSpec::Dissipative { lambda, coupling } => {
            let model = DissipativeModel::new(lambda, coupling)?;
            dissipative_master_equation(&model).channels()[0].rate.clone()
        }
        RateSpec::Table { t, gamma } => Rate::function(move |x| interpolate(&t, &gamma, x)),
    })
}

fn interpolate(t: &[f64], y: &[f64], x: f64) -> f64 {
    let last = t.len() - 1;
    if x <= t[0] {
        return y[0];
    }
    if x >= t[last] {
        return y[last];
    }
    let k = t.partition_point(|&s| s <= x) - 1;
    let w = (x - t[k]) / (t[k + 1] - t[k]);
    y[k] + w * (y[k + 1] - y[k])
}

impl Model {
    pub fn from_config(config: &ExperimentConfig) -> Result<Self> {
        match &config.model {
            ModelSpec::Dissipative(d) => Ok(Model::Dissipative(DissipativeModel::new(d.lambda, d.coupling)?)),
            ModelSpec::Custom(c) => {
                let h = match &c.hamiltonian {
                    Some(h) => matrix(h)?,
                    None => ComplexMatrix::zeros(2),
                };
                let channels = c
                    .channels
                    .iter()
                    .map(|ch| Ok(Channel::new(matrix(&ch.jump)?, rate(&ch.rate)?)))
                    .collect::<Result<Vec<_>>>()?;
                let me = MasterEquation::new(Hamiltonian::Constant(h), channels)
                    .map_err(|e| CliError::Range(format!("model.custom: {e}")))?;
                Ok(Model::Custom(me))
            }
        }
    }

    pub fn channels(&self) -> usize {
        match self {
            Model::Dissipative(_) => 1,
            Model::Custom(me) => me.channels().len(),
        }
    }
}

/// Images of `I/2` and `sigma_mu/2` under the evolution up to each requested
/// time. Since `rho(n0) = I/2 + sum n0_mu sigma_mu/2`, these give every state
/// of the Bloch family and its parameter derivatives.
#[derive(Debug, Clone)]
pub struct AffineEvolution {
    pub times: Vec<f64>,
    pub basis: Vec<[ComplexMatrix; 4]>,
}

impl AffineEvolution {
    /// Integrates on a uniform grid of spacing `step`, refined so that every
    /// requested time is a grid point.
    pub fn compute(me: &MasterEquation, times: &[f64], step: f64) -> Result<Self> {
        let mut wanted: Vec<f64> = times.to_vec();
        wanted.sort_by(f64::total_cmp);
        wanted.dedup();
        let t_end = wanted.last().copied().unwrap_or(0.0);
        let n = (t_end / step).ceil() as usize;
        let mut grid: Vec<f64> = (0..=n).map(|k| (k as f64 * step).min(t_end)).collect();
        grid.extend(&wanted);
        grid.push(0.0);
        grid.sort_by(f64::total_cmp);
        grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * step);

        let [x, y, z] = pauli();
        let initial = [ComplexMatrix::identity(2), x, y, z].map(|m| m.scale(0.5));
        let mut basis = Vec::with_capacity(wanted.len());
        let mut next = 0;
        propagate(me, &initial, &grid, &IntegratorOptions::default(), |_, t, ys| {
            while next < wanted.len() && (wanted[next] - t).abs() <= 1e-12 * step.max(1.0) {
                basis.push([ys[0].clone(), ys[1].clone(), ys[2].clone(), ys[3].clone()]);
                next += 1;
            }
            Ok(())
        })?;
        Ok(Self { times: wanted, basis })
    }

    pub fn at(&self, t: f64) -> Option<&[ComplexMatrix; 4]> {
        self.times.iter().position(|&s| s == t).map(|i| &self.basis[i])
    }
}

/// `rho(n0)` and its derivatives from an evolved basis.
pub fn evolved_state(basis: &[ComplexMatrix; 4], n0: [f64; 3]) -> (ComplexMatrix, Vec<ComplexMatrix>) {
    let mut rho = basis[0].clone();
    for (c, b) in n0.iter().zip(&basis[1..]) {
        rho.add_scaled(*c, b);
    }
    (rho, basis[1..].to_vec())
}

/// Bloch vector `Tr(rho sigma_k)`.
pub fn bloch_vector(rho: &ComplexMatrix) -> [f64; 3] {
    pauli().map(|s| rho.trace_product(&s).re)
}
