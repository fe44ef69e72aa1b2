use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use idflow_core::dynamics::{flow_record, MasterEquation, RecordStatus};
use idflow_core::operator::ComplexMatrix;
use idflow_core::qubit::{bloch_idqs, bloch_motion, dissip_idqs, dissip_ridf, BlochVector, DissipativeModel};
use nalgebra::{Matrix3, Vector3};

use crate::config::{ExperimentConfig, FieldKind, Panel, BOUNDARY_RADIUS};
use crate::error::Result;
use crate::model::{bloch_vector, evolved_state, AffineEvolution, Model};

/// `|h|` below this counts as a pole of the rate.
const POLE_H: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mask {
    /// The cell (or its image) is at or beyond the pure-state radius.
    Boundary,
    /// A rate diverges at this time.
    Pole,
    /// The quantity is not defined here (singular metric, outside the image).
    Undefined,
}

impl Mask {
    pub fn name(self) -> &'static str {
        match self {
            Mask::Boundary => "boundary",
            Mask::Pole => "pole",
            Mask::Undefined => "undefined",
        }
    }
}

type Cell = std::result::Result<f64, Mask>;

/// One scalar field on the sampling plane at one time. Cells are stored row
/// by row: row `j` has the second-axis coordinate `axis2[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldFrame {
    pub field: FieldKind,
    pub t: f64,
    pub axes: [String; 2],
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    pub values: Vec<Option<f64>>,
    pub masks: Vec<Option<Mask>>,
}

impl FieldFrame {
    pub fn cols(&self) -> usize {
        self.axis1.len()
    }

    pub fn rows(&self) -> usize {
        self.axis2.len()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.cols() + i
    }

    /// Value at column `i`, row `j`.
    pub fn value(&self, i: usize, j: usize) -> Option<f64> {
        self.values[self.index(i, j)]
    }

    pub fn mask(&self, i: usize, j: usize) -> Option<Mask> {
        self.masks[self.index(i, j)]
    }

    pub fn unmasked(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied()
    }
}

fn norm(n: [f64; 3]) -> f64 {
    n.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dissipative_cell(model: &DissipativeModel, kind: FieldKind, t: f64, n: [f64; 3]) -> Cell {
    let h = model.h(t);
    if kind == FieldKind::Gamma {
        return model.gamma(t).map_err(|_| Mask::Pole);
    }
    if norm(n) >= BOUNDARY_RADIUS {
        return Err(Mask::Boundary);
    }
    if h.abs() < POLE_H {
        return Err(Mask::Pole);
    }
    if kind == FieldKind::StateIdqs {
        let n0 = [n[0] / h, n[1] / h, (n[2] + 1.0) / (h * h) - 1.0];
        let r0 = norm(n0);
        if r0 > 1.0 {
            return Err(Mask::Undefined);
        }
        if r0 >= BOUNDARY_RADIUS {
            return Err(Mask::Boundary);
        }
        let v = BlochVector::new(n).map_err(|_| Mask::Boundary)?;
        return bloch_idqs(&v).map_err(|_| Mask::Boundary);
    }
    let n0 = BlochVector::new(n).map_err(|_| Mask::Boundary)?;
    if bloch_motion(&n0, model, t).norm() >= BOUNDARY_RADIUS {
        return Err(Mask::Boundary);
    }
    let idqs = || dissip_idqs(&n0, model, t).map_err(|_| Mask::Boundary);
    let ridf = || {
        dissip_ridf(&n0, model, t).map_err(|e| match e {
            idflow_core::Error::Pole { .. } => Mask::Pole,
            _ => Mask::Boundary,
        })
    };
    match kind {
        FieldKind::Idqs => idqs(),
        FieldKind::Ridf => ridf(),
        FieldKind::Idf => Ok(ridf()? * idqs()?),
        FieldKind::StateIdqs | FieldKind::Gamma => unreachable!("handled above"),
    }
}

/// Affine map `n0 -> c + M n0` of Bloch vectors induced by an evolved basis.
fn affine_map(basis: &[ComplexMatrix; 4]) -> (Vector3<f64>, Matrix3<f64>) {
    let c = Vector3::from(bloch_vector(&basis[0]));
    let cols: Vec<Vector3<f64>> = basis[1..].iter().map(|b| Vector3::from(bloch_vector(b))).collect();
    (c, Matrix3::from_columns(&cols))
}

fn custom_cell(me: &MasterEquation, basis: &[ComplexMatrix; 4], kind: FieldKind, t: f64, n: [f64; 3]) -> Cell {
    if kind == FieldKind::Gamma {
        let rate = me.rates_at(t).first().copied().ok_or(Mask::Undefined)?;
        return if rate.is_finite() { Ok(rate) } else { Err(Mask::Pole) };
    }
    if norm(n) >= BOUNDARY_RADIUS {
        return Err(Mask::Boundary);
    }
    if kind == FieldKind::StateIdqs {
        let (c, m) = affine_map(basis);
        let inv = m.try_inverse().ok_or(Mask::Undefined)?;
        let n0 = inv * (Vector3::from(n) - c);
        if n0.norm() > 1.0 {
            return Err(Mask::Undefined);
        }
        if n0.norm() >= BOUNDARY_RADIUS {
            return Err(Mask::Boundary);
        }
        let v = BlochVector::new(n).map_err(|_| Mask::Boundary)?;
        return bloch_idqs(&v).map_err(|_| Mask::Boundary);
    }
    let (rho, drhos) = evolved_state(basis, n);
    if norm(bloch_vector(&rho)) >= BOUNDARY_RADIUS {
        return Err(Mask::Boundary);
    }
    let rec = flow_record(me, t, &rho, &drhos).map_err(|_| Mask::Undefined)?;
    match rec.status {
        RecordStatus::Ok => {}
        RecordStatus::Pole => return Err(Mask::Pole),
        RecordStatus::PureBoundary => return Err(Mask::Boundary),
        _ => {
            return match (kind, rec.idqs) {
                (FieldKind::Idqs, Some(d)) => Ok(d),
                _ => Err(Mask::Undefined),
            }
        }
    }
    let value = match kind {
        FieldKind::Idqs => rec.idqs,
        FieldKind::Idf => rec.idf,
        FieldKind::Ridf => rec.ridf,
        FieldKind::StateIdqs | FieldKind::Gamma => unreachable!("handled above"),
    };
    value.ok_or(Mask::Undefined)
}

/// Samples the requested panels. Cells are evaluated in parallel; the output
/// does not depend on the schedule.
pub struct FieldSampler<'a> {
    config: &'a ExperimentConfig,
    model: Model,
    evolution: Option<AffineEvolution>,
}

impl<'a> FieldSampler<'a> {
    pub fn new(config: &'a ExperimentConfig, times: &[f64]) -> Result<Self> {
        let model = Model::from_config(config)?;
        let evolution = match &model {
            Model::Dissipative(_) => None,
            Model::Custom(me) => Some(AffineEvolution::compute(me, times, config.times.step())?),
        };
        Ok(Self { config, model, evolution })
    }

    pub fn frame(&self, kind: FieldKind, t: f64) -> Result<FieldFrame> {
        let grid = &self.config.grid;
        let axis1 = grid.axis1();
        let axis2 = grid.axis2();
        let basis = match (&self.model, &self.evolution) {
            (Model::Custom(_), Some(evo)) => Some(match evo.at(t) {
                Some(b) => b.clone(),
                None => AffineEvolution::compute(self.custom(), &[t], self.config.times.step())?.basis[0].clone(),
            }),
            _ => None,
        };
        let cells: Vec<Cell> = (0..axis1.len() * axis2.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k % axis1.len(), k / axis1.len());
                let n = grid.point(axis1[i], axis2[j]);
                match &self.model {
                    Model::Dissipative(m) => dissipative_cell(m, kind, t, n),
                    Model::Custom(me) => custom_cell(me, basis.as_ref().expect("custom basis"), kind, t, n),
                }
            })
            .collect();
        Ok(FieldFrame {
            field: kind,
            t,
            axes: [grid.axes[0].label().to_string(), grid.axes[1].label().to_string()],
            axis1,
            axis2,
            values: cells.iter().map(|c| c.ok()).collect(),
            masks: cells.iter().map(|c| c.err()).collect(),
        })
    }

    fn custom(&self) -> &MasterEquation {
        match &self.model {
            Model::Custom(me) => me,
            Model::Dissipative(_) => unreachable!("only custom models carry an evolution"),
        }
    }

    pub fn panels(&self, panels: &[Panel]) -> Result<Vec<FieldFrame>> {
        panels.iter().map(|p| self.frame(p.field, p.t)).collect()
    }
}

/// One frame of `kind` at `t`.
pub fn sample_field(config: &ExperimentConfig, kind: FieldKind, t: f64) -> Result<FieldFrame> {
    FieldSampler::new(config, &[t])?.frame(kind, t)
}
