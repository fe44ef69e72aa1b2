use crate::numerics::{Tolerances, DEFAULT_STEP_TOLERANCE};
use crate::operator::{validate_density_with, ComplexMatrix, DensityMatrix};
use crate::{Error, Result};

use super::{Generator, MasterEquation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    /// Largest accepted relative gap between one RK4 step and two half steps.
    pub step_tolerance: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { step_tolerance: DEFAULT_STEP_TOLERANCE }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::GridTooShort { len: 0, needed: 1 });
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite);
    }
    if let Some(i) = grid.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::GridNotAscending { index: i + 1 });
    }
    Ok(())
}

fn apply_all(g: &Generator, ys: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
    ys.iter().map(|y| g.apply(y)).collect()
}

fn offset(ys: &[ComplexMatrix], ks: &[ComplexMatrix], h: f64) -> Vec<ComplexMatrix> {
    ys.iter()
        .zip(ks)
        .map(|(y, k)| {
            let mut out = y.clone();
            out.add_scaled(h, k);
            out
        })
        .collect()
}

fn rk4_step(
    ys: &[ComplexMatrix],
    h: f64,
    g0: &Generator,
    g_mid: &Generator,
    g1: &Generator,
) -> Result<Vec<ComplexMatrix>> {
    let k1 = apply_all(g0, ys)?;
    let k2 = apply_all(g_mid, &offset(ys, &k1, 0.5 * h))?;
    let k3 = apply_all(g_mid, &offset(ys, &k2, 0.5 * h))?;
    let k4 = apply_all(g1, &offset(ys, &k3, h))?;
    let mut out = ys.to_vec();
    for (i, y) in out.iter_mut().enumerate() {
        y.add_scaled(h / 6.0, &k1[i]);
        y.add_scaled(h / 3.0, &k2[i]);
        y.add_scaled(h / 3.0, &k3[i]);
        y.add_scaled(h / 6.0, &k4[i]);
    }
    Ok(out)
}

/// Integrates a bundle of matrices (a state and any of its parameter
/// derivatives) under the same generator, calling `visit` at every grid time,
/// the first included.
///
/// Each interval is covered by one RK4 step and by two half steps; the half
/// step result is kept and the gap between the two is the error estimate.
pub fn propagate(
    me: &MasterEquation,
    initial: &[ComplexMatrix],
    grid: &[f64],
    opts: &IntegratorOptions,
    mut visit: impl FnMut(usize, f64, &[ComplexMatrix]) -> Result<()>,
) -> Result<()> {
    check_grid(grid)?;
    for m in initial {
        if m.dim() != me.dim() {
            return Err(Error::DimMismatch { left: me.dim(), right: m.dim() });
        }
    }
    let mut ys = initial.to_vec();
    visit(0, grid[0], &ys)?;
    let mut g_start = me.generator_at(grid[0])?;
    for (k, w) in grid.windows(2).enumerate() {
        let (t0, t1) = (w[0], w[1]);
        let h = t1 - t0;
        let g_q1 = me.generator_at(t0 + 0.25 * h)?;
        let g_mid = me.generator_at(t0 + 0.5 * h)?;
        let g_q3 = me.generator_at(t0 + 0.75 * h)?;
        let g_end = me.generator_at(t1)?;

        let full = rk4_step(&ys, h, &g_start, &g_mid, &g_end)?;
        let half = rk4_step(&ys, 0.5 * h, &g_start, &g_q1, &g_mid)?;
        let half = rk4_step(&half, 0.5 * h, &g_mid, &g_q3, &g_end)?;

        let mut estimate = 0.0f64;
        for (a, b) in full.iter().zip(&half) {
            let gap = (a - b).max_abs() / b.max_abs().max(1.0);
            estimate = estimate.max(gap);
        }
        if !estimate.is_finite() || estimate > opts.step_tolerance {
            return Err(Error::StepTooLarge { t: t0, estimate });
        }
        ys = half.iter().map(|m| m.hermitized()).collect();
        visit(k + 1, t1, &ys)?;
        g_start = g_end;
    }
    Ok(())
}

/// Evolves `rho0` over `grid`, validating every state with the trajectory
/// tolerances.
pub fn integrate(me: &MasterEquation, rho0: &DensityMatrix, grid: &[f64]) -> Result<Trajectory> {
    integrate_with(me, rho0, grid, &IntegratorOptions::default())
}

pub fn integrate_with(
    me: &MasterEquation,
    rho0: &DensityMatrix,
    grid: &[f64],
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(grid.len());
    propagate(me, std::slice::from_ref(rho0.matrix()), grid, opts, |_, _, ys| {
        states.push(validate_density_with(ys[0].clone(), &Tolerances::TRAJECTORY)?);
        Ok(())
    })?;
    Ok(Trajectory { times: grid.to_vec(), states })
}
