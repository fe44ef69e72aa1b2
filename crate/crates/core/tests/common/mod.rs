#![allow(dead_code)]

use idflow_core::families::FactoredFamily;
use idflow_core::operator::{validate_density, ComplexMatrix, DensityMatrix};
use idflow_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_matrix(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn hermitian(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    complex_matrix(rng, dim).hermitized()
}

/// Full-rank state with smallest eigenvalue bounded away from zero.
pub fn density(rng: &mut impl Rng, dim: usize) -> DensityMatrix {
    let m = complex_matrix(rng, dim);
    let mut p = &m * &m.adjoint();
    p.add_scaled(0.05, &ComplexMatrix::identity(dim));
    let tr = p.trace().re;
    validate_density(p.hermitized().scale(1.0 / tr)).unwrap()
}

/// Random factored family of `params` parameters, full rank near the origin.
pub fn family(rng: &mut impl Rng, dim: usize, params: usize) -> FactoredFamily {
    let mut base = complex_matrix(rng, dim);
    base.add_scaled(2.0, &ComplexMatrix::identity(dim));
    let dirs = (0..params).map(|_| complex_matrix(rng, dim).scale(0.5)).collect();
    FactoredFamily::new(base, dirs).unwrap()
}

pub fn grid(t_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| t_max * k as f64 / steps as f64).collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
