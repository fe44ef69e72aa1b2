use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ComplexMatrix;
use crate::{Error, Result};

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues ascend. Each eigenvector column has its first non-negligible
/// component real and positive; columns sharing an eigenvalue are ordered
/// lexicographically (descending) by their components.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    /// `V diag(f(p)) V^dag`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let v = self.eigenvectors.as_inner();
        let n = v.nrows();
        let mut scaled = v.clone();
        for (j, &p) in self.eigenvalues.iter().enumerate() {
            let fp = f(p);
            for i in 0..n {
                scaled[(i, j)] *= fp;
            }
        }
        ComplexMatrix::try_from(scaled * v.adjoint()).expect("spectral map stays square")
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_eigenvalues(|p| Complex64::new(p, 0.0))
    }

    /// Rotates `m` into the eigenbasis: `V^dag m V`.
    pub fn to_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let v = self.eigenvectors.as_inner();
        ComplexMatrix::try_from(v.adjoint() * m.as_inner() * v).expect("square")
    }

    /// Rotates `m` back from the eigenbasis: `V m V^dag`.
    pub fn from_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let v = self.eigenvectors.as_inner();
        ComplexMatrix::try_from(v * m.as_inner() * v.adjoint()).expect("square")
    }
}

const PHASE_EPS: f64 = 1e-12;

/// Eigendecomposition of a Hermitian matrix with deterministic ordering.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<Spectrum> {
    let scale = m.max_abs().max(1.0);
    let defect = m.hermiticity_defect();
    if defect > 1e-12 * scale {
        return Err(Error::NotHermitian { defect });
    }
    let eig = m.hermitized().into_inner().symmetric_eigen();
    let n = m.dim();

    let mut columns: Vec<(f64, Vec<Complex64>)> = (0..n)
        .map(|j| {
            let mut col: Vec<Complex64> = eig.eigenvectors.column(j).iter().copied().collect();
            fix_phase(&mut col);
            (eig.eigenvalues[j], col)
        })
        .collect();

    let tie = 1e-12 * scale;
    columns.sort_by(|a, b| if (a.0 - b.0).abs() <= tie { lexicographic_desc(&a.1, &b.1) } else { a.0.total_cmp(&b.0) });

    let eigenvalues = columns.iter().map(|c| c.0).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| columns[j].1[i]);
    Ok(Spectrum { eigenvalues, eigenvectors: ComplexMatrix::try_from(vectors)? })
}

fn fix_phase(col: &mut [Complex64]) {
    if let Some(lead) = col.iter().copied().find(|z| z.norm() > PHASE_EPS) {
        let phase = lead.conj() / lead.norm();
        col.iter_mut().for_each(|z| *z *= phase);
    }
}

fn lexicographic_desc(a: &[Complex64], b: &[Complex64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        for (u, v) in [(x.re, y.re), (x.im, y.im)] {
            if (u - v).abs() > PHASE_EPS {
                return v.total_cmp(&u);
            }
        }
    }
    Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::pauli;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sigma_z_spectrum() {
        let [_, _, z] = pauli();
        let s = hermitian_eig(&z).unwrap();
        assert_eq!(s.eigenvalues, vec![-1.0, 1.0]);
    }

    #[test]
    fn sigma_x_eigenvectors_are_phase_fixed() {
        let [x, _, _] = pauli();
        let s = hermitian_eig(&x).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.eigenvalues[1], 1.0, epsilon = 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v = &s.eigenvectors;
        // (|0> - |1>)/sqrt2 then (|0> + |1>)/sqrt2
        assert_abs_diff_eq!(v[(0, 0)].re, r, epsilon = 1e-14);
        assert_abs_diff_eq!(v[(1, 0)].re, -r, epsilon = 1e-14);
        assert_abs_diff_eq!(v[(0, 1)].re, r, epsilon = 1e-14);
        assert_abs_diff_eq!(v[(1, 1)].re, r, epsilon = 1e-14);
        assert!(v.as_inner().iter().all(|z| z.im.abs() < 1e-14));
    }

    #[test]
    fn diagonal_spectrum() {
        let s = hermitian_eig(&ComplexMatrix::from_real_diagonal(&[0.9, 0.1])).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(s.eigenvalues[1], 0.9, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_spectrum_gives_identity_basis() {
        let s = hermitian_eig(&ComplexMatrix::identity(3).scale(0.5)).unwrap();
        assert!((&s.eigenvectors - &ComplexMatrix::identity(3)).max_abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
    }
}
