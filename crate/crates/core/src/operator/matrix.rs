use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Square complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    /// Builds a matrix from rows. Fails unless the rows form a square, finite
    /// array.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::NotSquare { rows: 0, cols: 0 });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare { rows: n, cols: bad.len() });
        }
        Self::try_from(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Real-valued rows; convenient for tests and literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> =
            rows.iter().map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { Complex64::new(0.0, 0.0) })
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Max entrywise magnitude.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max entrywise `|m - m^dag|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut defect: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                defect = defect.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        defect
    }

    /// `(m + m^dag) / 2`.
    pub fn hermitized(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(&self.0 * Complex64::new(factor, 0.0))
    }

    pub fn scale_complex(&self, factor: Complex64) -> Self {
        Self(&self.0 * factor)
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> Complex64 {
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        acc
    }

    /// `self + factor * other`, in place.
    pub fn add_scaled(&mut self, factor: f64, other: &ComplexMatrix) {
        let f = Complex64::new(factor, 0.0);
        self.0.zip_apply(&other.0, |a, b| *a += f * b);
    }

    pub(crate) fn check_same_dim(&self, other: &ComplexMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(())
    }
}

impl TryFrom<DMatrix<Complex64>> for ComplexMatrix {
    type Error = Error;

    fn try_from(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        let out = Self(m);
        if !out.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(out)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.dim();
        write!(f, "ComplexMatrix[")?;
        for i in 0..n {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..n {
                let z = self.0[(i, j)];
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}{:+}i", z.re, z.im)?;
            }
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut Complex64 {
        &mut self.0[idx]
    }
}

// Arithmetic operators panic on dimension mismatch, like nalgebra. The
// fallible entry points (`commutator`, the generator) check first.
impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_same_dim(b)?;
    Ok(ComplexMatrix(&a.0 * &b.0 - &b.0 * &a.0))
}

/// `{a, b} = ab + ba`.
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_same_dim(b)?;
    Ok(ComplexMatrix(&a.0 * &b.0 + &b.0 * &a.0))
}
