use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::operator::ComplexMatrix;
use crate::{Error, Result};

type RateFn = dyn Fn(f64) -> f64 + Send + Sync;
type HamiltonianFn = dyn Fn(f64) -> ComplexMatrix + Send + Sync;

/// Decay rate `gamma(t)`. A non-finite value marks a pole.
#[derive(Clone)]
pub enum Rate {
    Constant(f64),
    Function(Arc<RateFn>),
}

impl Rate {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Rate::Function(Arc::new(f))
    }

    pub fn at(&self, t: f64) -> f64 {
        match self {
            Rate::Constant(g) => *g,
            Rate::Function(f) => f(t),
        }
    }
}

impl fmt::Debug for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::Constant(g) => write!(f, "Rate::Constant({g})"),
            Rate::Function(_) => write!(f, "Rate::Function(..)"),
        }
    }
}

#[derive(Clone)]
pub enum Hamiltonian {
    Constant(ComplexMatrix),
    Function { dim: usize, f: Arc<HamiltonianFn> },
}

impl Hamiltonian {
    pub fn function(dim: usize, f: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static) -> Self {
        Hamiltonian::Function { dim, f: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        match self {
            Hamiltonian::Constant(h) => h.dim(),
            Hamiltonian::Function { dim, .. } => *dim,
        }
    }

    /// `H(t)`, checked Hermitian to `1e-12` (relative to its largest entry).
    pub fn at(&self, t: f64) -> Result<ComplexMatrix> {
        let h = match self {
            Hamiltonian::Constant(h) => h.clone(),
            Hamiltonian::Function { f, .. } => f(t),
        };
        if h.dim() != self.dim() {
            return Err(Error::DimMismatch { left: self.dim(), right: h.dim() });
        }
        let defect = h.hermiticity_defect();
        if defect > 1e-12 * h.max_abs().max(1.0) {
            return Err(Error::NotHermitian { defect });
        }
        Ok(h.hermitized())
    }
}

impl fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hamiltonian::Constant(h) => f.debug_tuple("Hamiltonian::Constant").field(h).finish(),
            Hamiltonian::Function { dim, .. } => write!(f, "Hamiltonian::Function {{ dim: {dim} }}"),
        }
    }
}

/// Dissipation channel: a fixed jump operator `A` with rate `gamma(t)`.
#[derive(Debug, Clone)]
pub struct Channel {
    pub jump: ComplexMatrix,
    pub rate: Rate,
}

impl Channel {
    pub fn new(jump: ComplexMatrix, rate: Rate) -> Self {
        Self { jump, rate }
    }

    pub fn constant(jump: ComplexMatrix, gamma: f64) -> Self {
        Self { jump, rate: Rate::Constant(gamma) }
    }
}

/// `d rho/dt = -i[H(t), rho] + sum_i gamma_i(t) (A_i rho A_i^dag - 1/2 {A_i^dag A_i, rho})`.
///
/// Neither `H` nor the jump operators depend on the family parameters, so the
/// same generator drives the parameter derivatives of a state.
#[derive(Debug, Clone)]
pub struct MasterEquation {
    hamiltonian: Hamiltonian,
    channels: Vec<Channel>,
}

impl MasterEquation {
    pub fn new(hamiltonian: Hamiltonian, channels: Vec<Channel>) -> Result<Self> {
        let dim = hamiltonian.dim();
        if dim == 0 {
            return Err(Error::InvalidArgument("zero-dimensional master equation".into()));
        }
        for c in &channels {
            if c.jump.dim() != dim {
                return Err(Error::DimMismatch { left: dim, right: c.jump.dim() });
            }
        }
        if let Hamiltonian::Constant(h) = &hamiltonian {
            let defect = h.hermiticity_defect();
            if defect > 1e-12 * h.max_abs().max(1.0) {
                return Err(Error::NotHermitian { defect });
            }
        }
        Ok(Self { hamiltonian, channels })
    }

    /// Pure Hamiltonian dynamics.
    pub fn unitary(hamiltonian: ComplexMatrix) -> Result<Self> {
        Self::new(Hamiltonian::Constant(hamiltonian), Vec::new())
    }

    /// Channels only, `H = 0`.
    pub fn dissipative(channels: Vec<Channel>) -> Result<Self> {
        let dim =
            channels.first().map(|c| c.jump.dim()).ok_or_else(|| Error::InvalidArgument("no channels given".into()))?;
        Self::new(Hamiltonian::Constant(ComplexMatrix::zeros(dim)), channels)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn rates_at(&self, t: f64) -> Vec<f64> {
        self.channels.iter().map(|c| c.rate.at(t)).collect()
    }

    /// Freezes the generator at time `t`. Fails with `PoleOnGrid` when a rate
    /// is not finite there.
    pub fn generator_at(&self, t: f64) -> Result<Generator> {
        let h = self.hamiltonian.at(t)?;
        let mut terms = Vec::with_capacity(self.channels.len());
        for (i, c) in self.channels.iter().enumerate() {
            let rate = c.rate.at(t);
            if !rate.is_finite() {
                return Err(Error::PoleOnGrid { t, channel: i });
            }
            terms.push((c.jump.as_inner(), rate));
        }
        Ok(Generator::from_parts(h.as_inner(), &terms))
    }
}

struct Term {
    jump: DMatrix<Complex64>,
    jump_adj: DMatrix<Complex64>,
    half_number: DMatrix<Complex64>,
    rate: f64,
}

/// The generator at one instant, with jump-operator products precomputed.
pub struct Generator {
    minus_i_h: DMatrix<Complex64>,
    terms: Vec<Term>,
}

impl Generator {
    pub(crate) fn from_parts(h: &DMatrix<Complex64>, channels: &[(&DMatrix<Complex64>, f64)]) -> Self {
        let terms = channels
            .iter()
            .map(|(a, rate)| {
                let jump_adj = a.adjoint();
                let half_number = (&jump_adj * *a) * Complex64::new(0.5, 0.0);
                Term { jump: (*a).clone(), jump_adj, half_number, rate: *rate }
            })
            .collect();
        Self { minus_i_h: h * Complex64::new(0.0, -1.0), terms }
    }

    pub fn dim(&self) -> usize {
        self.minus_i_h.nrows()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.rate).collect()
    }

    /// Applies the generator to any matrix (state or parameter derivative).
    pub fn apply(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.dim() != self.dim() {
            return Err(Error::DimMismatch { left: self.dim(), right: m.dim() });
        }
        let x = m.as_inner();
        let mut out = &self.minus_i_h * x - x * &self.minus_i_h;
        for term in &self.terms {
            if term.rate == 0.0 {
                continue;
            }
            let dissipator = &term.jump * x * &term.jump_adj - &term.half_number * x - x * &term.half_number;
            out += dissipator * Complex64::new(term.rate, 0.0);
        }
        ComplexMatrix::try_from(out)
    }
}
