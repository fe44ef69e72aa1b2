//! Numerical tolerances shared by every module.
//!
//! The defaults sit well above double-precision noise for dimensions up to 16.

/// One bundle of thresholds. Higher-level options carry a copy of this.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max entrywise `|m - m^dag|` accepted as Hermitian.
    pub hermitian: f64,
    /// Max `|Tr rho - 1|`.
    pub trace: f64,
    /// Most negative eigenvalue accepted in a density matrix.
    pub eigen_floor: f64,
    /// SLD components with `p_j + p_k` at or below this are dropped.
    pub kernel_threshold: f64,
    /// Largest derivative component allowed on a dropped SLD entry.
    pub support_leak: f64,
    /// Metric eigenvalues at or below this make the metric non-invertible.
    pub singular_threshold: f64,
    /// Most negative metric eigenvalue still clamped to zero.
    pub psd_floor: f64,
    /// Largest imaginary part tolerated in a metric entry.
    pub imaginary_residue: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermitian: 1e-12,
        trace: 1e-10,
        eigen_floor: 1e-10,
        kernel_threshold: 1e-12,
        support_leak: 1e-8,
        singular_threshold: 1e-10,
        psd_floor: 1e-9,
        imaginary_residue: 1e-10,
    };

    /// Relaxed bounds for states produced by the integrator.
    pub const TRAJECTORY: Tolerances =
        Tolerances { hermitian: 1e-10, trace: 1e-9, eigen_floor: 1e-7, ..Tolerances::DEFAULT };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Relative step for central finite differences.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Per-step half-step error bound for the RK4 integrator.
pub const DEFAULT_STEP_TOLERANCE: f64 = 1e-8;
