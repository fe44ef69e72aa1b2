use std::f64::consts::PI;

use crate::dynamics::{Channel, FlowRecord, MasterEquation, Rate, RecordStatus};
use crate::fisher::{ParameterPoint, StateFamily};
use crate::operator::DensityMatrix;
use crate::{Error, Result};

use super::{bloch_state, sigma_minus, BlochVector};

/// Below this `|1 - 4 W^2 / lambda^2|^(1/2)` the model is treated as critical.
const CRITICAL_DELTA: f64 = 1e-8;
/// `|h|` below this is a pole of the rate.
const POLE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `lambda > 2W`: monotone decay.
    Weak,
    /// `lambda = 2W`.
    Critical,
    /// `lambda < 2W`: oscillating `h`, with poles of the rate.
    Strong,
}

/// Two-level system coupled to a damped Jaynes-Cummings reservoir with
/// spectral width `lambda` and coupling `W`.
///
/// Everything is expressed in dimensionless time `tau = lambda t`; rates are
/// in units of `lambda`. The reduced dynamics is a single lowering channel
/// with rate `gamma = -2 h'/h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipativeModel {
    lambda: f64,
    coupling: f64,
}

impl DissipativeModel {
    pub fn new(lambda: f64, coupling: f64) -> Result<Self> {
        if !(lambda.is_finite() && coupling.is_finite()) {
            return Err(Error::NonFinite);
        }
        if lambda <= 0.0 || coupling < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "need lambda > 0 and W >= 0, got lambda = {lambda}, W = {coupling}"
            )));
        }
        Ok(Self { lambda, coupling })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    fn w(&self) -> f64 {
        self.coupling / self.lambda
    }

    /// `d / lambda`.
    fn delta(&self) -> f64 {
        (1.0 - 4.0 * self.w() * self.w()).abs().sqrt()
    }

    /// `d = sqrt(|lambda^2 - 4 W^2|)`.
    pub fn d_param(&self) -> f64 {
        self.lambda * self.delta()
    }

    pub fn regime(&self) -> Regime {
        if self.delta() < CRITICAL_DELTA {
            Regime::Critical
        } else if 2.0 * self.coupling < self.lambda {
            Regime::Weak
        } else {
            Regime::Strong
        }
    }

    /// Characteristic function `h(tau)`, with `h(0) = 1`.
    pub fn h(&self, tau: f64) -> f64 {
        let delta = self.delta();
        let x = 0.5 * delta * tau;
        match self.regime() {
            Regime::Critical => (-0.5 * tau).exp() * (1.0 + 0.5 * tau),
            Regime::Strong => (-0.5 * tau).exp() * (x.cos() + x.sin() / delta),
            Regime::Weak => damped_cosh(tau, x) + damped_sinh(tau, x) / delta,
        }
    }

    /// `dh/dtau`.
    pub fn h_dot(&self, tau: f64) -> f64 {
        let delta = self.delta();
        let x = 0.5 * delta * tau;
        let w2 = self.w() * self.w();
        match self.regime() {
            Regime::Critical => -0.25 * tau * (-0.5 * tau).exp(),
            Regime::Strong => -2.0 * w2 / delta * (-0.5 * tau).exp() * x.sin(),
            Regime::Weak => -2.0 * w2 / delta * damped_sinh(tau, x),
        }
    }

    /// Rate `gamma(tau) = -2 h'/h` in units of `lambda`.
    pub fn gamma(&self, tau: f64) -> Result<f64> {
        let h = self.h(tau);
        if h.abs() < POLE_THRESHOLD {
            return Err(Error::Pole { lambda_t: tau });
        }
        Ok(-2.0 * self.h_dot(tau) / h)
    }

    /// `k`-th zero of `h` (`k >= 1`), where the rate has a pole.
    /// Only the strong regime has any.
    pub fn h_zero(&self, k: u32) -> Option<f64> {
        if self.regime() != Regime::Strong || k == 0 {
            return None;
        }
        let delta = self.delta();
        Some(2.0 * (f64::from(k) * PI - delta.atan()) / delta)
    }

    /// `k`-th zero of `h'` (`k >= 1`), `2 k pi lambda / d`.
    pub fn h_dot_zero(&self, k: u32) -> Option<f64> {
        if self.regime() != Regime::Strong || k == 0 {
            return None;
        }
        Some(2.0 * f64::from(k) * PI / self.delta())
    }
}

/// `e^(-tau/2) cosh(x)`, safe for large arguments.
fn damped_cosh(tau: f64, x: f64) -> f64 {
    0.5 * ((x - 0.5 * tau).exp() + (-x - 0.5 * tau).exp())
}

/// `e^(-tau/2) sinh(x)`.
fn damped_sinh(tau: f64, x: f64) -> f64 {
    if x < 1.0 {
        (-0.5 * tau).exp() * x.sinh()
    } else {
        0.5 * ((x - 0.5 * tau).exp() - (-x - 0.5 * tau).exp())
    }
}

/// Exact Bloch vector at `tau`:
/// `n_{1,2}(t) = h n_{1,2}(0)`, `n_3(t) = h^2 (1 + n_3(0)) - 1`.
pub fn bloch_motion(n0: &BlochVector, model: &DissipativeModel, tau: f64) -> BlochVector {
    let h = model.h(tau);
    let [x, y, z] = n0.components();
    BlochVector([h * x, h * y, h * h * (1.0 + z) - 1.0])
}

/// `1 - |n(t)|^2 = h^2 q`; `q` is computed without cancellation near the
/// lower pole.
fn residual(n0: &BlochVector, h: f64) -> f64 {
    let [x, y, z] = n0.components();
    let a = 1.0 + z;
    2.0 * a - (x * x + y * y) - h * h * a * a
}

/// `(1 + n_3)^2 / (1 - |n|^2)` at time `tau`.
fn shape_ratio(n0: &BlochVector, h: f64) -> Result<f64> {
    let [x, y, z] = n0.components();
    let a = 1.0 + z;
    if x == 0.0 && y == 0.0 {
        if a == 0.0 {
            return Ok(0.0);
        }
        let den = 2.0 - h * h * a;
        if den <= 0.0 {
            return Err(Error::PureBoundary { norm: 1.0 });
        }
        return Ok(h * h * a / den);
    }
    let q = residual(n0, h);
    if q <= 0.0 {
        return Err(Error::PureBoundary { norm: (1.0 - h * h * q).max(0.0).sqrt() });
    }
    Ok(h * h * a * a / q)
}

/// IDQS of the Bloch parameterization at `tau`:
/// `|h|^3 / (8 sqrt(1 - |n(0)|^2 + (1 - h^2)(1 + n_3(0))^2))`.
pub fn dissip_idqs(n0: &BlochVector, model: &DissipativeModel, tau: f64) -> Result<f64> {
    let h = model.h(tau);
    let q = residual(n0, h);
    if q <= 0.0 {
        return Err(Error::PureBoundary { norm: (1.0 - h * h * q).max(0.0).sqrt() });
    }
    Ok(h.abs().powi(3) / (8.0 * q.sqrt()))
}

/// RIDF, `-(gamma/2) (3 + (1 + n_3)^2 / (1 - |n|^2))`.
pub fn dissip_ridf(n0: &BlochVector, model: &DissipativeModel, tau: f64) -> Result<f64> {
    let gamma = model.gamma(tau)?;
    let ratio = shape_ratio(n0, model.h(tau))?;
    Ok(-0.5 * gamma * (3.0 + ratio))
}

pub fn dissip_idf(n0: &BlochVector, model: &DissipativeModel, tau: f64) -> Result<f64> {
    Ok(dissip_ridf(n0, model, tau)? * dissip_idqs(n0, model, tau)?)
}

/// RIDF split into the volume change of the Bloch-vector map and the change
/// of the metric along the orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSpaceSplit {
    /// `d/dt ln |det J|` with `J = diag(h, h, h^2)`, i.e. `-2 gamma`.
    pub jacobian: f64,
    /// `(gamma/2)(1 - (1 + n_3)^2 / (1 - |n|^2))`.
    pub orbit: f64,
}

pub fn state_space_split(n0: &BlochVector, model: &DissipativeModel, tau: f64) -> Result<StateSpaceSplit> {
    let gamma = model.gamma(tau)?;
    let ratio = shape_ratio(n0, model.h(tau))?;
    Ok(StateSpaceSplit { jacobian: -2.0 * gamma, orbit: 0.5 * gamma * (1.0 - ratio) })
}

/// The model as a master equation in physical time: one lowering channel with
/// rate `lambda gamma(lambda t)`. The rate is NaN at poles.
pub fn dissipative_master_equation(model: &DissipativeModel) -> MasterEquation {
    let m = *model;
    let rate = Rate::function(move |t| m.gamma(m.lambda * t).map_or(f64::NAN, |g| m.lambda * g));
    MasterEquation::dissipative(vec![Channel::new(sigma_minus(), rate)])
        .expect("one qubit channel is a valid master equation")
}

/// `n0 -> rho(n(tau))`: the Bloch family pushed forward by the exact dynamics.
#[derive(Debug, Clone, Copy)]
pub struct EvolvedBlochFamily {
    pub model: DissipativeModel,
    pub tau: f64,
}

impl StateFamily for EvolvedBlochFamily {
    fn dim_param(&self) -> usize {
        3
    }

    fn state(&self, x: &ParameterPoint) -> Result<DensityMatrix> {
        let n0 = BlochVector::try_from(x.coords())?;
        Ok(bloch_state(&bloch_motion(&n0, &self.model, self.tau)))
    }
}

/// Closed-form flow records for the Bloch family at `n0`, on a grid of `tau`.
/// The single channel carries the whole flow.
pub fn dissipative_flow_series(n0: &BlochVector, model: &DissipativeModel, taus: &[f64]) -> Vec<FlowRecord> {
    taus.iter()
        .map(|&tau| {
            let gamma = match model.gamma(tau) {
                Ok(g) => g,
                Err(_) => {
                    let mut rec = FlowRecord::undefined(tau, RecordStatus::Pole, vec![None]);
                    rec.idqs = dissip_idqs(n0, model, tau).ok();
                    return rec;
                }
            };
            let (d, r) = match (dissip_idqs(n0, model, tau), dissip_ridf(n0, model, tau)) {
                (Ok(d), Ok(r)) => (d, r),
                _ => return FlowRecord::undefined(tau, RecordStatus::PureBoundary, vec![Some(gamma)]),
            };
            let idf = r * d;
            FlowRecord {
                t: tau,
                status: RecordStatus::Ok,
                idqs: Some(d),
                ridf: Some(r),
                idf: Some(idf),
                sub_idf: vec![Some(idf)],
                gamma: vec![Some(gamma)],
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strong() -> DissipativeModel {
        DissipativeModel::new(1.0, 3.0).unwrap()
    }

    fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let mut fa = f(a);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if (fm < 0.0) == (fa < 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn regimes() {
        assert_eq!(DissipativeModel::new(1.0, 0.2).unwrap().regime(), Regime::Weak);
        assert_eq!(DissipativeModel::new(1.0, 0.5).unwrap().regime(), Regime::Critical);
        assert_eq!(strong().regime(), Regime::Strong);
        assert!((strong().d_param() - 35f64.sqrt()).abs() < 1e-14);
        assert!(DissipativeModel::new(0.0, 1.0).is_err());
    }

    #[test]
    fn first_pole_of_strong_coupling() {
        let m = strong();
        let root = bisect(|t| m.h(t), 0.3, 0.9);
        assert!((root - 0.5877).abs() < 1e-4);
        assert!((m.h_zero(1).unwrap() - root).abs() < 1e-12);
        assert!(matches!(m.gamma(root), Err(Error::Pole { .. })));
    }

    #[test]
    fn rate_changes_sign_at_two_pi_over_d() {
        let m = strong();
        let t = 2.0 * PI / m.d_param();
        assert!((m.h_dot_zero(1).unwrap() - t).abs() < 1e-15);
        assert!(m.gamma(t - 1e-3).unwrap() < 0.0);
        assert!(m.gamma(t + 1e-3).unwrap() > 0.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for m in [DissipativeModel::new(1.0, 0.2).unwrap(), DissipativeModel::new(1.0, 0.5).unwrap(), strong()] {
            for tau in [0.0, 0.3, 1.1, 2.5] {
                let e = 1e-6;
                let fd = (m.h(tau + e) - m.h(tau - e)) / (2.0 * e);
                assert!((fd - m.h_dot(tau)).abs() < 1e-8, "{m:?} at {tau}");
            }
            assert_eq!(m.h(0.0), 1.0);
        }
    }

    #[test]
    fn regimes_join_continuously_at_the_boundary() {
        let critical = DissipativeModel::new(1.0, 0.5).unwrap();
        let weak = DissipativeModel::new(1.0, 0.5 - 1e-6).unwrap();
        let strong = DissipativeModel::new(1.0, 0.5 + 1e-6).unwrap();
        for tau in [0.5, 2.0, 5.0] {
            assert!((weak.h(tau) - critical.h(tau)).abs() < 1e-5);
            assert!((strong.h(tau) - critical.h(tau)).abs() < 1e-5);
        }
    }

    #[test]
    fn weak_coupling_rate_approaches_markov_limit() {
        // lambda >> W: gamma tends to 2 W^2 / lambda
        let m = DissipativeModel::new(1.0, 0.01).unwrap();
        assert!((m.gamma(40.0).unwrap() - 2e-4).abs() < 1e-7);
        assert!(m.gamma(40.0).unwrap() > 0.0);
    }

    #[test]
    fn idqs_vanishes_at_h_zero_and_ridf_at_center() {
        let m = strong();
        let n0 = BlochVector::new([0.0, 0.0, 0.0]).unwrap();
        let t1 = m.h_zero(1).unwrap();
        assert!(dissip_idqs(&n0, &m, t1).unwrap() < 1e-30);
        assert_eq!(dissip_idqs(&n0, &m, 0.0).unwrap(), 0.125);
        let g = m.gamma(0.3).unwrap();
        let h = m.h(0.3);
        let expected = -0.5 * g * (3.0 + h * h / (2.0 - h * h));
        assert!((dissip_ridf(&n0, &m, 0.3).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn ground_state_start_has_ridf_factor_three() {
        let m = strong();
        let n0 = BlochVector::new([0.0, 0.0, -1.0]).unwrap();
        let g = m.gamma(0.4).unwrap();
        assert!((dissip_ridf(&n0, &m, 0.4).unwrap() + 1.5 * g).abs() < 1e-14);
    }

    #[test]
    fn split_adds_up_to_ridf() {
        let m = strong();
        let n0 = BlochVector::new([0.3, 0.2, 0.4]).unwrap();
        for tau in [0.2, 1.0, 2.0] {
            let s = state_space_split(&n0, &m, tau).unwrap();
            let r = dissip_ridf(&n0, &m, tau).unwrap();
            assert!((s.jacobian + s.orbit - r).abs() < 1e-12 * r.abs().max(1.0));
        }
    }

    #[test]
    fn pure_start_is_a_boundary_at_time_zero() {
        let m = strong();
        let n0 = BlochVector::new([1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(dissip_idqs(&n0, &m, 0.0), Err(Error::PureBoundary { .. })));
        assert!(dissip_idqs(&n0, &m, 0.2).is_ok());
    }

    #[test]
    fn flow_series_marks_poles() {
        let m = strong();
        let n0 = BlochVector::new([0.1, 0.0, 0.2]).unwrap();
        let t1 = m.h_zero(1).unwrap();
        let recs = dissipative_flow_series(&n0, &m, &[0.1, t1]);
        assert_eq!(recs[0].status, RecordStatus::Ok);
        assert_eq!(recs[0].sub_idf[0], recs[0].idf);
        assert_eq!(recs[1].status, RecordStatus::Pole);
    }
}
