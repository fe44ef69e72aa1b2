//! Qubit models: Bloch-ball parameterization, depolarizing noise and the
//! exactly solvable dissipative two-level model.

mod bloch;
mod dissipative;

pub use bloch::{bloch_idqs, bloch_state, depolarizing, pauli, sigma_minus, sigma_plus, BlochFamily, BlochVector};
pub use dissipative::{
    bloch_motion, dissip_idf, dissip_idqs, dissip_ridf, dissipative_flow_series, dissipative_master_equation,
    state_space_split, DissipativeModel, EvolvedBlochFamily, Regime, StateSpaceSplit,
};
