//! Time-local master equations: integration, per-channel metric derivatives
//! and the channel decomposition of the density flow.

mod equation;
mod flow;
mod integrate;

pub use equation::{Channel, Generator, Hamiltonian, MasterEquation, Rate};
pub use flow::{
    channel_metric_derivative, flow_record, flow_series, flow_series_with, sub_idf, FlowOptions, FlowRecord,
    RecordStatus,
};
pub use integrate::{integrate, integrate_with, propagate, IntegratorOptions, Trajectory};
