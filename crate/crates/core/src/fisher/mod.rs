//! Symmetric logarithmic derivatives, the quantum Fisher metric and the
//! density measures built from its determinant.

mod family;
mod metric;
mod sld;

pub use family::{
    derivatives, metric_at, numeric_derivatives, numeric_derivatives_with, DerivativeOptions, FnFamily, ParameterPoint,
    StateFamily,
};
pub use metric::{idf, idqs, metric_rate, qfif_single, qfm, ridf, ridf_with, FisherMetric};
pub use sld::{sld, sld_with_policy, SldSet, SupportPolicy};
