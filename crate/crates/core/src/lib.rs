//! Combined-causality analytics for temporal event sequences.

pub mod combo;
pub mod digest;
pub mod embeddings;
pub mod event_store;
pub mod hypergraph;
pub mod layout;
pub mod rpp;
pub mod scalar;
pub mod snapshot;
pub mod synth;

pub use scalar::Real;

pub type RppParams = rpp::RppParams<f64>;
pub type RppParams32 = rpp::RppParams<f32>;
pub type BasisKernels = rpp::BasisKernels<f64>;
pub type BasisKernels32 = rpp::BasisKernels<f32>;
pub type FitConfig = rpp::FitConfig<f64>;
pub type FitConfig32 = rpp::FitConfig<f32>;
