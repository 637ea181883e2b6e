//! Counterfactual causal analysis for structural causal models and small
//! neural networks: do-interventions, Lewis dependence, transitivity
//! checks, overdetermination and preemption search, indirect-effect
//! estimators and threshold-based circuit discovery.

pub mod circuits;
pub mod engine;
pub mod error;
pub mod interventions;
mod par;
pub mod scenarios;
pub mod scm;
pub mod toynets;
pub mod transitivity;

pub use error::{Error, Result};
