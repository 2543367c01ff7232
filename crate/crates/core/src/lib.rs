//! Selective classification: predictors that may answer "I don't know".
//!
//! Abstention is produced either by a separate rejector attached to an
//! ordinary predictor ([`attached`]) or by the predictor itself
//! ([`merged`]). [`evaluation`] measures coverage and selective risk, and
//! [`explanation`] accounts for individual decisions.

pub mod attached;
pub mod dataset;
pub mod decision;
mod error;
pub mod evaluation;
pub mod explanation;
pub mod fixtures;
pub mod kv;
pub mod merged;
pub mod predictor;
pub mod rng;
pub mod system;

pub use error::{Error, Result};
