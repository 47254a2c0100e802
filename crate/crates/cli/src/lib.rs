//! Dataset ingestion, model serialization, synthetic data and the `edgc`
//! command-line interface.

pub mod cli;
pub mod csvio;
pub mod modelio;
pub mod synth;
