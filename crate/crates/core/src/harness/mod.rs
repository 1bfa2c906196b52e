//! Experiment harness: the variant zoo, training, evaluation and tables.

pub mod config;
pub mod metrics;
pub mod tables;
pub mod train;
pub mod zoo;
pub mod run;
