//! Parametric 2D wave-equation data: sampling, simulation, zoom-window
//! restriction, boundary-driven re-solve and scaling.

pub mod dataset;
pub mod grid;
pub mod lhs;
pub mod scaler;
pub mod solver;

pub use dataset::{sample_params, test_seed, Dataset, Sample, SamplingConfig};
pub use grid::GridSpec;
pub use lhs::{lhs_sample, Exclusion};
pub use scaler::Scaler;
pub use solver::{
    extract_boundary, extract_boundary_zoom, restrict, solve_wave, submodel_solve, velocity_field,
    Leapfrog, PointSource, WaveParams,
};
