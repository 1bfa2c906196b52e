use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid permutation {0:?} for rank {1}")]
    Permutation(Vec<usize>, usize),

    #[error("expected rank {expected}, got rank {got}")]
    Rank { expected: usize, got: usize },

    #[error("kernel {kernel:?} does not fit input {input:?}")]
    KernelTooLarge { kernel: Vec<usize>, input: Vec<usize> },

    #[error("SVD did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("matrix extent {0} exceeds the small-matrix limit of {1}")]
    MatrixTooLarge(usize, usize),

    #[error("rank {rank} exceeds the maximum of {max}")]
    RankTooLarge { rank: usize, max: usize },

    #[error("backward called before a training-mode forward pass")]
    NoForwardCache,

    #[error("Batch Normalization and Euler regularization cannot be combined: batch statistics corrupt the finite-difference time derivative")]
    BatchNormWithEuler,

    #[error("CFL condition violated: c*dt*sqrt(1/dx^2+1/dy^2) = {0:.6} > 1")]
    Cfl(f64),

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("training diverged at epoch {0}: loss is not finite")]
    Diverged(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
