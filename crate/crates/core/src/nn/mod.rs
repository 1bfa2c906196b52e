//! Small reverse-mode network stack: layers, a shared-trunk model, losses,
//! Adam and binary checkpoints.

pub mod adam;
pub mod checkpoint;
pub mod gradcheck;
pub mod layer;
pub mod loss;
pub mod model;

pub use adam::{lr_schedule, AdamState};
pub use layer::{BatchNorm, Conv, Dense, Layer, LayerKind, Param, SeparableConv, Upsample};
pub use loss::{loss_euler, loss_euler_scaled, loss_mse, EulerScaling};
pub use model::{count_params, Model, Sequential};
