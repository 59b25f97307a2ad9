//! Numerical core: tensors, named parameters, the gradient tape, Adam and checkpoints.

pub mod adam;
pub mod checkpoint;
pub mod gradcheck;
pub mod init;
pub mod params;
pub mod tape;
pub mod tensor;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use gradcheck::{finite_diff_check, CheckStatus, GradCheckConfig, GradCheckReport};
pub use params::{ParamId, ParamStore, Parameter};
pub use tape::{Graph, ParamGrads, Var};
pub use tensor::{activate, cross_entropy, matmul, sigmoid, softmax, Activation, Tensor};
