//! One-dimensional CNN detector written from scratch.
//!
//! Architecture: valid conv (64 filters, kernel 5, stride 1) → ReLU →
//! flatten → dense 128 → ReLU → dense 2 → softmax, trained with Adam on
//! categorical cross-entropy. Everything runs in `f64`.

mod adam;
mod layers;
mod model_file;
mod network;
mod tensor;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use layers::{conv1d_forward, dense_forward, relu, relu_backward, softmax_cce};
pub use model_file::{CnnModel, MODEL_MAGIC, MODEL_VERSION};
pub use network::{Architecture, CnnParams, Gradients};
pub use tensor::Tensor;
pub use train::{train, EpochLog, TrainConfig, TrainingLog};
