//! A small convolutional classifier trained from scratch.
//!
//! Generic over [`Real`] so that the same code runs in `f32` for training
//! and in `f64` for finite-difference gradient checks.

pub mod layers;
mod model;
mod real;
mod tensor;
mod train;

pub use layers::PaddingMode;
pub use model::{Architecture, Backward, CnnModel, Gradients, Trace};
pub use real::Real;
pub use tensor::Tensor;
pub use train::{lr_at, predict_probabilities, predict_topk, top_k, train, EpochRecord, Sample, TrainConfig, TrainingReport};
