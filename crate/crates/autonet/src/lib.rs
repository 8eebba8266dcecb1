//! `autonet` is a deliberately small neural-network engine: a dense row-major
//! tensor, a fixed set of layers with hand-derived backward passes, two
//! losses, SGD and Adagrad, a finite-difference gradient checker and a
//! two-file checkpoint format.
//!
//! Everything is generic over [`Real`] so the same code trains in `f32` and
//! is gradient-checked in `f64`.

pub mod activation;
pub mod batchnorm;
pub mod checkpoint;
pub mod conv;
pub mod dense;
mod error;
pub mod gradcheck;
pub mod init;
pub mod layer;
pub mod linalg;
pub mod loss;
pub mod network;
pub mod optim;
pub mod param;
pub mod pool;
mod real;
mod tensor;

pub use batchnorm::BatchNormState;
pub use conv::Padding;
pub use error::{Error, Result};
pub use gradcheck::{BlockError, GradReport};
pub use layer::{LayerSpec, Mode};
pub use network::Network;
pub use optim::{adagrad_step, sgd_step, Adagrad, Optimizer, Sgd};
pub use param::{Param, ParamId, ParamStore};
pub use real::Real;
pub use tensor::Tensor;
