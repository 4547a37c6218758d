//! Dense linear algebra, seeded randomness, activations and the Adam optimizer.

mod activation;
mod adam;
mod matrix;
mod rng;

pub use activation::{
    argmax, l2_normalize, l2_normalize_rows, logistic, relu, softmax_cross_entropy, softmax_stable,
    softplus, SoftmaxCe, NORM_EPSILON,
};
pub use adam::{adam_step, AdamConfig, AdamState};
pub use matrix::Matrix;
pub use rng::{RngState, Stream};
