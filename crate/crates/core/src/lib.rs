//! Cyclic neural networks built from locally trained computational neurons.
//!
//! Each neuron is a linear layer followed by ReLU that reads the fused sample
//! together with the outputs of its pre-synapse neurons. Neurons are wired by
//! an arbitrary directed graph, cycles included, and are trained one at a time
//! with the forward-forward goodness objective; no gradient ever crosses a
//! synapse. A softmax readout over all neuron outputs, trained only on
//! label-neutral inputs, makes the final prediction.
//!
//! Module map:
//!
//! - [`numerics`]: row-major [`Matrix`], seeded RNG streams, activations, Adam.
//! - [`graph`]: [`Topology`] and the chain / cycle / complete / WS / BA generators.
//! - [`data`]: datasets, IDX and embedding loaders, label fusion, splits and batching.
//! - [`neuron`]: forward pass, goodness, local loss and its closed-form gradient.
//! - [`network`]: [`CyclicNet`], synchronous propagation, readout, checkpoints.
//! - [`training`]: epoch loop with early stopping, the backprop baseline, sweeps.

pub mod data;
pub mod error;
pub mod graph;
pub mod network;
pub mod neuron;
pub mod numerics;
pub mod training;

pub use data::{Dataset, FusedBatch, FusionMode};
pub use error::{Error, Result};
pub use graph::{GeneratorKind, GeneratorSpec, Topology};
pub use network::{CyclicNet, PropagationState};
pub use neuron::NeuronParams;
pub use numerics::{AdamState, Matrix, RngState, Stream};
pub use training::{Metrics, TrainConfig};
