//! Emergent weight morphologies in small feed-forward ReLU networks.
//!
//! - [`netcore`]: from-scratch networks, backpropagation, SGD/Adam, snapshot recording.
//! - [`pathform`]: exact path-sum view of a network (outputs, gradients, couplings).
//! - [`dynamics`]: coarse-grained connectivity ODEs and their ensembles.
//! - [`morpho`]: connectivity, entropy, accessibility and statistics.
//! - [`datagen`]: synthetic cluster data and CSV ingestion.
//! - [`experiment`]: reproducible ensemble experiments behind the CLI.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod morpho;
pub mod netcore;
pub mod pathform;
pub mod rng;

pub use error::{Error, Result};
pub use netcore::{
    accuracy, backprop_gradient, init_network, loss_mse, optimizer_step, train, BiasMode, Dataset,
    Gradients, LayeredNetwork, Matrix, NetworkArch, OptimizerKind, OptimizerState, SnapshotSeries,
    TrainConfig,
};
