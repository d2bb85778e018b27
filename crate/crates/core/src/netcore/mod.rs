//! Fully connected feed-forward ReLU networks with a single linear output,
//! trained from scratch on the squared-error loss.

pub mod arch;
pub mod backprop;
pub mod dataset;
pub mod loss;
pub mod matrix;
pub mod network;
pub mod optim;
pub mod snapshot;
pub mod train;

pub use arch::{Activation, BiasMode, NetworkArch};
pub use backprop::{backprop_gradient, Gradients};
pub use dataset::Dataset;
pub use loss::loss_mse;
pub use matrix::Matrix;
pub use network::{init_network, LayeredNetwork};
pub use optim::{optimizer_step, OptimizerKind, OptimizerState};
pub use snapshot::SnapshotSeries;
pub use train::{accuracy, dataset_loss, train, TrainConfig};
