use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::backprop::{accumulate, Gradients, Workspace};
use super::dataset::Dataset;
use super::loss::loss_mse;
use super::network::LayeredNetwork;
use super::optim::{optimizer_step, OptimizerKind, OptimizerState};
use super::snapshot::SnapshotSeries;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub optimizer: OptimizerKind,
    /// Use `1/(2M)` instead of `1/M` in front of the squared error.
    pub loss_halved: bool,
    pub init_low: f64,
    pub init_high: f64,
    pub seed: u64,
    /// Record a snapshot every this many epochs. The initial and final
    /// networks are always recorded.
    pub snapshot_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            batch_size: 256,
            epochs: 500,
            optimizer: OptimizerKind::Adam,
            loss_halved: true,
            init_low: -0.05,
            init_high: 0.05,
            seed: 0,
            snapshot_every: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if !(self.init_low < self.init_high) || !self.init_low.is_finite() || !self.init_high.is_finite() {
            return Err(Error::Config(format!(
                "init bounds [{}, {}] must satisfy low < high",
                self.init_low, self.init_high
            )));
        }
        if self.snapshot_every == 0 {
            return Err(Error::Config("snapshot_every must be positive".into()));
        }
        Ok(())
    }
}

/// Mini-batch training. Batches come from a seeded reshuffle every epoch and
/// the final short batch is kept. The returned series holds the initial
/// network at epoch 0 and the full-data training loss after every epoch.
pub fn train(net: &LayeredNetwork, data: &Dataset, config: &TrainConfig) -> Result<SnapshotSeries> {
    config.validate()?;
    if data.n_features() != net.arch().inputs() {
        return Err(Error::Shape(format!(
            "dataset has {} features, network expects {}",
            data.n_features(),
            net.arch().inputs()
        )));
    }
    let mut net = net.clone();
    let mut shuffle_rng = rng::stream(config.seed, 1);
    let mut state = OptimizerState::new(config.optimizer, &net);
    let mut grads = Gradients::zeros_like(&net);
    let mut ws = Workspace::for_net(&net);
    let mut order: Vec<usize> = (0..data.len()).collect();

    let mut series = SnapshotSeries::new(net.arch().clone(), config.clone());
    let initial_loss = dataset_loss(&net, data, config.loss_halved)?;
    series.push(0, net.clone(), initial_loss)?;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle_rng);
        for batch in order.chunks(config.batch_size) {
            accumulate(&net, data, batch, config.loss_halved, &mut ws, &mut grads);
            optimizer_step(&mut net, &grads, config, &mut state)?;
        }
        let loss = dataset_loss(&net, data, config.loss_halved)?;
        if !loss.is_finite() {
            return Err(Error::Divergence(format!(
                "training loss became {loss} at epoch {epoch} (seed {})",
                config.seed
            )));
        }
        if epoch % config.snapshot_every == 0 || epoch == config.epochs {
            series.push(epoch, net.clone(), loss)?;
        } else {
            series.push_loss(loss);
        }
    }
    Ok(series)
}

pub fn dataset_loss(net: &LayeredNetwork, data: &Dataset, halved: bool) -> Result<f64> {
    let preds = net.predict(data.features())?;
    loss_mse(data.targets(), &preds, halved)
}

/// Fraction of samples whose prediction rounds to the integer target.
pub fn accuracy(net: &LayeredNetwork, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Argument("accuracy of an empty dataset".into()));
    }
    let mut hits = 0usize;
    for (x, &y) in data.features().iter().zip(data.targets()) {
        if net.forward(x)?.round() == y {
            hits += 1;
        }
    }
    Ok(hits as f64 / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::arch::{BiasMode, NetworkArch};
    use crate::netcore::network::init_network;

    fn offset_net(offset: f64) -> LayeredNetwork {
        // y_hat = x + offset via a trainable output bias
        let arch = NetworkArch::new(vec![1, 1, 1], BiasMode::Trainable).unwrap();
        let mut net = LayeredNetwork::zeros(arch);
        net.set_weight(1, 0, 0, 1.0);
        net.set_weight(2, 0, 0, 1.0);
        net.biases_mut()[1][0] = offset;
        net
    }

    fn labels() -> Dataset {
        Dataset::new(
            "labels",
            (1..=5).map(|k| vec![k as f64]).collect(),
            (1..=5).map(|k| k as f64).collect(),
        )
        .unwrap()
    }

    #[test]
    fn accuracy_rounding_rule() {
        assert_eq!(accuracy(&offset_net(0.0), &labels()).unwrap(), 1.0);
        assert_eq!(accuracy(&offset_net(0.4), &labels()).unwrap(), 1.0);
        assert_eq!(accuracy(&offset_net(0.6), &labels()).unwrap(), 0.0);
    }

    #[test]
    fn zero_epochs_keeps_initial_network_only() {
        let arch = NetworkArch::uniform(1, 3, 2, BiasMode::Zero).unwrap();
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        let net = init_network(&arch, &cfg).unwrap();
        let s = train(&net, &labels(), &cfg).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.epoch_indices(), &[0]);
        assert_eq!(s.snapshots()[0], net);
    }

    #[test]
    fn training_is_deterministic_and_reduces_loss() {
        let arch = NetworkArch::uniform(1, 4, 2, BiasMode::Trainable).unwrap();
        let cfg = TrainConfig {
            epochs: 50,
            batch_size: 2,
            seed: 5,
            init_low: 0.1,
            init_high: 0.5,
            ..TrainConfig::default()
        };
        let net = init_network(&arch, &cfg).unwrap();
        let a = train(&net, &labels(), &cfg).unwrap();
        let b = train(&net, &labels(), &cfg).unwrap();
        assert_eq!(a.loss_history(), b.loss_history());
        assert_eq!(a.loss_history().len(), 51);
        assert!(a.loss_history()[50] < a.loss_history()[0]);
    }

    #[test]
    fn snapshot_cadence() {
        let arch = NetworkArch::uniform(1, 2, 1, BiasMode::Zero).unwrap();
        let cfg = TrainConfig {
            epochs: 7,
            snapshot_every: 3,
            ..TrainConfig::default()
        };
        let net = init_network(&arch, &cfg).unwrap();
        let s = train(&net, &labels(), &cfg).unwrap();
        assert_eq!(s.epoch_indices(), &[0, 3, 6, 7]);
        assert_eq!(s.loss_history().len(), 8);
    }
}
