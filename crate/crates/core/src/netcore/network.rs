use rand::Rng as _;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::arch::{BiasMode, NetworkArch};
use super::matrix::Matrix;
use super::train::TrainConfig;
use crate::error::{Error, Result};
use crate::rng;

/// Weights and biases of a feed-forward ReLU network.
///
/// `weights[l - 1]` is the `n_{l-1} x n_l` matrix of weight layer `l`, so
/// entry `(i, j)` connects node `i` of layer `l - 1` to node `j` of layer `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredNetwork {
    arch: NetworkArch,
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
}

impl LayeredNetwork {
    pub fn zeros(arch: NetworkArch) -> Self {
        let sizes = arch.layer_sizes();
        let weights = sizes.windows(2).map(|w| Matrix::zeros(w[0], w[1])).collect();
        let biases = sizes[1..].iter().map(|&n| vec![0.0; n]).collect();
        Self {
            arch,
            weights,
            biases,
        }
    }

    /// Builds a network with every weight of layer `l` set to `value(l)`.
    pub fn layer_constant(arch: NetworkArch, value: impl Fn(usize) -> f64) -> Self {
        let mut net = Self::zeros(arch);
        for (l, w) in net.weights.iter_mut().enumerate() {
            w.as_mut_slice().fill(value(l + 1));
        }
        net
    }

    pub fn from_parts(arch: NetworkArch, weights: Vec<Matrix>, biases: Vec<Vec<f64>>) -> Result<Self> {
        let sizes = arch.layer_sizes();
        if weights.len() != arch.depth() || biases.len() != arch.depth() {
            return Err(Error::Shape(format!(
                "expected {} weight and bias layers, got {} and {}",
                arch.depth(),
                weights.len(),
                biases.len()
            )));
        }
        for (l, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.rows() != sizes[l] || w.cols() != sizes[l + 1] || b.len() != sizes[l + 1] {
                return Err(Error::Shape(format!(
                    "layer {}: weights {}x{}, biases {}, expected {}x{} and {}",
                    l + 1,
                    w.rows(),
                    w.cols(),
                    b.len(),
                    sizes[l],
                    sizes[l + 1],
                    sizes[l + 1]
                )));
            }
        }
        if arch.bias_mode() == BiasMode::Zero && biases.iter().flatten().any(|&b| b != 0.0) {
            return Err(Error::Config("zero-bias network with nonzero bias".into()));
        }
        Ok(Self {
            arch,
            weights,
            biases,
        })
    }

    pub fn arch(&self) -> &NetworkArch {
        &self.arch
    }

    pub fn depth(&self) -> usize {
        self.arch.depth()
    }

    /// Weight matrix of layer `l` (1-based, `1..=H`).
    pub fn layer(&self, l: usize) -> &Matrix {
        &self.weights[l - 1]
    }

    pub fn layer_mut(&mut self, l: usize) -> &mut Matrix {
        &mut self.weights[l - 1]
    }

    /// Weight `w_{ab}^{(l)}`.
    pub fn weight(&self, l: usize, a: usize, b: usize) -> f64 {
        self.weights[l - 1].get(a, b)
    }

    pub fn set_weight(&mut self, l: usize, a: usize, b: usize, v: f64) {
        self.weights[l - 1].set(a, b, v);
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [Matrix] {
        &mut self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    /// Mutable biases. In zero-bias mode callers must keep them at 0.
    pub fn biases_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.biases
    }

    /// Total absolute weight `W^{(l)}` of layer `l`.
    pub fn total_abs_weight(&self, l: usize) -> f64 {
        self.weights[l - 1].abs_sum()
    }

    /// Iterator over every weight in layer order, row-major within a layer.
    pub fn all_weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().flat_map(|w| w.as_slice().iter().copied())
    }

    /// Network output for one sample: linear output node over ReLU hidden layers.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        let mut act = x.to_vec();
        let mut next = Vec::new();
        let depth = self.depth();
        for l in 1..=depth {
            self.affine(l, &act, &mut next);
            if l < depth {
                for v in next.iter_mut() {
                    *v = v.max(0.0);
                }
            }
            std::mem::swap(&mut act, &mut next);
        }
        Ok(act[0])
    }

    /// Pre-activations of every layer `1..=H` for one sample.
    pub fn pre_activations(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_input(x)?;
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(self.depth());
        let mut act = x.to_vec();
        for l in 1..=self.depth() {
            let mut z = Vec::new();
            self.affine(l, &act, &mut z);
            act = z.iter().map(|v| v.max(0.0)).collect();
            out.push(z);
        }
        Ok(out)
    }

    pub fn predict(&self, features: &[Vec<f64>]) -> Result<Vec<f64>> {
        features.iter().map(|x| self.forward(x)).collect()
    }

    fn affine(&self, l: usize, input: &[f64], out: &mut Vec<f64>) {
        let w = &self.weights[l - 1];
        out.clear();
        out.extend_from_slice(&self.biases[l - 1]);
        for (i, &a) in input.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (o, &wij) in out.iter_mut().zip(w.row(i)) {
                *o += a * wij;
            }
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.arch.inputs() {
            return Err(Error::Shape(format!(
                "input has {} features, network expects {}",
                x.len(),
                self.arch.inputs()
            )));
        }
        Ok(())
    }
}

/// Draws every weight independently from `U[init_low, init_high)`; biases
/// too in trainable mode, zero otherwise.
pub fn init_network(arch: &NetworkArch, config: &TrainConfig) -> Result<LayeredNetwork> {
    arch.validate()?;
    config.validate()?;
    let dist = Uniform::new(config.init_low, config.init_high)
        .map_err(|e| Error::Config(format!("init bounds: {e}")))?;
    let mut rng = rng::stream(config.seed, 0);
    let mut net = LayeredNetwork::zeros(arch.clone());
    for w in net.weights.iter_mut() {
        for v in w.as_mut_slice() {
            *v = dist.sample(&mut rng);
        }
    }
    if arch.bias_mode() == BiasMode::Trainable {
        for b in net.biases.iter_mut() {
            for v in b.iter_mut() {
                *v = rng.sample(dist);
            }
        }
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(w1: f64, w2: f64) -> LayeredNetwork {
        let arch = NetworkArch::new(vec![1, 1, 1], BiasMode::Zero).unwrap();
        let mut net = LayeredNetwork::zeros(arch);
        net.set_weight(1, 0, 0, w1);
        net.set_weight(2, 0, 0, w2);
        net
    }

    #[test]
    fn forward_single_chain() {
        assert_eq!(chain(2.0, 3.0).forward(&[1.0]).unwrap(), 6.0);
        // dying ReLU
        assert_eq!(chain(-2.0, 3.0).forward(&[1.0]).unwrap(), 0.0);
        // output node is linear
        assert_eq!(chain(2.0, -3.0).forward(&[1.0]).unwrap(), -6.0);
    }

    #[test]
    fn forward_rejects_wrong_width() {
        assert!(matches!(chain(1.0, 1.0).forward(&[1.0, 2.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn init_respects_bounds_and_seed() {
        let arch = NetworkArch::uniform(10, 10, 10, BiasMode::Trainable).unwrap();
        let cfg = TrainConfig {
            seed: 11,
            ..TrainConfig::default()
        };
        let a = init_network(&arch, &cfg).unwrap();
        let b = init_network(&arch, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.all_weights().all(|w| (-0.05..=0.05).contains(&w)));
        assert!(a.biases().iter().flatten().all(|w| (-0.05..=0.05).contains(w)));
        let c = init_network(
            &arch,
            &TrainConfig {
                seed: 12,
                ..cfg.clone()
            },
        )
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn wide_init_spans_interval() {
        let arch = NetworkArch::uniform(10, 10, 10, BiasMode::Zero).unwrap();
        let cfg = TrainConfig {
            init_low: -1.0,
            init_high: 1.0,
            ..TrainConfig::default()
        };
        let net = init_network(&arch, &cfg).unwrap();
        assert!(net.all_weights().all(|w| (-1.0..=1.0).contains(&w)));
        assert!(net.all_weights().any(|w| w.abs() > 0.9));
        assert!(net.biases().iter().flatten().all(|&b| b == 0.0));
    }

    #[test]
    fn init_rejects_inverted_bounds() {
        let arch = NetworkArch::uniform(2, 2, 1, BiasMode::Zero).unwrap();
        let cfg = TrainConfig {
            init_low: 0.1,
            init_high: -0.1,
            ..TrainConfig::default()
        };
        assert!(matches!(init_network(&arch, &cfg), Err(Error::Config(_))));
    }
}
