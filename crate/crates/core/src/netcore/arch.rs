use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BiasMode {
    /// No biases; every bias is fixed at exactly 0.
    #[default]
    Zero,
    Trainable,
}

/// Layer widths `n_0 ..= n_H` of a fully connected ReLU network with one
/// linear output node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkArch {
    layer_sizes: Vec<usize>,
    #[serde(default)]
    hidden_activation: Activation,
    #[serde(default)]
    bias_mode: BiasMode,
}

impl NetworkArch {
    pub fn new(layer_sizes: Vec<usize>, bias_mode: BiasMode) -> Result<Self> {
        if layer_sizes.len() < 3 {
            return Err(Error::Config(format!(
                "need input, at least one hidden layer and output; got {} layer sizes",
                layer_sizes.len()
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        if *layer_sizes.last().unwrap() != 1 {
            return Err(Error::Config(format!(
                "output layer must have exactly one node, got {}",
                layer_sizes.last().unwrap()
            )));
        }
        Ok(Self {
            layer_sizes,
            hidden_activation: Activation::Relu,
            bias_mode,
        })
    }

    /// `inputs`, then `hidden_layers` layers of `width`, then the output node.
    pub fn uniform(inputs: usize, width: usize, hidden_layers: usize, bias_mode: BiasMode) -> Result<Self> {
        let mut sizes = vec![inputs];
        sizes.extend(std::iter::repeat_n(width, hidden_layers));
        sizes.push(1);
        Self::new(sizes, bias_mode)
    }

    /// Re-checks invariants, e.g. after deserialization.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.layer_sizes.clone(), self.bias_mode).map(|_| ())
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    /// Number of weight layers `H`.
    pub fn depth(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn width(&self, layer: usize) -> usize {
        self.layer_sizes[layer]
    }

    /// Widths of the hidden layers `1..H`.
    pub fn hidden_sizes(&self) -> &[usize] {
        &self.layer_sizes[1..self.layer_sizes.len() - 1]
    }

    pub fn bias_mode(&self) -> BiasMode {
        self.bias_mode
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden_activation
    }

    pub fn with_bias_mode(mut self, bias_mode: BiasMode) -> Self {
        self.bias_mode = bias_mode;
        self
    }

    pub fn weight_count(&self) -> usize {
        self.layer_sizes.windows(2).map(|w| w[0] * w[1]).sum()
    }
}
