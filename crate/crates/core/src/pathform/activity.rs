use crate::error::Result;
use crate::netcore::LayeredNetwork;

use super::paths::PathSet;

/// Heaviside step with `theta(0) = 1`.
#[inline]
pub fn heaviside(z: f64) -> f64 {
    if z >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Pre-activations, nodal activities and path activities for a batch of
/// inputs.
///
/// Only hidden nodes gate a path: input nodes pass their value through and
/// the output node is linear.
#[derive(Debug, Clone, PartialEq)]
pub struct PathActivityTable {
    /// `[sample][layer 1..=H][node]`, stored at `layer - 1`.
    pre_activations: Vec<Vec<Vec<f64>>>,
    /// `[sample][path]`.
    activity: Vec<Vec<u8>>,
}

impl PathActivityTable {
    pub fn new(net: &LayeredNetwork, inputs: &[Vec<f64>], paths: &PathSet) -> Result<Self> {
        paths.check_arch(net.arch())?;
        let depth = net.depth();
        let pre_activations = inputs
            .iter()
            .map(|x| net.pre_activations(x))
            .collect::<Result<Vec<_>>>()?;
        let activity = pre_activations
            .iter()
            .map(|z| {
                paths
                    .paths()
                    .iter()
                    .map(|p| (1..depth).all(|l| z[l - 1][p[l]] >= 0.0) as u8)
                    .collect()
            })
            .collect();
        Ok(Self {
            pre_activations,
            activity,
        })
    }

    pub fn samples(&self) -> usize {
        self.activity.len()
    }

    pub fn activity(&self, sample: usize, path: usize) -> u8 {
        self.activity[sample][path]
    }

    pub fn activities(&self, sample: usize) -> &[u8] {
        &self.activity[sample]
    }

    pub fn pre_activation(&self, sample: usize, layer: usize, node: usize) -> f64 {
        self.pre_activations[sample][layer - 1][node]
    }

    /// Nodal activity; inputs and the output node always count as active.
    pub fn node_activity(&self, sample: usize, layer: usize, node: usize) -> f64 {
        let depth = self.pre_activations[sample].len();
        if layer == 0 || layer == depth {
            1.0
        } else {
            heaviside(self.pre_activation(sample, layer, node))
        }
    }
}
