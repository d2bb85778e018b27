use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcore::loss::loss_denominator;
use crate::netcore::{BiasMode, Dataset, LayeredNetwork};

use super::activity::PathActivityTable;
use super::paths::PathSet;

/// A single weight `w^{(layer)}_{from,to}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightId {
    pub layer: usize,
    pub from: usize,
    pub to: usize,
}

impl WeightId {
    pub fn new(layer: usize, from: usize, to: usize) -> Self {
        Self { layer, from, to }
    }

    pub(crate) fn check(&self, net: &LayeredNetwork) -> Result<()> {
        let depth = net.depth();
        let sizes = net.arch().layer_sizes();
        if self.layer == 0 || self.layer > depth || self.from >= sizes[self.layer - 1] || self.to >= sizes[self.layer] {
            return Err(Error::Index(format!(
                "weight ({}, {}, {}) outside architecture {:?}",
                self.layer, self.from, self.to, sizes
            )));
        }
        Ok(())
    }
}

pub(crate) fn require_zero_bias(net: &LayeredNetwork) -> Result<()> {
    if net.arch().bias_mode() != BiasMode::Zero {
        return Err(Error::UnsupportedMode(
            "the path-sum form holds only for zero-bias networks".into(),
        ));
    }
    Ok(())
}

fn weight_product(net: &LayeredNetwork, path: &[usize], skip: Option<usize>) -> f64 {
    (1..path.len())
        .filter(|&l| Some(l) != skip)
        .map(|l| net.weight(l, path[l - 1], path[l]))
        .product()
}

/// Network output as the sum over active paths of input times weight
/// product.
pub fn path_output(net: &LayeredNetwork, x: &[f64], paths: &PathSet) -> Result<f64> {
    require_zero_bias(net)?;
    let table = PathActivityTable::new(net, &[x.to_vec()], paths)?;
    Ok(paths
        .paths()
        .iter()
        .zip(table.activities(0))
        .filter(|(_, &a)| a == 1)
        .map(|(p, _)| x[p[0]] * weight_product(net, p, None))
        .sum())
}

/// Loss gradient of one weight from the paths running through it.
pub fn path_gradient(
    net: &LayeredNetwork,
    data: &Dataset,
    weight: WeightId,
    paths: &PathSet,
    halved: bool,
) -> Result<f64> {
    require_zero_bias(net)?;
    weight.check(net)?;
    let table = PathActivityTable::new(net, data.features(), paths)?;
    let through: Vec<(usize, &Vec<usize>)> = paths
        .paths()
        .iter()
        .enumerate()
        .filter(|(_, p)| p[weight.layer - 1] == weight.from && p[weight.layer] == weight.to)
        .collect();
    let mut total = 0.0;
    for (m, (x, &y)) in data.features().iter().zip(data.targets()).enumerate() {
        let delta_y = y - net.forward(x)?;
        let acts = table.activities(m);
        let s: f64 = through
            .iter()
            .filter(|(k, _)| acts[*k] == 1)
            .map(|(_, p)| x[p[0]] * weight_product(net, p, Some(weight.layer)))
            .sum();
        total += delta_y * s;
    }
    let scale = 2.0 / loss_denominator(halved);
    Ok(-scale * total / data.len() as f64)
}
