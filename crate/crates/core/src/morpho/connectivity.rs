use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcore::LayeredNetwork;

/// Weight fractions of one hidden layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerConnectivity {
    /// Hidden layer index `l` in `1..H`.
    pub layer: usize,
    pub omega_in: Vec<f64>,
    pub omega_out: Vec<f64>,
    /// Connectivity `r = omega_in * omega_out` per node.
    pub r: Vec<f64>,
}

impl LayerConnectivity {
    /// Channel amplitude: the sum of the layer's connectivities.
    pub fn amplitude(&self) -> f64 {
        self.r.iter().sum()
    }
}

/// Connectivities of every hidden layer, ordered from input to output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityField {
    pub layers: Vec<LayerConnectivity>,
}

impl ConnectivityField {
    pub fn omega_in_all(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.omega_in.iter().copied()).collect()
    }

    pub fn omega_out_all(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.omega_out.iter().copied()).collect()
    }

    pub fn r_profile(&self) -> Vec<&[f64]> {
        self.layers.iter().map(|l| l.r.as_slice()).collect()
    }
}

/// Ingoing fraction of node `n` in hidden layer `l` is its share of the
/// absolute weight of layer `l`; the outgoing fraction is its share of
/// layer `l + 1`.
pub fn connectivities(net: &LayeredNetwork) -> Result<ConnectivityField> {
    let depth = net.depth();
    let mut totals = Vec::with_capacity(depth);
    for l in 1..=depth {
        let t = net.total_abs_weight(l);
        if !(t > 0.0) {
            return Err(Error::DegenerateLayer { layer: l });
        }
        totals.push(t);
    }
    let layers = (1..depth)
        .map(|l| {
            let omega_in: Vec<f64> = net
                .layer(l)
                .abs_col_sums()
                .into_iter()
                .map(|s| s / totals[l - 1])
                .collect();
            let omega_out: Vec<f64> = net
                .layer(l + 1)
                .abs_row_sums()
                .into_iter()
                .map(|s| s / totals[l])
                .collect();
            let r = omega_in.iter().zip(&omega_out).map(|(a, b)| a * b).collect();
            LayerConnectivity {
                layer: l,
                omega_in,
                omega_out,
                r,
            }
        })
        .collect();
    Ok(ConnectivityField { layers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::{BiasMode, Matrix, NetworkArch};

    #[test]
    fn homogeneous_layer_gives_inverse_square_width() {
        let arch = NetworkArch::uniform(10, 10, 2, BiasMode::Zero).unwrap();
        let net = LayeredNetwork::layer_constant(arch, |_| -0.03);
        let field = connectivities(&net).unwrap();
        assert_eq!(field.layers.len(), 2);
        for layer in &field.layers {
            for &r in &layer.r {
                assert!((r - 0.01).abs() < 1e-15);
            }
            assert!((layer.amplitude() - 0.1).abs() < 1e-14);
        }
    }

    #[test]
    fn single_carrier_node() {
        let arch = NetworkArch::new(vec![2, 3, 1], BiasMode::Zero).unwrap();
        let w1 = Matrix::from_fn(2, 3, |_, j| if j == 1 { 0.7 } else { 0.0 });
        let w2 = Matrix::from_vec(3, 1, vec![0.0, -2.0, 0.0]);
        let net = LayeredNetwork::from_parts(arch, vec![w1, w2], vec![vec![0.0; 3], vec![0.0]]).unwrap();
        let f = connectivities(&net).unwrap();
        assert_eq!(f.layers[0].r, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn hand_product_two_nodes() {
        // in-fractions (0.75, 0.25), out-fractions (0.5, 0.5)
        let arch = NetworkArch::new(vec![1, 2, 1], BiasMode::Zero).unwrap();
        let w1 = Matrix::from_vec(1, 2, vec![3.0, -1.0]);
        let w2 = Matrix::from_vec(2, 1, vec![0.5, -0.5]);
        let net = LayeredNetwork::from_parts(arch, vec![w1, w2], vec![vec![0.0; 2], vec![0.0]]).unwrap();
        let f = connectivities(&net).unwrap();
        assert_eq!(f.layers[0].omega_in, vec![0.75, 0.25]);
        assert_eq!(f.layers[0].r, vec![0.375, 0.125]);
    }

    #[test]
    fn zero_layer_is_degenerate() {
        let arch = NetworkArch::new(vec![2, 2, 2, 1], BiasMode::Zero).unwrap();
        let net = LayeredNetwork::layer_constant(arch, |l| if l == 2 { 0.0 } else { 1.0 });
        assert!(matches!(connectivities(&net), Err(Error::DegenerateLayer { layer: 2 })));
    }
}
