use serde::{Deserialize, Serialize};

use super::arch::BiasMode;
use super::dataset::Dataset;
use super::loss::loss_denominator;
use super::matrix::Matrix;
use super::network::LayeredNetwork;
use crate::error::{Error, Result};

/// `dL/dw` for every weight and bias, laid out like [`LayeredNetwork`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &LayeredNetwork) -> Self {
        Self {
            weights: net
                .weights()
                .iter()
                .map(|w| Matrix::zeros(w.rows(), w.cols()))
                .collect(),
            biases: net.biases().iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    /// Gradient of weight `w_{ab}^{(l)}`.
    pub fn weight(&self, l: usize, a: usize, b: usize) -> f64 {
        self.weights[l - 1].get(a, b)
    }

    fn clear(&mut self) {
        for w in &mut self.weights {
            w.as_mut_slice().fill(0.0);
        }
        for b in &mut self.biases {
            b.fill(0.0);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.weights
            .iter()
            .flat_map(|w| w.as_slice())
            .chain(self.biases.iter().flatten())
            .fold(0.0f64, |m, g| m.max(g.abs()))
    }
}

/// Reusable per-sample buffers for reverse-mode differentiation.
#[derive(Debug, Default)]
pub(crate) struct Workspace {
    /// Post-activations, index 0 holds the input.
    acts: Vec<Vec<f64>>,
    /// Pre-activations of layers `1..=H`.
    pre: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

impl Workspace {
    pub(crate) fn for_net(net: &LayeredNetwork) -> Self {
        let sizes = net.arch().layer_sizes();
        Self {
            acts: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            pre: sizes[1..].iter().map(|&n| vec![0.0; n]).collect(),
            delta: Vec::new(),
            delta_prev: Vec::new(),
        }
    }
}

/// Exact gradient of the MSE loss over `batch`. The ReLU derivative at a
/// pre-activation of exactly 0 is taken as 1.
pub fn backprop_gradient(net: &LayeredNetwork, batch: &Dataset, halved: bool) -> Result<Gradients> {
    if batch.n_features() != net.arch().inputs() {
        return Err(Error::Shape(format!(
            "batch has {} features, network expects {}",
            batch.n_features(),
            net.arch().inputs()
        )));
    }
    let mut grads = Gradients::zeros_like(net);
    let mut ws = Workspace::for_net(net);
    let indices: Vec<usize> = (0..batch.len()).collect();
    accumulate(net, batch, &indices, halved, &mut ws, &mut grads);
    Ok(grads)
}

/// Overwrites `grads` with the gradient over `data[indices]` and returns the
/// batch loss. Shapes are assumed checked by the caller.
pub(crate) fn accumulate(
    net: &LayeredNetwork,
    data: &Dataset,
    indices: &[usize],
    halved: bool,
    ws: &mut Workspace,
    grads: &mut Gradients,
) -> f64 {
    grads.clear();
    let depth = net.depth();
    let m = indices.len() as f64;
    // dL/dy_hat = -(y - y_hat) * 2 / (denominator * M)
    let scale = 2.0 / (loss_denominator(halved) * m);
    let trainable = net.arch().bias_mode() == BiasMode::Trainable;
    let mut sse = 0.0;

    for &idx in indices {
        let (x, y) = data.sample(idx);
        ws.acts[0].copy_from_slice(x);
        for l in 1..=depth {
            let (before, after) = ws.acts.split_at_mut(l);
            let input = &before[l - 1];
            let z = &mut ws.pre[l - 1];
            z.copy_from_slice(&net.biases()[l - 1]);
            let w = net.layer(l);
            for (i, &a) in input.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (zj, &wij) in z.iter_mut().zip(w.row(i)) {
                    *zj += a * wij;
                }
            }
            let out = &mut after[0];
            if l < depth {
                for (o, &zj) in out.iter_mut().zip(z.iter()) {
                    *o = zj.max(0.0);
                }
            } else {
                out.copy_from_slice(z);
            }
        }
        let y_hat = ws.acts[depth][0];
        let err = y_hat - y;
        sse += err * err;

        ws.delta.clear();
        ws.delta.push(err * scale);
        for l in (1..=depth).rev() {
            let w = net.layer(l);
            let gw = &mut grads.weights[l - 1];
            let input = &ws.acts[l - 1];
            for (i, &a) in input.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (g, &d) in gw.row_mut(i).iter_mut().zip(&ws.delta) {
                    *g += a * d;
                }
            }
            if trainable {
                for (g, &d) in grads.biases[l - 1].iter_mut().zip(&ws.delta) {
                    *g += d;
                }
            }
            if l > 1 {
                let z_prev = &ws.pre[l - 2];
                ws.delta_prev.clear();
                for (i, &zi) in z_prev.iter().enumerate() {
                    // Heaviside with theta(0) = 1
                    let v = if zi >= 0.0 {
                        w.row(i).iter().zip(&ws.delta).map(|(wij, d)| wij * d).sum()
                    } else {
                        0.0
                    };
                    ws.delta_prev.push(v);
                }
                std::mem::swap(&mut ws.delta, &mut ws.delta_prev);
            }
        }
    }
    sse / (loss_denominator(halved) * m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::arch::NetworkArch;

    fn chain(w1: f64, w2: f64) -> LayeredNetwork {
        let arch = NetworkArch::new(vec![1, 1, 1], BiasMode::Zero).unwrap();
        let mut net = LayeredNetwork::zeros(arch);
        net.set_weight(1, 0, 0, w1);
        net.set_weight(2, 0, 0, w2);
        net
    }

    #[test]
    fn single_path_gradient_by_hand() {
        // y_hat = x * w1 * w2 when active; dL/dw1 = -(1/M) sum dY * x * w2
        let net = chain(0.5, 3.0);
        let data = Dataset::new("t", vec![vec![1.0], vec![2.0]], vec![2.0, 1.0]).unwrap();
        let g = backprop_gradient(&net, &data, true).unwrap();
        let dy = [2.0 - 1.5, 1.0 - 3.0];
        let xs = [1.0, 2.0];
        let expect_w1 = -(dy[0] * xs[0] * 3.0 + dy[1] * xs[1] * 3.0) / 2.0;
        let expect_w2 = -(dy[0] * xs[0] * 0.5 + dy[1] * xs[1] * 0.5) / 2.0;
        assert!((g.weight(1, 0, 0) - expect_w1).abs() < 1e-15);
        assert!((g.weight(2, 0, 0) - expect_w2).abs() < 1e-15);
    }

    #[test]
    fn inactive_paths_give_zero_gradient() {
        let net = chain(-1.0, 3.0);
        let data = Dataset::new("t", vec![vec![1.0], vec![2.0]], vec![2.0, 1.0]).unwrap();
        let g = backprop_gradient(&net, &data, true).unwrap();
        assert_eq!(g.weight(1, 0, 0), 0.0);
        assert_eq!(g.weight(2, 0, 0), 0.0);
    }

    #[test]
    fn relu_derivative_at_zero_is_one() {
        // pre-activation exactly 0: x = 0 so the hidden node sits on the kink
        let net = chain(1.0, 1.0);
        let data = Dataset::new("t", vec![vec![0.0]], vec![1.0]).unwrap();
        let g = backprop_gradient(&net, &data, true).unwrap();
        // dL/dw2 = -(dY) * relu(0) = 0 ; dL/dw1 = -(dY) * x * w2 * theta(0) = 0 * ... = 0
        assert_eq!(g.weight(2, 0, 0), 0.0);
        // bias-free kink: delta passes through (theta(0)=1) but x = 0 kills the weight gradient.
        let arch = NetworkArch::new(vec![1, 1, 1], BiasMode::Trainable).unwrap();
        let mut net = LayeredNetwork::zeros(arch);
        net.set_weight(2, 0, 0, 2.0);
        let g = backprop_gradient(&net, &data, true).unwrap();
        // hidden bias gradient = dL/dy_hat * w2 * theta(0) = -(1 - 0) * 2
        assert_eq!(g.biases[0][0], -2.0);
    }
}
