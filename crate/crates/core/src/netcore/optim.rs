use serde::{Deserialize, Serialize};

use super::arch::BiasMode;
use super::backprop::Gradients;
use super::network::LayeredNetwork;
use super::train::TrainConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    #[default]
    Adam,
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// Optimizer memory carried between steps.
#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerState {
    Sgd,
    Adam {
        step: u64,
        m: Gradients,
        v: Gradients,
    },
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, net: &LayeredNetwork) -> Self {
        match kind {
            OptimizerKind::Sgd => OptimizerState::Sgd,
            OptimizerKind::Adam => OptimizerState::Adam {
                step: 0,
                m: Gradients::zeros_like(net),
                v: Gradients::zeros_like(net),
            },
        }
    }
}

/// Applies one update in place. SGD is `w <- w - lr * g`; Adam uses
/// bias-corrected first and second moment estimates.
pub fn optimizer_step(
    net: &mut LayeredNetwork,
    grads: &Gradients,
    config: &TrainConfig,
    state: &mut OptimizerState,
) -> Result<()> {
    if grads.weights.len() != net.depth()
        || grads
            .weights
            .iter()
            .zip(net.weights())
            .any(|(g, w)| g.rows() != w.rows() || g.cols() != w.cols())
    {
        return Err(Error::Shape("gradient layout does not match network".into()));
    }
    let lr = config.learning_rate;
    let update_biases = net.arch().bias_mode() == BiasMode::Trainable;
    match state {
        OptimizerState::Sgd => {
            for (w, g) in net.weights_mut().iter_mut().zip(&grads.weights) {
                for (wi, gi) in w.as_mut_slice().iter_mut().zip(g.as_slice()) {
                    *wi -= lr * gi;
                }
            }
            if update_biases {
                for (b, g) in net.biases_mut().iter_mut().zip(&grads.biases) {
                    for (bi, gi) in b.iter_mut().zip(g) {
                        *bi -= lr * gi;
                    }
                }
            }
        }
        OptimizerState::Adam { step, m, v } => {
            *step += 1;
            let t = *step as i32;
            let c1 = 1.0 - ADAM_BETA1.powi(t);
            let c2 = 1.0 - ADAM_BETA2.powi(t);
            let adam = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
                for i in 0..p.len() {
                    m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
                    v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
                    let m_hat = m[i] / c1;
                    let v_hat = v[i] / c2;
                    p[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
                }
            };
            for l in 0..net.depth() {
                adam(
                    net.weights_mut()[l].as_mut_slice(),
                    grads.weights[l].as_slice(),
                    m.weights[l].as_mut_slice(),
                    v.weights[l].as_mut_slice(),
                );
                if update_biases {
                    adam(
                        &mut net.biases_mut()[l],
                        &grads.biases[l],
                        &mut m.biases[l],
                        &mut v.biases[l],
                    );
                }
            }
        }
    }
    Ok(())
}
