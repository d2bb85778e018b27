use serde::{Deserialize, Serialize};

use super::connectivity::ConnectivityField;
use super::stats::{fisher_z_interval, pearson, Correlation};
use crate::error::{Error, Result};

/// Shannon entropy (natural log) of `r` normalized to a distribution.
pub fn layer_entropy(r: &[f64]) -> Result<f64> {
    if r.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::Argument("entropy of a vector with negative or NaN entries".into()));
    }
    let total: f64 = r.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Argument("entropy of an all-zero vector".into()));
    }
    Ok(-r
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| {
            let p = v / total;
            p * p.ln()
        })
        .sum::<f64>())
}

/// Per-layer entropies and their one-layer increments, input side first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyProfile {
    pub entropy: Vec<f64>,
    /// `entropy[l + 1] - entropy[l]`.
    pub increments: Vec<f64>,
}

impl EntropyProfile {
    pub fn from_layers<'a>(layers: impl IntoIterator<Item = &'a [f64]>) -> Result<Self> {
        let entropy = layers.into_iter().map(layer_entropy).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            increments: increments(&entropy),
            entropy,
        })
    }

    pub fn of_field(field: &ConnectivityField) -> Result<Self> {
        Self::from_layers(field.r_profile())
    }
}

pub fn increments(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[1] - w[0]).collect()
}

/// `(x_t, x_{t+lag})` pairs of one series.
fn lag_pairs(series: &[f64], lag: usize, xs: &mut Vec<f64>, ys: &mut Vec<f64>) {
    if series.len() > lag {
        xs.extend_from_slice(&series[..series.len() - lag]);
        ys.extend_from_slice(&series[lag..]);
    }
}

/// Pearson correlation between increments `lag` layers apart.
pub fn increment_autocorrelation(increments: &[f64], lag: usize) -> Result<f64> {
    if increments.len() <= lag + 1 {
        return Err(Error::UndefinedCorrelation(format!(
            "{} increments leave fewer than 2 pairs at lag {lag}",
            increments.len()
        )));
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    lag_pairs(increments, lag, &mut xs, &mut ys);
    pearson(&xs, &ys)
}

/// Pools lagged pairs from every series before correlating, so series of
/// different lengths contribute in proportion to their pair counts.
pub fn pooled_autocorrelation<S: AsRef<[f64]>>(series: &[S], lag: usize) -> Result<Correlation> {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for s in series {
        lag_pairs(s.as_ref(), lag, &mut xs, &mut ys);
    }
    let r = pearson(&xs, &ys)?;
    Ok(Correlation {
        r,
        n: xs.len(),
        ci95: fisher_z_interval(r, xs.len()),
    })
}
