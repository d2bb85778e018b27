use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morpho::{
    bimodality_coefficient, increment_autocorrelation, increments, mode_split, pooled_autocorrelation, Correlation,
    ModeSplit, Z_95,
};

/// Distribution of pooled final values across an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueSummary {
    pub count: usize,
    pub bimodality: Option<f64>,
    pub modes: Option<ModeSplit>,
    /// `bins + 1` equally spaced edges over the observed range.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn final_value_summary(values: &[f64], bins: usize) -> Result<ValueSummary> {
    if values.is_empty() || bins == 0 {
        return Err(Error::Argument("histogram needs values and at least one bin".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| if i == bins { hi } else { lo + width * i as f64 }).collect();
    let mut counts = vec![0; bins];
    for &v in values {
        let i = if width > 0.0 { (((v - lo) / width) as usize).min(bins - 1) } else { 0 };
        counts[i] += 1;
    }
    Ok(ValueSummary {
        count: values.len(),
        bimodality: bimodality_coefficient(values).ok(),
        modes: mode_split(values).ok(),
        edges,
        counts,
    })
}

/// Autocorrelation of layer-to-layer increments at one lag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagSummary {
    pub lag: usize,
    /// Runs whose autocorrelation is defined at this lag.
    pub runs: usize,
    /// Mean of the per-run autocorrelations.
    pub mean: Option<f64>,
    /// Normal-approximation 95% interval of the mean; needs two runs.
    pub ci95: Option<(f64, f64)>,
    /// Autocorrelation of the pairs pooled over all runs.
    pub pooled: Option<Correlation>,
}

/// Lag `1..=max_lag` autocorrelations of the increments of each final
/// amplitude profile.
pub fn amplitude_lag_summary<S: AsRef<[f64]>>(profiles: &[S], max_lag: usize) -> Vec<LagSummary> {
    let incs: Vec<Vec<f64>> = profiles.iter().map(|p| increments(p.as_ref())).collect();
    (1..=max_lag)
        .map(|lag| {
            let values: Vec<f64> = incs.iter().filter_map(|d| increment_autocorrelation(d, lag).ok()).collect();
            let k = values.len();
            let mean = (k > 0).then(|| values.iter().sum::<f64>() / k as f64);
            let ci95 = match mean {
                Some(m) if k >= 2 => {
                    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (k - 1) as f64;
                    let half = Z_95 * (var / k as f64).sqrt();
                    Some((m - half, m + half))
                }
                _ => None,
            };
            LagSummary {
                lag,
                runs: k,
                mean,
                ci95,
                pooled: pooled_autocorrelation(&incs, lag).ok(),
            }
        })
        .collect()
}
