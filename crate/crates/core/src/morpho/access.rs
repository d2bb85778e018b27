use serde::{Deserialize, Serialize};

use crate::netcore::LayeredNetwork;

/// Global magnitude threshold below which weights are pruned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdRule {
    #[default]
    Median,
    Mean,
}

impl ThresholdRule {
    /// Threshold over `|w|` of every weight in the network. The median of an
    /// even count is the mean of the two central values.
    pub fn threshold(self, net: &LayeredNetwork) -> f64 {
        let mut mags: Vec<f64> = net.all_weights().map(f64::abs).collect();
        if mags.is_empty() {
            return 0.0;
        }
        match self {
            ThresholdRule::Mean => mags.iter().sum::<f64>() / mags.len() as f64,
            ThresholdRule::Median => {
                mags.sort_by(f64::total_cmp);
                let n = mags.len();
                if n % 2 == 1 {
                    mags[n / 2]
                } else {
                    0.5 * (mags[n / 2 - 1] + mags[n / 2])
                }
            }
        }
    }
}

/// Accessible-node counts per hidden layer after pruning, listed from the
/// output side: index 0 is the last hidden layer.
pub fn accessible_nodes(net: &LayeredNetwork, rule: ThresholdRule) -> Vec<usize> {
    accessible_nodes_at(net, rule.threshold(net))
}

/// As [`accessible_nodes`] with an explicit threshold; weights with
/// `|w| < threshold` are removed.
pub fn accessible_nodes_at(net: &LayeredNetwork, threshold: f64) -> Vec<usize> {
    let depth = net.depth();
    // reachable[j] for the layer currently being expanded; starts at the output
    let mut reachable = vec![true; 1];
    let mut counts = Vec::with_capacity(depth - 1);
    for l in (1..depth).rev() {
        let w = net.layer(l + 1);
        let next: Vec<bool> = (0..w.rows())
            .map(|i| {
                w.row(i)
                    .iter()
                    .zip(&reachable)
                    .any(|(v, &ok)| ok && v.abs() >= threshold)
            })
            .collect();
        counts.push(next.iter().filter(|&&b| b).count());
        reachable = next;
    }
    counts
}
