use serde::{Deserialize, Serialize};

use super::access::{accessible_nodes, ThresholdRule};
use super::connectivity::{connectivities, ConnectivityField};
use super::embedding::embedding_dimension;
use super::entropy::{increment_autocorrelation, EntropyProfile};
use super::stats::pearson;
use crate::error::{Error, Result};
use crate::netcore::{Dataset, LayeredNetwork};

/// Thresholds of the structure-formation classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StructureThresholds {
    /// Minimum Pearson correlation between ingoing and outgoing fractions.
    pub rho_min: f64,
    /// Maximum lag-1 autocorrelation of entropy increments.
    pub a_max: f64,
}

impl Default for StructureThresholds {
    fn default() -> Self {
        Self {
            rho_min: 0.5,
            a_max: -0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisOptions {
    pub threshold_rule: ThresholdRule,
    pub structure: StructureThresholds,
    /// Increment autocorrelations are reported for lags `1..=max_lag`.
    pub max_lag: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            threshold_rule: ThresholdRule::Median,
            structure: StructureThresholds::default(),
            max_lag: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagValue {
    pub lag: usize,
    /// `None` when the correlation is undefined.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorphologyReport {
    pub connectivity: ConnectivityField,
    pub entropy: EntropyProfile,
    /// Output side first.
    pub accessible_nodes: Vec<usize>,
    /// Input side first; absent when no data were supplied.
    pub embedding_dimension: Option<Vec<usize>>,
    pub omega_correlation: Option<f64>,
    pub increment_autocorrelation: Vec<LagValue>,
    /// `None` when a required correlation is undefined.
    pub structure_formed: Option<bool>,
    pub options: AnalysisOptions,
}

impl MorphologyReport {
    pub fn lag(&self, lag: usize) -> Option<f64> {
        self.increment_autocorrelation
            .iter()
            .find(|v| v.lag == lag)
            .and_then(|v| v.value)
    }
}

pub fn analyze_network(
    net: &LayeredNetwork,
    data: Option<&Dataset>,
    options: &AnalysisOptions,
) -> Result<MorphologyReport> {
    let connectivity = connectivities(net)?;
    let entropy = EntropyProfile::of_field(&connectivity)?;
    let omega_correlation = pearson(&connectivity.omega_in_all(), &connectivity.omega_out_all()).ok();
    let increment_autocorrelation = (1..=options.max_lag)
        .map(|lag| LagValue {
            lag,
            value: increment_autocorrelation(&entropy.increments, lag).ok(),
        })
        .collect();
    let embedding_dimension = data.map(|d| embedding_dimension(net, d)).transpose()?;
    let mut report = MorphologyReport {
        accessible_nodes: accessible_nodes(net, options.threshold_rule),
        connectivity,
        entropy,
        embedding_dimension,
        omega_correlation,
        increment_autocorrelation,
        structure_formed: None,
        options: options.clone(),
    };
    report.structure_formed = structure_classifier(&report, &options.structure).ok();
    Ok(report)
}

/// Structure has formed when ingoing and outgoing fractions are positively
/// correlated across hidden nodes and entropy increments alternate.
pub fn structure_classifier(report: &MorphologyReport, thresholds: &StructureThresholds) -> Result<bool> {
    let rho = report
        .omega_correlation
        .ok_or_else(|| Error::UndefinedCorrelation("unclassifiable: fraction correlation undefined".into()))?;
    let a1 = report
        .lag(1)
        .ok_or_else(|| Error::UndefinedCorrelation("unclassifiable: lag-1 autocorrelation undefined".into()))?;
    Ok(rho >= thresholds.rho_min && a1 <= thresholds.a_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::{init_network, BiasMode, NetworkArch, TrainConfig};

    /// Strong weights connect channel nodes of adjacent layers; the channel
    /// is one node wide in odd hidden layers and three in even ones.
    fn channel_net() -> LayeredNetwork {
        let arch = NetworkArch::uniform(6, 6, 9, BiasMode::Zero).unwrap();
        let depth = arch.depth();
        let in_channel = |l: usize, n: usize| match l {
            0 => true,
            l if l == depth => true,
            l if l % 2 == 1 => n == 0,
            _ => n < 3,
        };
        let mut net = LayeredNetwork::zeros(arch);
        for l in 1..=depth {
            let w = net.layer_mut(l);
            for i in 0..w.rows() {
                for j in 0..w.cols() {
                    let strong = in_channel(l - 1, i) && in_channel(l, j);
                    w.set(i, j, if strong { 1.0 } else { 0.05 });
                }
            }
        }
        net
    }

    #[test]
    fn channel_net_is_structured() {
        let report = analyze_network(&channel_net(), None, &AnalysisOptions::default()).unwrap();
        assert!(report.omega_correlation.unwrap() > 0.9);
        assert!(report.lag(1).unwrap() < -0.9);
        assert_eq!(report.structure_formed, Some(true));
    }

    #[test]
    fn random_nets_are_not_structured() {
        let arch = NetworkArch::uniform(10, 10, 10, BiasMode::Zero).unwrap();
        let mut formed = 0;
        for seed in 0..50 {
            let cfg = TrainConfig { seed, ..TrainConfig::default() };
            let net = init_network(&arch, &cfg).unwrap();
            let report = analyze_network(&net, None, &AnalysisOptions::default()).unwrap();
            assert!(report.omega_correlation.unwrap().abs() < 0.5);
            formed += usize::from(report.structure_formed == Some(true));
        }
        assert!(formed <= 2, "{formed} of 50 random nets classified as structured");
    }

    #[test]
    fn undefined_correlation_is_unclassifiable() {
        let arch = NetworkArch::uniform(4, 4, 4, BiasMode::Zero).unwrap();
        let net = LayeredNetwork::layer_constant(arch, |_| 0.1);
        let report = analyze_network(&net, None, &AnalysisOptions::default()).unwrap();
        assert_eq!(report.omega_correlation, None);
        assert_eq!(report.structure_formed, None);
        assert!(matches!(
            structure_classifier(&report, &StructureThresholds::default()),
            Err(Error::UndefinedCorrelation(_))
        ));
    }

    #[test]
    fn report_shapes() {
        let arch = NetworkArch::uniform(3, 4, 5, BiasMode::Zero).unwrap();
        let net = init_network(&arch, &TrainConfig::default()).unwrap();
        let data = Dataset::new("d", vec![vec![0.1, 0.2, 0.3]; 4], vec![1.0; 4]).unwrap();
        let r = analyze_network(&net, Some(&data), &AnalysisOptions::default()).unwrap();
        assert_eq!(r.connectivity.layers.len(), 5);
        assert_eq!(r.entropy.entropy.len(), 5);
        assert_eq!(r.entropy.increments.len(), 4);
        assert_eq!(r.accessible_nodes.len(), 5);
        assert_eq!(r.embedding_dimension.as_ref().unwrap().len(), 5);
        assert_eq!(r.increment_autocorrelation.len(), 3);
        let json = serde_json::to_string(&r).unwrap();
        let back: MorphologyReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
