//! Morphology diagnostics of trained networks: weight fractions and
//! connectivities, per-layer entropy, accessibility under pruning,
//! embedding dimension, and the statistics used to summarize them.

pub mod access;
pub mod connectivity;
pub mod embedding;
pub mod entropy;
pub mod report;
pub mod stats;

pub use access::{accessible_nodes, accessible_nodes_at, ThresholdRule};
pub use connectivity::{connectivities, ConnectivityField, LayerConnectivity};
pub use embedding::embedding_dimension;
pub use entropy::{increment_autocorrelation, increments, layer_entropy, pooled_autocorrelation, EntropyProfile};
pub use report::{analyze_network, structure_classifier, AnalysisOptions, LagValue, MorphologyReport, StructureThresholds};
pub use stats::{
    bimodality_coefficient, fisher_exact, fisher_z_interval, mode_split, pearson, ContingencyTable2x2,
    Correlation, ModeSplit, BIMODALITY_THRESHOLD, Z_95,
};
