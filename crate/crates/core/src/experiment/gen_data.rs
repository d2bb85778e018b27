use serde::Serialize;

use super::config::ExperimentConfig;
use super::output::{create_dir, write_json, Provenance};
use crate::datagen::{gen_clusters, save_csv_with_comments, ClusterSpec};
use crate::error::Result;

pub const DATA_FILE: &str = "data.csv";
pub const DATA_SPEC_FILE: &str = "data.json";

#[derive(Debug, Clone, Serialize)]
pub struct GenDataSummary {
    pub provenance: Provenance,
    pub spec: ClusterSpec,
    pub samples: usize,
    pub features: usize,
    pub label_counts: Vec<usize>,
}

/// Writes `data.csv` and `data.json` into the output directory. The master
/// seed seeds the generator.
pub fn cmd_gen_data(cfg: &ExperimentConfig) -> Result<GenDataSummary> {
    let provenance = Provenance::new("gen-data", cfg);
    let spec = cfg.data.cluster_spec(cfg.master_seed);
    let data = gen_clusters(&spec)?;
    create_dir(&cfg.output_dir)?;
    save_csv_with_comments(&data, &cfg.output_dir.join(DATA_FILE), &provenance.lines())?;
    let mut label_counts = vec![0; spec.n_clusters];
    for &y in data.targets() {
        label_counts[y as usize - 1] += 1;
    }
    let summary = GenDataSummary {
        provenance,
        spec,
        samples: data.len(),
        features: data.n_features(),
        label_counts,
    };
    write_json(&cfg.output_dir.join(DATA_SPEC_FILE), &summary)?;
    Ok(summary)
}
