use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::output::{cell, create_dir, write_json, CsvText, Provenance};
use crate::datagen::{gen_clusters, load_csv, split};
use crate::error::{Error, Result};
use crate::netcore::{accuracy, init_network, train, Dataset, NetworkArch};
use crate::rng::derive_seed;

/// Default ensemble size of `train`.
pub const TRAIN_RUNS: usize = 100;
pub const ACCURACY_FILE: &str = "accuracy.csv";

/// Train and test splits of the experiment's dataset: the CSV in
/// `data.input` if set, synthetic clusters seeded by the master seed
/// otherwise. The split is seeded by the master seed.
pub fn experiment_data(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    let data = match &cfg.data.input {
        Some(path) => load_csv(path)?,
        None => gen_clusters(&cfg.data.cluster_spec(cfg.master_seed))?,
    };
    split(&data, cfg.data.train_fraction, cfg.master_seed)
}

pub fn run_dir_name(run: usize) -> String {
    format!("run_{run:04}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainRunRecord {
    pub run: usize,
    pub seed: u64,
    /// `"ok"` or the divergence message.
    pub status: String,
    pub final_loss: Option<f64>,
    pub train_accuracy: Option<f64>,
    pub test_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainSummary {
    pub provenance: Provenance,
    pub dataset: String,
    pub train_samples: usize,
    pub test_samples: usize,
    pub arch: NetworkArch,
    pub runs: Vec<TrainRunRecord>,
}

/// Trains the ensemble, writing one snapshot directory per run under
/// `runs/`, the accuracy table and `train_summary.json`. A diverging run is
/// recorded and the remaining runs continue.
pub fn cmd_train(cfg: &ExperimentConfig) -> Result<TrainSummary> {
    let provenance = Provenance::new("train", cfg);
    let runs = cfg.runs(TRAIN_RUNS)?;
    let (train_set, test_set) = experiment_data(cfg)?;
    let arch = cfg.train.arch(train_set.n_features())?;
    cfg.train.train_config(0)?;
    let runs_dir = cfg.output_dir.join("runs");
    create_dir(&runs_dir)?;

    let records: Vec<TrainRunRecord> = (0..runs)
        .into_par_iter()
        .map(|run| -> Result<TrainRunRecord> {
            let seed = derive_seed(cfg.master_seed, run as u64);
            let tc = cfg.train.train_config(seed)?;
            let net = init_network(&arch, &tc)?;
            match train(&net, &train_set, &tc) {
                Ok(series) => {
                    series.save_dir(&runs_dir.join(run_dir_name(run)))?;
                    let last = series.last().expect("series holds the initial network");
                    Ok(TrainRunRecord {
                        run,
                        seed,
                        status: "ok".into(),
                        final_loss: series.loss_history().last().copied(),
                        train_accuracy: Some(accuracy(last, &train_set)?),
                        test_accuracy: Some(accuracy(last, &test_set)?),
                    })
                }
                Err(Error::Divergence(msg)) => Ok(TrainRunRecord {
                    run,
                    seed,
                    status: format!("diverged: {msg}"),
                    final_loss: None,
                    train_accuracy: None,
                    test_accuracy: None,
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let mut csv = CsvText::new(&provenance, &["run", "seed", "status", "final_loss", "train_accuracy", "test_accuracy"]);
    for r in &records {
        csv.row([
            r.run.to_string(),
            r.seed.to_string(),
            r.status.replace(',', ";"),
            cell(r.final_loss),
            cell(r.train_accuracy),
            cell(r.test_accuracy),
        ]);
    }
    csv.write(&cfg.output_dir.join(ACCURACY_FILE))?;
    let summary = TrainSummary {
        provenance,
        dataset: train_set.name.trim_end_matches("-train").to_string(),
        train_samples: train_set.len(),
        test_samples: test_set.len(),
        arch,
        runs: records,
    };
    write_json(&cfg.output_dir.join("train_summary.json"), &summary)?;
    Ok(summary)
}
