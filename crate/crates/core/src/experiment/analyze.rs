use std::fs;

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::output::{cell, create_dir, write_json, write_text, CsvText, Provenance};
use super::svg;
use super::train::experiment_data;
use crate::error::{Error, Result};
use crate::morpho::{
    analyze_network, fisher_exact, increments, pooled_autocorrelation, ContingencyTable2x2, Correlation,
    MorphologyReport,
};
use crate::netcore::{accuracy, SnapshotSeries};

/// Final (trained) and initial (control) morphology of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunAnalysis {
    pub run: usize,
    pub dir: String,
    pub seed: u64,
    pub test_accuracy: f64,
    pub selected: bool,
    pub trained: MorphologyReport,
    pub control: MorphologyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedRun {
    pub dir: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PooledLag {
    pub lag: usize,
    pub trained: Option<Correlation>,
    pub control: Option<Correlation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureCounts {
    pub total: usize,
    pub structured: usize,
    pub unclassifiable: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisSummary {
    pub provenance: Provenance,
    pub runs_dir: String,
    pub loaded: usize,
    pub skipped: Vec<SkippedRun>,
    /// `"median"` or `"threshold"`.
    pub filter: String,
    /// Selected runs have test accuracy strictly above this value.
    pub cutoff: f64,
    pub selected_runs: Vec<usize>,
    /// Pooled ingoing/outgoing fraction correlation over selected runs.
    pub omega_correlation: Option<Correlation>,
    pub entropy_lags: Vec<PooledLag>,
    /// Entropy increments against embedding-dimension increments, selected runs.
    pub embedding_entropy: Option<Correlation>,
    /// Mean accessible nodes per hidden layer, output side first.
    pub accessibility_trained: Vec<f64>,
    pub accessibility_control: Vec<f64>,
    pub structure_selected: StructureCounts,
    pub structure_all: StructureCounts,
    pub group_accuracy: f64,
    /// Runs above `group_accuracy`.
    pub structure_high_accuracy: StructureCounts,
    /// `[[structured & high, structured & low], [unstructured & high, unstructured & low]]`
    /// over classifiable runs.
    pub contingency: Option<ContingencyTable2x2>,
    pub fisher_p: Option<f64>,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn mean_curve<'a>(curves: impl Iterator<Item = &'a [usize]>) -> Vec<f64> {
    let mut sum: Vec<f64> = Vec::new();
    let mut count = 0usize;
    for c in curves {
        if sum.is_empty() {
            sum = vec![0.0; c.len()];
        }
        for (s, &v) in sum.iter_mut().zip(c) {
            *s += v as f64;
        }
        count += 1;
    }
    sum.iter().map(|s| s / count.max(1) as f64).collect()
}

fn count_structure<'a>(runs: impl Iterator<Item = &'a RunAnalysis>) -> StructureCounts {
    let mut c = StructureCounts { total: 0, structured: 0, unclassifiable: 0 };
    for r in runs {
        c.total += 1;
        match r.trained.structure_formed {
            Some(true) => c.structured += 1,
            Some(false) => {}
            None => c.unclassifiable += 1,
        }
    }
    c
}

fn run_index(name: &str) -> Option<usize> {
    name.strip_prefix("run_")?.parse().ok()
}

/// Loads every `run_*` snapshot directory, filters by accuracy and writes
/// per-run reports plus pooled tables. Unreadable runs are listed in the
/// summary and skipped.
pub fn cmd_analyze(cfg: &ExperimentConfig) -> Result<AnalysisSummary> {
    let provenance = Provenance::new("analyze", cfg);
    let options = cfg.analyze.options();
    let runs_dir = cfg.runs_dir();
    let (_, test_set) = experiment_data(cfg)?;

    let mut dirs: Vec<(usize, String)> = fs::read_dir(&runs_dir)
        .map_err(|e| Error::io(&runs_dir, e))?
        .filter_map(|entry| entry.ok())
        .filter(|e| e.path().is_dir())
        .filter_map(|e| {
            let name = e.file_name().to_string_lossy().into_owned();
            run_index(&name).map(|i| (i, name))
        })
        .collect();
    dirs.sort();

    let loaded: Vec<std::result::Result<RunAnalysis, SkippedRun>> = dirs
        .par_iter()
        .map(|(run, name)| {
            let skip = |e: Error| SkippedRun { dir: name.clone(), error: e.to_string() };
            let load = || -> Result<RunAnalysis> {
                let series = SnapshotSeries::load_dir(&runs_dir.join(name))?;
                let (initial, last) = match (series.initial(), series.last()) {
                    (Some(a), Some(b)) => (a, b),
                    _ => return Err(Error::Argument("no snapshots".into())),
                };
                Ok(RunAnalysis {
                    run: *run,
                    dir: name.clone(),
                    seed: series.seed(),
                    test_accuracy: accuracy(last, &test_set)?,
                    selected: false,
                    trained: analyze_network(last, Some(&test_set), &options)?,
                    control: analyze_network(initial, Some(&test_set), &options)?,
                })
            };
            load().map_err(skip)
        })
        .collect();
    let mut runs = Vec::new();
    let mut skipped = Vec::new();
    for r in loaded {
        match r {
            Ok(a) => runs.push(a),
            Err(s) => skipped.push(s),
        }
    }
    if runs.is_empty() {
        return Err(Error::Argument(format!("no loadable runs in {}", runs_dir.display())));
    }

    let accs: Vec<f64> = runs.iter().map(|r| r.test_accuracy).collect();
    let (filter, cutoff) = match cfg.analyze.accuracy_threshold {
        Some(t) => ("threshold".to_string(), t),
        None => ("median".to_string(), median(&accs)),
    };
    for r in &mut runs {
        r.selected = r.test_accuracy > cutoff;
    }
    let selected: Vec<&RunAnalysis> = runs.iter().filter(|r| r.selected).collect();

    let out = &cfg.output_dir;
    create_dir(&out.join("reports"))?;
    #[derive(Serialize)]
    struct RunReport<'a> {
        provenance: &'a Provenance,
        #[serde(flatten)]
        run: &'a RunAnalysis,
    }
    for r in &runs {
        write_json(
            &out.join("reports").join(format!("{}.json", r.dir)),
            &RunReport { provenance: &provenance, run: r },
        )?;
    }

    // ingoing vs outgoing fractions
    let mut scatter = CsvText::new(&provenance, &["run", "layer", "node", "omega_in", "omega_out"]);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for r in &selected {
        for layer in &r.trained.connectivity.layers {
            for (node, (&i, &o)) in layer.omega_in.iter().zip(&layer.omega_out).enumerate() {
                scatter.row([r.run.to_string(), layer.layer.to_string(), node.to_string(), i.to_string(), o.to_string()]);
                xs.push(i);
                ys.push(o);
            }
        }
    }
    scatter.write(&out.join("omega_scatter.csv"))?;
    write_text(
        &out.join("omega_scatter.svg"),
        &svg::scatter(&provenance, "ingoing vs outgoing fraction", "omega_in", "omega_out", &xs, &ys),
    )?;
    let omega_correlation = Correlation::of(&xs, &ys).ok();

    // accessibility
    let accessibility_trained = mean_curve(selected.iter().map(|r| r.trained.accessible_nodes.as_slice()));
    let accessibility_control = mean_curve(runs.iter().map(|r| r.control.accessible_nodes.as_slice()));
    let mut acc_csv = CsvText::new(&provenance, &["position_from_output", "trained_mean", "control_mean"]);
    for (i, control) in accessibility_control.iter().enumerate() {
        acc_csv.row([i.to_string(), cell(accessibility_trained.get(i).copied()), control.to_string()]);
    }
    acc_csv.write(&out.join("accessibility.csv"))?;
    let positions: Vec<f64> = (0..accessibility_control.len()).map(|i| i as f64).collect();
    let mut curves = vec![("control", accessibility_control.clone())];
    if !accessibility_trained.is_empty() {
        curves.insert(0, ("trained", accessibility_trained.clone()));
    }
    write_text(
        &out.join("accessibility.svg"),
        &svg::lines(&provenance, "accessible nodes", "hidden layer from output", "nodes", &positions, &curves),
    )?;

    // entropy increments
    let trained_incs: Vec<&[f64]> = selected.iter().map(|r| r.trained.entropy.increments.as_slice()).collect();
    let control_incs: Vec<&[f64]> = runs.iter().map(|r| r.control.entropy.increments.as_slice()).collect();
    let entropy_lags: Vec<PooledLag> = (1..=options.max_lag)
        .map(|lag| PooledLag {
            lag,
            trained: pooled_autocorrelation(&trained_incs, lag).ok(),
            control: pooled_autocorrelation(&control_incs, lag).ok(),
        })
        .collect();
    let mut lag_csv = CsvText::new(
        &provenance,
        &["lag", "trained_r", "trained_pairs", "trained_ci_low", "trained_ci_high", "control_r", "control_pairs", "control_ci_low", "control_ci_high"],
    );
    for l in &entropy_lags {
        let mut row = vec![l.lag.to_string()];
        for c in [l.trained, l.control] {
            let ci = c.and_then(|c| c.ci95);
            row.extend([
                cell(c.map(|c| c.r)),
                c.map_or(String::new(), |c| c.n.to_string()),
                cell(ci.map(|c| c.0)),
                cell(ci.map(|c| c.1)),
            ]);
        }
        lag_csv.row(row);
    }
    lag_csv.write(&out.join("entropy_autocorrelation.csv"))?;

    // embedding dimension vs entropy
    let mut emb_csv = CsvText::new(&provenance, &["run", "step", "entropy_increment", "embedding_increment"]);
    let (mut de, mut dd) = (Vec::new(), Vec::new());
    for r in &selected {
        if let Some(dims) = &r.trained.embedding_dimension {
            let d: Vec<f64> = dims.iter().map(|&v| v as f64).collect();
            for (k, (&a, b)) in r.trained.entropy.increments.iter().zip(increments(&d)).enumerate() {
                emb_csv.row([r.run.to_string(), k.to_string(), a.to_string(), b.to_string()]);
                de.push(a);
                dd.push(b);
            }
        }
    }
    emb_csv.write(&out.join("embedding_entropy.csv"))?;
    let embedding_entropy = Correlation::of(&de, &dd).ok();

    // structure classification
    let group = cfg.analyze.group_accuracy;
    let mut st_csv = CsvText::new(
        &provenance,
        &["run", "seed", "test_accuracy", "selected", "omega_correlation", "lag1", "structure_formed"],
    );
    let (mut a, mut b, mut c, mut d) = (0, 0, 0, 0);
    for r in &runs {
        st_csv.row([
            r.run.to_string(),
            r.seed.to_string(),
            r.test_accuracy.to_string(),
            r.selected.to_string(),
            cell(r.trained.omega_correlation),
            cell(r.trained.lag(1)),
            r.trained.structure_formed.map_or(String::new(), |s| s.to_string()),
        ]);
        let high = r.test_accuracy > group;
        match (r.trained.structure_formed, high) {
            (Some(true), true) => a += 1,
            (Some(true), false) => b += 1,
            (Some(false), true) => c += 1,
            (Some(false), false) => d += 1,
            (None, _) => {}
        }
    }
    st_csv.write(&out.join("structure.csv"))?;
    let contingency = ContingencyTable2x2::new(a, b, c, d).ok();

    let summary = AnalysisSummary {
        provenance,
        runs_dir: runs_dir.display().to_string(),
        loaded: runs.len(),
        skipped,
        filter,
        cutoff,
        selected_runs: selected.iter().map(|r| r.run).collect(),
        omega_correlation,
        entropy_lags,
        embedding_entropy,
        accessibility_trained,
        accessibility_control,
        structure_selected: count_structure(selected.iter().copied()),
        structure_all: count_structure(runs.iter()),
        group_accuracy: group,
        structure_high_accuracy: count_structure(runs.iter().filter(|r| r.test_accuracy > group)),
        fisher_p: contingency.as_ref().map(fisher_exact),
        contingency,
    };
    write_json(&out.join("analysis_summary.json"), &summary)?;
    Ok(summary)
}

