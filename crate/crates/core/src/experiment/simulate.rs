use serde::Serialize;

use super::config::{ExperimentConfig, Model};
use super::output::{cell, create_dir, write_json, write_text, CsvText, Provenance};
use super::svg;
use crate::dynamics::{
    amplitude_lag_summary, final_value_summary, run_ensemble, simulate_amplitude, simulate_coupled,
    simulate_intralayer, LagSummary, SimConfig, Trajectory, ValueSummary,
};
use crate::error::Result;
use crate::morpho::BIMODALITY_THRESHOLD;

/// Default ensemble size of `simulate`.
pub const SIMULATE_RUNS: usize = 1000;

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub provenance: Provenance,
    pub model: Model,
    pub width: usize,
    pub layers: usize,
    pub runs: usize,
    pub sim_config: SimConfig,
    pub seeds: Vec<u64>,
    pub clamp_events: Vec<usize>,
    pub clamp_events_total: usize,
    pub final_values: ValueSummary,
    pub bimodality_threshold: f64,
    /// `None` when the bimodality coefficient is undefined.
    pub bimodal: Option<bool>,
    /// Layer-to-layer increment autocorrelations of the final amplitude
    /// profiles; empty for the connectivity models.
    pub lags: Vec<LagSummary>,
}

struct RunOutput {
    seed: u64,
    trajectory: Trajectory,
}

/// Runs the configured ensemble and writes per-run trajectories, pooled
/// final values, their histogram, lag autocorrelations (amplitude model)
/// and `summary.json`.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<SimulationSummary> {
    let provenance = Provenance::new("simulate", cfg);
    let section = &cfg.simulate;
    let sim = section.sim_config()?;
    let runs = cfg.runs(SIMULATE_RUNS)?;
    let n = section.width();
    let model = section.model;
    let layers = if model == Model::Intralayer { 1 } else { section.layers };

    let results: Vec<RunOutput> = match model {
        Model::Intralayer => run_ensemble(&sim, runs, cfg.master_seed, |c| simulate_intralayer(c, n))?
            .into_iter()
            .map(|r| RunOutput { seed: r.seed, trajectory: r.trajectory })
            .collect(),
        Model::Coupled => run_ensemble(&sim, runs, cfg.master_seed, |c| simulate_coupled(c, n, layers))?
            .into_iter()
            .map(|r| RunOutput { seed: r.seed, trajectory: r.trajectory })
            .collect(),
        Model::Amplitude => run_ensemble(&sim, runs, cfg.master_seed, |c| simulate_amplitude(c, n, layers))?
            .into_iter()
            .map(|r| RunOutput { seed: r.seed, trajectory: r.trajectory })
            .collect(),
    };

    let out = &cfg.output_dir;
    create_dir(out)?;
    if section.write_trajectories {
        let dir = out.join("trajectories");
        create_dir(&dir)?;
        for (i, r) in results.iter().enumerate() {
            let mut csv = CsvText::new(&provenance, &["step", "layer", "node", "value"]);
            let t = &r.trajectory;
            for (step, state) in t.steps.iter().zip(&t.states) {
                for (k, v) in state.iter().enumerate() {
                    csv.row([step.to_string(), (k / t.width).to_string(), (k % t.width).to_string(), v.to_string()]);
                }
            }
            csv.write(&dir.join(format!("run_{i:04}.csv")))?;
        }
    }

    let mut finals = CsvText::new(&provenance, &["run", "seed", "layer", "node", "value"]);
    let mut pooled = Vec::new();
    for (i, r) in results.iter().enumerate() {
        let t = &r.trajectory;
        for (k, &v) in t.final_state().iter().enumerate() {
            finals.row([i.to_string(), r.seed.to_string(), (k / t.width).to_string(), (k % t.width).to_string(), v.to_string()]);
            pooled.push(v);
        }
    }
    finals.write(&out.join("final_values.csv"))?;

    let final_values = final_value_summary(&pooled, section.histogram_bins)?;
    let mut hist = CsvText::new(&provenance, &["bin", "low", "high", "count"]);
    for (b, &c) in final_values.counts.iter().enumerate() {
        hist.row([b.to_string(), final_values.edges[b].to_string(), final_values.edges[b + 1].to_string(), c.to_string()]);
    }
    hist.write(&out.join("histogram.csv"))?;
    let label = if model == Model::Amplitude { "final amplitude" } else { "final connectivity" };
    write_text(
        &out.join("histogram.svg"),
        &svg::histogram(&provenance, &format!("{label} ({runs} runs)"), label, &final_values.edges, &final_values.counts),
    )?;

    let lags = if model == Model::Amplitude {
        let profiles: Vec<&[f64]> = results.iter().map(|r| r.trajectory.final_state()).collect();
        let lags = amplitude_lag_summary(&profiles, section.max_lag);
        let mut csv = CsvText::new(
            &provenance,
            &["lag", "runs", "mean", "ci_low", "ci_high", "pooled_r", "pooled_pairs", "pooled_ci_low", "pooled_ci_high"],
        );
        for l in &lags {
            let pooled_ci = l.pooled.and_then(|p| p.ci95);
            csv.row([
                l.lag.to_string(),
                l.runs.to_string(),
                cell(l.mean),
                cell(l.ci95.map(|c| c.0)),
                cell(l.ci95.map(|c| c.1)),
                cell(l.pooled.map(|p| p.r)),
                l.pooled.map_or(String::new(), |p| p.n.to_string()),
                cell(pooled_ci.map(|c| c.0)),
                cell(pooled_ci.map(|c| c.1)),
            ]);
        }
        csv.write(&out.join("autocorrelation.csv"))?;
        let x: Vec<f64> = lags.iter().map(|l| l.lag as f64).collect();
        let y: Vec<f64> = lags.iter().map(|l| l.mean.unwrap_or(f64::NAN)).collect();
        write_text(
            &out.join("autocorrelation.svg"),
            &svg::lines(&provenance, "amplitude increment autocorrelation", "lag", "mean correlation", &x, &[("mean", y)]),
        )?;
        lags
    } else {
        Vec::new()
    };

    let clamp_events: Vec<usize> = results.iter().map(|r| r.trajectory.clamp_events).collect();
    let summary = SimulationSummary {
        provenance,
        model,
        width: n,
        layers,
        runs,
        sim_config: sim,
        seeds: results.iter().map(|r| r.seed).collect(),
        clamp_events_total: clamp_events.iter().sum(),
        clamp_events,
        bimodal: final_values.bimodality.map(|b| b > BIMODALITY_THRESHOLD),
        bimodality_threshold: BIMODALITY_THRESHOLD,
        final_values,
        lags,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}
