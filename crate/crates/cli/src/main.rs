//! `morphonet`: command-line front end for the morphology experiments.
//!
//! Exit codes: 0 success, 1 failed check or numerical failure, 2 usage or
//! configuration error, 3 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use morphonet::experiment::{
    cmd_analyze, cmd_gen_data, cmd_simulate, cmd_train, cmd_verify, ExperimentConfig, Model, HIGH_VARIANCE_INIT,
};
use morphonet::morpho::ThresholdRule;
use morphonet::Error;

#[derive(Debug, Parser)]
#[command(name = "morphonet", version, about = "Weight-morphology experiments on small ReLU networks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML experiment configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Ensemble size.
    #[arg(long, global = true)]
    runs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the synthetic cluster dataset.
    GenData {
        /// Number of samples to generate.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Run an ensemble of connectivity or amplitude simulations.
    Simulate {
        /// intralayer, coupled or amplitude.
        #[arg(long, value_parser = parse_model)]
        model: Option<Model>,
        /// Nodes per layer.
        #[arg(long)]
        width: Option<usize>,
        /// Layers in the coupled and amplitude models.
        #[arg(long)]
        layers: Option<usize>,
        /// Integration steps.
        #[arg(long)]
        steps: Option<usize>,
        /// Step size.
        #[arg(long)]
        dt: Option<f64>,
        /// Skip the per-run trajectory files.
        #[arg(long)]
        no_trajectories: bool,
    },
    /// Train an ensemble of networks and record weight snapshots.
    Train {
        /// Dataset CSV; synthetic clusters when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Training epochs per network.
        #[arg(long)]
        epochs: Option<usize>,
        /// Initialize weights on [-1, 1] instead of the low-variance range.
        #[arg(long)]
        high_variance: bool,
    },
    /// Analyze recorded snapshots: connectivity, entropy, accessibility, structure.
    Analyze {
        /// Directory of run_NNNN snapshot dirs; `<out>/runs` when omitted.
        #[arg(long)]
        runs_dir: Option<PathBuf>,
        /// Keep networks above this test accuracy instead of above the median.
        #[arg(long)]
        accuracy_threshold: Option<f64>,
        /// Pruning threshold for accessibility: median or mean.
        #[arg(long, value_parser = parse_rule)]
        threshold_rule: Option<ThresholdRule>,
        /// Minimum in/out fraction correlation for a structured net.
        #[arg(long)]
        rho_min: Option<f64>,
        /// Maximum lag-1 entropy-increment autocorrelation for a structured net.
        #[arg(long)]
        a_max: Option<f64>,
    },
    /// Check the path-sum and dynamics implementations against their oracles.
    VerifyPaths {
        /// Random networks per check.
        #[arg(long)]
        nets: Option<usize>,
        /// Corrupt a weight before path-sum evaluation (self-test of the checker).
        #[arg(long)]
        inject_fault: bool,
    },
}

fn parse_model(s: &str) -> Result<Model, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_rule(s: &str) -> Result<ThresholdRule, String> {
    match s {
        "median" => Ok(ThresholdRule::Median),
        "mean" => Ok(ThresholdRule::Mean),
        other => Err(format!("unknown threshold rule {other:?}; expected median or mean")),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 3,
        Error::Config(_) | Error::Parse { .. } | Error::Serde(_) => 2,
        _ => 1,
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    if common.runs.is_some() {
        cfg.ensemble_size = common.runs;
    }
    Ok(cfg)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.4}"))
}

fn run(cli: Cli) -> Result<bool, Error> {
    let mut cfg = load_config(&cli.common)?;
    match cli.command {
        Command::GenData { samples } => {
            if let Some(n) = samples {
                cfg.data.n_samples = n;
            }
            let s = cmd_gen_data(&cfg)?;
            println!("wrote {} samples with {} features to {}", s.samples, s.features, cfg.output_dir.display());
        }
        Command::Simulate { model, width, layers, steps, dt, no_trajectories } => {
            let sim = &mut cfg.simulate;
            if let Some(m) = model {
                sim.model = m;
            }
            sim.width = width.or(sim.width);
            if let Some(l) = layers {
                sim.layers = l;
            }
            sim.steps = steps.or(sim.steps);
            sim.dt = dt.or(sim.dt);
            if no_trajectories {
                sim.write_trajectories = false;
            }
            let s = cmd_simulate(&cfg)?;
            println!(
                "{} runs, bimodality {} (threshold {:.4}), clamp events {}",
                s.runs,
                fmt_opt(s.final_values.bimodality),
                s.bimodality_threshold,
                s.clamp_events_total
            );
            for l in &s.lags {
                println!("lag {}: mean {} over {} runs", l.lag, fmt_opt(l.mean), l.runs);
            }
        }
        Command::Train { data, epochs, high_variance } => {
            if data.is_some() {
                cfg.data.input = data;
            }
            if let Some(e) = epochs {
                cfg.train.epochs = e;
            }
            if high_variance {
                (cfg.train.init_low, cfg.train.init_high) = HIGH_VARIANCE_INIT;
            }
            let s = cmd_train(&cfg)?;
            let ok = s.runs.iter().filter(|r| r.status == "ok").count();
            println!("trained {ok}/{} networks; outputs in {}", s.runs.len(), cfg.output_dir.display());
            for r in s.runs.iter().filter(|r| r.status != "ok") {
                eprintln!("run {} (seed {}): {}", r.run, r.seed, r.status);
            }
        }
        Command::Analyze { runs_dir, accuracy_threshold, threshold_rule, rho_min, a_max } => {
            let a = &mut cfg.analyze;
            a.runs_dir = runs_dir.or(a.runs_dir.take());
            a.accuracy_threshold = accuracy_threshold.or(a.accuracy_threshold);
            if let Some(r) = threshold_rule {
                a.threshold_rule = r;
            }
            if let Some(v) = rho_min {
                a.rho_min = v;
            }
            if let Some(v) = a_max {
                a.a_max = v;
            }
            let s = cmd_analyze(&cfg)?;
            for skip in &s.skipped {
                eprintln!("skipped {}: {}", skip.dir, skip.error);
            }
            println!(
                "{} runs loaded, {} selected ({} cutoff {:.4}); omega correlation {}, structured {}/{}",
                s.loaded,
                s.selected_runs.len(),
                s.filter,
                s.cutoff,
                fmt_opt(s.omega_correlation.map(|c| c.r)),
                s.structure_selected.structured,
                s.structure_selected.total
            );
            if let Some(p) = s.fisher_p {
                println!("Fisher exact p = {p:e}");
            }
        }
        Command::VerifyPaths { nets, inject_fault } => {
            if let Some(n) = nets {
                cfg.verify.nets = n;
            }
            if inject_fault {
                cfg.verify.inject_fault = true;
            }
            let report = cmd_verify(&cfg)?;
            for c in &report.checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                println!("{status} {} cases={} max_error={:e} tol={:e}", c.name, c.cases, c.max_error, c.tolerance);
                for f in &c.failures {
                    println!("    {f}");
                }
            }
            return Ok(report.passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
