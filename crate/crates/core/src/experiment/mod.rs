//! Reproducible experiments behind the command-line subcommands.
//!
//! Every subcommand reads an [`ExperimentConfig`], writes its files into
//! `output_dir` and returns a typed summary. Each CSV starts with `#` lines
//! recording the tool version, subcommand, master seed and the full
//! configuration; JSON outputs carry the same record under `provenance`.
//! Reruns with the same configuration produce identical bytes.

mod analyze;
mod config;
mod gen_data;
mod output;
mod simulate;
mod svg;
mod train;
mod verify;

pub use analyze::{cmd_analyze, AnalysisSummary, PooledLag, RunAnalysis, SkippedRun, StructureCounts};
pub use config::{
    AnalyzeSection, DataSection, ExperimentConfig, Model, SimulateSection, TrainSection, VerifySection,
    HIGH_VARIANCE_INIT,
};
pub use gen_data::{cmd_gen_data, GenDataSummary, DATA_FILE, DATA_SPEC_FILE};
pub use output::Provenance;
pub use simulate::{cmd_simulate, SimulationSummary, SIMULATE_RUNS};
pub use train::{cmd_train, experiment_data, run_dir_name, TrainRunRecord, TrainSummary, ACCURACY_FILE, TRAIN_RUNS};
pub use verify::{
    check_coupling_ratio, check_finite_differences, check_fixed_points, check_growth_criterion, check_path_gradient,
    check_path_output, check_rk_order, cmd_verify, normwise_relative_error, random_case, relative_error, CheckResult,
    VerifyReport,
};
