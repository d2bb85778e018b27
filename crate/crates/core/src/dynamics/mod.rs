//! Coarse-grained connectivity dynamics: intralayer repression, the
//! interlayer-coupled system and the per-layer channel amplitude, integrated
//! with a fixed-step fifth-order Runge-Kutta scheme.
//!
//! Layer indices are zero-based. Connectivities are clamped at zero and
//! amplitudes into `[1/N, 1]` after each step; every clamp is counted.

mod amplitude;
mod coupled;
mod intralayer;
pub mod rk;
mod sim;
mod summary;

pub use amplitude::{amplitude_rhs, AmplitudeState};
pub use coupled::{coupled_rhs, LayerStackState};
pub use intralayer::{growth_criterion, intralayer_rhs, linear_perturbation_rhs, LayerState};
pub use rk::{rk_step, Bounds, Integrator};
pub use sim::{
    init_amplitude, init_layer, init_stack, run_ensemble, simulate_amplitude, simulate_coupled,
    simulate_intralayer, InitMode, SimConfig, SimRun, Trajectory,
};
pub use summary::{amplitude_lag_summary, final_value_summary, LagSummary, ValueSummary};
