use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::amplitude::{amplitude_rhs_into, AmplitudeState};
use super::coupled::{coupled_rhs_flat, LayerStackState};
use super::intralayer::{intralayer_rhs_into, LayerState};
use super::rk::{Bounds, Integrator};
use crate::error::{Error, Result};
use crate::rng::{self, derive_seed};

/// How the initial state of a simulation is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Homogeneous state with relative perturbations of size
    /// `perturbation_scale`; zero scale gives an exact fixed point.
    Homogeneous,
    /// Connectivities uniform on (0, 1) rescaled to `sum sqrt(r) = 1` and
    /// constants uniform on `[c_init_low, c_init_high]`. Amplitudes are
    /// uniform on `[1/N, 1/N + perturbation_scale (1 - 1/N)]`.
    #[default]
    UniformPerturbed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub steps: usize,
    pub seed: u64,
    pub r_init: InitMode,
    pub perturbation_scale: f64,
    pub c_init_low: f64,
    pub c_init_high: f64,
    /// Keep every this many steps in the trajectory; the initial and final
    /// states are always kept.
    pub record_every: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self::intralayer()
    }
}

impl SimConfig {
    /// 250 steps to `t = 1` with constants on `[0.1, 3]`.
    pub fn intralayer() -> Self {
        Self {
            dt: 0.004,
            steps: 250,
            seed: 0,
            r_init: InitMode::UniformPerturbed,
            perturbation_scale: 1.0,
            c_init_low: 0.1,
            c_init_high: 3.0,
            record_every: 1,
        }
    }

    pub fn coupled() -> Self {
        Self {
            c_init_low: 0.5,
            c_init_high: 1.5,
            ..Self::intralayer()
        }
    }

    /// 50000 steps of size 0.001, amplitudes on `[1/N, 1]`, couplings on `[0.5, 1.5]`.
    pub fn amplitude() -> Self {
        Self {
            dt: 0.001,
            steps: 50_000,
            seed: 0,
            r_init: InitMode::UniformPerturbed,
            perturbation_scale: 1.0,
            c_init_low: 0.5,
            c_init_high: 1.5,
            record_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.dt * self.steps as f64).is_finite() {
            return Err(Error::Config(format!("dt = {} must be positive and finite", self.dt)));
        }
        if self.steps == 0 {
            return Err(Error::Config("steps must be positive".into()));
        }
        if !(self.perturbation_scale >= 0.0 && self.perturbation_scale.is_finite()) {
            return Err(Error::Config(format!(
                "perturbation_scale = {} must be nonnegative",
                self.perturbation_scale
            )));
        }
        if self.r_init == InitMode::Homogeneous && self.perturbation_scale >= 1.0 {
            return Err(Error::Config(format!(
                "homogeneous init needs perturbation_scale < 1, got {}",
                self.perturbation_scale
            )));
        }
        if !(self.c_init_low > 0.0 && self.c_init_low <= self.c_init_high && self.c_init_high.is_finite()) {
            return Err(Error::Config(format!(
                "constant range [{}, {}] must be positive and ordered",
                self.c_init_low, self.c_init_high
            )));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be positive".into()));
        }
        Ok(())
    }

    fn c_mid(&self) -> f64 {
        0.5 * (self.c_init_low + self.c_init_high)
    }

    fn draw_c(&self, rng: &mut rng::Rng) -> f64 {
        match self.r_init {
            InitMode::Homogeneous => self.c_mid() * (1.0 + self.perturbation_scale * rng.random_range(-1.0..=1.0)),
            InitMode::UniformPerturbed => self.c_init_low + (self.c_init_high - self.c_init_low) * rng.random::<f64>(),
        }
    }

    fn draw_r(&self, n: usize, rng: &mut rng::Rng) -> Vec<f64> {
        match self.r_init {
            InitMode::Homogeneous => {
                let base = 1.0 / (n * n) as f64;
                (0..n)
                    .map(|_| base * (1.0 + self.perturbation_scale * rng.random_range(-1.0..=1.0)))
                    .collect()
            }
            InitMode::UniformPerturbed => {
                let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
                let norm: f64 = u.iter().map(|v| v.sqrt()).sum();
                u.iter().map(|v| v / (norm * norm)).collect()
            }
        }
    }
}

/// Recorded states of one run, flattened layer-major (`layers * width`
/// values per record).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub layers: usize,
    pub width: usize,
    pub steps: Vec<usize>,
    pub states: Vec<Vec<f64>>,
    /// Components clamped back into the admissible range after a step.
    pub clamp_events: usize,
}

impl Trajectory {
    fn new(layers: usize, width: usize, initial: Vec<f64>) -> Self {
        Self {
            layers,
            width,
            steps: vec![0],
            states: vec![initial],
            clamp_events: 0,
        }
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// Value of `(layer, node)` at every recorded step.
    pub fn series(&self, layer: usize, node: usize) -> Vec<f64> {
        let idx = layer * self.width + node;
        self.states.iter().map(|s| s[idx]).collect()
    }

    /// Rows `step,layer,node,value`, preceded by a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "step,layer,node,value")?;
        for (step, state) in self.steps.iter().zip(&self.states) {
            for (i, v) in state.iter().enumerate() {
                writeln!(w, "{step},{},{},{v}", i / self.width, i % self.width)?;
            }
        }
        Ok(())
    }
}

/// Initial state and trajectory of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRun<S> {
    pub seed: u64,
    pub initial: S,
    pub trajectory: Trajectory,
}

fn integrate<F>(cfg: &SimConfig, mut traj: Trajectory, bounds: Bounds, mut rhs: F) -> Result<Trajectory>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let mut y = traj.states[0].clone();
    let mut integrator = Integrator::new(y.len());
    for step in 1..=cfg.steps {
        traj.clamp_events += integrator
            .step(&mut rhs, &mut y, cfg.dt, bounds)
            .map_err(|e| match e {
                Error::Divergence(m) => Error::Divergence(format!("step {step} (seed {}): {m}", cfg.seed)),
                other => other,
            })?;
        if step % cfg.record_every == 0 || step == cfg.steps {
            traj.steps.push(step);
            traj.states.push(y.clone());
        }
    }
    Ok(traj)
}

pub fn init_layer(cfg: &SimConfig, n: usize) -> Result<LayerState> {
    cfg.validate()?;
    let mut rng = rng::stream(cfg.seed, 0);
    let r = cfg.draw_r(n, &mut rng);
    let c = (0..n).map(|_| cfg.draw_c(&mut rng)).collect();
    LayerState::new(r, c)
}

pub fn simulate_intralayer(cfg: &SimConfig, n: usize) -> Result<SimRun<LayerState>> {
    if n == 0 {
        return Err(Error::Config("width must be positive".into()));
    }
    let initial = init_layer(cfg, n)?;
    let c = initial.c.clone();
    let traj = integrate(cfg, Trajectory::new(1, n, initial.r.clone()), Bounds::NONNEGATIVE, |y, out| {
        intralayer_rhs_into(y, &c, out)
    })?;
    Ok(SimRun { seed: cfg.seed, initial, trajectory: traj })
}

pub fn init_stack(cfg: &SimConfig, n: usize, layers: usize) -> Result<LayerStackState> {
    cfg.validate()?;
    let mut rng = rng::stream(cfg.seed, 0);
    let r = (0..layers).map(|_| cfg.draw_r(n, &mut rng)).collect();
    let vector = |rng: &mut rng::Rng| -> Vec<f64> { (0..n).map(|_| cfg.draw_c(rng)).collect() };
    let c_right = (0..layers).map(|_| vector(&mut rng)).collect();
    let c_left = (0..layers).map(|_| vector(&mut rng)).collect();
    let c_next = (0..layers).map(|_| (0..n).map(|_| vector(&mut rng)).collect()).collect();
    let c_prev = (0..layers).map(|_| (0..n).map(|_| vector(&mut rng)).collect()).collect();
    LayerStackState::new(r, c_right, c_left, c_next, c_prev)
}

/// Couplings stay at their sampled values for the whole run.
pub fn simulate_coupled(cfg: &SimConfig, n: usize, layers: usize) -> Result<SimRun<LayerStackState>> {
    if n == 0 || layers == 0 {
        return Err(Error::Config("width and layer count must be positive".into()));
    }
    let initial = init_stack(cfg, n, layers)?;
    let traj = integrate(cfg, Trajectory::new(layers, n, initial.flatten()), Bounds::NONNEGATIVE, |y, out| {
        coupled_rhs_flat(&initial, y, out)
    })?;
    Ok(SimRun { seed: cfg.seed, initial, trajectory: traj })
}

pub fn init_amplitude(cfg: &SimConfig, n: usize, layers: usize) -> Result<AmplitudeState> {
    cfg.validate()?;
    let mut rng = rng::stream(cfg.seed, 0);
    let lo = 1.0 / n as f64;
    let amplitude = match cfg.r_init {
        InitMode::Homogeneous => (0..layers)
            .map(|_| (lo * (1.0 + cfg.perturbation_scale * rng.random::<f64>())).min(1.0))
            .collect(),
        InitMode::UniformPerturbed => {
            let hi = (lo + cfg.perturbation_scale * (1.0 - lo)).min(1.0);
            (0..layers).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect()
        }
    };
    let c_left = cfg.draw_c(&mut rng);
    let c_right = cfg.draw_c(&mut rng);
    AmplitudeState::new(amplitude, c_left, c_right, n)
}

/// Amplitudes are clamped into `[1/N, 1]` after every step.
pub fn simulate_amplitude(cfg: &SimConfig, n: usize, layers: usize) -> Result<SimRun<AmplitudeState>> {
    if n == 0 || layers == 0 {
        return Err(Error::Config("width and layer count must be positive".into()));
    }
    let initial = init_amplitude(cfg, n, layers)?;
    let bounds = Bounds { lower: initial.minimum(), upper: 1.0 };
    let (cl, cr) = (initial.c_left, initial.c_right);
    let traj = integrate(cfg, Trajectory::new(layers, 1, initial.amplitude.clone()), bounds, |y, out| {
        amplitude_rhs_into(y, cl, cr, n, out)
    })?;
    Ok(SimRun { seed: cfg.seed, initial, trajectory: traj })
}

/// Runs `runs` independent simulations concurrently. Run `i` uses seed
/// `derive_seed(master_seed, i)`; results come back in run order.
pub fn run_ensemble<S, F>(cfg: &SimConfig, runs: usize, master_seed: u64, simulate: F) -> Result<Vec<SimRun<S>>>
where
    S: Send,
    F: Fn(&SimConfig) -> Result<SimRun<S>> + Sync,
{
    (0..runs)
        .into_par_iter()
        .map(|i| {
            let run_cfg = SimConfig {
                seed: derive_seed(master_seed, i as u64),
                ..cfg.clone()
            };
            simulate(&run_cfg).map_err(|e| match e {
                Error::Divergence(m) => Error::Divergence(format!("run {i}: {m}")),
                other => other,
            })
        })
        .collect()
}
