use rand::Rng;
use serde::Serialize;

use super::config::{ExperimentConfig, VerifySection};
use super::output::{create_dir, write_json, Provenance};
use crate::dynamics::{
    growth_criterion, intralayer_rhs, rk_step, Bounds, LayerStackState, LayerState,
};
use crate::error::Result;
use crate::netcore::{backprop_gradient, init_network, loss_mse, BiasMode, Dataset, LayeredNetwork, NetworkArch, TrainConfig};
use crate::pathform::{coupling_ratio, enumerate_paths, path_gradient, path_output, WeightId, DEFAULT_PATH_CAP};
use crate::rng::{self, derive_seed};

const MAX_FAILURES_LISTED: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    /// Cases left out, e.g. networks too close to an activation kink.
    pub skipped: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub failures: Vec<String>,
}

impl CheckResult {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            cases: 0,
            skipped: 0,
            max_error: 0.0,
            tolerance,
            passed: true,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, error: f64, what: impl FnOnce() -> String) {
        self.cases += 1;
        if error > self.max_error || error.is_nan() {
            self.max_error = if error.is_nan() { f64::INFINITY } else { error };
        }
        if !(error <= self.tolerance) {
            self.passed = false;
            if self.failures.len() < MAX_FAILURES_LISTED {
                self.failures.push(format!("{}: error {error:e}", what()));
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub provenance: Provenance,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Max-norm relative difference of two vectors.
pub fn normwise_relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = a.iter().chain(b).map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// A random zero-bias case: weights and inputs uniform on `[-1, 1]`,
/// regression targets uniform on `[0, 2]`. Case 0 has the widest and
/// deepest architecture allowed.
pub fn random_case(index: usize, section: &VerifySection, seed: u64) -> Result<(LayeredNetwork, Dataset)> {
    let case_seed = derive_seed(seed, index as u64);
    let mut rng = rng::stream(case_seed, 3);
    let (sizes, hidden) = if index == 0 {
        (section.max_width, section.max_hidden_layers)
    } else {
        (0, rng.random_range(1..=section.max_hidden_layers.max(1)))
    };
    let mut layer_sizes = Vec::with_capacity(hidden + 2);
    for _ in 0..=hidden {
        layer_sizes.push(if sizes > 0 { sizes } else { rng.random_range(1..=section.max_width.max(1)) });
    }
    layer_sizes.push(1);
    let arch = NetworkArch::new(layer_sizes, BiasMode::Zero)?;
    let tc = TrainConfig { seed: case_seed, init_low: -1.0, init_high: 1.0, ..TrainConfig::default() };
    let net = init_network(&arch, &tc)?;
    let inputs: Vec<Vec<f64>> = (0..section.inputs_per_net.max(1))
        .map(|_| (0..arch.inputs()).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect();
    let targets = (0..inputs.len()).map(|_| rng.random_range(0.0..=2.0)).collect();
    Ok((net, Dataset::new(format!("case-{index}"), inputs, targets)?))
}

fn corrupt(net: &LayeredNetwork) -> LayeredNetwork {
    let mut bad = net.clone();
    let w = bad.weight(1, 0, 0);
    bad.set_weight(1, 0, 0, w + 0.5);
    bad
}

fn all_weights(net: &LayeredNetwork) -> Vec<WeightId> {
    let mut ids = Vec::new();
    for l in 1..=net.depth() {
        let m = net.layer(l);
        for a in 0..m.rows() {
            for b in 0..m.cols() {
                ids.push(WeightId::new(l, a, b));
            }
        }
    }
    ids
}

/// Path-sum output against the forward pass.
pub fn check_path_output(section: &VerifySection, seed: u64) -> Result<CheckResult> {
    let mut check = CheckResult::new("path_output_vs_forward", section.tolerance);
    for i in 0..section.nets {
        let (net, data) = random_case(i, section, seed)?;
        let paths = enumerate_paths(net.arch(), DEFAULT_PATH_CAP)?;
        let evaluated = if section.inject_fault { corrupt(&net) } else { net.clone() };
        for (m, x) in data.features().iter().enumerate() {
            let err = relative_error(path_output(&evaluated, x, &paths)?, net.forward(x)?);
            check.record(err, || format!("net {i} sample {m}"));
        }
    }
    Ok(check)
}

/// Path-sum gradient against backpropagation, per network over all weights.
pub fn check_path_gradient(section: &VerifySection, seed: u64) -> Result<CheckResult> {
    let mut check = CheckResult::new("path_gradient_vs_backprop", section.tolerance);
    for i in 0..section.nets {
        let (net, data) = random_case(i, section, seed)?;
        let paths = enumerate_paths(net.arch(), DEFAULT_PATH_CAP)?;
        let evaluated = if section.inject_fault { corrupt(&net) } else { net.clone() };
        let bp = backprop_gradient(&net, &data, true)?;
        let ids = all_weights(&net);
        let pg: Vec<f64> = ids
            .iter()
            .map(|&id| path_gradient(&evaluated, &data, id, &paths, true))
            .collect::<Result<_>>()?;
        let reference: Vec<f64> = ids.iter().map(|id| bp.weight(id.layer, id.from, id.to)).collect();
        check.record(normwise_relative_error(&pg, &reference), || format!("net {i}"));
    }
    Ok(check)
}

/// Smallest distance of any hidden pre-activation from the ReLU kink.
fn kink_distance(net: &LayeredNetwork, data: &Dataset) -> Result<f64> {
    let mut min = f64::INFINITY;
    for x in data.features() {
        let z = net.pre_activations(x)?;
        for layer in &z[..z.len() - 1] {
            for v in layer {
                min = min.min(v.abs());
            }
        }
    }
    Ok(min)
}

/// Backpropagation against central finite differences of the loss. Networks
/// with a pre-activation within `1e-4` of zero are skipped.
pub fn check_finite_differences(section: &VerifySection, seed: u64) -> Result<CheckResult> {
    const KINK_MARGIN: f64 = 1e-4;
    let h = section.finite_difference_step;
    let mut check = CheckResult::new("backprop_vs_finite_differences", section.finite_difference_tolerance);
    for i in 0..section.nets {
        let (net, data) = random_case(i, section, seed)?;
        if kink_distance(&net, &data)? < KINK_MARGIN {
            check.skipped += 1;
            continue;
        }
        let bp = backprop_gradient(&net, &data, true)?;
        let loss = |n: &LayeredNetwork| -> Result<f64> { loss_mse(data.targets(), &n.predict(data.features())?, true) };
        let ids = all_weights(&net);
        let mut fd = Vec::with_capacity(ids.len());
        for id in &ids {
            let w = net.weight(id.layer, id.from, id.to);
            let mut plus = net.clone();
            plus.set_weight(id.layer, id.from, id.to, w + h);
            let mut minus = net.clone();
            minus.set_weight(id.layer, id.from, id.to, w - h);
            fd.push((loss(&plus)? - loss(&minus)?) / (2.0 * h));
        }
        let reference: Vec<f64> = ids.iter().map(|id| bp.weight(id.layer, id.from, id.to)).collect();
        check.record(normwise_relative_error(&fd, &reference), || format!("net {i}"));
    }
    Ok(check)
}

/// Separated over adjacent coupling on uniform positive networks equals one
/// over the width of the layer two steps ahead.
pub fn check_coupling_ratio() -> Result<CheckResult> {
    let mut check = CheckResult::new("coupling_ratio_law", 1e-12);
    for n in [3usize, 5, 10] {
        let arch = NetworkArch::uniform(n, n, 5, BiasMode::Zero)?;
        let net = LayeredNetwork::layer_constant(arch, |_| 0.5);
        let x = vec![1.0; n];
        for p in 1..=3 {
            let ratio = coupling_ratio(&net, &x, 0.7, p)?;
            check.record(relative_error(ratio, 1.0 / n as f64), || format!("width {n} layer {p}"));
        }
    }
    Ok(check)
}

/// Right-hand sides vanish at the homogeneous states.
pub fn check_fixed_points() -> Result<CheckResult> {
    let mut check = CheckResult::new("homogeneous_fixed_points", 1e-12);
    for n in [2usize, 10, 20] {
        let s = LayerState::homogeneous(n, 1.3)?;
        let err = intralayer_rhs(&s)?.iter().map(|v| v.abs()).fold(0.0, f64::max);
        check.record(err, || format!("intralayer N={n}"));
        let c_node: Vec<f64> = (0..n).map(|k| 0.5 + k as f64 / n as f64).collect();
        let stack = LayerStackState::homogeneous(4, n, 1.2, 0.8, &c_node)?;
        for l in 0..4 {
            let err = crate::dynamics::coupled_rhs(&stack, l)?.iter().map(|v| v.abs()).fold(0.0, f64::max);
            check.record(err, || format!("coupled N={n} layer {l}"));
        }
    }
    Ok(check)
}

/// Local error of one step on `y' = -y` shrinks by about 64 when the step
/// is halved.
pub fn check_rk_order() -> Result<CheckResult> {
    let mut check = CheckResult::new("rk_fifth_order", 4.0);
    let err = |dt: f64| -> Result<f64> {
        let (y, _) = rk_step(
            |y, out| {
                out[0] = -y[0];
                Ok(())
            },
            &[1.0],
            dt,
            Bounds::UNBOUNDED,
        )?;
        Ok((y[0] - (-dt).exp()).abs())
    };
    let ratio = err(0.2)? / err(0.1)?;
    check.record((ratio - 64.0).abs(), || format!("halving ratio {ratio}"));
    Ok(check)
}

/// The growth criterion agrees with the sign of the intralayer right-hand
/// side on random normalized states.
pub fn check_growth_criterion(states: usize, seed: u64) -> Result<CheckResult> {
    let mut check = CheckResult::new("growth_criterion_vs_rhs_sign", 0.0);
    let mut rng = rng::stream(seed, 4);
    for i in 0..states {
        let n = rng.random_range(2..=20);
        let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let norm: f64 = u.iter().map(|v| v.sqrt()).sum();
        let r = u.iter().map(|v| v / (norm * norm)).collect();
        let c = (0..n).map(|_| rng.random_range(0.1..3.0)).collect();
        let s = LayerState::new(r, c)?;
        let d = intralayer_rhs(&s)?;
        let mut disagreements = 0;
        for (j, &dj) in d.iter().enumerate() {
            if s.r[j] > 0.0 && dj != 0.0 && growth_criterion(&s, j)? != (dj > 0.0) {
                disagreements += 1;
            }
        }
        check.record(disagreements as f64, || format!("state {i}"));
    }
    Ok(check)
}

/// Runs every oracle check and writes `verify_report.json`.
pub fn cmd_verify(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    let v = &cfg.verify;
    let seed = cfg.master_seed;
    let checks = vec![
        check_path_output(v, seed)?,
        check_path_gradient(v, seed)?,
        check_finite_differences(v, seed)?,
        check_coupling_ratio()?,
        check_fixed_points()?,
        check_rk_order()?,
        check_growth_criterion(v.growth_states, seed)?,
    ];
    let report = VerifyReport {
        provenance: Provenance::new("verify-paths", cfg),
        passed: checks.iter().all(|c| c.passed),
        checks,
    };
    create_dir(&cfg.output_dir)?;
    write_json(&cfg.output_dir.join("verify_report.json"), &report)?;
    Ok(report)
}
