//! Partial path sums, U-terms and the coupling constants through which one
//! weight enters another weight's gradient-descent increment.
//!
//! A partial path sum fixes a run of consecutive nodes and sums input times
//! weight product over all active paths through them, leaving out the
//! weights between the fixed nodes. Because path activity is a product of
//! nodal activities it factorizes into a masked prefix sum into the first
//! fixed node, the fixed nodes' activities, and a masked suffix sum out of
//! the last one. In a zero-bias network the prefix sum is the pre-activation.
//!
//! Coupling constants are per sample and refer to the halved squared-error
//! loss, for which the increment of `w` under one gradient step of rate `eta`
//! is `eta * delta_y * (sum over active paths through w of x * prod of the
//! other weights)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcore::LayeredNetwork;

use super::activity::heaviside;
use super::output::{require_zero_bias, WeightId};

/// Masked prefix and suffix sums of one input.
#[derive(Debug, Clone)]
pub struct PathSums {
    /// `prefix[l][n]`: sum into node `n` of layer `l`, `l = 0..=H`.
    prefix: Vec<Vec<f64>>,
    /// `suffix[l][n]`: sum from node `n` of layer `l` to the output.
    suffix: Vec<Vec<f64>>,
    /// Nodal activity, 1 for inputs and the output.
    theta: Vec<Vec<f64>>,
}

impl PathSums {
    pub fn new(net: &LayeredNetwork, x: &[f64]) -> Result<Self> {
        require_zero_bias(net)?;
        let depth = net.depth();
        let mut prefix = vec![x.to_vec()];
        prefix.extend(net.pre_activations(x)?);
        let theta: Vec<Vec<f64>> = prefix
            .iter()
            .enumerate()
            .map(|(l, z)| {
                if l == 0 || l == depth {
                    vec![1.0; z.len()]
                } else {
                    z.iter().map(|&v| heaviside(v)).collect()
                }
            })
            .collect();
        let mut suffix = vec![Vec::new(); depth + 1];
        suffix[depth] = vec![1.0];
        for l in (0..depth).rev() {
            let w = net.layer(l + 1);
            suffix[l] = (0..w.rows())
                .map(|i| {
                    w.row(i)
                        .iter()
                        .enumerate()
                        .map(|(j, &wij)| wij * theta[l + 1][j] * suffix[l + 1][j])
                        .sum()
                })
                .collect();
        }
        Ok(Self { prefix, suffix, theta })
    }

    pub fn depth(&self) -> usize {
        self.prefix.len() - 1
    }

    /// Sum over active paths through `nodes` placed at layers
    /// `start, start + 1, ...`, excluding the weights between them.
    pub fn partial(&self, start: usize, nodes: &[usize]) -> Result<f64> {
        let end = start + nodes.len();
        if nodes.is_empty() || end > self.prefix.len() {
            return Err(Error::Index(format!(
                "{} fixed nodes from layer {start} exceed depth {}",
                nodes.len(),
                self.depth()
            )));
        }
        let mut gate = 1.0;
        for (k, &n) in nodes.iter().enumerate() {
            let layer = start + k;
            let Some(&t) = self.theta[layer].get(n) else {
                return Err(Error::Index(format!("node {n} outside layer {layer}")));
            };
            gate *= t;
        }
        let first = self.prefix[start][nodes[0]];
        let last = self.suffix[end - 1][nodes[nodes.len() - 1]];
        Ok(first * gate * last)
    }
}

/// The U-term around layer `p`: active paths through `n` (layer `p-2`),
/// `a` (layer `p-1`), `b` (layer `p`) and `n_prime` (layer `p+1`), with the
/// three weight layers `p-1, p, p+1` left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UTerm {
    pub p: usize,
    pub n: usize,
    pub a: usize,
    pub b: usize,
    pub n_prime: usize,
    pub value: f64,
}

pub fn compute_u(
    net: &LayeredNetwork,
    x: &[f64],
    p: usize,
    n: usize,
    (a, b): (usize, usize),
    n_prime: usize,
) -> Result<UTerm> {
    let depth = net.depth();
    if p < 2 || p + 1 > depth {
        return Err(Error::Index(format!("U-term layer {p} outside 2..={}", depth - 1)));
    }
    let value = PathSums::new(net, x)?.partial(p - 2, &[n, a, b, n_prime])?;
    Ok(UTerm {
        p,
        n,
        a,
        b,
        n_prime,
        value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingKind {
    Adjacent,
    Separated,
}

/// Coefficient of `coefficient_of` in the one-step increment of
/// `increment_of`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingConstant {
    pub increment_of: WeightId,
    pub coefficient_of: WeightId,
    pub kind: CouplingKind,
    pub value: f64,
}

fn pair(first: WeightId, second: WeightId, kind: CouplingKind, value: f64) -> [CouplingConstant; 2] {
    [
        CouplingConstant {
            increment_of: first,
            coefficient_of: second,
            kind,
            value,
        },
        CouplingConstant {
            increment_of: second,
            coefficient_of: first,
            kind,
            value,
        },
    ]
}

/// Couplings between `w^{(p)}_{ab}` and `w^{(p+1)}_{bc}`, both directions.
pub fn coupling_adjacent(
    net: &LayeredNetwork,
    x: &[f64],
    delta_y: f64,
    eta: f64,
    first: WeightId,
    second: WeightId,
) -> Result<[CouplingConstant; 2]> {
    first.check(net)?;
    second.check(net)?;
    if second.layer != first.layer + 1 || second.from != first.to {
        return Err(Error::Argument(format!(
            "weights {first:?} and {second:?} do not share a node in consecutive layers"
        )));
    }
    let sums = PathSums::new(net, x)?;
    let s = sums.partial(first.layer - 1, &[first.from, first.to, second.to])?;
    Ok(pair(first, second, CouplingKind::Adjacent, eta * delta_y * s))
}

/// Couplings between `w^{(p)}_{ab}` and `w^{(p+2)}_{de}`, joined through
/// `w^{(p+1)}_{bd}`.
pub fn coupling_separated(
    net: &LayeredNetwork,
    x: &[f64],
    delta_y: f64,
    eta: f64,
    first: WeightId,
    second: WeightId,
) -> Result<[CouplingConstant; 2]> {
    first.check(net)?;
    second.check(net)?;
    if second.layer != first.layer + 2 {
        return Err(Error::Argument(format!(
            "weights {first:?} and {second:?} are not two layers apart"
        )));
    }
    let sums = PathSums::new(net, x)?;
    let s = sums.partial(first.layer - 1, &[first.from, first.to, second.from, second.to])?;
    let link = net.weight(first.layer + 1, first.to, second.from);
    Ok(pair(first, second, CouplingKind::Separated, eta * delta_y * link * s))
}

/// Separated over adjacent coupling strength at layer `p`. On a positive,
/// layer-wise constant network with every node active this equals
/// `w^{(p+1)} / (n_{p+2} w^{(p+2)})`.
pub fn coupling_ratio(net: &LayeredNetwork, x: &[f64], delta_y: f64, p: usize) -> Result<f64> {
    let depth = net.depth();
    if p == 0 || p + 2 > depth {
        return Err(Error::Index(format!("coupling ratio layer {p} outside 1..={}", depth.saturating_sub(2))));
    }
    for l in 1..=depth {
        let w = net.layer(l).as_slice();
        let w0 = w[0];
        if !(w0 > 0.0) || w.iter().any(|&v| v != w0) {
            return Err(Error::Precondition(format!(
                "layer {l} weights must be equal and positive"
            )));
        }
    }
    let sums = PathSums::new(net, x)?;
    if sums.theta.iter().flatten().any(|&t| t != 1.0) {
        return Err(Error::Precondition("every node must be active".into()));
    }
    let adjacent = coupling_adjacent(net, x, delta_y, 1.0, WeightId::new(p, 0, 0), WeightId::new(p + 1, 0, 0))?;
    let separated = coupling_separated(net, x, delta_y, 1.0, WeightId::new(p, 0, 0), WeightId::new(p + 2, 0, 0))?;
    if adjacent[0].value == 0.0 {
        return Err(Error::Precondition(
            "adjacent coupling vanishes (zero error or zero input)".into(),
        ));
    }
    Ok(separated[0].value / adjacent[0].value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::{init_network, BiasMode, NetworkArch, TrainConfig};
    use crate::pathform::activity::PathActivityTable;
    use crate::pathform::paths::{enumerate_paths, PathSet, DEFAULT_PATH_CAP};

    fn random_net(sizes: &[usize], seed: u64) -> LayeredNetwork {
        let arch = NetworkArch::new(sizes.to_vec(), BiasMode::Zero).unwrap();
        let cfg = TrainConfig { seed, init_low: -1.0, init_high: 1.0, ..TrainConfig::default() };
        init_network(&arch, &cfg).unwrap()
    }

    fn random_input(n: usize, seed: u64) -> Vec<f64> {
        use rand::Rng;
        let mut rng = crate::rng::stream(seed, 5);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    /// Enumeration oracle: sum over active paths through `nodes` (from layer
    /// `start`) of x times the weights outside the fixed run.
    fn brute_partial(net: &LayeredNetwork, x: &[f64], paths: &PathSet, start: usize, nodes: &[usize]) -> f64 {
        let table = PathActivityTable::new(net, &[x.to_vec()], paths).unwrap();
        let end = start + nodes.len() - 1;
        paths
            .paths()
            .iter()
            .enumerate()
            .filter(|(k, p)| table.activity(0, *k) == 1 && nodes.iter().enumerate().all(|(i, &n)| p[start + i] == n))
            .map(|(_, p)| {
                let w: f64 = (1..p.len())
                    .filter(|&l| l <= start || l > end)
                    .map(|l| net.weight(l, p[l - 1], p[l]))
                    .product();
                x[p[0]] * w
            })
            .sum()
    }

    /// One-step increment of `target` for a single sample, with the path
    /// activities and the error frozen at the original network.
    fn frozen_increment(
        original: &LayeredNetwork,
        probed: &LayeredNetwork,
        x: &[f64],
        paths: &PathSet,
        delta_y: f64,
        eta: f64,
        target: WeightId,
    ) -> f64 {
        let table = PathActivityTable::new(original, &[x.to_vec()], paths).unwrap();
        let s: f64 = paths
            .paths()
            .iter()
            .enumerate()
            .filter(|(k, p)| table.activity(0, *k) == 1 && p[target.layer - 1] == target.from && p[target.layer] == target.to)
            .map(|(_, p)| {
                let w: f64 = (1..p.len())
                    .filter(|&l| l != target.layer)
                    .map(|l| probed.weight(l, p[l - 1], p[l]))
                    .product();
                x[p[0]] * w
            })
            .sum();
        eta * delta_y * s
    }

    /// Slope of the increment of `target` in the value of `probe`.
    fn probe_slope(net: &LayeredNetwork, x: &[f64], paths: &PathSet, dy: f64, eta: f64, target: WeightId, probe: WeightId, step: f64) -> f64 {
        let at = |v: f64| {
            let mut n = net.clone();
            n.set_weight(probe.layer, probe.from, probe.to, v);
            frozen_increment(net, &n, x, paths, dy, eta, target)
        };
        let v = net.weight(probe.layer, probe.from, probe.to);
        (at(v + step) - at(v - step)) / (2.0 * step)
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300) || a == b
    }

    #[test]
    fn partial_sums_match_enumeration() {
        let sizes = [3, 4, 3, 4, 2, 1];
        let paths = enumerate_paths(&NetworkArch::new(sizes.to_vec(), BiasMode::Zero).unwrap(), DEFAULT_PATH_CAP).unwrap();
        for seed in 0..10 {
            let net = random_net(&sizes, seed);
            let x = random_input(3, seed);
            let sums = PathSums::new(&net, &x).unwrap();
            for (start, nodes) in [(0, vec![1]), (1, vec![2, 0]), (2, vec![1, 3, 0]), (1, vec![0, 2, 1, 1]), (0, vec![2, 1, 1, 3, 1, 0])] {
                let got = sums.partial(start, &nodes).unwrap();
                let want = brute_partial(&net, &x, &paths, start, &nodes);
                assert!(close(got, want, 1e-12), "{start} {nodes:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn u_term_is_plain_input_sum_at_minimum_depth() {
        // H = 3, p = 2: every weight layer is excluded
        let net = random_net(&[3, 3, 3, 1], 3);
        let x = [0.4, -0.7, 0.9];
        let sums = PathSums::new(&net, &x).unwrap();
        for n in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    let u = compute_u(&net, &x, 2, n, (a, b), 0).unwrap();
                    let gate = sums.theta[1][a] * sums.theta[2][b];
                    assert_eq!(u.value, x[n] * gate);
                }
            }
        }
    }

    #[test]
    fn u_term_is_uniform_on_positive_constant_nets() {
        let arch = NetworkArch::uniform(3, 3, 5, BiasMode::Zero).unwrap();
        let net = LayeredNetwork::layer_constant(arch, |_| 0.3);
        let x = [0.5; 3];
        let first = compute_u(&net, &x, 3, 0, (0, 0), 0).unwrap().value;
        for n in 0..3 {
            for np in 0..3 {
                for (a, b) in [(0, 0), (1, 2), (2, 1)] {
                    assert_eq!(compute_u(&net, &x, 3, n, (a, b), np).unwrap().value, first);
                }
            }
        }
        assert!(first > 0.0);
    }

    #[test]
    fn u_term_layer_range() {
        let net = random_net(&[2, 2, 2, 2, 1], 0);
        assert!(matches!(compute_u(&net, &[1.0, 1.0], 1, 0, (0, 0), 0), Err(Error::Index(_))));
        assert!(matches!(compute_u(&net, &[1.0, 1.0], 4, 0, (0, 0), 0), Err(Error::Index(_))));
        assert!(compute_u(&net, &[1.0, 1.0], 3, 0, (0, 0), 0).is_ok());
        assert!(matches!(compute_u(&net, &[1.0, 1.0], 3, 2, (0, 0), 0), Err(Error::Index(_))));
    }

    #[test]
    fn path_subsets_partition_by_fixed_middle() {
        // paths through fixed (a, b), summed over the outer pair (n, n')
        let sizes = [2, 3, 4, 2, 3, 1];
        let paths = enumerate_paths(&NetworkArch::new(sizes.to_vec(), BiasMode::Zero).unwrap(), DEFAULT_PATH_CAP).unwrap();
        for p in 2..=4 {
            let count = paths.paths().iter().filter(|q| q[p - 1] == 1 && q[p] == 0).count() as u128;
            let mut by_outer = 0u128;
            for n in 0..sizes[p - 2] {
                for np in 0..sizes[p + 1] {
                    by_outer += paths.paths().iter().filter(|q| q[p - 2] == n && q[p - 1] == 1 && q[p] == 0 && q[p + 1] == np).count() as u128;
                }
            }
            assert_eq!(by_outer, count);
            assert_eq!(count, paths.total() / (sizes[p - 1] * sizes[p]) as u128);
        }
    }

    #[test]
    fn zero_error_means_zero_coupling() {
        let net = random_net(&[3, 3, 3, 3, 1], 1);
        let x = random_input(3, 1);
        let adj = coupling_adjacent(&net, &x, 0.0, 0.1, WeightId::new(2, 1, 2), WeightId::new(3, 2, 0)).unwrap();
        let sep = coupling_separated(&net, &x, 0.0, 0.1, WeightId::new(1, 1, 2), WeightId::new(3, 0, 1)).unwrap();
        assert!(adj.iter().chain(&sep).all(|c| c.value == 0.0));
    }

    #[test]
    fn chain_couplings_by_hand() {
        // single path: lambda_adj = eta dy x w1 w4 (w2, w3 excluded)
        let arch = NetworkArch::new(vec![1, 1, 1, 1, 1], BiasMode::Zero).unwrap();
        let ws = [0.5, 2.0, 1.5, 3.0];
        let net = LayeredNetwork::layer_constant(arch, |l| ws[l - 1]);
        let (x, dy, eta) = (0.8, -0.25, 0.1);
        let adj = coupling_adjacent(&net, &[x], dy, eta, WeightId::new(2, 0, 0), WeightId::new(3, 0, 0)).unwrap();
        assert!(close(adj[0].value, eta * dy * x * ws[0] * ws[3], 1e-15));
        assert_eq!(adj[0].value, adj[1].value);
        assert_eq!(adj[1].increment_of, WeightId::new(3, 0, 0));
        // separated: the joining weight enters once
        let sep = coupling_separated(&net, &[x], dy, eta, WeightId::new(1, 0, 0), WeightId::new(3, 0, 0)).unwrap();
        assert!(close(sep[0].value, eta * dy * x * ws[1] * ws[3], 1e-15));
        assert_eq!(sep[0].kind, CouplingKind::Separated);
    }

    #[test]
    fn non_neighbouring_weights_are_rejected() {
        let net = random_net(&[2, 2, 2, 2, 1], 0);
        let x = [1.0, 0.5];
        assert!(matches!(
            coupling_adjacent(&net, &x, 1.0, 0.1, WeightId::new(1, 0, 1), WeightId::new(2, 0, 0)),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            coupling_separated(&net, &x, 1.0, 0.1, WeightId::new(1, 0, 1), WeightId::new(2, 1, 0)),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn couplings_match_linear_probe() {
        let sizes = [3, 3, 4, 3, 3, 1];
        let arch = NetworkArch::new(sizes.to_vec(), BiasMode::Zero).unwrap();
        let paths = enumerate_paths(&arch, DEFAULT_PATH_CAP).unwrap();
        let eta = 0.01;
        let mut nonzero = 0;
        for seed in 0..8 {
            // mostly positive weights keep most paths active, some still gated
            let cfg = TrainConfig { seed, init_low: -0.4, init_high: 1.0, ..TrainConfig::default() };
            let net = init_network(&arch, &cfg).unwrap();
            let x: Vec<f64> = random_input(3, seed).iter().map(|v| v.abs()).collect();
            let dy = 0.7 - net.forward(&x).unwrap();
            for p in 1..=3 {
                let (a, b, c) = (seed as usize % 3, 1, 2);
                let first = WeightId::new(p, a, b);
                let adj = coupling_adjacent(&net, &x, dy, eta, first, WeightId::new(p + 1, b, c)).unwrap();
                nonzero += usize::from(adj[0].value != 0.0);
                for lam in &adj {
                    for step in [0.5, 0.25] {
                        let probe = probe_slope(&net, &x, &paths, dy, eta, lam.increment_of, lam.coefficient_of, step);
                        assert!(close(lam.value, probe, 1e-10), "adj p{p}: {} vs {probe}", lam.value);
                    }
                }
                let e = if p + 2 == net.depth() { 0 } else { 1 };
                let sep = coupling_separated(&net, &x, dy, eta, first, WeightId::new(p + 2, 0, e)).unwrap();
                nonzero += usize::from(sep[0].value != 0.0);
                for lam in &sep {
                    for step in [0.5, 0.25] {
                        let probe = probe_slope(&net, &x, &paths, dy, eta, lam.increment_of, lam.coefficient_of, step);
                        assert!(close(lam.value, probe, 1e-10), "sep p{p}: {} vs {probe}", lam.value);
                    }
                }
            }
        }
        assert!(nonzero >= 12, "only {nonzero} of 48 couplings nonzero");
    }

    #[test]
    fn ratio_follows_inverse_width() {
        for (width, want) in [(3usize, 1.0 / 3.0), (10, 0.1)] {
            let arch = NetworkArch::uniform(width, width, 4, BiasMode::Zero).unwrap();
            let net = LayeredNetwork::layer_constant(arch, |_| 0.2);
            let x = vec![1.0; width];
            let r = coupling_ratio(&net, &x, 0.5, 2).unwrap();
            assert!((r - want).abs() <= 1e-12, "{width}: {r}");
        }
        // doubling the joining layer doubles the ratio
        let arch = NetworkArch::uniform(3, 3, 4, BiasMode::Zero).unwrap();
        let net = LayeredNetwork::layer_constant(arch, |l| if l == 3 { 0.4 } else { 0.2 });
        let r = coupling_ratio(&net, &[1.0; 3], 0.5, 2).unwrap();
        assert!((r - 2.0 / 3.0).abs() <= 1e-12);
    }

    #[test]
    fn ratio_checks_assumptions() {
        let arch = NetworkArch::uniform(3, 3, 4, BiasMode::Zero).unwrap();
        let mut net = LayeredNetwork::layer_constant(arch.clone(), |_| 0.2);
        assert!(matches!(coupling_ratio(&net, &[1.0, -2.0, 0.0], 0.5, 2), Err(Error::Precondition(_))));
        assert!(matches!(coupling_ratio(&net, &[1.0; 3], 0.0, 2), Err(Error::Precondition(_))));
        net.set_weight(2, 0, 1, 0.3);
        assert!(matches!(coupling_ratio(&net, &[1.0; 3], 0.5, 2), Err(Error::Precondition(_))));
        let neg = LayeredNetwork::layer_constant(arch, |_| -0.2);
        assert!(matches!(coupling_ratio(&neg, &[1.0; 3], 0.5, 2), Err(Error::Precondition(_))));
    }
}
