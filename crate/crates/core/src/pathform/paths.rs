use crate::error::{Error, Result};
use crate::netcore::NetworkArch;

/// Default ceiling on the number of enumerated paths.
pub const DEFAULT_PATH_CAP: u128 = 1_000_000;

/// Every input-to-output path of an architecture, one node per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    arch: NetworkArch,
    gamma: u128,
    paths: Vec<Vec<usize>>,
}

/// Number of paths `n_0 * prod(n_1..n_H)`, saturating.
pub fn path_count(arch: &NetworkArch) -> u128 {
    arch.layer_sizes()
        .iter()
        .fold(1u128, |acc, &n| acc.saturating_mul(n as u128))
}

/// Lexicographic enumeration of all paths; fails when there are more than
/// `cap`.
pub fn enumerate_paths(arch: &NetworkArch, cap: u128) -> Result<PathSet> {
    arch.validate()?;
    let total = path_count(arch);
    if total > cap {
        return Err(Error::Capacity { needed: total, cap });
    }
    let sizes = arch.layer_sizes();
    let mut paths = Vec::with_capacity(total as usize);
    let mut cur = vec![0usize; sizes.len()];
    loop {
        paths.push(cur.clone());
        // odometer increment, last layer fastest
        let mut k = sizes.len();
        loop {
            if k == 0 {
                let gamma = total / sizes[0] as u128;
                return Ok(PathSet {
                    arch: arch.clone(),
                    gamma,
                    paths,
                });
            }
            k -= 1;
            cur[k] += 1;
            if cur[k] < sizes[k] {
                break;
            }
            cur[k] = 0;
        }
    }
}

impl PathSet {
    pub fn arch(&self) -> &NetworkArch {
        &self.arch
    }

    /// Paths per input node, `prod(n_1..n_H)`.
    pub fn gamma(&self) -> u128 {
        self.gamma
    }

    pub fn total(&self) -> u128 {
        self.paths.len() as u128
    }

    pub fn paths(&self) -> &[Vec<usize>] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Paths whose edge in layer `l` runs from `from` to `to`.
    pub fn through_weight(&self, l: usize, from: usize, to: usize) -> impl Iterator<Item = &[usize]> {
        self.paths
            .iter()
            .filter(move |p| p[l - 1] == from && p[l] == to)
            .map(Vec::as_slice)
    }

    pub(crate) fn check_arch(&self, arch: &NetworkArch) -> Result<()> {
        if arch.layer_sizes() != self.arch.layer_sizes() {
            return Err(Error::Shape(format!(
                "paths enumerated for {:?}, network has {:?}",
                self.arch.layer_sizes(),
                arch.layer_sizes()
            )));
        }
        Ok(())
    }
}
