use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Connectivities and growth constants of the nodes of one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerState {
    pub r: Vec<f64>,
    pub c: Vec<f64>,
}

impl LayerState {
    pub fn new(r: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if r.len() != c.len() || r.is_empty() {
            return Err(Error::Shape(format!("r has {} entries, c has {}", r.len(), c.len())));
        }
        if let Some(v) = r.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::Domain(format!("connectivity {v} is negative")));
        }
        if let Some(v) = c.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::Domain(format!("growth constant {v} is not positive")));
        }
        Ok(Self { r, c })
    }

    /// The homogeneous state `r_j = 1/N^2`, `c_j = c`.
    pub fn homogeneous(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![1.0 / (n * n) as f64; n], vec![c; n])
    }

    pub fn width(&self) -> usize {
        self.r.len()
    }
}

pub(crate) fn check_nonnegative(r: &[f64]) -> Result<()> {
    match r.iter().find(|v| !(**v >= 0.0)) {
        Some(v) => Err(Error::Domain(format!("connectivity {v} is negative"))),
        None => Ok(()),
    }
}

/// `dr_j/dt = r_j (1 - sqrt(r_j)) c_j - r_j sum_{i != j} sqrt(r_i) c_i`.
pub(crate) fn intralayer_rhs_into(r: &[f64], c: &[f64], out: &mut [f64]) -> Result<()> {
    check_nonnegative(r)?;
    let total: f64 = r.iter().zip(c).map(|(ri, ci)| ri.sqrt() * ci).sum();
    for ((o, &rj), &cj) in out.iter_mut().zip(r).zip(c) {
        let sj = rj.sqrt();
        let others = total - sj * cj;
        *o = rj * (1.0 - sj) * cj - rj * others;
    }
    Ok(())
}

pub fn intralayer_rhs(state: &LayerState) -> Result<Vec<f64>> {
    let mut out = vec![0.0; state.width()];
    intralayer_rhs_into(&state.r, &state.c, &mut out)?;
    Ok(out)
}

/// Node `j` grows iff its constant exceeds the `sqrt(r)`-weighted mean of
/// all constants. This agrees with the sign of [`intralayer_rhs`] on states
/// normalized to `sum sqrt(r) = 1`.
pub fn growth_criterion(state: &LayerState, j: usize) -> Result<bool> {
    if j >= state.width() {
        return Err(Error::Index(format!("node {j} of {}", state.width())));
    }
    check_nonnegative(&state.r)?;
    let norm: f64 = state.r.iter().map(|v| v.sqrt()).sum();
    if norm == 0.0 {
        return Err(Error::Argument("growth criterion of an all-zero state".into()));
    }
    let mean: f64 = state.r.iter().zip(&state.c).map(|(r, c)| r.sqrt() * c).sum::<f64>() / norm;
    Ok(state.c[j] > mean)
}

/// Linearization around the homogeneous state `r = 1/N^2`, `c_j = c`:
/// `d(delta r_j)/dt = (delta c_j - <delta c>) / N^2 - c <delta r> / 2`.
pub fn linear_perturbation_rhs(delta_c: &[f64], delta_r: &[f64], c: f64, n: usize) -> Result<Vec<f64>> {
    if delta_c.len() != n || delta_r.len() != n {
        return Err(Error::Shape(format!(
            "perturbations of length {} and {} for width {n}",
            delta_c.len(),
            delta_r.len()
        )));
    }
    let nf = n as f64;
    let mean_c = delta_c.iter().sum::<f64>() / nf;
    let mean_r = delta_r.iter().sum::<f64>() / nf;
    Ok(delta_c
        .iter()
        .map(|dc| (dc - mean_c) / (nf * nf) - 0.5 * c * mean_r)
        .collect())
}
