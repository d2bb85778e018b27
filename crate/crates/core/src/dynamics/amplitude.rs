use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-layer channel amplitudes `R` of a stack of layers of width `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeState {
    pub amplitude: Vec<f64>,
    pub c_left: f64,
    pub c_right: f64,
    pub n: usize,
}

impl AmplitudeState {
    pub fn new(amplitude: Vec<f64>, c_left: f64, c_right: f64, n: usize) -> Result<Self> {
        if n == 0 || amplitude.is_empty() {
            return Err(Error::Shape("empty amplitude state".into()));
        }
        if !(c_left > 0.0 && c_right > 0.0) {
            return Err(Error::Domain(format!("couplings {c_left}, {c_right} must be positive")));
        }
        let s = Self { amplitude, c_left, c_right, n };
        check_range(&s.amplitude, n)?;
        Ok(s)
    }

    pub fn minimum(&self) -> f64 {
        1.0 / self.n as f64
    }
}

pub(crate) fn check_range(amplitude: &[f64], n: usize) -> Result<()> {
    let lo = 1.0 / n as f64;
    match amplitude.iter().find(|v| !(**v >= lo && **v <= 1.0)) {
        Some(v) => Err(Error::Domain(format!("amplitude {v} outside [{lo}, 1]"))),
        None => Ok(()),
    }
}

/// `dR/dt = R / (N sqrt N) (1 - sqrt(R N)) (c_right sqrt(R_next) + c_left sqrt(R_prev))`
/// for every layer; missing neighbors contribute nothing.
pub(crate) fn amplitude_rhs_into(amplitude: &[f64], c_left: f64, c_right: f64, n: usize, out: &mut [f64]) -> Result<()> {
    check_range(amplitude, n)?;
    let nf = n as f64;
    let scale = 1.0 / (nf * nf.sqrt());
    let len = amplitude.len();
    for (l, o) in out.iter_mut().enumerate() {
        let r = amplitude[l];
        let next = if l + 1 < len { c_right * amplitude[l + 1].sqrt() } else { 0.0 };
        let prev = if l > 0 { c_left * amplitude[l - 1].sqrt() } else { 0.0 };
        *o = r * scale * (1.0 - (r * nf).sqrt()) * (next + prev);
    }
    Ok(())
}

/// `dR^(l)/dt` for layer `l` in `0..L`.
pub fn amplitude_rhs(state: &AmplitudeState, l: usize) -> Result<f64> {
    if l >= state.amplitude.len() {
        return Err(Error::Index(format!("layer {l} of {}", state.amplitude.len())));
    }
    let mut out = vec![0.0; state.amplitude.len()];
    amplitude_rhs_into(&state.amplitude, state.c_left, state.c_right, state.n, &mut out)?;
    Ok(out[l])
}
