//! Fixed-step explicit Runge-Kutta integration using the fifth-order
//! solution of the Runge-Kutta-Fehlberg 4(5) stage set.
//!
//! ```text
//! c     | a
//! 0     |
//! 1/4   | 1/4
//! 3/8   | 3/32        9/32
//! 12/13 | 1932/2197   -7200/2197  7296/2197
//! 1     | 439/216     -8          3680/513    -845/4104
//! 1/2   | -8/27       2           -3544/2565  1859/4104   -11/40
//! ------+----------------------------------------------------------------
//! b     | 16/135      0           6656/12825  28561/56430 -9/50   2/55
//! ```

use crate::error::{Error, Result};

pub const STAGES: usize = 6;

pub const A: [[f64; 5]; STAGES] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 4.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
];

pub const B: [f64; STAGES] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];

pub const C: [f64; STAGES] = [0.0, 0.25, 0.375, 12.0 / 13.0, 1.0, 0.5];

/// Admissible box for state components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub const NONNEGATIVE: Bounds = Bounds {
        lower: 0.0,
        upper: f64::INFINITY,
    };
    pub const UNBOUNDED: Bounds = Bounds {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    /// Clamps in place and returns how many components moved.
    fn clamp(&self, y: &mut [f64]) -> usize {
        let mut moved = 0;
        for v in y.iter_mut() {
            if *v < self.lower {
                *v = self.lower;
                moved += 1;
            } else if *v > self.upper {
                *v = self.upper;
                moved += 1;
            }
        }
        moved
    }
}

/// Stage buffers reused across steps.
#[derive(Debug, Clone)]
pub struct Integrator {
    k: Vec<Vec<f64>>,
    stage: Vec<f64>,
}

impl Integrator {
    pub fn new(dim: usize) -> Self {
        Self {
            k: vec![vec![0.0; dim]; STAGES],
            stage: vec![0.0; dim],
        }
    }

    /// Advances `y` by one step of size `dt`. Stage states are kept inside
    /// `bounds` so the right-hand side stays defined; the returned count is
    /// the number of components clamped after the step.
    pub fn step<F>(&mut self, mut rhs: F, y: &mut [f64], dt: f64, bounds: Bounds) -> Result<usize>
    where
        F: FnMut(&[f64], &mut [f64]) -> Result<()>,
    {
        if !(dt > 0.0) {
            return Err(Error::Argument(format!("step size {dt} must be positive")));
        }
        for s in 0..STAGES {
            self.stage.copy_from_slice(y);
            for (j, &a) in A[s][..s].iter().enumerate() {
                if a != 0.0 {
                    for (st, kj) in self.stage.iter_mut().zip(&self.k[j]) {
                        *st += dt * a * kj;
                    }
                }
            }
            bounds.clamp(&mut self.stage);
            rhs(&self.stage, &mut self.k[s])?;
        }
        for (i, v) in y.iter_mut().enumerate() {
            let incr: f64 = (0..STAGES).map(|s| B[s] * self.k[s][i]).sum();
            *v += dt * incr;
        }
        if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
            return Err(Error::Divergence(format!("state component became {bad}")));
        }
        Ok(bounds.clamp(y))
    }
}

/// One step from `y`; returns the new state and the post-step clamp count.
pub fn rk_step<F>(rhs: F, y: &[f64], dt: f64, bounds: Bounds) -> Result<(Vec<f64>, usize)>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let mut out = y.to_vec();
    let clamped = Integrator::new(y.len()).step(rhs, &mut out, dt, bounds)?;
    Ok((out, clamped))
}
