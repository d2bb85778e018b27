//! Correlation, moment and exact-test statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Bimodality coefficients above this value (that of a uniform
/// distribution) indicate a bimodal-leaning sample.
pub const BIMODALITY_THRESHOLD: f64 = 5.0 / 9.0;

/// Sample Pearson correlation, two-pass.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("pearson: lengths {} and {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation(format!("{} points", x.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant input".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 95% confidence interval of a correlation from `n` pairs via the Fisher
/// z-transform. Undefined for `n <= 3`.
pub fn fisher_z_interval(r: f64, n: usize) -> Option<(f64, f64)> {
    if n <= 3 || !r.is_finite() {
        return None;
    }
    let z = r.clamp(-1.0 + 1e-15, 1.0 - 1e-15).atanh();
    let half = Z_95 / ((n - 3) as f64).sqrt();
    Some(((z - half).tanh(), (z + half).tanh()))
}

/// A correlation estimate with its sample size and 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub n: usize,
    pub ci95: Option<(f64, f64)>,
}

impl Correlation {
    pub fn of(x: &[f64], y: &[f64]) -> Result<Self> {
        let r = pearson(x, y)?;
        Ok(Self {
            r,
            n: x.len(),
            ci95: fisher_z_interval(r, x.len()),
        })
    }

    pub fn excludes_zero(&self) -> bool {
        matches!(self.ci95, Some((lo, hi)) if lo > 0.0 || hi < 0.0)
    }
}

/// `(skewness^2 + 1) / kurtosis` with population moments (kurtosis not in
/// excess form).
pub fn bimodality_coefficient(values: &[f64]) -> Result<f64> {
    if values.len() < 4 {
        return Err(Error::Argument(format!(
            "bimodality needs at least 4 values, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if !(m2 > 0.0) {
        return Err(Error::Argument("bimodality of a constant sample".into()));
    }
    let skew = m3 / m2.powf(1.5);
    let kurt = m4 / (m2 * m2);
    Ok((skew * skew + 1.0) / kurt)
}

/// Best two-group split of a sample along the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSplit {
    /// Values `<= threshold` form the lower mode.
    pub threshold: f64,
    pub n_low: usize,
    pub n_high: usize,
    pub mean_low: f64,
    pub mean_high: f64,
    /// Pooled within-mode standard deviation.
    pub pooled_sd: f64,
}

impl ModeSplit {
    /// Distance between mode means in units of the pooled within-mode
    /// standard deviation.
    pub fn separation(&self) -> f64 {
        (self.mean_high - self.mean_low).abs() / self.pooled_sd
    }
}

/// Splits the sorted sample where the within-group sum of squares is
/// minimal (exact one-dimensional two-means).
pub fn mode_split(values: &[f64]) -> Result<ModeSplit> {
    if values.len() < 4 {
        return Err(Error::Argument("mode split needs at least 4 values".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let mut prefix = vec![0.0; n + 1];
    let mut prefix_sq = vec![0.0; n + 1];
    for (i, x) in v.iter().enumerate() {
        prefix[i + 1] = prefix[i] + x;
        prefix_sq[i + 1] = prefix_sq[i] + x * x;
    }
    let ss = |lo: usize, hi: usize| {
        let k = (hi - lo) as f64;
        let s = prefix[hi] - prefix[lo];
        (prefix_sq[hi] - prefix_sq[lo] - s * s / k).max(0.0)
    };
    let mut best = (f64::INFINITY, 0);
    for cut in 2..=n - 2 {
        if v[cut - 1] == v[cut] {
            continue;
        }
        let within = ss(0, cut) + ss(cut, n);
        if within < best.0 {
            best = (within, cut);
        }
    }
    let (within, cut) = best;
    if cut == 0 {
        return Err(Error::Argument("no split with two groups of at least 2 values".into()));
    }
    let pooled_sd = (within / (n - 2) as f64).sqrt();
    Ok(ModeSplit {
        threshold: v[cut - 1],
        n_low: cut,
        n_high: n - cut,
        mean_low: prefix[cut] / cut as f64,
        mean_high: (prefix[n] - prefix[cut]) / (n - cut) as f64,
        pooled_sd,
    })
}

/// Counts of a 2x2 table `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Result<Self> {
        if a + b + c + d == 0 {
            return Err(Error::Argument("empty contingency table".into()));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }
}

fn ln_factorials(n: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Two-sided Fisher exact test: total probability of all tables with the
/// observed margins that are no more likely than the observed one.
pub fn fisher_exact(t: &ContingencyTable2x2) -> f64 {
    const SLACK: f64 = 1e-7;
    let row1 = t.a + t.b;
    let row2 = t.c + t.d;
    let col1 = t.a + t.c;
    let n = t.total();
    let lf = ln_factorials(n);
    let ln_p = |a: u64| {
        let (b, c) = (row1 - a, col1 - a);
        let d = row2 - c;
        lf[row1 as usize] + lf[row2 as usize] + lf[col1 as usize] + lf[(n - col1) as usize]
            - lf[n as usize]
            - lf[a as usize]
            - lf[b as usize]
            - lf[c as usize]
            - lf[d as usize]
    };
    let lo = col1.saturating_sub(row2);
    let hi = row1.min(col1);
    let observed = ln_p(t.a);
    let cutoff = observed + SLACK.ln_1p();
    let p: f64 = (lo..=hi)
        .map(ln_p)
        .filter(|&lp| lp <= cutoff)
        .map(f64::exp)
        .sum();
    p.min(1.0)
}
