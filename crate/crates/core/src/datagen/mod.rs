//! Synthetic Gaussian cluster data, train/test splitting and CSV I/O.
//!
//! CSV schema: a header `f0,...,f{d-1},target` followed by one sample per
//! row, decimal floats, UTF-8.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcore::Dataset;
use crate::rng;

pub const TARGET_COLUMN: &str = "target";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterSpec {
    pub n_samples: usize,
    pub n_clusters: usize,
    pub n_features: usize,
    pub std: f64,
    pub center_low: f64,
    pub center_high: f64,
    pub seed: u64,
}

impl Default for ClusterSpec {
    fn default() -> Self {
        Self {
            n_samples: 5000,
            n_clusters: 11,
            n_features: 10,
            std: 0.05,
            center_low: 0.0,
            center_high: 1.0,
            seed: 0,
        }
    }
}

impl ClusterSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_clusters < 2 {
            return Err(Error::Config("need at least two clusters".into()));
        }
        if self.n_samples == 0 || self.n_features == 0 {
            return Err(Error::Config("n_samples and n_features must be positive".into()));
        }
        if !(self.std >= 0.0 && self.std.is_finite()) {
            return Err(Error::Config(format!("cluster std {} must be nonnegative", self.std)));
        }
        if !(self.center_low < self.center_high) {
            return Err(Error::Config("center_low must be below center_high".into()));
        }
        Ok(())
    }
}

/// Gaussian blobs around uniformly placed centers. Sample `m` belongs to
/// cluster `m mod k` and carries the label `cluster + 1`.
///
/// `std = 0` is accepted and places every sample exactly on its center.
pub fn gen_clusters(spec: &ClusterSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = rng::stream(spec.seed, 0);
    let centers_dist = Uniform::new(spec.center_low, spec.center_high)
        .map_err(|e| Error::Config(format!("center bounds: {e}")))?;
    let centers: Vec<Vec<f64>> = (0..spec.n_clusters)
        .map(|_| (0..spec.n_features).map(|_| centers_dist.sample(&mut rng)).collect())
        .collect();
    let noise = Normal::new(0.0, 1.0).expect("standard normal");
    let mut features = Vec::with_capacity(spec.n_samples);
    let mut targets = Vec::with_capacity(spec.n_samples);
    for m in 0..spec.n_samples {
        let k = m % spec.n_clusters;
        let x = centers[k]
            .iter()
            .map(|&c| c + spec.std * noise.sample(&mut rng))
            .collect();
        features.push(x);
        targets.push((k + 1) as f64);
    }
    Dataset::new(format!("clusters-seed{}", spec.seed), features, targets)
}

/// Seeded shuffle, then the first `floor(fraction * M)` samples train.
pub fn split(data: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Argument(format!(
            "train fraction {train_fraction} must lie strictly between 0 and 1"
        )));
    }
    let n_train = (train_fraction * data.len() as f64).floor() as usize;
    if n_train == 0 || n_train == data.len() {
        return Err(Error::Argument(format!(
            "split of {} samples at {train_fraction} leaves an empty side",
            data.len()
        )));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut rng::stream(seed, 2));
    let train = data.subset(format!("{}-train", data.name), &order[..n_train])?;
    let test = data.subset(format!("{}-test", data.name), &order[n_train..])?;
    Ok((train, test))
}

pub fn save_csv(data: &Dataset, path: &Path) -> Result<()> {
    save_csv_with_comments(data, path, &[])
}

/// Like [`save_csv`], with `# `-prefixed comment lines before the header.
pub fn save_csv_with_comments(data: &Dataset, path: &Path, comments: &[String]) -> Result<()> {
    let mut out = String::with_capacity(data.len() * data.n_features() * 20);
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    let header: Vec<String> = (0..data.n_features()).map(|i| format!("f{i}")).collect();
    out.push_str(&header.join(","));
    out.push(',');
    out.push_str(TARGET_COLUMN);
    out.push('\n');
    for (x, y) in data.features().iter().zip(data.targets()) {
        for v in x {
            out.push_str(&format!("{v},"));
        }
        out.push_str(&format!("{y}\n"));
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Reads a dataset; all columns except `target` are features, in file order.
/// Lines starting with `#` are comments.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let parse_err = |location: String, message: String| Error::Parse {
        path: path.to_path_buf(),
        location,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => parse_err("open".into(), format!("{other:?}")),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| parse_err("header".into(), e.to_string()))?
        .clone();
    let target_col = headers
        .iter()
        .position(|h| h == TARGET_COLUMN)
        .ok_or_else(|| parse_err("header".into(), format!("missing `{TARGET_COLUMN}` column")))?;
    if headers.len() < 2 {
        return Err(parse_err("header".into(), "no feature columns".into()));
    }
    let mut features = Vec::new();
    let mut targets = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let location = e.position().map_or_else(|| "body".to_string(), |p| format!("line {}", p.line()));
            parse_err(location, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != headers.len() {
            return Err(parse_err(
                format!("line {line}"),
                format!("{} fields, header has {}", record.len(), headers.len()),
            ));
        }
        let mut x = Vec::with_capacity(headers.len() - 1);
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                parse_err(
                    format!("line {line}, column {} ({})", col + 1, &headers[col]),
                    format!("not a number: {cell:?}"),
                )
            })?;
            if col == target_col {
                targets.push(v);
            } else {
                x.push(v);
            }
        }
        features.push(x);
    }
    if features.is_empty() {
        return Err(parse_err("body".into(), "no data rows".into()));
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Dataset::new(name, features, targets)
}
