//! Per-epoch weight recordings and their on-disk layout.
//!
//! A series is stored as a directory holding `meta.json` plus one
//! `epoch_NNNNNN.bin` file per recorded epoch. Each weight file is a flat
//! array of little-endian `f64`: the weight matrices of layers `1..=H`, each
//! row-major (`n_{l-1}` rows of `n_l` entries), followed by the bias vectors
//! of layers `1..=H`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::arch::NetworkArch;
use super::matrix::Matrix;
use super::network::LayeredNetwork;
use super::train::TrainConfig;
use crate::error::{Error, Result};

pub const META_FILE: &str = "meta.json";

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSeries {
    arch: NetworkArch,
    config: TrainConfig,
    snapshots: Vec<LayeredNetwork>,
    epoch_indices: Vec<usize>,
    loss_history: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    format: String,
    arch: NetworkArch,
    config: TrainConfig,
    seed: u64,
    epoch_indices: Vec<usize>,
    files: Vec<String>,
    loss_history: Vec<f64>,
}

const FORMAT: &str = "morphonet-snapshots-v1/f64-le";

impl SnapshotSeries {
    pub fn new(arch: NetworkArch, config: TrainConfig) -> Self {
        Self {
            arch,
            config,
            snapshots: Vec::new(),
            epoch_indices: Vec::new(),
            loss_history: Vec::new(),
        }
    }

    /// Records a snapshot at `epoch` together with that epoch's loss.
    pub fn push(&mut self, epoch: usize, net: LayeredNetwork, loss: f64) -> Result<()> {
        if let Some(&last) = self.epoch_indices.last() {
            if epoch <= last {
                return Err(Error::Argument(format!(
                    "epoch {epoch} recorded after epoch {last}"
                )));
            }
        }
        if net.arch() != &self.arch {
            return Err(Error::Shape("snapshot architecture differs from series".into()));
        }
        self.snapshots.push(net);
        self.epoch_indices.push(epoch);
        self.loss_history.push(loss);
        Ok(())
    }

    pub(crate) fn push_loss(&mut self, loss: f64) {
        self.loss_history.push(loss);
    }

    pub fn arch(&self) -> &NetworkArch {
        &self.arch
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[LayeredNetwork] {
        &self.snapshots
    }

    pub fn epoch_indices(&self) -> &[usize] {
        &self.epoch_indices
    }

    /// Training loss after every epoch, index 0 being the initial network.
    pub fn loss_history(&self) -> &[f64] {
        &self.loss_history
    }

    pub fn initial(&self) -> Option<&LayeredNetwork> {
        self.snapshots.first()
    }

    pub fn last(&self) -> Option<&LayeredNetwork> {
        self.snapshots.last()
    }

    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut files = Vec::with_capacity(self.len());
        for (net, &epoch) in self.snapshots.iter().zip(&self.epoch_indices) {
            let name = format!("epoch_{epoch:06}.bin");
            let path = dir.join(&name);
            let mut buf = Vec::with_capacity(8 * (self.arch.weight_count() + 64));
            for w in net.weights() {
                for v in w.as_slice() {
                    buf.extend_from_slice(&v.to_le_bytes());
                }
            }
            for b in net.biases() {
                for v in b {
                    buf.extend_from_slice(&v.to_le_bytes());
                }
            }
            fs::write(&path, &buf).map_err(|e| Error::io(&path, e))?;
            files.push(name);
        }
        let meta = Meta {
            format: FORMAT.into(),
            arch: self.arch.clone(),
            config: self.config.clone(),
            seed: self.config.seed,
            epoch_indices: self.epoch_indices.clone(),
            files,
            loss_history: self.loss_history.clone(),
        };
        let path = dir.join(META_FILE);
        let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::to_writer_pretty(&mut f, &meta)?;
        f.write_all(b"\n").map_err(|e| Error::io(&path, e))?;
        Ok(())
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        let meta_path = dir.join(META_FILE);
        let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let meta: Meta = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: meta_path.clone(),
            location: format!("line {}", e.line()),
            message: e.to_string(),
        })?;
        if meta.format != FORMAT {
            return Err(Error::Parse {
                path: meta_path,
                location: "format".into(),
                message: format!("unknown snapshot format {:?}", meta.format),
            });
        }
        meta.arch.validate()?;
        if meta.files.len() != meta.epoch_indices.len() {
            return Err(Error::Parse {
                path: meta_path,
                location: "files".into(),
                message: "file list and epoch list differ in length".into(),
            });
        }
        let sizes = meta.arch.layer_sizes().to_vec();
        let n_weights = meta.arch.weight_count();
        let n_biases: usize = sizes[1..].iter().sum();
        let mut series = SnapshotSeries::new(meta.arch.clone(), meta.config.clone());
        for (name, &epoch) in meta.files.iter().zip(&meta.epoch_indices) {
            let path = dir.join(name);
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            if bytes.len() != 8 * (n_weights + n_biases) {
                return Err(Error::Parse {
                    path,
                    location: "file size".into(),
                    message: format!(
                        "expected {} bytes, found {}",
                        8 * (n_weights + n_biases),
                        bytes.len()
                    ),
                });
            }
            let mut values = bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")));
            let weights: Vec<Matrix> = sizes
                .windows(2)
                .map(|w| Matrix::from_vec(w[0], w[1], values.by_ref().take(w[0] * w[1]).collect()))
                .collect();
            let biases: Vec<Vec<f64>> = sizes[1..]
                .iter()
                .map(|&n| values.by_ref().take(n).collect())
                .collect();
            let net = LayeredNetwork::from_parts(meta.arch.clone(), weights, biases)?;
            series.snapshots.push(net);
            series.epoch_indices.push(epoch);
        }
        if series.epoch_indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse {
                path: dir.join(META_FILE),
                location: "epoch_indices".into(),
                message: "epoch indices must be strictly increasing".into(),
            });
        }
        series.loss_history = meta.loss_history;
        Ok(series)
    }
}
