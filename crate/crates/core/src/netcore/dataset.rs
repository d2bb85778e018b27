use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples as rows of `features`, one regression target per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    features: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, features: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Argument("dataset needs at least one sample".into()));
        }
        if features.len() != targets.len() {
            return Err(Error::Shape(format!(
                "{} feature rows but {} targets",
                features.len(),
                targets.len()
            )));
        }
        let d = features[0].len();
        if d == 0 {
            return Err(Error::Shape("samples have no features".into()));
        }
        if let Some((m, row)) = features.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::Shape(format!("sample {m} has {} features, expected {d}", row.len())));
        }
        Ok(Self {
            name: name.into(),
            features,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features[0].len()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn sample(&self, m: usize) -> (&[f64], f64) {
        (&self.features[m], self.targets[m])
    }

    /// New dataset holding the samples at `indices`, in that order.
    pub fn subset(&self, name: impl Into<String>, indices: &[usize]) -> Result<Self> {
        Self::new(
            name,
            indices.iter().map(|&i| self.features[i].clone()).collect(),
            indices.iter().map(|&i| self.targets[i]).collect(),
        )
    }
}
