use std::path::Path;

use ndarray::{Array2, ArrayView2};

use super::Dataset;
use crate::error::{Error, Result};
use crate::kv::{check_key_fragment, fmt_f64, KvDoc};

/// Per-feature affine map `z = (x - mean) / std` using the population
/// standard deviation. Features with zero spread pass through unchanged and
/// are flagged.
#[derive(Clone, Debug, PartialEq)]
pub struct Scaler {
    names: Vec<String>,
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Scaler {
    pub fn fit(data: &Dataset) -> Scaler {
        let n = data.n() as f64;
        let x = data.features();
        let mut means = Vec::with_capacity(data.d());
        let mut stds = Vec::with_capacity(data.d());
        for col in x.columns() {
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            means.push(mean);
            stds.push(var.sqrt());
        }
        Scaler {
            names: data.feature_names().to_vec(),
            means,
            stds,
        }
    }

    pub fn identity(names: Vec<String>) -> Scaler {
        let d = names.len();
        Scaler {
            names,
            means: vec![0.0; d],
            stds: vec![0.0; d],
        }
    }

    pub fn from_parts(names: Vec<String>, means: Vec<f64>, stds: Vec<f64>) -> Result<Scaler> {
        if means.len() != names.len() || stds.len() != names.len() {
            return Err(Error::Format("scaler vectors have mismatched lengths".into()));
        }
        Ok(Scaler { names, means, stds })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    pub fn is_passthrough(&self, j: usize) -> bool {
        !(self.stds[j] > 0.0 && self.stds[j].is_finite())
    }

    /// Features left unscaled because their spread was zero.
    pub fn passthrough_features(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&j| self.is_passthrough(j)).collect()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(x.iter()
            .enumerate()
            .map(|(j, &v)| self.apply_one(j, v))
            .collect())
    }

    fn apply_one(&self, j: usize, v: f64) -> f64 {
        if self.is_passthrough(j) {
            v
        } else {
            (v - self.means[j]) / self.stds[j]
        }
    }

    pub fn apply_matrix(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.apply_one(j, *v);
            }
        }
        out
    }

    pub fn invert(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .enumerate()
            .map(|(j, &v)| {
                if self.is_passthrough(j) {
                    v
                } else {
                    v * self.stds[j] + self.means[j]
                }
            })
            .collect()
    }

    /// One `name=mean std` entry per feature.
    pub fn to_kv(&self) -> Result<KvDoc> {
        let mut doc = KvDoc::new();
        for (j, name) in self.names.iter().enumerate() {
            check_key_fragment(name)?;
            doc.push(name.clone(), format!("{} {}", fmt_f64(self.means[j]), fmt_f64(self.stds[j])));
        }
        Ok(doc)
    }

    pub fn from_kv(doc: &KvDoc) -> Result<Scaler> {
        let mut names = Vec::new();
        let mut means = Vec::new();
        let mut stds = Vec::new();
        for (k, _) in doc.entries() {
            let vals = doc.f64s(k)?;
            if vals.len() != 2 {
                return Err(Error::Format(format!("scaler entry '{k}' needs mean and std")));
            }
            names.push(k.clone());
            means.push(vals[0]);
            stds.push(vals[1]);
        }
        Scaler::from_parts(names, means, stds)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_kv()?.write(path)
    }

    pub fn load(path: &Path) -> Result<Scaler> {
        Scaler::from_kv(&KvDoc::read(path)?)
    }
}

/// Standardizes every feature to mean 0 and (population) std 1.
pub fn standardize(data: &Dataset) -> (Dataset, Scaler) {
    let scaler = Scaler::fit(data);
    let z = scaler.apply_matrix(data.features());
    let out = data
        .with_features(z, data.feature_names().to_vec())
        .expect("affine map keeps values finite");
    (out, scaler)
}
