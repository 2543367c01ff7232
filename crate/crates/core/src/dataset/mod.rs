//! Small tabular classification datasets: label spaces, feature matrices,
//! CSV ingestion, synthetic generators, label corruption and splitting.

mod io;
mod scaler;
mod split;
mod synth;

pub use io::{load_csv, save_csv, LABEL_COLUMN};
pub use scaler::{standardize, Scaler};
pub use split::split;
pub use synth::{
    corrupt_labels, gen_gaussian_mixture, inject_outliers, label_ambiguous, Corruption,
    GaussianSpec, NoiseMode, SMUDGE_FEATURE,
};

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Name of the extra output class in an extended label space.
pub const ABSTENTION: &str = "abstention";

/// Ordered set of class names. When `abstention` is a member it is always the
/// last entry, so the defined classes keep the same indices in `Y` and `Y*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelSpace {
    labels: Vec<String>,
    includes_abstention: bool,
}

impl LabelSpace {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidLabelSpace("no labels".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() {
                return Err(Error::InvalidLabelSpace("empty label name".into()));
            }
            if labels[..i].contains(l) {
                return Err(Error::InvalidLabelSpace(format!("duplicate label '{l}'")));
            }
        }
        let abst = labels.iter().position(|l| l == ABSTENTION);
        if let Some(pos) = abst {
            if pos != labels.len() - 1 {
                return Err(Error::InvalidLabelSpace(format!(
                    "'{ABSTENTION}' must be the last label"
                )));
            }
        }
        Ok(Self {
            labels,
            includes_abstention: abst.is_some(),
        })
    }

    /// Distinct names in sorted order, with `abstention` moved to the end.
    pub fn sorted<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut defined: Vec<String> = Vec::new();
        let mut abst = false;
        for n in names {
            let n = n.as_ref();
            if n == ABSTENTION {
                abst = true;
            } else if !defined.iter().any(|d| d == n) {
                defined.push(n.to_string());
            }
        }
        defined.sort();
        if abst {
            defined.push(ABSTENTION.to_string());
        }
        Self::new(defined)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn includes_abstention(&self) -> bool {
        self.includes_abstention
    }

    pub fn abstention_index(&self) -> Option<usize> {
        self.includes_abstention.then(|| self.labels.len() - 1)
    }

    /// Number of defined (non-abstention) classes, `m`.
    pub fn defined_count(&self) -> usize {
        self.labels.len() - usize::from(self.includes_abstention)
    }

    pub fn is_defined(&self, index: usize) -> bool {
        index < self.defined_count()
    }

    pub fn name(&self, index: usize) -> Result<&str> {
        self.labels
            .get(index)
            .map(String::as_str)
            .ok_or(Error::LabelOutOfRange {
                index,
                size: self.labels.len(),
            })
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    /// `Y*` for this space (`self` if abstention is already present).
    pub fn with_abstention(&self) -> LabelSpace {
        if self.includes_abstention {
            return self.clone();
        }
        let mut labels = self.labels.clone();
        labels.push(ABSTENTION.to_string());
        LabelSpace {
            labels,
            includes_abstention: true,
        }
    }

    /// `Y` for this space (drops abstention if present).
    pub fn without_abstention(&self) -> LabelSpace {
        LabelSpace {
            labels: self.labels[..self.defined_count()].to_vec(),
            includes_abstention: false,
        }
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        self.name(index).map(|_| ())
    }

    pub(crate) fn check_defined(&self, index: usize) -> Result<()> {
        self.check_index(index)?;
        if !self.is_defined(index) {
            return Err(Error::param(format!(
                "label '{ABSTENTION}' is not a defined class here"
            )));
        }
        Ok(())
    }
}

/// Feature matrix with ground-truth labels over a declared label space.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    label_space: LabelSpace,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Array2<f64>,
        labels: Vec<usize>,
        label_space: LabelSpace,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let (n, d) = features.dim();
        if n == 0 {
            return Err(Error::EmptyData);
        }
        if d == 0 {
            return Err(Error::InvalidDataset("no feature columns".into()));
        }
        if labels.len() != n {
            return Err(Error::InvalidDataset(format!(
                "{} labels for {n} rows",
                labels.len()
            )));
        }
        if feature_names.len() != d {
            return Err(Error::InvalidDataset(format!(
                "{} feature names for {d} columns",
                feature_names.len()
            )));
        }
        for (i, name) in feature_names.iter().enumerate() {
            if name.is_empty() || feature_names[..i].contains(name) {
                return Err(Error::InvalidDataset(format!(
                    "feature name '{name}' is empty or duplicated"
                )));
            }
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        for &l in &labels {
            label_space.check_index(l)?;
        }
        Ok(Self {
            features,
            labels,
            label_space,
            feature_names,
        })
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn d(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    pub fn row_vec(&self, i: usize) -> Vec<f64> {
        self.features.row(i).to_vec()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_space(&self) -> &LabelSpace {
        &self.label_space
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.label_space.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Number of distinct labels that actually occur.
    pub fn classes_present(&self) -> usize {
        self.class_counts().iter().filter(|&&c| c > 0).count()
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            label_space: self.label_space.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Rows of `self` followed by rows of `other`; schemas must match.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.label_space != other.label_space || self.feature_names != other.feature_names {
            return Err(Error::InvalidDataset(
                "cannot concatenate datasets with different schemas".into(),
            ));
        }
        let features = ndarray::concatenate(Axis(0), &[self.features.view(), other.features.view()])
            .expect("column counts match");
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Ok(Dataset {
            features,
            labels,
            label_space: self.label_space.clone(),
            feature_names: self.feature_names.clone(),
        })
    }

    /// Same features, new labels over a (possibly different) label space.
    pub fn relabel(&self, labels: Vec<usize>, label_space: LabelSpace) -> Result<Dataset> {
        Dataset::new(
            self.features.clone(),
            labels,
            label_space,
            self.feature_names.clone(),
        )
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Dataset> {
        if names.len() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                actual: names.len(),
            });
        }
        self.feature_names = names;
        Dataset::new(
            self.features,
            self.labels,
            self.label_space,
            self.feature_names,
        )
    }

    pub(crate) fn with_features(&self, features: Array2<f64>, names: Vec<String>) -> Result<Dataset> {
        Dataset::new(features, self.labels.clone(), self.label_space.clone(), names)
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
