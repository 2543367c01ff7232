//! Non-abstaining linear classification: the 0/1 loss, empirical risk, a
//! softmax linear model, its gradient-trained surrogate fit and an exhaustive
//! grid argmin for desk-scale problems.

mod grid;
mod train;

pub use grid::{grid_search_argmin, line_model, GridAxis, GridFit, GridSpec, DEFAULT_GRID_CAP};
pub use train::{
    cross_entropy, cross_entropy_gradient, fit_surrogate, train_softmax, SurrogateConfig,
    TrainingReport,
};

use ndarray::{Array1, Array2};

use crate::dataset::{Dataset, LabelSpace, Scaler};
use crate::error::{Error, Result};
use crate::kv::KvDoc;

/// Probabilities over the scored classes of a model.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::param("empty probability vector"));
        }
        if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::param("probabilities must be finite and >= 0"));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::param(format!("probabilities sum to {sum}")));
        }
        Ok(Self(p))
    }

    /// Numerically stable softmax.
    pub fn from_scores(scores: &[f64]) -> Result<Self> {
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite);
        }
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let total: f64 = exp.iter().sum();
        Ok(Self(exp.into_iter().map(|e| e / total).collect()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.0[self.argmax()]
    }

    /// Index of the largest probability; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }

    /// The two most probable indices, by the same tie-break.
    pub fn top_two(&self) -> (usize, Option<usize>) {
        let first = self.argmax();
        let mut second: Option<usize> = None;
        for (i, &p) in self.0.iter().enumerate() {
            if i == first {
                continue;
            }
            match second {
                Some(s) if p <= self.0[s] => {}
                _ => second = Some(i),
            }
        }
        (first, second)
    }
}

/// Linear scorer `s = W z + b` over standardized inputs `z`, one row per
/// class of its label space, with softmax probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    weights: Array2<f64>,
    bias: Array1<f64>,
    label_space: LabelSpace,
    scaler: Scaler,
}

impl LinearModel {
    pub fn new(
        weights: Array2<f64>,
        bias: Array1<f64>,
        label_space: LabelSpace,
        scaler: Scaler,
    ) -> Result<Self> {
        let (c, d) = weights.dim();
        if c != label_space.len() {
            return Err(Error::DimensionMismatch {
                expected: label_space.len(),
                actual: c,
            });
        }
        if bias.len() != c {
            return Err(Error::DimensionMismatch {
                expected: c,
                actual: bias.len(),
            });
        }
        if d != scaler.dim() {
            return Err(Error::DimensionMismatch {
                expected: scaler.dim(),
                actual: d,
            });
        }
        if weights.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            weights,
            bias,
            label_space,
            scaler,
        })
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn bias(&self) -> &Array1<f64> {
        &self.bias
    }

    pub fn label_space(&self) -> &LabelSpace {
        &self.label_space
    }

    pub fn scaler(&self) -> &Scaler {
        &self.scaler
    }

    /// Input dimension `d`.
    pub fn dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn standardize(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.scaler.apply(x)
    }

    /// Class scores for an already standardized input.
    pub fn scores_standardized(&self, z: &[f64]) -> Vec<f64> {
        self.weights
            .rows()
            .into_iter()
            .zip(self.bias.iter())
            .map(|(row, b)| {
                let mut s = 0.0;
                for (w, v) in row.iter().zip(z) {
                    s += w * v;
                }
                s + b
            })
            .collect()
    }

    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.scores_standardized(&self.standardize(x)?))
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<ProbVector> {
        ProbVector::from_scores(&self.scores(x)?)
    }

    /// Most probable label index; ties go to the lowest index.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(self.predict_proba(x)?.argmax())
    }

    pub fn to_kv(&self) -> Result<KvDoc> {
        let mut doc = KvDoc::new();
        doc.push("labels.count", self.label_space.len());
        for (i, l) in self.label_space.labels().iter().enumerate() {
            doc.push(format!("label.{i}"), l);
        }
        doc.push("features.count", self.dim());
        doc.extend_prefixed("scaler.", &self.scaler.to_kv()?);
        for (c, row) in self.weights.rows().into_iter().enumerate() {
            doc.push_f64s(format!("weights.{c}"), &row.to_vec());
        }
        doc.push_f64s("bias", &self.bias.to_vec());
        Ok(doc)
    }

    pub fn from_kv(doc: &KvDoc) -> Result<Self> {
        let c = doc.usize("labels.count")?;
        let labels = (0..c)
            .map(|i| doc.require(&format!("label.{i}")).map(str::to_string))
            .collect::<Result<Vec<_>>>()?;
        let space = LabelSpace::new(labels)?;
        let d = doc.usize("features.count")?;
        let scaler = Scaler::from_kv(&doc.section("scaler."))?;
        let mut weights = Array2::zeros((c, d));
        for ci in 0..c {
            let row = doc.f64s(&format!("weights.{ci}"))?;
            if row.len() != d {
                return Err(Error::Format(format!("weights.{ci} has {} entries", row.len())));
            }
            for (j, v) in row.into_iter().enumerate() {
                weights[[ci, j]] = v;
            }
        }
        let bias = Array1::from(doc.f64s("bias")?);
        LinearModel::new(weights, bias, space, scaler)
    }
}

/// Signature shared by the loss functions used for empirical risk.
pub type LossFn = fn(&LabelSpace, usize, usize) -> Result<f64>;

/// 0 when the labels agree, 1 otherwise. Both must be defined classes.
pub fn zero_one_loss(space: &LabelSpace, y_true: usize, y_pred: usize) -> Result<f64> {
    space.check_defined(y_true)?;
    space.check_defined(y_pred)?;
    Ok(if y_true == y_pred { 0.0 } else { 1.0 })
}

/// Sum of `loss(y_i, predict(x_i))` over the dataset.
pub fn empirical_risk(model: &LinearModel, data: &Dataset, loss: LossFn) -> Result<f64> {
    if data.d() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            actual: data.d(),
        });
    }
    if data.label_space() != model.label_space() {
        return Err(Error::InvalidLabelSpace(
            "model and data use different label spaces".into(),
        ));
    }
    let mut total = 0.0;
    for i in 0..data.n() {
        let pred = model.predict(&data.row_vec(i))?;
        total += loss(model.label_space(), data.labels()[i], pred)?;
    }
    Ok(total)
}
