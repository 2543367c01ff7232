//! Attached abstention: a rejector composed with an ordinary predictor,
//! either before it (outlier screening on the raw input) or after it
//! (thresholding the predictor's certainty).
//!
//! Dissimilarity is the mean Euclidean distance to the `k` nearest training
//! inputs in standardized coordinates; certainty is the largest softmax
//! probability. Both are one concrete choice among many possible measures.

use std::sync::atomic::{AtomicUsize, Ordering};

use ndarray::{Array2, ArrayView2};

use crate::dataset::{euclidean, Dataset, Scaler};
use crate::decision::{AbstentionReason, Decision, Detail};
use crate::error::{Error, Result};
use crate::kv::KvDoc;
use crate::predictor::{LinearModel, ProbVector};

/// Anything that maps an input to class probabilities.
pub trait Classifier {
    fn predict_proba(&self, x: &[f64]) -> Result<ProbVector>;
}

impl Classifier for LinearModel {
    fn predict_proba(&self, x: &[f64]) -> Result<ProbVector> {
        LinearModel::predict_proba(self, x)
    }
}

/// Wraps a model and counts how often it is evaluated.
#[derive(Debug)]
pub struct CountingModel {
    model: LinearModel,
    evaluations: AtomicUsize,
}

impl CountingModel {
    pub fn new(model: LinearModel) -> Self {
        Self {
            model,
            evaluations: AtomicUsize::new(0),
        }
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::SeqCst)
    }

    pub fn model(&self) -> &LinearModel {
        &self.model
    }
}

impl Classifier for CountingModel {
    fn predict_proba(&self, x: &[f64]) -> Result<ProbVector> {
        self.evaluations.fetch_add(1, Ordering::SeqCst);
        self.model.predict_proba(x)
    }
}

/// Label-free outlier screen. Holds standardized training inputs only.
#[derive(Clone, Debug, PartialEq)]
pub struct KnnRejector {
    k: usize,
    delta: f64,
    inputs: Array2<f64>,
    scaler: Scaler,
}

impl KnnRejector {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn inputs(&self) -> ArrayView2<'_, f64> {
        self.inputs.view()
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        let z = self.scaler.apply(x)?;
        knn_outlier_score(self.inputs.view(), &z, self.k)
    }

    /// Same stored inputs, different threshold.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(Self {
            delta,
            ..self.clone()
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Rejector {
    KnnDistance(KnnRejector),
    ChowThreshold { tau: f64 },
    FixedFraction { q: f64, cutoff: f64 },
}

impl Rejector {
    pub fn kind(&self) -> &'static str {
        match self {
            Rejector::KnnDistance(_) => "knn-distance",
            Rejector::ChowThreshold { .. } => "chow-threshold",
            Rejector::FixedFraction { .. } => "fixed-fraction",
        }
    }

    /// Outlier screen on the raw input; `None` lets the input through.
    pub fn screen_input(&self, x: &[f64]) -> Result<Option<Decision>> {
        let Rejector::KnnDistance(knn) = self else {
            return Err(Error::WrongRejector {
                expected: "knn-distance",
                actual: self.kind(),
            });
        };
        let score = knn.score(x)?;
        Ok((score >= knn.delta).then(|| {
            Decision::abstained(
                AbstentionReason::Outlier,
                vec![Detail::Distance(score), Detail::Delta(knn.delta)],
            )
        }))
    }

    /// Certainty screen on predicted probabilities; abstains strictly below
    /// the threshold.
    pub fn screen_proba(&self, proba: &ProbVector) -> Result<Option<Decision>> {
        let threshold = match self {
            Rejector::ChowThreshold { tau } => *tau,
            Rejector::FixedFraction { cutoff, .. } => *cutoff,
            Rejector::KnnDistance(_) => {
                return Err(Error::WrongRejector {
                    expected: "chow-threshold or fixed-fraction",
                    actual: self.kind(),
                })
            }
        };
        let max_p = proba.max();
        Ok((max_p < threshold).then(|| {
            Decision::abstained(
                AbstentionReason::Ambiguity,
                vec![
                    Detail::MaxProb(max_p),
                    Detail::Threshold(threshold),
                    Detail::WouldBe(proba.argmax()),
                ],
            )
        }))
    }

    pub fn to_kv(&self) -> Result<KvDoc> {
        let mut doc = KvDoc::new();
        doc.push("kind", self.kind());
        match self {
            Rejector::KnnDistance(knn) => {
                doc.push("k", knn.k);
                doc.push_f64("delta", knn.delta);
                doc.extend_prefixed("scaler.", &knn.scaler.to_kv()?);
                doc.push("inputs.count", knn.inputs.nrows());
                for (i, row) in knn.inputs.rows().into_iter().enumerate() {
                    doc.push_f64s(format!("input.{i}"), &row.to_vec());
                }
            }
            Rejector::ChowThreshold { tau } => doc.push_f64("tau", *tau),
            Rejector::FixedFraction { q, cutoff } => {
                doc.push_f64("q", *q);
                doc.push_f64("cutoff", *cutoff);
            }
        }
        Ok(doc)
    }

    pub fn from_kv(doc: &KvDoc) -> Result<Self> {
        match doc.require("kind")? {
            "knn-distance" => {
                let k = doc.usize("k")?;
                let delta = doc.f64("delta")?;
                let scaler = Scaler::from_kv(&doc.section("scaler."))?;
                let n = doc.usize("inputs.count")?;
                let d = scaler.dim();
                let mut inputs = Array2::zeros((n, d));
                for i in 0..n {
                    let row = doc.f64s(&format!("input.{i}"))?;
                    if row.len() != d {
                        return Err(Error::Format(format!("input.{i} has {} entries", row.len())));
                    }
                    for (j, v) in row.into_iter().enumerate() {
                        inputs[[i, j]] = v;
                    }
                }
                check_k(k, n)?;
                check_delta(delta)?;
                Ok(Rejector::KnnDistance(KnnRejector {
                    k,
                    delta,
                    inputs,
                    scaler,
                }))
            }
            "chow-threshold" => make_chow_rejector(doc.f64("tau")?),
            "fixed-fraction" => {
                let q = doc.f64("q")?;
                check_fraction(q)?;
                Ok(Rejector::FixedFraction {
                    q,
                    cutoff: doc.f64("cutoff")?,
                })
            }
            other => Err(Error::Format(format!("unknown rejector kind '{other}'"))),
        }
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::param(format!("k = {k} must lie in 1..={n}")));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0) || delta.is_nan() {
        return Err(Error::param(format!("delta = {delta} must be > 0")));
    }
    Ok(())
}

fn check_fraction(q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::param(format!("q = {q} must lie in (0,1)")));
    }
    Ok(())
}

/// Mean of the `k` smallest Euclidean distances from `x` to the rows of
/// `train_inputs`.
pub fn knn_outlier_score(train_inputs: ArrayView2<'_, f64>, x: &[f64], k: usize) -> Result<f64> {
    check_k(k, train_inputs.nrows())?;
    if x.len() != train_inputs.ncols() {
        return Err(Error::DimensionMismatch {
            expected: train_inputs.ncols(),
            actual: x.len(),
        });
    }
    let mut dists: Vec<f64> = train_inputs
        .rows()
        .into_iter()
        .map(|r| euclidean(r.as_slice().expect("standard layout"), x))
        .collect();
    dists.sort_by(f64::total_cmp);
    Ok(dists[..k].iter().sum::<f64>() / k as f64)
}

/// Outlier rejector over the standardized training inputs. Labels are never
/// read.
pub fn make_pre_rejector(train: &Dataset, k: usize, delta: f64) -> Result<Rejector> {
    check_k(k, train.n())?;
    check_delta(delta)?;
    let scaler = Scaler::fit(train);
    let inputs = scaler.apply_matrix(train.features());
    Ok(Rejector::KnnDistance(KnnRejector {
        k,
        delta,
        inputs: inputs.as_standard_layout().to_owned(),
        scaler,
    }))
}

pub fn make_chow_rejector(tau: f64) -> Result<Rejector> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::param(format!("tau = {tau} must lie in (0,1]")));
    }
    Ok(Rejector::ChowThreshold { tau })
}

/// Rejects the least certain `ceil(q * n)` calibration points. The cutoff is
/// the next calibration score above that group, so with strict comparison
/// exactly `ceil(q * n)` distinct scores fall below it; tied scores at the
/// cutoff are all accepted. A `1e-9` slack absorbs representation error in
/// `q * n`.
pub fn make_fraction_rejector(q: f64, calibration_scores: &[f64]) -> Result<Rejector> {
    check_fraction(q)?;
    if calibration_scores.is_empty() {
        return Err(Error::param("calibration scores are empty"));
    }
    if calibration_scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut sorted = calibration_scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let reject = ((q * n as f64) - 1e-9).ceil() as usize;
    let cutoff = sorted.get(reject).copied().unwrap_or(f64::INFINITY);
    Ok(Rejector::FixedFraction { q, cutoff })
}

/// Max-probability of the model on every row, for fraction calibration.
pub fn calibration_scores(model: &impl Classifier, data: &Dataset) -> Result<Vec<f64>> {
    (0..data.n())
        .map(|i| Ok(model.predict_proba(&data.row_vec(i))?.max()))
        .collect()
}

/// Outlier screen first; the predictor runs only if the input passes.
pub fn pre_pipeline_decide(rejector: &Rejector, model: &impl Classifier, x: &[f64]) -> Result<Decision> {
    if let Some(abstain) = rejector.screen_input(x)? {
        return Ok(abstain);
    }
    Ok(Decision::Predicted(model.predict_proba(x)?.argmax()))
}

/// Predictor first; its certainty is thresholded afterwards.
pub fn post_pipeline_decide(model: &impl Classifier, rejector: &Rejector, x: &[f64]) -> Result<Decision> {
    if matches!(rejector, Rejector::KnnDistance(_)) {
        return Err(Error::WrongRejector {
            expected: "chow-threshold or fixed-fraction",
            actual: rejector.kind(),
        });
    }
    let proba = model.predict_proba(x)?;
    Ok(rejector
        .screen_proba(&proba)?
        .unwrap_or(Decision::Predicted(proba.argmax())))
}

/// Predictor with an optional outlier screen in front and an optional
/// certainty screen behind.
#[derive(Clone, Debug, PartialEq)]
pub struct AttachedPipeline {
    model: LinearModel,
    pre: Option<Rejector>,
    post: Option<Rejector>,
}

impl AttachedPipeline {
    pub fn new(model: LinearModel, pre: Option<Rejector>, post: Option<Rejector>) -> Result<Self> {
        if let Some(r) = &pre {
            if !matches!(r, Rejector::KnnDistance(_)) {
                return Err(Error::WrongRejector {
                    expected: "knn-distance",
                    actual: r.kind(),
                });
            }
        }
        if let Some(r) = &post {
            if matches!(r, Rejector::KnnDistance(_)) {
                return Err(Error::WrongRejector {
                    expected: "chow-threshold or fixed-fraction",
                    actual: r.kind(),
                });
            }
        }
        Ok(Self { model, pre, post })
    }

    pub fn model(&self) -> &LinearModel {
        &self.model
    }

    pub fn pre(&self) -> Option<&Rejector> {
        self.pre.as_ref()
    }

    pub fn post(&self) -> Option<&Rejector> {
        self.post.as_ref()
    }

    pub fn decide(&self, x: &[f64]) -> Result<Decision> {
        if let Some(pre) = &self.pre {
            if let Some(abstain) = pre.screen_input(x)? {
                return Ok(abstain);
            }
        }
        match &self.post {
            Some(post) => post_pipeline_decide(&self.model, post, x),
            None => Ok(Decision::Predicted(self.model.predict(x)?)),
        }
    }

    pub fn to_kv(&self) -> Result<KvDoc> {
        let mut doc = KvDoc::new();
        doc.extend_prefixed("model.", &self.model.to_kv()?);
        if let Some(pre) = &self.pre {
            doc.extend_prefixed("pre.", &pre.to_kv()?);
        }
        if let Some(post) = &self.post {
            doc.extend_prefixed("post.", &post.to_kv()?);
        }
        Ok(doc)
    }

    pub fn from_kv(doc: &KvDoc) -> Result<Self> {
        let model = LinearModel::from_kv(&doc.section("model."))?;
        let pre = doc.section("pre.");
        let post = doc.section("post.");
        let pre = (!pre.entries().is_empty()).then(|| Rejector::from_kv(&pre)).transpose()?;
        let post = (!post.entries().is_empty()).then(|| Rejector::from_kv(&post)).transpose()?;
        AttachedPipeline::new(model, pre, post)
    }
}
