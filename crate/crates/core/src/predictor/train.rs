use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::LinearModel;
use crate::dataset::{Dataset, Scaler};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Full-batch gradient descent settings for the softmax surrogate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurrogateConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            epochs: 1000,
            learning_rate: 1.0,
            seed: 0,
        }
    }
}

impl SurrogateConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::param("learning rate must be > 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TrainingReport {
    pub model: LinearModel,
    /// Mean cross-entropy before training and after every accepted step.
    pub losses: Vec<f64>,
}

const MAX_HALVINGS: usize = 60;

/// Mean cross-entropy of softmax(`W z + b`) against `labels`.
pub fn cross_entropy(
    weights: ArrayView2<'_, f64>,
    bias: ArrayView1<'_, f64>,
    z: ArrayView2<'_, f64>,
    labels: &[usize],
) -> f64 {
    let n = z.nrows();
    let mut total = 0.0;
    for (row, &y) in z.rows().into_iter().zip(labels) {
        let s = weights.dot(&row) + bias;
        let max = s.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let lse = max + s.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        total += lse - s[y];
    }
    total / n as f64
}

/// Analytic gradient of [`cross_entropy`]: `(1/n) sum (p_i - e_{y_i}) z_i^T`.
pub fn cross_entropy_gradient(
    weights: ArrayView2<'_, f64>,
    bias: ArrayView1<'_, f64>,
    z: ArrayView2<'_, f64>,
    labels: &[usize],
) -> (Array2<f64>, Array1<f64>) {
    let n = z.nrows() as f64;
    let (c, d) = weights.dim();
    let mut gw = Array2::zeros((c, d));
    let mut gb = Array1::zeros(c);
    for (row, &y) in z.rows().into_iter().zip(labels) {
        let s = weights.dot(&row) + bias;
        let max = s.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let e = s.mapv(|v| (v - max).exp());
        let mut p = &e / e.sum();
        p[y] -= 1.0;
        for k in 0..c {
            gb[k] += p[k];
            for j in 0..d {
                gw[[k, j]] += p[k] * row[j];
            }
        }
    }
    (gw / n, gb / n)
}

/// Multinomial logistic fit over every class of the data's label space.
/// Weights start uniform in `[-0.01, 0.01]` from the seed, bias at zero.
/// Each epoch takes one full-batch step, halving the step size until the
/// loss does not increase; training stops early when no halving helps.
pub fn train_softmax(train: &Dataset, cfg: &SurrogateConfig) -> Result<TrainingReport> {
    cfg.validate()?;
    if train.classes_present() < 2 {
        return Err(Error::InvalidDataset(
            "training data must contain at least two classes".into(),
        ));
    }
    let scaler = Scaler::fit(train);
    let z = scaler.apply_matrix(train.features());
    let labels = train.labels();
    let c = train.label_space().len();
    let d = train.d();

    let mut rng = Rng::new(cfg.seed);
    let mut w = Array2::from_shape_simple_fn((c, d), || rng.uniform_in(-0.01, 0.01));
    let mut b = Array1::zeros(c);
    let mut loss = cross_entropy(w.view(), b.view(), z.view(), labels);
    let mut losses = vec![loss];

    for _ in 0..cfg.epochs {
        let (gw, gb) = cross_entropy_gradient(w.view(), b.view(), z.view(), labels);
        let mut step = cfg.learning_rate;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let w2 = &w - &(&gw * step);
            let b2 = &b - &(&gb * step);
            let l2 = cross_entropy(w2.view(), b2.view(), z.view(), labels);
            if l2 <= loss {
                w = w2;
                b = b2;
                loss = l2;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        losses.push(loss);
    }
    let model = LinearModel::new(w, b, train.label_space().clone(), scaler)?;
    Ok(TrainingReport { model, losses })
}

/// Softmax surrogate over a label space without abstention.
pub fn fit_surrogate(train: &Dataset, cfg: &SurrogateConfig) -> Result<LinearModel> {
    if train.label_space().includes_abstention() {
        return Err(Error::InvalidLabelSpace(
            "plain surrogate expects labels without abstention; use the labeled fit".into(),
        ));
    }
    Ok(train_softmax(train, cfg)?.model)
}
