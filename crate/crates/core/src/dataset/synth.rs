//! Synthetic fixtures: Gaussian class blobs, injected outliers, label noise
//! with an optional indicator column, and neighbourhood-based abstention
//! labels.

use ndarray::{Array2, Axis};

use super::{euclidean, Dataset, LabelSpace, Scaler};
use crate::error::{Error, Result};
use crate::rng::Rng;

const OUTLIER_ATTEMPTS: usize = 10_000;

/// One class blob: axis-aligned normal around `mean`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSpec {
    pub class: String,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub count: usize,
}

impl GaussianSpec {
    pub fn isotropic(class: &str, mean: Vec<f64>, std: f64, count: usize) -> Self {
        let d = mean.len();
        Self {
            class: class.to_string(),
            mean,
            std: vec![std; d],
            count,
        }
    }

    /// Per-axis spread, for features measured on incomparable scales.
    pub fn axis_aligned(class: &str, mean: Vec<f64>, std: Vec<f64>, count: usize) -> Self {
        Self {
            class: class.to_string(),
            mean,
            std,
            count,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::param(format!("class '{}': count must be >= 1", self.class)));
        }
        if self.std.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                actual: self.std.len(),
            });
        }
        if self.std.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::param(format!("class '{}': std must be > 0", self.class)));
        }
        if self.mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }
}

/// Draws every spec's points in spec order. Features are named `x1..xd`.
pub fn gen_gaussian_mixture(specs: &[GaussianSpec], seed: u64) -> Result<Dataset> {
    let first = specs
        .first()
        .ok_or_else(|| Error::param("at least one Gaussian spec is required"))?;
    let d = first.mean.len();
    if d == 0 {
        return Err(Error::InvalidDataset("no feature columns".into()));
    }
    for s in specs {
        s.validate()?;
        if s.mean.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: s.mean.len(),
            });
        }
    }
    let space = LabelSpace::sorted(specs.iter().map(|s| s.class.as_str()))?;
    let n: usize = specs.iter().map(|s| s.count).sum();
    let mut rng = Rng::new(seed);
    let mut values = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for s in specs {
        let label = space.index_of(&s.class)?;
        for _ in 0..s.count {
            for j in 0..d {
                values.push(s.mean[j] + s.std[j] * rng.normal());
            }
            labels.push(label);
        }
    }
    let features = Array2::from_shape_vec((n, d), values).expect("shape matches");
    Dataset::new(
        features,
        labels,
        space,
        (1..=d).map(|j| format!("x{j}")).collect(),
    )
}

/// Appends `count` points whose Euclidean distance to every original point
/// is at least `min_distance`, measured in the original data's standardized
/// coordinates. Appended labels are uniform over the defined classes; they
/// are placeholders and the new rows are always the last `count` rows.
pub fn inject_outliers(
    dataset: &Dataset,
    count: usize,
    min_distance: f64,
    seed: u64,
) -> Result<Dataset> {
    if count == 0 {
        return Err(Error::param("outlier count must be >= 1"));
    }
    if !(min_distance > 0.0 && min_distance.is_finite()) {
        return Err(Error::param("min_distance must be > 0"));
    }
    let space = dataset.label_space();
    let m = space.defined_count();
    if m == 0 {
        return Err(Error::InvalidLabelSpace("no defined classes".into()));
    }
    let scaler = Scaler::fit(dataset);
    let z = scaler.apply_matrix(dataset.features());
    let rows: Vec<Vec<f64>> = z.rows().into_iter().map(|r| r.to_vec()).collect();
    let d = dataset.d();
    let lo: Vec<f64> = (0..d)
        .map(|j| z.column(j).fold(f64::INFINITY, |a, &b| a.min(b)) - 2.0 * min_distance)
        .collect();
    let hi: Vec<f64> = (0..d)
        .map(|j| z.column(j).fold(f64::NEG_INFINITY, |a, &b| a.max(b)) + 2.0 * min_distance)
        .collect();

    let mut rng = Rng::new(seed);
    let mut new_rows = Vec::with_capacity(count * d);
    let mut new_labels = Vec::with_capacity(count);
    for index in 0..count {
        let mut placed = false;
        for _ in 0..OUTLIER_ATTEMPTS {
            let cand: Vec<f64> = (0..d).map(|j| rng.uniform_in(lo[j], hi[j])).collect();
            let raw = scaler.invert(&cand);
            // Check after the round trip so the contract holds on stored values.
            let back = scaler.apply(&raw)?;
            if rows.iter().all(|r| euclidean(r, &back) >= min_distance) {
                new_rows.extend(raw);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::OutlierPlacement {
                index,
                attempts: OUTLIER_ATTEMPTS,
            });
        }
        new_labels.push(rng.below(m));
    }
    let extra = Dataset::new(
        Array2::from_shape_vec((count, d), new_rows).expect("shape matches"),
        new_labels,
        space.clone(),
        dataset.feature_names().to_vec(),
    )?;
    dataset.concat(&extra)
}

/// Which rows get their labels randomized.
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseMode {
    /// `round(p * n)` rows chosen uniformly at random.
    Fraction(f64),
    /// Every row of the named class.
    WholeClass(String),
}

/// Result of [`corrupt_labels`]: the new dataset and the corrupted rows.
#[derive(Clone, Debug)]
pub struct Corruption {
    pub dataset: Dataset,
    pub corrupted: Vec<usize>,
}

pub const SMUDGE_FEATURE: &str = "smudge";

/// Resamples the labels of the selected rows uniformly over the defined
/// classes. With `smudge`, appends a 0/1 column that is 1 exactly on the
/// selected rows.
pub fn corrupt_labels(
    dataset: &Dataset,
    mode: &NoiseMode,
    smudge: bool,
    seed: u64,
) -> Result<Corruption> {
    let space = dataset.label_space();
    let n = dataset.n();
    let mut rng = Rng::new(seed);
    let corrupted: Vec<usize> = match mode {
        NoiseMode::Fraction(p) => {
            if !(*p > 0.0 && *p < 1.0) {
                return Err(Error::param(format!("noise fraction {p} outside (0,1)")));
            }
            let k = (p * n as f64).round() as usize;
            let mut idx: Vec<usize> = (0..n).collect();
            rng.shuffle(&mut idx);
            let mut chosen = idx[..k].to_vec();
            chosen.sort_unstable();
            chosen
        }
        NoiseMode::WholeClass(name) => {
            let c = space.index_of(name)?;
            space.check_defined(c)?;
            (0..n).filter(|&i| dataset.labels()[i] == c).collect()
        }
    };
    let m = space.defined_count();
    let mut labels = dataset.labels().to_vec();
    for &i in &corrupted {
        labels[i] = rng.below(m);
    }
    let mut out = dataset.relabel(labels, space.clone())?;
    if smudge {
        if dataset.feature_names().iter().any(|f| f == SMUDGE_FEATURE) {
            return Err(Error::InvalidDataset(format!(
                "feature '{SMUDGE_FEATURE}' already exists"
            )));
        }
        let mut col = Array2::zeros((n, 1));
        for &i in &corrupted {
            col[[i, 0]] = 1.0;
        }
        let features = ndarray::concatenate(Axis(1), &[out.features(), col.view()])
            .expect("row counts match");
        let mut names = dataset.feature_names().to_vec();
        names.push(SMUDGE_FEATURE.to_string());
        out = out.with_features(features, names)?;
    }
    Ok(Corruption {
        dataset: out,
        corrupted,
    })
}

/// Produces training data over `Y*`: a point is relabeled `abstention` when
/// fewer than `min_agreement` of its `k` nearest other points (standardized
/// Euclidean, ties by index) share its label.
pub fn label_ambiguous(dataset: &Dataset, k: usize, min_agreement: f64) -> Result<Dataset> {
    let space = dataset.label_space();
    if space.includes_abstention() {
        return Err(Error::InvalidLabelSpace("dataset already includes abstention".into()));
    }
    let n = dataset.n();
    if k == 0 || k >= n {
        return Err(Error::param(format!("k = {k} must lie in 1..{n}")));
    }
    if !(0.0..=1.0).contains(&min_agreement) {
        return Err(Error::param("min_agreement must lie in [0,1]"));
    }
    let scaler = Scaler::fit(dataset);
    let z = scaler.apply_matrix(dataset.features());
    let rows: Vec<Vec<f64>> = z.rows().into_iter().map(|r| r.to_vec()).collect();
    let ystar = space.with_abstention();
    let abst = ystar.abstention_index().expect("just added");
    let labels = dataset.labels();
    let mut out = labels.to_vec();
    for i in 0..n {
        let mut dists: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (euclidean(&rows[i], &rows[j]), j))
            .collect();
        dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let agree = dists[..k].iter().filter(|(_, j)| labels[*j] == labels[i]).count();
        if (agree as f64) < min_agreement * k as f64 {
            out[i] = abst;
        }
    }
    dataset.relabel(out, ystar)
}
