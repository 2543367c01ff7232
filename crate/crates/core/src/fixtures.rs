//! Named synthetic datasets shared by tests, the command line and the
//! acceptance suite. All builders are pure functions of the seed.

use crate::dataset::{
    corrupt_labels, gen_gaussian_mixture, inject_outliers, split, Dataset, GaussianSpec, NoiseMode,
    SMUDGE_FEATURE,
};
use crate::error::{Error, Result};

pub const MALIGNANT: &str = "malignant";
pub const BENIGN: &str = "benign";

fn breast_names() -> Vec<String> {
    vec!["concave".into(), "perimeter".into()]
}

/// Two tumour classes on concavity and perimeter scales.
pub fn fig1(seed: u64) -> Result<Dataset> {
    gen_gaussian_mixture(
        &[
            GaussianSpec::axis_aligned(MALIGNANT, vec![0.20, 160.0], vec![0.02, 10.0], 50),
            GaussianSpec::axis_aligned(BENIGN, vec![0.08, 90.0], vec![0.02, 10.0], 50),
        ],
        seed,
    )?
    .with_feature_names(breast_names())
}

/// Two tight blobs at `+-(2,2)`.
pub fn separable(seed: u64) -> Result<Dataset> {
    gen_gaussian_mixture(
        &[
            GaussianSpec::isotropic("a", vec![2.0, 2.0], 0.1, 50),
            GaussianSpec::isotropic("b", vec![-2.0, -2.0], 0.1, 50),
        ],
        seed,
    )
}

/// Tumour classes whose distributions overlap heavily.
pub fn overlap(seed: u64) -> Result<Dataset> {
    gen_gaussian_mixture(
        &[
            GaussianSpec::axis_aligned(MALIGNANT, vec![0.16, 130.0], vec![0.03, 15.0], 100),
            GaussianSpec::axis_aligned(BENIGN, vec![0.12, 110.0], vec![0.03, 15.0], 100),
        ],
        seed,
    )?
    .with_feature_names(breast_names())
}

pub const OUTLIER_COUNT: usize = 3;
pub const OUTLIER_DISTANCE: f64 = 5.0;

/// [`fig1`] plus [`OUTLIER_COUNT`] far-away points appended as the last rows.
pub fn outliers(seed: u64) -> Result<Dataset> {
    inject_outliers(&fig1(seed)?, OUTLIER_COUNT, OUTLIER_DISTANCE, seed.wrapping_add(1))
}

/// Three horizontal strips over `Y*`: malignant on top, abstention in the
/// middle, benign at the bottom.
pub fn bands(seed: u64) -> Result<Dataset> {
    gen_gaussian_mixture(
        &[
            GaussianSpec::axis_aligned(MALIGNANT, vec![0.0, 4.0], vec![2.0, 0.4], 60),
            GaussianSpec::axis_aligned(crate::dataset::ABSTENTION, vec![0.0, 0.0], vec![2.0, 0.4], 60),
            GaussianSpec::axis_aligned(BENIGN, vec![0.0, -4.0], vec![2.0, 0.4], 60),
        ],
        seed,
    )?
    .with_feature_names(breast_names())
}

/// The four-point exclusive-or layout; no line classifies all of it.
pub fn xor() -> Result<Dataset> {
    Dataset::new(
        ndarray::array![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]],
        vec![0, 0, 1, 1],
        crate::dataset::LabelSpace::new(["a", "b"])?,
        vec!["x1".into(), "x2".into()],
    )
}

pub const SMUDGE_FRACTION: f64 = 0.10;
pub const SMUDGE_MAJORITY: usize = 900;
pub const SMUDGE_MINORITY: usize = 100;

/// Label-noise fixture with an indicator of the corrupted rows, already
/// split in halves.
#[derive(Clone, Debug)]
pub struct SmudgeFixture {
    pub train: Dataset,
    pub test: Dataset,
    /// Column index of the smudge indicator.
    pub smudge_feature: usize,
}

impl SmudgeFixture {
    pub fn is_smudged(&self, data: &Dataset, i: usize) -> bool {
        data.row(i)[self.smudge_feature] == 1.0
    }
}

/// A frequent and a rare tumour class, well separated, with
/// [`SMUDGE_FRACTION`] of all rows relabeled at random and flagged.
///
/// The class imbalance matters: a linear score can only shift every smudged
/// point towards one class by the same amount. With balanced classes the
/// shifts that would blur either class cancel out and the indicator gets no
/// weight; with a dominant class the fit shifts smudged points of that class
/// towards the decision boundary.
pub fn smudge(seed: u64) -> Result<SmudgeFixture> {
    let clean = gen_gaussian_mixture(
        &[
            GaussianSpec::axis_aligned(BENIGN, vec![0.08, 90.0], vec![0.02, 10.0], SMUDGE_MAJORITY),
            GaussianSpec::axis_aligned(MALIGNANT, vec![0.20, 160.0], vec![0.02, 10.0], SMUDGE_MINORITY),
        ],
        seed,
    )?
    .with_feature_names(breast_names())?;
    let noisy = corrupt_labels(&clean, &NoiseMode::Fraction(SMUDGE_FRACTION), true, seed.wrapping_add(1))?;
    let (train, test) = split(&noisy.dataset, 0.5, seed.wrapping_add(2))?;
    let smudge_feature = train
        .feature_names()
        .iter()
        .position(|f| f == SMUDGE_FEATURE)
        .ok_or_else(|| Error::InvalidDataset("smudge column missing".into()))?;
    Ok(SmudgeFixture {
        train,
        test,
        smudge_feature,
    })
}

/// Builds a fixture by name.
pub fn by_name(name: &str, seed: u64) -> Result<Dataset> {
    match name {
        "fig1" => fig1(seed),
        "separable" => separable(seed),
        "overlap" => overlap(seed),
        "outliers" => outliers(seed),
        "bands" => bands(seed),
        "xor" => xor(),
        "smudge" => {
            let f = smudge(seed)?;
            f.train.concat(&f.test)
        }
        other => Err(Error::param(format!("unknown fixture '{other}'"))),
    }
}

pub const NAMES: [&str; 7] = ["fig1", "separable", "overlap", "outliers", "bands", "xor", "smudge"];
