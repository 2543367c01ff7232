//! Merged abstention: the abstention output is produced by the predictor
//! itself, decided in the same call as the class.
//!
//! Three model families are provided:
//!
//! * [`AbstainModel::Labeled`]: softmax over `Y*`, abstention trained as an
//!   ordinary class from abstention-labeled examples.
//! * [`AbstainModel::PlugIn`]: softmax over `Y` plus Chow's rule, which is the
//!   Bayes decision for the abstention loss `l*`: abstain iff
//!   `max_j p_j < 1 - alpha`.
//! * [`AbstainModel::Band`]: two parallel lines in a two-feature space,
//!   fitted by exhaustive minimization of the summed `l*`; the strip between
//!   them is the abstaining area.

use crate::dataset::{Dataset, LabelSpace, Scaler};
use crate::decision::{AbstentionReason, Decision, Detail};
use crate::error::{Error, Result};
use crate::kv::KvDoc;
use crate::predictor::{train_softmax, GridSpec, LinearModel, ProbVector, SurrogateConfig};

/// Cost of abstaining, either shared by all classes or per ground-truth
/// class (indexed like the defined labels).
#[derive(Clone, Debug, PartialEq)]
pub enum AlphaConfig {
    Uniform(f64),
    PerClass(Vec<f64>),
}

impl AlphaConfig {
    /// Per-class costs given by class name; every defined class needs one.
    pub fn per_class(space: &LabelSpace, costs: &[(&str, f64)]) -> Result<Self> {
        let m = space.defined_count();
        let mut out = vec![f64::NAN; m];
        for (name, a) in costs {
            let idx = space.index_of(name)?;
            space.check_defined(idx)?;
            out[idx] = *a;
        }
        if out.iter().any(|a| a.is_nan()) {
            return Err(Error::param("per-class alpha must cover every defined class"));
        }
        Ok(AlphaConfig::PerClass(out))
    }

    /// Cost of abstaining on a point whose true class is `y_true`.
    pub fn for_class(&self, y_true: usize) -> f64 {
        match self {
            AlphaConfig::Uniform(a) => *a,
            AlphaConfig::PerClass(v) => v[y_true],
        }
    }

    pub fn uniform(&self) -> Option<f64> {
        match self {
            AlphaConfig::Uniform(a) => Some(*a),
            AlphaConfig::PerClass(_) => None,
        }
    }

    fn to_kv(&self) -> KvDoc {
        let mut doc = KvDoc::new();
        match self {
            AlphaConfig::Uniform(a) => {
                doc.push("kind", "uniform");
                doc.push_f64("value", *a);
            }
            AlphaConfig::PerClass(v) => {
                doc.push("kind", "per-class");
                doc.push_f64s("value", v);
            }
        }
        doc
    }

    fn from_kv(doc: &KvDoc) -> Result<Self> {
        match doc.require("kind")? {
            "uniform" => Ok(AlphaConfig::Uniform(doc.f64("value")?)),
            "per-class" => Ok(AlphaConfig::PerClass(doc.f64s("value")?)),
            other => Err(Error::Format(format!("unknown alpha kind '{other}'"))),
        }
    }
}

/// Checks every alpha lies in (0,1); a uniform alpha must also satisfy
/// `alpha <= (m-1)/m`. Per-class entries are only range-checked.
pub fn validate_alpha(alpha: &AlphaConfig, m: usize) -> Result<AlphaConfig> {
    if m < 2 {
        return Err(Error::param(format!("need at least two classes, got m = {m}")));
    }
    let in_range = |a: f64| a > 0.0 && a < 1.0;
    match alpha {
        AlphaConfig::Uniform(a) => {
            if !in_range(*a) {
                return Err(Error::param(format!("alpha = {a} must lie in (0,1)")));
            }
            let bound = (m - 1) as f64 / m as f64;
            if *a > bound {
                return Err(Error::AlphaBound { alpha: *a, bound, m });
            }
        }
        AlphaConfig::PerClass(v) => {
            if v.len() != m {
                return Err(Error::param(format!("{} per-class alphas for m = {m}", v.len())));
            }
            if let Some(a) = v.iter().find(|a| !in_range(**a)) {
                return Err(Error::param(format!("alpha = {a} must lie in (0,1)")));
            }
        }
    }
    Ok(alpha.clone())
}

/// The abstention loss `l*(y, f(x))`: `alpha(y)` when `y_pred` is abstention
/// (`None` or the space's abstention label), otherwise 0/1.
pub fn abstain_loss(
    space: &LabelSpace,
    y_true: usize,
    y_pred: Option<usize>,
    alpha: &AlphaConfig,
) -> Result<f64> {
    space.check_defined(y_true)?;
    if let AlphaConfig::PerClass(v) = alpha {
        if v.len() != space.defined_count() {
            return Err(Error::param("per-class alpha does not match the label space"));
        }
    }
    match y_pred {
        None => Ok(alpha.for_class(y_true)),
        Some(p) if Some(p) == space.abstention_index() => Ok(alpha.for_class(y_true)),
        Some(p) => {
            space.check_index(p)?;
            Ok(if p == y_true { 0.0 } else { 1.0 })
        }
    }
}

/// Chow's rule with uniform alpha: abstain iff `max p < 1 - alpha`.
pub fn bayes_decision(proba: &ProbVector, alpha: &AlphaConfig) -> Result<Decision> {
    let a = alpha
        .uniform()
        .ok_or_else(|| Error::param("Chow's rule is only defined here for a uniform alpha"))?;
    let threshold = 1.0 - a;
    let max_p = proba.max();
    if max_p < threshold {
        Ok(Decision::abstained(
            AbstentionReason::Ambiguity,
            vec![
                Detail::MaxProb(max_p),
                Detail::Threshold(threshold),
                Detail::WouldBe(proba.argmax()),
            ],
        ))
    } else {
        Ok(Decision::Predicted(proba.argmax()))
    }
}

/// Two parallel boundaries `lower <= upper` on the projection
/// `s = cos(angle) z1 + sin(angle) z2` of the standardized input. Points with
/// `s > upper` get label index 1, `s < lower` label index 0, and the closed
/// strip in between abstains.
#[derive(Clone, Debug, PartialEq)]
pub struct Band {
    pub angle: f64,
    pub lower: f64,
    pub upper: f64,
    label_space: LabelSpace,
    scaler: Scaler,
}

pub const BAND_BELOW: usize = 0;
pub const BAND_ABOVE: usize = 1;

impl Band {
    pub fn new(angle: f64, lower: f64, upper: f64, label_space: LabelSpace, scaler: Scaler) -> Result<Self> {
        if !(lower <= upper) || !angle.is_finite() || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::param(format!("band needs finite lower <= upper, got {lower} > {upper}")));
        }
        if scaler.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: scaler.dim(),
            });
        }
        if label_space.includes_abstention() || label_space.len() != 2 {
            return Err(Error::InvalidLabelSpace("band model needs a binary label space".into()));
        }
        Ok(Self {
            angle,
            lower,
            upper,
            label_space,
            scaler,
        })
    }

    pub fn label_space(&self) -> &LabelSpace {
        &self.label_space
    }

    pub fn scaler(&self) -> &Scaler {
        &self.scaler
    }

    pub fn projection_standardized(&self, z: &[f64]) -> f64 {
        project(self.angle.cos(), self.angle.sin(), z)
    }

    pub fn projection(&self, x: &[f64]) -> Result<f64> {
        Ok(self.projection_standardized(&self.scaler.apply(x)?))
    }

    fn classify(&self, s: f64) -> Option<usize> {
        if s > self.upper {
            Some(BAND_ABOVE)
        } else if s < self.lower {
            Some(BAND_BELOW)
        } else {
            None
        }
    }

    pub fn decide(&self, x: &[f64]) -> Result<Decision> {
        let s = self.projection(x)?;
        Ok(match self.classify(s) {
            Some(l) => Decision::Predicted(l),
            None => Decision::abstained(AbstentionReason::Ambiguity, vec![Detail::Margin(s)]),
        })
    }

    /// Signed distance to the nearest boundary in projection units, positive
    /// on the side of the decided output.
    pub fn margin_for(&self, x: &[f64], output: Option<usize>) -> Result<f64> {
        let s = self.projection(x)?;
        Ok(match output {
            Some(BAND_ABOVE) => s - self.upper,
            Some(_) => self.lower - s,
            None => (s - self.lower).min(self.upper - s),
        })
    }
}

fn project(c: f64, s: f64, z: &[f64]) -> f64 {
    c * z[0] + s * z[1]
}

#[derive(Clone, Debug, PartialEq)]
pub enum AbstainModel {
    PlugIn { base: LinearModel, alpha: AlphaConfig },
    Labeled { base: LinearModel },
    Band(Band),
}

impl AbstainModel {
    pub fn kind(&self) -> &'static str {
        match self {
            AbstainModel::PlugIn { .. } => "plugin",
            AbstainModel::Labeled { .. } => "labeled",
            AbstainModel::Band(_) => "band",
        }
    }

    /// Label space of the model's outputs (`Y*` for labeled models).
    pub fn label_space(&self) -> &LabelSpace {
        match self {
            AbstainModel::PlugIn { base, .. } | AbstainModel::Labeled { base } => base.label_space(),
            AbstainModel::Band(b) => b.label_space(),
        }
    }

    pub fn scaler(&self) -> &Scaler {
        match self {
            AbstainModel::PlugIn { base, .. } | AbstainModel::Labeled { base } => base.scaler(),
            AbstainModel::Band(b) => b.scaler(),
        }
    }

    pub fn dim(&self) -> usize {
        self.scaler().dim()
    }

    /// Answer or abstain in a single call.
    pub fn decide(&self, x: &[f64]) -> Result<Decision> {
        match self {
            AbstainModel::PlugIn { base, alpha } => bayes_decision(&base.predict_proba(x)?, alpha),
            AbstainModel::Labeled { base } => {
                let proba = base.predict_proba(x)?;
                let top = proba.argmax();
                if Some(top) == base.label_space().abstention_index() {
                    Ok(Decision::abstained(
                        AbstentionReason::Ambiguity,
                        vec![Detail::MaxProb(proba.max()), Detail::Labeled],
                    ))
                } else {
                    Ok(Decision::Predicted(top))
                }
            }
            AbstainModel::Band(b) => b.decide(x),
        }
    }

    pub fn to_kv(&self) -> Result<KvDoc> {
        let mut doc = KvDoc::new();
        doc.push("variant", self.kind());
        match self {
            AbstainModel::PlugIn { base, alpha } => {
                doc.extend_prefixed("alpha.", &alpha.to_kv());
                doc.extend_prefixed("base.", &base.to_kv()?);
            }
            AbstainModel::Labeled { base } => doc.extend_prefixed("base.", &base.to_kv()?),
            AbstainModel::Band(b) => {
                doc.push_f64("angle", b.angle);
                doc.push_f64("lower", b.lower);
                doc.push_f64("upper", b.upper);
                for (i, l) in b.label_space.labels().iter().enumerate() {
                    doc.push(format!("label.{i}"), l);
                }
                doc.extend_prefixed("scaler.", &b.scaler.to_kv()?);
            }
        }
        Ok(doc)
    }

    pub fn from_kv(doc: &KvDoc) -> Result<Self> {
        match doc.require("variant")? {
            "plugin" => {
                let base = LinearModel::from_kv(&doc.section("base."))?;
                let alpha = AlphaConfig::from_kv(&doc.section("alpha."))?;
                let alpha = validate_alpha(&alpha, base.label_space().defined_count())?;
                Ok(AbstainModel::PlugIn { base, alpha })
            }
            "labeled" => {
                let base = LinearModel::from_kv(&doc.section("base."))?;
                if !base.label_space().includes_abstention() {
                    return Err(Error::Format("labeled model without abstention class".into()));
                }
                Ok(AbstainModel::Labeled { base })
            }
            "band" => {
                let space = LabelSpace::new([doc.require("label.0")?, doc.require("label.1")?])?;
                let scaler = Scaler::from_kv(&doc.section("scaler."))?;
                Ok(AbstainModel::Band(Band::new(
                    doc.f64("angle")?,
                    doc.f64("lower")?,
                    doc.f64("upper")?,
                    space,
                    scaler,
                )?))
            }
            other => Err(Error::Format(format!("unknown abstaining model '{other}'"))),
        }
    }
}

/// Abstention as an ordinary class: softmax over every label of `Y*`.
/// Classes without examples (including abstention) are allowed.
pub fn fit_labeled(train: &Dataset, cfg: &SurrogateConfig) -> Result<AbstainModel> {
    if !train.label_space().includes_abstention() {
        return Err(Error::InvalidLabelSpace(
            "labeled abstention needs 'abstention' in the label space".into(),
        ));
    }
    let base = train_softmax(train, cfg)?.model;
    Ok(AbstainModel::Labeled { base })
}

/// Probability fit on `Y` followed by Chow's rule at `1 - alpha`.
pub fn fit_unlabeled_plugin(
    train: &Dataset,
    alpha: &AlphaConfig,
    cfg: &SurrogateConfig,
) -> Result<AbstainModel> {
    let space = train.label_space();
    if space.includes_abstention() {
        return Err(Error::InvalidLabelSpace(
            "unlabeled abstention trains without abstention labels".into(),
        ));
    }
    let alpha = validate_alpha(alpha, space.defined_count())?;
    if alpha.uniform().is_none() {
        return Err(Error::param("the plug-in rule needs a uniform alpha"));
    }
    let base = train_softmax(train, cfg)?.model;
    Ok(AbstainModel::PlugIn { base, alpha })
}

#[derive(Clone, Debug)]
pub struct BandFit {
    pub band: Band,
    /// Position of the winner in `(angle, lower, upper)` enumeration order.
    pub index: usize,
    pub total_loss: f64,
}

impl BandFit {
    pub fn into_model(self) -> AbstainModel {
        AbstainModel::Band(self.band)
    }
}

/// Number of `(angle, lower <= upper)` band candidates a grid produces.
pub fn band_candidate_count(grid: &GridSpec) -> Result<usize> {
    let a = grid.axis("angle")?.values.len();
    let o = grid.axis("offset")?.values.len();
    Ok(a.saturating_mul(o.saturating_mul(o + 1) / 2))
}

/// Enumerates band candidates in order: angle outermost, then the lower
/// offset, then the upper offset (never below the lower one).
pub fn band_candidates(grid: &GridSpec) -> Result<impl Iterator<Item = (f64, f64, f64)> + '_> {
    let angles = &grid.axis("angle")?.values;
    let offsets = &grid.axis("offset")?.values;
    Ok(angles.iter().flat_map(move |&a| {
        (0..offsets.len()).flat_map(move |i| {
            (i..offsets.len()).map(move |j| (a, offsets[i], offsets[j]))
        })
    }))
}

/// Sum of `l*` of a band over a dataset, evaluated through `decide`.
pub fn band_total_loss(band: &Band, data: &Dataset, alpha: &AlphaConfig) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..data.n() {
        let d = band.decide(&data.row_vec(i))?;
        total += abstain_loss(data.label_space(), data.labels()[i], d.label(), alpha)?;
    }
    Ok(total)
}

/// Direct empirical-risk minimization of `l*` over band classifiers on a
/// binary two-feature problem. The offsets axis supplies both boundaries;
/// ties keep the first candidate in enumeration order.
pub fn fit_unlabeled_direct(train: &Dataset, alpha: &AlphaConfig, grid: &GridSpec) -> Result<BandFit> {
    let space = train.label_space();
    if space.includes_abstention() || space.len() != 2 {
        return Err(Error::param("direct fit needs a binary problem without abstention labels"));
    }
    if train.d() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: train.d(),
        });
    }
    let alpha = validate_alpha(alpha, 2)?;
    grid.validate()?;
    let count = band_candidate_count(grid)?;
    if count > grid.cap {
        return Err(Error::GridCapExceeded {
            candidates: count,
            cap: grid.cap,
        });
    }

    let scaler = Scaler::fit(train);
    let z = scaler.apply_matrix(train.features());
    let labels = train.labels();
    let abstain_cost: Vec<f64> = labels.iter().map(|&y| alpha.for_class(y)).collect();

    let mut best: Option<(usize, f64, f64, f64, f64)> = None;
    let mut current_angle = f64::NAN;
    let mut proj: Vec<f64> = Vec::new();
    for (index, (angle, lower, upper)) in band_candidates(grid)?.enumerate() {
        if angle.to_bits() != current_angle.to_bits() {
            let (c, s) = (angle.cos(), angle.sin());
            proj = z
                .rows()
                .into_iter()
                .map(|r| project(c, s, r.as_slice().expect("standard layout")))
                .collect();
            current_angle = angle;
        }
        let mut total = 0.0;
        for ((&s, &y), &cost) in proj.iter().zip(labels).zip(&abstain_cost) {
            total += if s > upper {
                if y == BAND_ABOVE { 0.0 } else { 1.0 }
            } else if s < lower {
                if y == BAND_BELOW { 0.0 } else { 1.0 }
            } else {
                cost
            };
        }
        if best.is_none_or(|b| total < b.1) {
            best = Some((index, total, angle, lower, upper));
        }
    }
    let (index, total_loss, angle, lower, upper) = best.expect("grid is non-empty");
    Ok(BandFit {
        band: Band::new(angle, lower, upper, space.clone(), scaler)?,
        index,
        total_loss,
    })
}

/// Rebuilds a candidate band with the scaler a direct fit on `train` uses.
pub fn band_for(train: &Dataset, angle: f64, lower: f64, upper: f64) -> Result<Band> {
    Band::new(angle, lower, upper, train.label_space().clone(), Scaler::fit(train))
}

/// Probability a plug-in or labeled model assigns to `output`; `None` asks
/// for the abstention output. For plug-in models abstention has no class of
/// its own, so its score is the deficit `1 - max p`.
pub fn output_probability(model: &AbstainModel, x: &[f64], output: Option<usize>) -> Result<Option<f64>> {
    match model {
        AbstainModel::PlugIn { base, .. } => {
            let p = base.predict_proba(x)?;
            Ok(Some(match output {
                Some(c) => p.as_slice()[c],
                None => 1.0 - p.max(),
            }))
        }
        AbstainModel::Labeled { base } => {
            let p = base.predict_proba(x)?;
            let idx = match output {
                Some(c) => c,
                None => base.label_space().abstention_index().expect("labeled space"),
            };
            Ok(Some(p.as_slice()[idx]))
        }
        AbstainModel::Band(_) => Ok(None),
    }
}

/// Wraps a hand-built softmax over `Y*` as a labeled abstaining model.
pub fn labeled_from_parts(base: LinearModel) -> Result<AbstainModel> {
    if !base.label_space().includes_abstention() {
        return Err(Error::InvalidLabelSpace("labeled model needs abstention".into()));
    }
    Ok(AbstainModel::Labeled { base })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1, Array2};

    fn y() -> LabelSpace {
        LabelSpace::new(["benign", "malignant"]).unwrap()
    }

    #[test]
    fn loss_clauses() {
        let s = y();
        let (benign, malignant) = (0, 1);
        let a = AlphaConfig::Uniform(0.2);
        assert_eq!(abstain_loss(&s, malignant, None, &a).unwrap(), 0.2);
        assert_eq!(abstain_loss(&s, benign, Some(benign), &a).unwrap(), 0.0);
        assert_eq!(abstain_loss(&s, benign, Some(malignant), &a).unwrap(), 1.0);
        let per = AlphaConfig::per_class(&s, &[("benign", 0.4), ("malignant", 0.1)]).unwrap();
        assert_eq!(abstain_loss(&s, benign, None, &per).unwrap(), 0.4);
        assert_eq!(abstain_loss(&s, malignant, None, &per).unwrap(), 0.1);
    }

    #[test]
    fn loss_accepts_abstention_label_of_ystar() {
        let s = y().with_abstention();
        let a = AlphaConfig::Uniform(0.3);
        assert_eq!(abstain_loss(&s, 0, Some(2), &a).unwrap(), 0.3);
        assert!(abstain_loss(&s, 2, Some(0), &a).is_err());
        assert!(abstain_loss(&s, 0, Some(7), &a).is_err());
    }

    #[test]
    fn alpha_validation() {
        assert!(validate_alpha(&AlphaConfig::Uniform(0.5), 2).is_ok());
        assert!(matches!(
            validate_alpha(&AlphaConfig::Uniform(0.6), 2),
            Err(Error::AlphaBound { .. })
        ));
        assert!(validate_alpha(&AlphaConfig::Uniform(0.7), 4).is_ok());
        assert!(validate_alpha(&AlphaConfig::Uniform(0.0), 2).is_err());
        assert!(validate_alpha(&AlphaConfig::Uniform(0.3), 1).is_err());
        // Per-class entries only need (0,1).
        assert!(validate_alpha(&AlphaConfig::PerClass(vec![0.9, 0.1]), 2).is_ok());
        assert!(validate_alpha(&AlphaConfig::PerClass(vec![1.0, 0.1]), 2).is_err());
        assert!(validate_alpha(&AlphaConfig::PerClass(vec![0.1]), 2).is_err());
    }

    #[test]
    fn chow_rule_examples() {
        let a = AlphaConfig::Uniform(0.2);
        let d = bayes_decision(&ProbVector::new(vec![0.9, 0.1]).unwrap(), &a).unwrap();
        assert_eq!(d, Decision::Predicted(0));
        let d = bayes_decision(&ProbVector::new(vec![0.7, 0.3]).unwrap(), &a).unwrap();
        assert!(d.is_abstained());
        assert!(bayes_decision(&ProbVector::new(vec![0.7, 0.3]).unwrap(), &AlphaConfig::PerClass(vec![0.1, 0.2])).is_err());
    }

    #[test]
    fn plugin_decide_half_half() {
        let base = LinearModel::new(
            Array2::zeros((2, 2)),
            Array1::zeros(2),
            y(),
            Scaler::identity(vec!["a".into(), "b".into()]),
        )
        .unwrap();
        let m = AbstainModel::PlugIn { base, alpha: AlphaConfig::Uniform(0.2) };
        assert!(m.decide(&[1.0, 2.0]).unwrap().is_abstained());
    }

    #[test]
    fn band_regions() {
        let b = Band::new(
            std::f64::consts::FRAC_PI_2,
            -1.0,
            1.0,
            y(),
            Scaler::identity(vec!["a".into(), "b".into()]),
        )
        .unwrap();
        assert_eq!(b.decide(&[0.0, 5.0]).unwrap(), Decision::Predicted(BAND_ABOVE));
        assert_eq!(b.decide(&[0.0, -5.0]).unwrap(), Decision::Predicted(BAND_BELOW));
        assert!(b.decide(&[3.0, 0.0]).unwrap().is_abstained());
        assert!(Band::new(0.0, 1.0, -1.0, y(), Scaler::identity(vec!["a".into(), "b".into()])).is_err());
    }

    #[test]
    fn labeled_decide_flags_abstention() {
        let ystar = y().with_abstention();
        // Scores along x: benign for x < -1, abstention in between, malignant for x > 1.
        let base = LinearModel::new(
            array![[-2.0], [2.0], [0.0]],
            array![-2.0, -2.0, 0.0],
            ystar,
            Scaler::identity(vec!["x".into()]),
        )
        .unwrap();
        let m = labeled_from_parts(base).unwrap();
        assert_eq!(m.decide(&[-3.0]).unwrap(), Decision::Predicted(0));
        assert_eq!(m.decide(&[3.0]).unwrap(), Decision::Predicted(1));
        let d = m.decide(&[0.0]).unwrap();
        assert!(d.is_abstained() && d.is_labeled_abstention());
    }

    #[test]
    fn candidate_enumeration_order() {
        let g = GridSpec {
            axes: vec![
                crate::predictor::GridAxis::values("angle", vec![0.0, 1.0]),
                crate::predictor::GridAxis::values("offset", vec![-1.0, 0.0, 1.0]),
            ],
            cap: 100,
        };
        let all: Vec<_> = band_candidates(&g).unwrap().collect();
        assert_eq!(all.len(), band_candidate_count(&g).unwrap());
        assert_eq!(all[0], (0.0, -1.0, -1.0));
        assert_eq!(all[1], (0.0, -1.0, 0.0));
        assert_eq!(all[3], (0.0, 0.0, 0.0));
        assert_eq!(all[6], (1.0, -1.0, -1.0));
    }

    #[test]
    fn model_kv_round_trips() {
        let sc = Scaler::from_parts(vec!["a".into(), "b".into()], vec![0.1, 100.0], vec![0.02, 9.5]).unwrap();
        let base = LinearModel::new(array![[0.3, -0.1], [0.2, 0.7]], array![0.05, -0.05], y(), sc.clone()).unwrap();
        let models = [
            AbstainModel::PlugIn { base: base.clone(), alpha: AlphaConfig::Uniform(0.2) },
            AbstainModel::Band(Band::new(1.3, -0.4, 0.6, y(), sc).unwrap()),
        ];
        for m in models {
            let doc = KvDoc::parse(&m.to_kv().unwrap().render()).unwrap();
            assert_eq!(AbstainModel::from_kv(&doc).unwrap(), m);
        }
    }
}
