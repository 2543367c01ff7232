//! Abstention-aware metrics, parameter sweeps and architecture comparison.

use std::fmt::Write as _;
use std::path::Path;

use crate::attached::{
    calibration_scores, make_chow_rejector, make_fraction_rejector, make_pre_rejector,
    post_pipeline_decide, pre_pipeline_decide, Rejector,
};
use crate::dataset::{label_ambiguous, Dataset, LabelSpace};
use crate::decision::{AbstentionReason, Decision};
use crate::error::{Error, Result};
use crate::kv::fmt_f64;
use crate::merged::{bayes_decision, fit_labeled, fit_unlabeled_direct, validate_alpha, AbstainModel, AlphaConfig};
use crate::predictor::{fit_surrogate, GridSpec, LinearModel, SurrogateConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct RiskCoveragePoint {
    /// The swept value (tau, alpha, delta or q).
    pub parameter: f64,
    pub coverage: f64,
    /// `None` when nothing was predicted.
    pub selective_risk: Option<f64>,
    pub abstention_rate: f64,
}

impl RiskCoveragePoint {
    pub fn from_decisions(parameter: f64, decisions: &[Decision], truths: &[usize]) -> Result<Self> {
        let coverage = coverage(decisions)?;
        Ok(Self {
            parameter,
            coverage,
            selective_risk: selective_risk(decisions, truths)?,
            abstention_rate: 1.0 - coverage,
        })
    }
}

/// Fraction of decisions that are defined answers.
pub fn coverage(decisions: &[Decision]) -> Result<f64> {
    if decisions.is_empty() {
        return Err(Error::param("coverage of an empty decision list"));
    }
    let predicted = decisions.iter().filter(|d| !d.is_abstained()).count();
    Ok(predicted as f64 / decisions.len() as f64)
}

/// 0/1 error rate over the predicted decisions only.
pub fn selective_risk(decisions: &[Decision], truths: &[usize]) -> Result<Option<f64>> {
    check_lengths(decisions, truths)?;
    let mut predicted = 0usize;
    let mut wrong = 0usize;
    for (d, &y) in decisions.iter().zip(truths) {
        if let Some(l) = d.label() {
            predicted += 1;
            if l != y {
                wrong += 1;
            }
        }
    }
    Ok((predicted > 0).then(|| wrong as f64 / predicted as f64))
}

fn check_lengths(decisions: &[Decision], truths: &[usize]) -> Result<()> {
    if decisions.len() != truths.len() {
        return Err(Error::DimensionMismatch {
            expected: truths.len(),
            actual: decisions.len(),
        });
    }
    Ok(())
}

/// Counts with rows for each decided class plus a final abstention row, and
/// one column per ground-truth class.
#[derive(Clone, Debug, PartialEq)]
pub struct AbstainConfusion {
    pub label_space: LabelSpace,
    pub counts: Vec<Vec<usize>>,
}

impl AbstainConfusion {
    pub fn abstained(&self, truth: usize) -> usize {
        self.counts[self.counts.len() - 1][truth]
    }

    pub fn column_sums(&self) -> Vec<usize> {
        (0..self.label_space.len())
            .map(|c| self.counts.iter().map(|r| r[c]).sum())
            .collect()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn render(&self) -> String {
        let names = self.label_space.labels();
        let width = names.iter().map(|s| s.len()).max().unwrap_or(0).max(10);
        let mut out = format!("{:width$}", "decided\\truth");
        for n in names {
            let _ = write!(out, " {n:>width$}");
        }
        out.push('\n');
        for (r, row) in self.counts.iter().enumerate() {
            let name = names.get(r).map_or("abstention", |s| s.as_str());
            let _ = write!(out, "{name:width$}");
            for c in row {
                let _ = write!(out, " {c:>width$}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn confusion_with_abstention(
    decisions: &[Decision],
    truths: &[usize],
    label_space: &LabelSpace,
) -> Result<AbstainConfusion> {
    check_lengths(decisions, truths)?;
    let space = label_space.without_abstention();
    let m = space.len();
    let mut counts = vec![vec![0usize; m]; m + 1];
    for (d, &y) in decisions.iter().zip(truths) {
        space.check_index(y)?;
        let row = match d.label() {
            Some(l) => {
                space.check_index(l)?;
                l
            }
            None => m,
        };
        counts[row][y] += 1;
    }
    Ok(AbstainConfusion {
        label_space: space,
        counts,
    })
}

fn check_ascending(values: &[f64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::param(format!("empty {what} list")));
    }
    if values.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::param(format!("{what} values must be sorted ascending")));
    }
    Ok(())
}

/// Post-attached certainty threshold at each tau.
pub fn sweep_tau(model: &LinearModel, test: &Dataset, taus: &[f64]) -> Result<Vec<RiskCoveragePoint>> {
    check_ascending(taus, "tau")?;
    let rows: Vec<Vec<f64>> = (0..test.n()).map(|i| test.row_vec(i)).collect();
    let rejectors = taus.iter().map(|&t| make_chow_rejector(t)).collect::<Result<Vec<_>>>()?;
    taus.iter()
        .zip(&rejectors)
        .map(|(&tau, r)| {
            let decisions = rows
                .iter()
                .map(|x| post_pipeline_decide(model, r, x))
                .collect::<Result<Vec<_>>>()?;
            RiskCoveragePoint::from_decisions(tau, &decisions, test.labels())
        })
        .collect()
}

/// Pre-attached outlier screen at each delta, predictor fixed.
pub fn sweep_delta(
    model: &LinearModel,
    train: &Dataset,
    k: usize,
    test: &Dataset,
    deltas: &[f64],
) -> Result<Vec<RiskCoveragePoint>> {
    check_ascending(deltas, "delta")?;
    let base = make_pre_rejector(train, k, deltas[0])?;
    let Rejector::KnnDistance(knn) = &base else {
        unreachable!("make_pre_rejector builds a knn rejector")
    };
    let mut out = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let r = Rejector::KnnDistance(knn.with_delta(delta)?);
        let decisions = (0..test.n())
            .map(|i| pre_pipeline_decide(&r, model, &test.row_vec(i)))
            .collect::<Result<Vec<_>>>()?;
        out.push(RiskCoveragePoint::from_decisions(delta, &decisions, test.labels())?);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlphaMethod {
    PlugIn,
    Direct,
}

impl std::str::FromStr for AlphaMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plugin" => Ok(AlphaMethod::PlugIn),
            "direct" => Ok(AlphaMethod::Direct),
            other => Err(Error::param(format!("unknown alpha method '{other}'"))),
        }
    }
}

/// Unlabeled merged abstention at each alpha. The plug-in base does not
/// depend on alpha, so it is fitted once; the direct band is refitted per
/// value.
pub fn sweep_alpha(
    train: &Dataset,
    test: &Dataset,
    alphas: &[f64],
    method: AlphaMethod,
    surrogate: &SurrogateConfig,
    grid: &GridSpec,
) -> Result<Vec<RiskCoveragePoint>> {
    if alphas.is_empty() {
        return Err(Error::param("empty alpha list"));
    }
    let m = train.label_space().defined_count();
    let configs = alphas
        .iter()
        .map(|&a| validate_alpha(&AlphaConfig::Uniform(a), m))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<f64>> = (0..test.n()).map(|i| test.row_vec(i)).collect();
    let base = match method {
        AlphaMethod::PlugIn => Some(fit_surrogate(train, surrogate)?),
        AlphaMethod::Direct => None,
    };
    let mut out = Vec::with_capacity(alphas.len());
    for (&a, cfg) in alphas.iter().zip(&configs) {
        let model = match &base {
            Some(base) => AbstainModel::PlugIn {
                base: base.clone(),
                alpha: cfg.clone(),
            },
            None => fit_unlabeled_direct(train, cfg, grid)?.into_model(),
        };
        let decisions = rows.iter().map(|x| model.decide(x)).collect::<Result<Vec<_>>>()?;
        out.push(RiskCoveragePoint::from_decisions(a, &decisions, test.labels())?);
    }
    Ok(out)
}

pub const SWEEP_HEADER: &str = "parameter,coverage,selective_risk,abstention_rate";

pub fn sweep_csv(points: &[RiskCoveragePoint]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for p in points {
        let risk = p.selective_risk.map_or_else(|| "undefined".to_string(), fmt_f64);
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(p.parameter),
            fmt_f64(p.coverage),
            risk,
            fmt_f64(p.abstention_rate)
        );
    }
    out
}

pub fn write_sweep_csv(points: &[RiskCoveragePoint], path: &Path) -> Result<()> {
    std::fs::write(path, sweep_csv(points)).map_err(|e| Error::io(path, e))
}

/// The abstaining systems that can be compared side by side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Architecture {
    /// Surrogate without any abstention.
    Plain,
    /// k-NN outlier screen before the predictor.
    PreAttached,
    /// Certainty threshold after the predictor.
    PostAttached,
    /// Reject a fixed fraction of least-certain inputs, calibrated on train.
    FractionAttached,
    /// Softmax over `Y*` trained on neighbourhood-derived abstention labels.
    Labeled,
    /// Chow's rule at `1 - alpha` on the surrogate.
    PlugIn,
    /// Band classifier minimizing the abstention loss on a grid.
    Direct,
}

impl Architecture {
    pub const ALL: [Architecture; 7] = [
        Architecture::Plain,
        Architecture::PreAttached,
        Architecture::PostAttached,
        Architecture::FractionAttached,
        Architecture::Labeled,
        Architecture::PlugIn,
        Architecture::Direct,
    ];

    /// Pre- and post-attached, labeled and unlabeled merged abstention.
    pub const FOUR: [Architecture; 4] = [
        Architecture::PreAttached,
        Architecture::PostAttached,
        Architecture::Labeled,
        Architecture::PlugIn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Architecture::Plain => "plain",
            Architecture::PreAttached => "pre-attached",
            Architecture::PostAttached => "post-attached",
            Architecture::FractionAttached => "fraction-attached",
            Architecture::Labeled => "labeled",
            Architecture::PlugIn => "plugin",
            Architecture::Direct => "direct",
        }
    }
}

impl std::str::FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::param(format!("unknown architecture '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareConfig {
    pub architectures: Vec<Architecture>,
    pub surrogate: SurrogateConfig,
    pub k: usize,
    pub delta: f64,
    pub tau: f64,
    pub q: f64,
    pub alpha: f64,
    pub grid: GridSpec,
    /// Neighbourhood size and agreement level used to derive abstention
    /// labels for the labeled architecture.
    pub ambiguity_k: usize,
    pub min_agreement: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            architectures: Architecture::FOUR.to_vec(),
            surrogate: SurrogateConfig::default(),
            k: 5,
            delta: 3.0,
            tau: 0.8,
            q: 0.1,
            alpha: 0.2,
            grid: GridSpec::line(72, -3.0, 3.0, 61),
            ambiguity_k: 10,
            min_agreement: 0.7,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub architecture: Architecture,
    pub n: usize,
    pub coverage: f64,
    pub selective_risk: Option<f64>,
    pub outlier_abstentions: usize,
    pub ambiguity_abstentions: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

const TABLE_HEADER: [&str; 6] = [
    "architecture",
    "n",
    "coverage",
    "selective_risk",
    "abstain_outlier",
    "abstain_ambiguity",
];

impl ComparisonTable {
    fn cells(&self) -> Vec<[String; 6]> {
        self.rows
            .iter()
            .map(|r| {
                [
                    r.architecture.as_str().to_string(),
                    r.n.to_string(),
                    format!("{:.4}", r.coverage),
                    r.selective_risk.map_or_else(|| "undefined".into(), |v| format!("{v:.4}")),
                    r.outlier_abstentions.to_string(),
                    r.ambiguity_abstentions.to_string(),
                ]
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = TABLE_HEADER.join(",");
        out.push('\n');
        for row in self.cells() {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn render_text(&self) -> String {
        let cells = self.cells();
        let mut widths = TABLE_HEADER.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, row: &[&str]| {
            for (i, (c, w)) in row.iter().zip(widths).enumerate() {
                if i == 0 {
                    let _ = write!(out, "{c:<w$}");
                } else {
                    let _ = write!(out, "  {c:>w$}");
                }
            }
            out.push('\n');
        };
        line(&mut out, &TABLE_HEADER);
        for row in &cells {
            line(&mut out, &row.iter().map(String::as_str).collect::<Vec<_>>());
        }
        out
    }
}

/// Decisions of one architecture on every test row.
pub fn architecture_decisions(
    arch: Architecture,
    train: &Dataset,
    test: &Dataset,
    cfg: &CompareConfig,
    base: &LinearModel,
) -> Result<Vec<Decision>> {
    let rows: Vec<Vec<f64>> = (0..test.n()).map(|i| test.row_vec(i)).collect();
    let each = |f: &dyn Fn(&[f64]) -> Result<Decision>| rows.iter().map(|x| f(x)).collect::<Result<Vec<_>>>();
    match arch {
        Architecture::Plain => each(&|x| Ok(Decision::Predicted(base.predict(x)?))),
        Architecture::PreAttached => {
            let r = make_pre_rejector(train, cfg.k, cfg.delta)?;
            each(&|x| pre_pipeline_decide(&r, base, x))
        }
        Architecture::PostAttached => {
            let r = make_chow_rejector(cfg.tau)?;
            each(&|x| post_pipeline_decide(base, &r, x))
        }
        Architecture::FractionAttached => {
            let r = make_fraction_rejector(cfg.q, &calibration_scores(base, train)?)?;
            each(&|x| post_pipeline_decide(base, &r, x))
        }
        Architecture::Labeled => {
            let ystar = label_ambiguous(train, cfg.ambiguity_k, cfg.min_agreement)?;
            let model = fit_labeled(&ystar, &cfg.surrogate)?;
            each(&|x| model.decide(x))
        }
        Architecture::PlugIn => {
            let alpha = validate_alpha(&AlphaConfig::Uniform(cfg.alpha), train.label_space().defined_count())?;
            each(&|x| bayes_decision(&base.predict_proba(x)?, &alpha))
        }
        Architecture::Direct => {
            let model = fit_unlabeled_direct(train, &AlphaConfig::Uniform(cfg.alpha), &cfg.grid)?.into_model();
            each(&|x| model.decide(x))
        }
    }
}

/// Runs every requested architecture on a shared train/test split.
pub fn compare_architectures(train: &Dataset, test: &Dataset, cfg: &CompareConfig) -> Result<ComparisonTable> {
    if train.label_space() != test.label_space() {
        return Err(Error::InvalidDataset("train and test label spaces differ".into()));
    }
    let base = fit_surrogate(train, &cfg.surrogate)?;
    let mut rows = Vec::with_capacity(cfg.architectures.len());
    for &arch in &cfg.architectures {
        let decisions = architecture_decisions(arch, train, test, cfg, &base)?;
        let count = |r: AbstentionReason| decisions.iter().filter(|d| d.reason() == Some(r)).count();
        rows.push(ComparisonRow {
            architecture: arch,
            n: decisions.len(),
            coverage: coverage(&decisions)?,
            selective_risk: selective_risk(&decisions, test.labels())?,
            outlier_abstentions: count(AbstentionReason::Outlier),
            ambiguity_abstentions: count(AbstentionReason::Ambiguity),
        });
    }
    Ok(ComparisonTable { rows })
}
