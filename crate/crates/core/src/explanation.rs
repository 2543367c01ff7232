//! Local explanations of decisions: per-feature attributions for merged
//! models, reason reports for any abstention, and the indirect per-class
//! account an attached pipeline can assemble after the fact.

use std::fmt::Write as _;

use crate::attached::{post_pipeline_decide, Rejector};
use crate::decision::{AbstentionReason, Decision, Detail, Justification};
use crate::error::{Error, Result};
use crate::kv::fmt_f64;
use crate::merged::{output_probability, AbstainModel};
use crate::predictor::LinearModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttributionMethod {
    Occlusion,
    Weight,
}

impl AttributionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            AttributionMethod::Occlusion => "occlusion",
            AttributionMethod::Weight => "weight",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Attribution {
    pub method: AttributionMethod,
    /// Explained output; `None` is abstention.
    pub output: Option<usize>,
    pub feature_names: Vec<String>,
    pub scores: Vec<f64>,
}

impl Attribution {
    /// Feature indices by decreasing absolute score, ties by index.
    pub fn ranked(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.scores.len()).collect();
        idx.sort_by(|&a, &b| self.scores[b].abs().total_cmp(&self.scores[a].abs()).then(a.cmp(&b)));
        idx
    }

    pub fn top_feature(&self) -> usize {
        self.ranked()[0]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,score\n");
        for (name, s) in self.feature_names.iter().zip(&self.scores) {
            let _ = writeln!(out, "{name},{}", fmt_f64(*s));
        }
        out
    }
}

/// Score an abstaining model gives to `output` at `x`: a probability for
/// softmax-based models, a signed band margin for band models.
fn output_score(model: &AbstainModel, x: &[f64], output: Option<usize>) -> Result<f64> {
    match output_probability(model, x, output)? {
        Some(p) => Ok(p),
        None => match model {
            AbstainModel::Band(b) => b.margin_for(x, output),
            _ => unreachable!("only band models lack probabilities"),
        },
    }
}

/// Drop in the decided output's score when each feature in turn is replaced
/// by its baseline value. The baseline defaults to the training means.
pub fn occlusion_attribution(model: &AbstainModel, x: &[f64], baseline: Option<&[f64]>) -> Result<Attribution> {
    let d = model.dim();
    let baseline = baseline.unwrap_or(model.scaler().means());
    for len in [x.len(), baseline.len()] {
        if len != d {
            return Err(Error::DimensionMismatch { expected: d, actual: len });
        }
    }
    let output = model.decide(x)?.label();
    let full = output_score(model, x, output)?;
    let mut scores = Vec::with_capacity(d);
    let mut occluded = x.to_vec();
    for j in 0..d {
        occluded[j] = baseline[j];
        scores.push(full - output_score(model, &occluded, output)?);
        occluded[j] = x[j];
    }
    Ok(Attribution {
        method: AttributionMethod::Occlusion,
        output,
        feature_names: model.scaler().names().to_vec(),
        scores,
    })
}

/// Exact split of one class score into per-feature terms `w_cj z_j` over the
/// standardized input; the terms plus the bias give the score. `None`
/// selects the abstention row of a model over `Y*`.
pub fn weight_attribution(model: &LinearModel, x: &[f64], output: Option<usize>) -> Result<Attribution> {
    let space = model.label_space();
    let row = match output {
        Some(c) => {
            space.check_index(c)?;
            c
        }
        None => space
            .abstention_index()
            .ok_or_else(|| Error::param("model has no abstention class to attribute"))?,
    };
    let z = model.standardize(x)?;
    let w = model.weights().row(row);
    Ok(Attribution {
        method: AttributionMethod::Weight,
        output: space.is_defined(row).then_some(row),
        feature_names: model.scaler().names().to_vec(),
        scores: w.iter().zip(&z).map(|(w, z)| w * z).collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReasonReport {
    pub reason: AbstentionReason,
    pub justification: Justification,
    pub details: Vec<Detail>,
}

impl ReasonReport {
    pub fn render(&self) -> String {
        let mut out = format!(
            "reason: {}\njustification: {}\n",
            self.reason.as_str(),
            self.justification.as_str()
        );
        for d in &self.details {
            let _ = writeln!(out, "  {d}");
        }
        out
    }
}

pub fn abstention_reason(decision: &Decision) -> Result<ReasonReport> {
    match decision {
        Decision::Predicted(_) => Err(Error::NotAbstained),
        Decision::Abstained { reason, details } => Ok(ReasonReport {
            reason: *reason,
            justification: reason.justification(),
            details: details.clone(),
        }),
    }
}

/// Features speaking most strongly for one class.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassEvidence {
    pub class: usize,
    pub probability: f64,
    /// `(feature index, contribution)`, largest contribution first.
    pub top_features: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExplanationRecord {
    pub decision: Decision,
    pub attribution: Option<Attribution>,
    /// Max probability minus the threshold it was compared against.
    pub certainty_gap: Option<f64>,
    pub evidence: Vec<ClassEvidence>,
    /// Assembled from the predictor's per-class evidence rather than from
    /// the abstention decision itself.
    pub indirect: bool,
}

fn certainty_gap(decision: &Decision) -> Option<f64> {
    let max_p = decision.max_prob()?;
    decision.details().iter().find_map(|d| match d {
        Detail::Threshold(t) => Some(max_p - t),
        _ => None,
    })
}

/// Per-class evidence for the two likeliest classes of a plain predictor,
/// optionally followed by a certainty threshold. The abstention itself has
/// no attribution here; only the classes it hesitated between do.
pub fn indirect_explanation(
    model: &LinearModel,
    rejector: Option<&Rejector>,
    x: &[f64],
    top_k: usize,
) -> Result<ExplanationRecord> {
    let d = model.dim();
    if top_k == 0 || top_k > d {
        return Err(Error::param(format!("top_k = {top_k} must lie in 1..={d}")));
    }
    let proba = model.predict_proba(x)?;
    let decision = match rejector {
        Some(r) => post_pipeline_decide(model, r, x)?,
        None => Decision::Predicted(proba.argmax()),
    };
    let (first, second) = proba.top_two();
    let mut evidence = Vec::new();
    for class in std::iter::once(first).chain(second) {
        let attr = weight_attribution(model, x, Some(class))?;
        let mut idx: Vec<usize> = (0..d).collect();
        idx.sort_by(|&a, &b| attr.scores[b].total_cmp(&attr.scores[a]).then(a.cmp(&b)));
        evidence.push(ClassEvidence {
            class,
            probability: proba.as_slice()[class],
            top_features: idx[..top_k].iter().map(|&j| (j, attr.scores[j])).collect(),
        });
    }
    Ok(ExplanationRecord {
        certainty_gap: certainty_gap(&decision),
        decision,
        attribution: None,
        evidence,
        indirect: true,
    })
}

/// Direct explanation of a merged model's decision by occlusion.
pub fn explain_merged(model: &AbstainModel, x: &[f64], baseline: Option<&[f64]>) -> Result<ExplanationRecord> {
    let decision = model.decide(x)?;
    let attribution = occlusion_attribution(model, x, baseline)?;
    Ok(ExplanationRecord {
        certainty_gap: certainty_gap(&decision),
        decision,
        attribution: Some(attribution),
        evidence: Vec::new(),
        indirect: false,
    })
}

impl ExplanationRecord {
    /// Human-readable block; `labels` names the model's outputs and
    /// `features` its inputs.
    pub fn render(&self, labels: &[String], features: &[String]) -> String {
        let name = |c: usize| labels.get(c).map_or("?", |s| s.as_str());
        let feat = |j: usize| features.get(j).map_or("?", |s| s.as_str());
        let mut out = String::new();
        match &self.decision {
            Decision::Predicted(c) => {
                let _ = writeln!(out, "decision: {}", name(*c));
            }
            Decision::Abstained { .. } => {
                out.push_str("decision: abstain\n");
                if let Ok(report) = abstention_reason(&self.decision) {
                    out.push_str(&report.render());
                }
            }
        }
        if let Some(gap) = self.certainty_gap {
            let _ = writeln!(out, "certainty gap: {}", fmt_f64(gap));
        }
        if let Some(a) = &self.attribution {
            let target = a.output.map_or("abstention", name);
            let _ = writeln!(out, "{} attribution for {target}:", a.method.as_str());
            for j in a.ranked() {
                let _ = writeln!(out, "  {} {}", feat(j), fmt_f64(a.scores[j]));
            }
        }
        if self.indirect {
            out.push_str("explanation: indirect\n");
            for e in &self.evidence {
                let _ = writeln!(out, "evidence for {} (p = {}):", name(e.class), fmt_f64(e.probability));
                for (j, s) in &e.top_features {
                    let _ = writeln!(out, "  {} {}", feat(*j), fmt_f64(*s));
                }
            }
        }
        out
    }
}
