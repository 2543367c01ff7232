//! The abstaining output: a defined answer, or an abstention carrying the
//! reason it was issued.

use std::fmt;

/// Why a system abstained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AbstentionReason {
    /// The input is too dissimilar to the training inputs.
    Outlier,
    /// More than one defined answer is plausible for the input.
    Ambiguity,
}

/// Kind of support an abstention has. An outlier is positive evidence for
/// abstaining; ambiguity only lacks evidence for any single answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Justification {
    Positive,
    Privative,
}

impl AbstentionReason {
    pub fn justification(self) -> Justification {
        match self {
            AbstentionReason::Outlier => Justification::Positive,
            AbstentionReason::Ambiguity => Justification::Privative,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AbstentionReason::Outlier => "outlier",
            AbstentionReason::Ambiguity => "ambiguity",
        }
    }
}

impl Justification {
    pub fn as_str(self) -> &'static str {
        match self {
            Justification::Positive => "positive",
            Justification::Privative => "privative",
        }
    }
}

/// Numbers recorded alongside an abstention.
#[derive(Clone, Debug, PartialEq)]
pub enum Detail {
    /// Mean k-NN distance of the input.
    Distance(f64),
    /// Outlier distance threshold.
    Delta(f64),
    /// Largest class probability.
    MaxProb(f64),
    /// Certainty threshold the max probability was compared against.
    Threshold(f64),
    Alpha(f64),
    /// Signed projection onto a band model's direction.
    Margin(f64),
    /// Label the predictor would have returned.
    WouldBe(usize),
    /// Abstention was learned as an ordinary class.
    Labeled,
}

impl Detail {
    pub fn key(&self) -> &'static str {
        match self {
            Detail::Distance(_) => "distance",
            Detail::Delta(_) => "delta",
            Detail::MaxProb(_) => "max_p",
            Detail::Threshold(_) => "threshold",
            Detail::Alpha(_) => "alpha",
            Detail::Margin(_) => "margin",
            Detail::WouldBe(_) => "would_be",
            Detail::Labeled => "labeled",
        }
    }
}

impl fmt::Display for Detail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Detail::Distance(v)
            | Detail::Delta(v)
            | Detail::MaxProb(v)
            | Detail::Threshold(v)
            | Detail::Alpha(v)
            | Detail::Margin(v) => write!(f, "{}={v}", self.key()),
            Detail::WouldBe(l) => write!(f, "would_be={l}"),
            Detail::Labeled => f.write_str("labeled"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decision {
    Predicted(usize),
    Abstained {
        reason: AbstentionReason,
        details: Vec<Detail>,
    },
}

impl Decision {
    pub fn abstained(reason: AbstentionReason, details: Vec<Detail>) -> Self {
        Decision::Abstained { reason, details }
    }

    pub fn is_abstained(&self) -> bool {
        matches!(self, Decision::Abstained { .. })
    }

    pub fn label(&self) -> Option<usize> {
        match self {
            Decision::Predicted(l) => Some(*l),
            Decision::Abstained { .. } => None,
        }
    }

    pub fn reason(&self) -> Option<AbstentionReason> {
        match self {
            Decision::Predicted(_) => None,
            Decision::Abstained { reason, .. } => Some(*reason),
        }
    }

    pub fn details(&self) -> &[Detail] {
        match self {
            Decision::Predicted(_) => &[],
            Decision::Abstained { details, .. } => details,
        }
    }

    pub fn max_prob(&self) -> Option<f64> {
        self.details().iter().find_map(|d| match d {
            Detail::MaxProb(p) => Some(*p),
            _ => None,
        })
    }

    pub fn is_labeled_abstention(&self) -> bool {
        self.details().contains(&Detail::Labeled)
    }
}
