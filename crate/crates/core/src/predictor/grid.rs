use ndarray::{array, Array1};

use super::{empirical_risk, LinearModel, LossFn};
use crate::dataset::{Dataset, LabelSpace, Scaler};
use crate::error::{Error, Result};

pub const DEFAULT_GRID_CAP: usize = 2_000_000;

/// One searched parameter and its candidate values, in search order.
#[derive(Clone, Debug, PartialEq)]
pub struct GridAxis {
    pub name: String,
    pub values: Vec<f64>,
}

impl GridAxis {
    pub fn values(name: &str, values: Vec<f64>) -> Self {
        Self {
            name: name.to_string(),
            values,
        }
    }

    /// `steps` evenly spaced values from `min` to `max` inclusive.
    pub fn linspace(name: &str, min: f64, max: f64, steps: usize) -> Self {
        let values = match steps {
            0 => Vec::new(),
            1 => vec![min],
            _ => (0..steps)
                .map(|i| min + (max - min) * i as f64 / (steps - 1) as f64)
                .collect(),
        };
        Self::values(name, values)
    }

    /// `steps` directions `k * 2pi / steps` covering the full circle.
    pub fn angles(name: &str, steps: usize) -> Self {
        Self::values(
            name,
            (0..steps)
                .map(|k| k as f64 * std::f64::consts::TAU / steps as f64)
                .collect(),
        )
    }
}

/// Finite Cartesian grid, enumerated lexicographically with the first axis
/// outermost.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<GridAxis>,
    pub cap: usize,
}

impl GridSpec {
    /// Direction angle over the full circle and a signed offset along it.
    pub fn line(angle_steps: usize, offset_min: f64, offset_max: f64, offset_steps: usize) -> Self {
        Self {
            axes: vec![
                GridAxis::angles("angle", angle_steps),
                GridAxis::linspace("offset", offset_min, offset_max, offset_steps),
            ],
            cap: DEFAULT_GRID_CAP,
        }
    }

    pub fn candidate_count(&self) -> usize {
        self.axes
            .iter()
            .fold(1usize, |acc, a| acc.saturating_mul(a.values.len()))
    }

    /// Parameter vector at lexicographic position `index`.
    pub fn candidate(&self, mut index: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            let len = axis.values.len();
            out[k] = axis.values[index % len];
            index /= len;
        }
        out
    }

    pub fn axis(&self, name: &str) -> Result<&GridAxis> {
        self.axes
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| Error::param(format!("grid has no '{name}' axis")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.iter().any(|a| a.values.is_empty()) {
            return Err(Error::param("grid axes must be non-empty"));
        }
        if self.axes.iter().flat_map(|a| &a.values).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let count = self.candidate_count();
        if count > self.cap {
            return Err(Error::GridCapExceeded {
                candidates: count,
                cap: self.cap,
            });
        }
        Ok(())
    }
}

/// Binary linear model predicting class 1 where
/// `cos(angle) z1 + sin(angle) z2 + offset > 0` (score of class 0 is zero).
pub fn line_model(space: &LabelSpace, scaler: &Scaler, angle: f64, offset: f64) -> Result<LinearModel> {
    LinearModel::new(
        array![[0.0, 0.0], [angle.cos(), angle.sin()]],
        Array1::from(vec![0.0, offset]),
        space.clone(),
        scaler.clone(),
    )
}

#[derive(Clone, Debug)]
pub struct GridFit {
    pub model: LinearModel,
    /// `[angle, offset]` of the winning candidate.
    pub params: Vec<f64>,
    pub index: usize,
    pub risk: f64,
}

/// Exhaustive argmin of the empirical risk over line models on a two-feature
/// binary problem. The grid needs `angle` and `offset` axes, in that order;
/// the first candidate with the smallest risk wins.
pub fn grid_search_argmin(train: &Dataset, loss: LossFn, grid: &GridSpec) -> Result<GridFit> {
    let space = train.label_space();
    if space.includes_abstention() || space.len() != 2 {
        return Err(Error::param("grid search needs a binary problem without abstention"));
    }
    if train.d() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: train.d(),
        });
    }
    grid.validate()?;
    if grid.axes.len() != 2 || grid.axes[0].name != "angle" || grid.axes[1].name != "offset" {
        return Err(Error::param("grid must have exactly the axes [angle, offset]"));
    }
    let scaler = Scaler::fit(train);
    let mut best: Option<GridFit> = None;
    for index in 0..grid.candidate_count() {
        let params = grid.candidate(index);
        let model = line_model(space, &scaler, params[0], params[1])?;
        let risk = empirical_risk(&model, train, loss)?;
        if best.as_ref().is_none_or(|b| risk < b.risk) {
            best = Some(GridFit {
                model,
                params,
                index,
                risk,
            });
        }
    }
    Ok(best.expect("grid is non-empty"))
}
