//! Run configuration: flat `key=value` lines with `#` comments. Command-line
//! flags are applied on top of the file through the same setter, so every
//! value is validated identically wherever it comes from.

use std::path::{Path, PathBuf};

use abstainer::evaluation::{Architecture, CompareConfig};
use abstainer::predictor::{GridSpec, SurrogateConfig, DEFAULT_GRID_CAP};

use crate::error::{usage, CliError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub architecture: Architecture,
    pub alpha: f64,
    pub tau: f64,
    pub delta: f64,
    pub k: usize,
    pub q: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub train_fraction: f64,
    pub angle_steps: usize,
    pub offset_min: f64,
    pub offset_max: f64,
    pub offset_steps: usize,
    pub grid_cap: usize,
    pub ambiguity_k: usize,
    pub min_agreement: f64,
    pub top_k: usize,
    pub label_column: String,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            architecture: Architecture::PlugIn,
            alpha: 0.2,
            tau: 0.8,
            delta: 3.0,
            k: 5,
            q: 0.1,
            epochs: 1000,
            learning_rate: 1.0,
            train_fraction: 0.7,
            angle_steps: 72,
            offset_min: -3.0,
            offset_max: 3.0,
            offset_steps: 61,
            grid_cap: DEFAULT_GRID_CAP,
            ambiguity_k: 10,
            min_agreement: 0.7,
            top_k: 3,
            label_column: abstainer::dataset::LABEL_COLUMN.to_string(),
            out_dir: PathBuf::from("."),
        }
    }
}

pub const KEYS: [&str; 20] = [
    "seed",
    "architecture",
    "alpha",
    "tau",
    "delta",
    "k",
    "q",
    "epochs",
    "learning_rate",
    "train_fraction",
    "angle_steps",
    "offset_min",
    "offset_max",
    "offset_steps",
    "grid_cap",
    "ambiguity_k",
    "min_agreement",
    "top_k",
    "label_column",
    "out_dir",
];

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| usage(format!("{key}: cannot parse '{value}'")))
}

fn open_unit(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(usage(format!("{key} = {v} must lie in (0,1)")))
    }
}

fn positive(key: &str, v: usize) -> Result<usize> {
    if v >= 1 {
        Ok(v)
    } else {
        Err(usage(format!("{key} must be >= 1")))
    }
}

impl RunConfig {
    /// Sets one key, validating the value against the owning module's
    /// constraints. Bounds that need the data (alpha <= (m-1)/m, k <= n) are
    /// checked again when the data is known.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "seed" => self.seed = num(key, value)?,
            "architecture" => self.architecture = value.parse()?,
            "alpha" => self.alpha = open_unit(key, num(key, value)?)?,
            "tau" => {
                let v: f64 = num(key, value)?;
                if !(v > 0.0 && v <= 1.0) {
                    return Err(usage(format!("tau = {v} must lie in (0,1]")));
                }
                self.tau = v;
            }
            "delta" => {
                let v: f64 = num(key, value)?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(usage(format!("delta = {v} must be > 0")));
                }
                self.delta = v;
            }
            "k" => self.k = positive(key, num(key, value)?)?,
            "q" => self.q = open_unit(key, num(key, value)?)?,
            "epochs" => self.epochs = num(key, value)?,
            "learning_rate" => {
                let v: f64 = num(key, value)?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(usage(format!("learning_rate = {v} must be > 0")));
                }
                self.learning_rate = v;
            }
            "train_fraction" => self.train_fraction = open_unit(key, num(key, value)?)?,
            "angle_steps" => self.angle_steps = positive(key, num(key, value)?)?,
            "offset_min" => self.offset_min = finite(key, num(key, value)?)?,
            "offset_max" => self.offset_max = finite(key, num(key, value)?)?,
            "offset_steps" => self.offset_steps = positive(key, num(key, value)?)?,
            "grid_cap" => self.grid_cap = positive(key, num(key, value)?)?,
            "ambiguity_k" => self.ambiguity_k = positive(key, num(key, value)?)?,
            "min_agreement" => {
                let v: f64 = num(key, value)?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(usage(format!("min_agreement = {v} must lie in [0,1]")));
                }
                self.min_agreement = v;
            }
            "top_k" => self.top_k = positive(key, num(key, value)?)?,
            "label_column" => {
                if value.is_empty() {
                    return Err(usage("label_column must not be empty"));
                }
                self.label_column = value.to_string();
            }
            "out_dir" => self.out_dir = PathBuf::from(value),
            other => return Err(usage(format!("unknown config key '{other}'"))),
        }
        if self.offset_min > self.offset_max {
            return Err(usage(format!(
                "offset_min = {} exceeds offset_max = {}",
                self.offset_min, self.offset_max
            )));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| CliError::Config { line: i + 1, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got '{line}'")))?;
            cfg.set(key.trim(), value).map_err(|e| err(e.to_string()))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Core(abstainer::Error::Io {
                path: path.to_path_buf(),
                source: e,
            })
        })?;
        Self::parse(&text)
    }

    pub fn surrogate(&self) -> SurrogateConfig {
        SurrogateConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            seed: self.seed,
        }
    }

    pub fn grid(&self) -> GridSpec {
        let mut g = GridSpec::line(self.angle_steps, self.offset_min, self.offset_max, self.offset_steps);
        g.cap = self.grid_cap;
        g
    }

    pub fn compare(&self, architectures: Vec<Architecture>) -> CompareConfig {
        CompareConfig {
            architectures,
            surrogate: self.surrogate(),
            k: self.k,
            delta: self.delta,
            tau: self.tau,
            q: self.q,
            alpha: self.alpha,
            grid: self.grid(),
            ambiguity_k: self.ambiguity_k,
            min_agreement: self.min_agreement,
        }
    }
}

fn finite(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("{key} must be finite")))
    }
}
