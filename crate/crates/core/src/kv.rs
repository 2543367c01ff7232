//! Flat `key=value` text documents used for every persisted artifact
//! (scalers, models, rejectors, abstaining models).
//!
//! One entry per line, split at the first `=`. Blank lines and lines starting
//! with `#` are ignored. Keys keep their insertion order. Numbers are written
//! in Rust's shortest round-trip form, so parsing yields the identical `f64`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct KvDoc {
    entries: Vec<(String, String)>,
}

impl KvDoc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn push_f64(&mut self, key: impl Into<String>, value: f64) {
        self.push(key, fmt_f64(value));
    }

    pub fn push_f64s(&mut self, key: impl Into<String>, values: &[f64]) {
        let joined = values.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(" ");
        self.push(key, joined);
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Format(format!("missing key '{key}'")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        parse_f64(key, self.require(key)?)
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|_| Error::Format(format!("key '{key}': '{raw}' is not an integer")))
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        match self.require(key)? {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(Error::Format(format!("key '{key}': '{other}' is not a boolean"))),
        }
    }

    pub fn f64s(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.require(key)?;
        raw.split_whitespace().map(|v| parse_f64(key, v)).collect()
    }

    /// Entries whose key starts with `prefix`, with the prefix stripped.
    pub fn with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = (&'a str, &'a str)> {
        self.entries
            .iter()
            .filter_map(move |(k, v)| k.strip_prefix(prefix).map(|rest| (rest, v.as_str())))
    }

    pub fn extend_prefixed(&mut self, prefix: &str, other: &KvDoc) {
        for (k, v) in &other.entries {
            self.entries.push((format!("{prefix}{k}"), v.clone()));
        }
    }

    /// Sub-document of the entries under `prefix`, prefix removed.
    pub fn section(&self, prefix: &str) -> KvDoc {
        KvDoc {
            entries: self
                .with_prefix(prefix)
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Format(format!("line {}: expected key=value", lineno + 1))
            })?;
            entries.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(Self { entries })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn parse_f64(key: &str, raw: &str) -> Result<f64> {
    raw.parse()
        .map_err(|_| Error::Format(format!("key '{key}': '{raw}' is not a number")))
}

/// Keys may not contain `=` or start with `#`, and must be trimmed.
pub(crate) fn check_key_fragment(s: &str) -> Result<()> {
    if s.is_empty() || s.contains('=') || s.starts_with('#') || s.trim() != s || s.contains('\n') {
        return Err(Error::Format(format!(
            "name '{s}' cannot be stored in a key=value file"
        )));
    }
    Ok(())
}
