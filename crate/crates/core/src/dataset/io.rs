use std::path::Path;

use ndarray::Array2;

use super::{Dataset, LabelSpace};
use crate::error::{Error, Result};
use crate::kv::fmt_f64;

/// Column name written by [`save_csv`] for the labels.
pub const LABEL_COLUMN: &str = "label";

/// Reads a comma-separated file with a mandatory header. Every column other
/// than `label_column` must be numeric. The label space is the sorted set of
/// distinct label values, with `abstention` last when present.
pub fn load_csv(path: &Path, label_column: &str) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader.headers()?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h.trim() == label_column)
        .ok_or_else(|| Error::UnknownLabelColumn(label_column.to_string()))?;
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.trim().to_string())
        .collect();

    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let row = r + 1;
        for (c, cell) in record.iter().enumerate() {
            if c == label_idx {
                raw_labels.push(cell.trim().to_string());
                continue;
            }
            let v: f64 = cell.trim().parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                Error::NonNumeric {
                    row,
                    column: headers.get(c).unwrap_or("").trim().to_string(),
                    value: cell.to_string(),
                }
            })?;
            values.push(v);
        }
    }
    if raw_labels.is_empty() {
        return Err(Error::EmptyData);
    }
    let space = LabelSpace::sorted(&raw_labels)?;
    let labels = raw_labels
        .iter()
        .map(|l| space.index_of(l))
        .collect::<Result<Vec<_>>>()?;
    let features = Array2::from_shape_vec((raw_labels.len(), names.len()), values)
        .map_err(|e| Error::InvalidDataset(e.to_string()))?;
    Dataset::new(features, labels, space, names)
}

/// Writes `dataset` as CSV: feature columns in order, then a `label` column.
/// Numbers use the shortest representation that parses back to the same
/// `f64`.
pub fn save_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    if dataset.d() == 0 {
        return Err(Error::InvalidDataset("no feature columns".into()));
    }
    if dataset.feature_names().iter().any(|n| n == LABEL_COLUMN) {
        return Err(Error::InvalidDataset(format!(
            "a feature is already named '{LABEL_COLUMN}'"
        )));
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    let mut header: Vec<&str> = dataset.feature_names().iter().map(String::as_str).collect();
    header.push(LABEL_COLUMN);
    writer.write_record(&header)?;
    let space = dataset.label_space();
    for i in 0..dataset.n() {
        let mut rec: Vec<String> = dataset.row(i).iter().map(|v| fmt_f64(*v)).collect();
        rec.push(space.name(dataset.labels()[i])?.to_string());
        writer.write_record(&rec)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
