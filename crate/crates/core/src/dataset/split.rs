use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Stratified train/test partition.
///
/// The training set gets `floor(n * train_fraction)` rows (a `1e-9` slack
/// absorbs representation error in the product). Each class receives the
/// floor of its proportional share; leftover slots go to the classes with
/// the largest fractional remainders, lowest class index first. Both parts
/// keep the original row order.
pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::param(format!(
            "train fraction {train_fraction} outside (0,1)"
        )));
    }
    let n = dataset.n();
    let n_train = (n as f64 * train_fraction + 1e-9).floor() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::param(format!(
            "train fraction {train_fraction} on {n} rows leaves an empty split"
        )));
    }

    let counts = dataset.class_counts();
    let mut quota: Vec<usize> = Vec::with_capacity(counts.len());
    let mut remainders: Vec<(f64, usize)> = Vec::new();
    for (c, &cnt) in counts.iter().enumerate() {
        let exact = cnt as f64 * n_train as f64 / n as f64;
        let q = exact.floor() as usize;
        quota.push(q);
        remainders.push((exact - q as f64, c));
    }
    let mut missing = n_train - quota.iter().sum::<usize>();
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, c) in remainders.iter().cycle() {
        if missing == 0 {
            break;
        }
        if quota[c] < counts[c] {
            quota[c] += 1;
            missing -= 1;
        }
    }

    let mut rng = Rng::new(seed);
    let mut in_train = vec![false; n];
    for (c, &q) in quota.iter().enumerate() {
        let mut rows: Vec<usize> = (0..n).filter(|&i| dataset.labels()[i] == c).collect();
        rng.shuffle(&mut rows);
        for &i in &rows[..q] {
            in_train[i] = true;
        }
    }
    let train: Vec<usize> = (0..n).filter(|&i| in_train[i]).collect();
    let test: Vec<usize> = (0..n).filter(|&i| !in_train[i]).collect();
    Ok((dataset.select(&train), dataset.select(&test)))
}
