//! LIBSVM sparse text format and seeded train/validation/test splits.
//!
//! Each nonempty line is `label idx:val idx:val ...` with 1-based, strictly
//! increasing indices. Lines starting with `#` are skipped.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{BloccError, Result};

/// How raw labels map onto `{−1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum LabelMap {
    /// Only `−1` and `+1` are accepted.
    #[default]
    Strict,
    /// `negative ↦ −1`, `positive ↦ +1`; anything else is rejected.
    Remap { negative: f64, positive: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledData {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
}

impl LabeledData {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }
}

pub fn parse_libsvm(text: &str) -> Result<LabeledData> {
    parse_libsvm_with(text, LabelMap::Strict)
}

pub fn parse_libsvm_with(text: &str, map: LabelMap) -> Result<LabeledData> {
    let mut sparse_rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut width = 0;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        let raw_label: f64 = label_tok
            .parse()
            .map_err(|_| BloccError::parse(line_no, format!("bad label {label_tok:?}")))?;
        labels.push(map_label(raw_label, map).ok_or_else(|| {
            BloccError::parse(line_no, format!("label {label_tok} is not in {{-1, +1}}"))
        })?);

        let mut row = Vec::new();
        let mut last = 0;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| BloccError::parse(line_no, format!("malformed token {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| BloccError::parse(line_no, format!("bad index in {tok:?}")))?;
            let val: f64 = val
                .parse()
                .map_err(|_| BloccError::parse(line_no, format!("bad value in {tok:?}")))?;
            if idx == 0 {
                return Err(BloccError::parse(line_no, "indices are 1-based"));
            }
            if idx <= last {
                return Err(BloccError::parse(
                    line_no,
                    format!("indices not increasing: {idx} after {last}"),
                ));
            }
            if !val.is_finite() {
                return Err(BloccError::parse(line_no, format!("non-finite value in {tok:?}")));
            }
            last = idx;
            row.push((idx - 1, val));
        }
        width = width.max(last);
        sparse_rows.push(row);
    }

    let features = sparse_rows
        .into_iter()
        .map(|row| {
            let mut dense = vec![0.0; width];
            for (i, v) in row {
                dense[i] = v;
            }
            dense
        })
        .collect();
    Ok(LabeledData { features, labels })
}

fn map_label(raw: f64, map: LabelMap) -> Option<f64> {
    match map {
        LabelMap::Strict if raw == 1.0 || raw == -1.0 => Some(raw),
        LabelMap::Strict => None,
        LabelMap::Remap { negative, positive } => {
            if raw == negative {
                Some(-1.0)
            } else if raw == positive {
                Some(1.0)
            } else {
                None
            }
        }
    }
}

/// Samples shuffled by `seed` and cut into train, validation and test
/// blocks, in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmDataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub seed: u64,
}

impl SvmDataset {
    /// 60/20/20 split.
    pub fn split(data: &LabeledData, seed: u64) -> Self {
        Self::split_with(data, seed, 0.6, 0.2)
    }

    pub fn split_with(data: &LabeledData, seed: u64, train_frac: f64, val_frac: f64) -> Self {
        let n = data.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let n_train = ((n as f64) * train_frac).round() as usize;
        let n_val = (((n as f64) * val_frac).round() as usize).min(n - n_train.min(n));
        let n_train = n_train.min(n);
        Self {
            features: order.iter().map(|&i| data.features[i].clone()).collect(),
            labels: order.iter().map(|&i| data.labels[i]).collect(),
            n_train,
            n_val,
            n_test: n - n_train - n_val,
            seed,
        }
    }

    /// Use the given blocks verbatim.
    pub fn from_parts(train: &LabeledData, val: &LabeledData, test: &LabeledData) -> Self {
        let mut features = train.features.clone();
        features.extend(val.features.iter().cloned());
        features.extend(test.features.iter().cloned());
        let mut labels = train.labels.clone();
        labels.extend(&val.labels);
        labels.extend(&test.labels);
        Self {
            features,
            labels,
            n_train: train.len(),
            n_val: val.len(),
            n_test: test.len(),
            seed: 0,
        }
    }

    pub fn num_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn train(&self) -> (&[Vec<f64>], &[f64]) {
        (&self.features[..self.n_train], &self.labels[..self.n_train])
    }

    pub fn val(&self) -> (&[Vec<f64>], &[f64]) {
        let r = self.n_train..self.n_train + self.n_val;
        (&self.features[r.clone()], &self.labels[r])
    }

    pub fn test(&self) -> (&[Vec<f64>], &[f64]) {
        let r = self.n_train + self.n_val..;
        (&self.features[r.clone()], &self.labels[r])
    }

    /// Center and scale every feature with training-block statistics.
    /// Constant features are only centered.
    pub fn standardize(&mut self) {
        let p = self.num_features();
        if self.n_train == 0 {
            return;
        }
        let n = self.n_train as f64;
        for j in 0..p {
            let mean = self.features[..self.n_train].iter().map(|r| r[j]).sum::<f64>() / n;
            let var = self.features[..self.n_train]
                .iter()
                .map(|r| (r[j] - mean).powi(2))
                .sum::<f64>()
                / n;
            let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
            for row in &mut self.features {
                row[j] = (row[j] - mean) / sd;
            }
        }
    }
}
