//! Dataset container, CSV / LIBSVM ingestion and per-feature preprocessing.
//!
//! A [`Dataset`] is validated once at construction and never mutated
//! afterwards; every transform returns a new value.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while ingesting or validating a dataset.
///
/// Row and column coordinates are 1-based and refer to the source file.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: file contains no data rows")]
    Empty { path: String },
    #[error("{path}: row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        path: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}: row {row}, column {column}: cannot parse {value:?} as a number")]
    NonNumeric {
        path: String,
        row: usize,
        column: usize,
        value: String,
    },
    #[error("{path}: row {row}, column {column}: value is not finite")]
    NonFinite {
        path: String,
        row: usize,
        column: usize,
    },
    #[error("{path}: row {row}: cannot parse label {value:?} as an integer")]
    BadLabel {
        path: String,
        row: usize,
        value: String,
    },
    #[error("{path}: label column {name:?} not found in header")]
    MissingLabelColumn { path: String, name: String },
    #[error("{path}: line {line}: feature index {index} is not greater than the previous index {previous}")]
    NonIncreasingIndex {
        path: String,
        line: usize,
        index: usize,
        previous: usize,
    },
    #[error("{path}: line {line}: feature indices are 1-based, got {index}")]
    IndexBelowOne {
        path: String,
        line: usize,
        index: usize,
    },
    #[error("{path}: line {line}: malformed token {token:?}")]
    BadToken {
        path: String,
        line: usize,
        token: String,
    },
    #[error("dataset {name:?}: {reason}")]
    Invalid { name: String, reason: String },
}

/// Dense sample × feature matrix with optional integer labels and names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Array2<f64>,
    labels: Option<Vec<i64>>,
    feature_names: Option<Vec<String>>,
    name: String,
}

impl Dataset {
    /// Builds a dataset, checking shape, finiteness, label and name invariants.
    pub fn new(
        name: impl Into<String>,
        values: Array2<f64>,
        labels: Option<Vec<i64>>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self, DataError> {
        let name = name.into();
        let invalid = |reason: String| DataError::Invalid {
            name: name.clone(),
            reason,
        };
        let (n, m) = values.dim();
        if n < 2 {
            return Err(invalid(format!("need at least 2 samples, got {n}")));
        }
        if m < 1 {
            return Err(invalid("need at least 1 feature".into()));
        }
        if let Some(((r, c), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(invalid(format!(
                "non-finite value at sample {r}, feature {c}"
            )));
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(invalid(format!(
                    "{} labels for {n} samples",
                    labels.len()
                )));
            }
            let first = labels[0];
            if labels.iter().all(|&l| l == first) {
                return Err(invalid("labels must contain at least 2 classes".into()));
            }
        }
        if let Some(names) = &feature_names {
            if names.len() != m {
                return Err(invalid(format!(
                    "{} feature names for {m} features",
                    names.len()
                )));
            }
            let mut seen = HashSet::new();
            if let Some(dup) = names.iter().find(|s| !seen.insert(s.as_str())) {
                return Err(invalid(format!("duplicate feature name {dup:?}")));
            }
        }
        Ok(Dataset {
            values,
            labels,
            feature_names,
            name,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn column(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.column(i)
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Display name of feature `i`: the header name if present, else `f{i}`.
    pub fn feature_name(&self, i: usize) -> String {
        match &self.feature_names {
            Some(names) => names[i].clone(),
            None => format!("f{i}"),
        }
    }

    /// Same samples, new values. Shape must match.
    pub(crate) fn with_values(&self, values: Array2<f64>) -> Dataset {
        debug_assert_eq!(values.dim(), self.values.dim());
        Dataset {
            values,
            labels: self.labels.clone(),
            feature_names: self.feature_names.clone(),
            name: self.name.clone(),
        }
    }

    /// Keeps the listed feature columns, in the given order.
    pub fn select_features(&self, indices: &[usize]) -> Result<Dataset, DataError> {
        let values = self.values.select(Axis(1), indices);
        let names = self
            .feature_names
            .as_ref()
            .map(|names| indices.iter().map(|&i| names[i].clone()).collect());
        Dataset::new(self.name.clone(), values, self.labels.clone(), names)
    }

    /// Keeps the listed samples, in the given order.
    pub fn select_samples(&self, indices: &[usize]) -> Result<Dataset, DataError> {
        let values = self.values.select(Axis(0), indices);
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        Dataset::new(self.name.clone(), values, labels, self.feature_names.clone())
    }
}

/// Per-feature transform applied before building measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreprocessingScheme {
    None,
    /// Affine map of each feature onto [0, 1].
    Normalize,
    /// Zero mean, unit population variance.
    Standardize,
}

impl PreprocessingScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            PreprocessingScheme::None => "none",
            PreprocessingScheme::Normalize => "normalize",
            PreprocessingScheme::Standardize => "standardize",
        }
    }
}

impl fmt::Display for PreprocessingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PreprocessingScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(PreprocessingScheme::None),
            "normalize" => Ok(PreprocessingScheme::Normalize),
            "standardize" => Ok(PreprocessingScheme::Standardize),
            other => Err(format!(
                "unknown preprocessing scheme {other:?} (expected none, normalize or standardize)"
            )),
        }
    }
}

/// Per-feature affine map `x -> (x - shift) / divisor`, fitted on one dataset
/// and applicable to another with the same feature count.
///
/// Constant features get `divisor = 0` and map to all zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    scheme: PreprocessingScheme,
    shift: Vec<f64>,
    divisor: Vec<f64>,
}

impl Scaler {
    pub fn fit(d: &Dataset, scheme: PreprocessingScheme) -> Scaler {
        let m = d.n_features();
        let mut shift = vec![0.0; m];
        let mut divisor = vec![1.0; m];
        if scheme != PreprocessingScheme::None {
            for (i, col) in d.values.axis_iter(Axis(1)).enumerate() {
                let (lo, hi) = col
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    });
                if lo == hi {
                    shift[i] = lo;
                    divisor[i] = 0.0;
                    continue;
                }
                (shift[i], divisor[i]) = match scheme {
                    PreprocessingScheme::Normalize => (lo, hi - lo),
                    PreprocessingScheme::Standardize => {
                        mean_and_population_std(col.iter().copied())
                    }
                    PreprocessingScheme::None => unreachable!(),
                };
            }
        }
        Scaler {
            scheme,
            shift,
            divisor,
        }
    }

    pub fn scheme(&self) -> PreprocessingScheme {
        self.scheme
    }

    pub fn transform(&self, d: &Dataset) -> Result<Dataset, DataError> {
        let values = self.transform_values(d.values()).map_err(|reason| DataError::Invalid {
            name: d.name.clone(),
            reason,
        })?;
        Ok(d.with_values(values))
    }

    /// Applies the fitted map to a bare sample × feature matrix.
    pub fn transform_values(&self, values: &Array2<f64>) -> Result<Array2<f64>, String> {
        if values.ncols() != self.shift.len() {
            return Err(format!(
                "scaler fitted on {} features, data has {}",
                self.shift.len(),
                values.ncols()
            ));
        }
        let mut values = values.clone();
        if self.scheme == PreprocessingScheme::None {
            return Ok(values);
        }
        for (i, mut col) in values.axis_iter_mut(Axis(1)).enumerate() {
            let (shift, divisor) = (self.shift[i], self.divisor[i]);
            if divisor > 0.0 {
                col.mapv_inplace(|v| (v - shift) / divisor);
            } else {
                col.fill(0.0);
            }
        }
        Ok(values)
    }
}

/// Applies `scheme` to every feature using statistics of `d` itself.
pub fn preprocess(d: &Dataset, scheme: PreprocessingScheme) -> Dataset {
    Scaler::fit(d, scheme)
        .transform(d)
        .expect("scaler fitted on the same dataset")
}

pub(crate) fn mean_and_population_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (sum, count) = values.clone().fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        return (0.0, 0.0);
    }
    let mean = sum / count as f64;
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / count as f64).sqrt())
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok()
}

fn parse_label(token: &str) -> Option<i64> {
    let token = token.trim();
    if let Ok(v) = token.parse::<i64>() {
        return Some(v);
    }
    // "1.0" style labels are accepted when integral
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15 => Some(v as i64),
        _ => None,
    }
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn read_to_string(path: &Path) -> Result<String, DataError> {
    fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a comma-separated file.
///
/// The first row is a header iff any of its cells is non-numeric. When
/// `label_column` is given it must name a header column; that column is
/// parsed as integer class ids and removed from the feature matrix.
pub fn load_csv(path: impl AsRef<Path>, label_column: Option<&str>) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    parse_csv(&text, &path.display().to_string(), &dataset_name(path), label_column)
}

pub(crate) fn parse_csv(
    text: &str,
    path: &str,
    name: &str,
    label_column: Option<&str>,
) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| DataError::Io {
            path: path.to_string(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
        })?;
        // skip blank lines
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        records.push((line, rec));
    }
    if records.is_empty() {
        return Err(DataError::Empty {
            path: path.to_string(),
        });
    }

    let has_header = records[0].1.iter().any(|c| parse_number(c).is_none());
    let header: Option<Vec<String>> = if has_header {
        Some(records[0].1.iter().map(str::to_string).collect())
    } else {
        None
    };
    let width = records[0].1.len();
    let body = if has_header { &records[1..] } else { &records[..] };
    if body.is_empty() {
        return Err(DataError::Empty {
            path: path.to_string(),
        });
    }

    let label_idx = match label_column {
        None => None,
        Some(col) => {
            let idx = header
                .as_ref()
                .and_then(|h| h.iter().position(|c| c == col));
            Some(idx.ok_or_else(|| DataError::MissingLabelColumn {
                path: path.to_string(),
                name: col.to_string(),
            })?)
        }
    };

    let m = width - usize::from(label_idx.is_some());
    let mut flat = Vec::with_capacity(body.len() * m);
    let mut labels = label_idx.map(|_| Vec::with_capacity(body.len()));
    for (line, rec) in body {
        if rec.len() != width {
            return Err(DataError::RaggedRow {
                path: path.to_string(),
                row: *line,
                expected: width,
                found: rec.len(),
            });
        }
        for (c, cell) in rec.iter().enumerate() {
            if Some(c) == label_idx {
                let label = parse_label(cell).ok_or_else(|| DataError::BadLabel {
                    path: path.to_string(),
                    row: *line,
                    value: cell.to_string(),
                })?;
                labels.as_mut().unwrap().push(label);
                continue;
            }
            let v = parse_number(cell).ok_or_else(|| DataError::NonNumeric {
                path: path.to_string(),
                row: *line,
                column: c + 1,
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DataError::NonFinite {
                    path: path.to_string(),
                    row: *line,
                    column: c + 1,
                });
            }
            flat.push(v);
        }
    }

    let values = Array2::from_shape_vec((body.len(), m), flat).expect("row widths checked");
    let names = header.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|(c, _)| Some(*c) != label_idx)
            .map(|(_, s)| s)
            .collect()
    });
    Dataset::new(name, values, labels, names)
}

/// Reads a sparse `label idx:val idx:val ...` file with 1-based, strictly
/// increasing indices. Missing entries are zero; `m` is the largest index seen.
pub fn load_libsvm(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    parse_libsvm(&text, &path.display().to_string(), &dataset_name(path))
}

pub(crate) fn parse_libsvm(text: &str, path: &str, name: &str) -> Result<Dataset, DataError> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut m = 0usize;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let Some(label_tok) = tokens.next() else {
            continue;
        };
        let label = parse_label(label_tok).ok_or_else(|| DataError::BadLabel {
            path: path.to_string(),
            row: line,
            value: label_tok.to_string(),
        })?;
        let mut entries = Vec::new();
        let mut previous = 0usize;
        for tok in tokens {
            let bad = || DataError::BadToken {
                path: path.to_string(),
                line,
                token: tok.to_string(),
            };
            let (idx, val) = tok.split_once(':').ok_or_else(bad)?;
            let idx: usize = idx.parse().map_err(|_| bad())?;
            let val: f64 = val.parse().map_err(|_| bad())?;
            if idx < 1 {
                return Err(DataError::IndexBelowOne {
                    path: path.to_string(),
                    line,
                    index: idx,
                });
            }
            if idx <= previous {
                return Err(DataError::NonIncreasingIndex {
                    path: path.to_string(),
                    line,
                    index: idx,
                    previous,
                });
            }
            if !val.is_finite() {
                return Err(DataError::NonFinite {
                    path: path.to_string(),
                    row: line,
                    column: idx,
                });
            }
            previous = idx;
            entries.push((idx - 1, val));
        }
        m = m.max(previous);
        rows.push(entries);
        labels.push(label);
    }

    if rows.is_empty() {
        return Err(DataError::Empty {
            path: path.to_string(),
        });
    }
    let mut values = Array2::zeros((rows.len(), m));
    for (r, entries) in rows.iter().enumerate() {
        for &(c, v) in entries {
            values[[r, c]] = v;
        }
    }
    Dataset::new(name, values, Some(labels), None)
}
