use crate::error::{Error, Result};

/// A tabular dataset: N records by n numeric features, with optional
/// ground-truth labels and a record of any normalization applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<Vec<f64>>,
    feature_names: Vec<String>,
    labels: Option<Vec<String>>,
    /// Per-feature (min, max) captured when `normalize` ran, for inversion.
    normalization: Option<Vec<(f64, f64)>>,
}

impl Dataset {
    /// Builds a dataset from row-major records, validating shape and finiteness.
    pub fn new(records: Vec<Vec<f64>>, feature_names: Vec<String>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::DegenerateData("dataset has no records".into()));
        }
        let n = feature_names.len();
        if n == 0 {
            return Err(Error::DegenerateData("dataset has no features".into()));
        }
        for (i, row) in records.iter().enumerate() {
            if row.len() != n {
                return Err(Error::ShapeMismatch {
                    expected: format!("{n} features"),
                    found: format!("{} in record {i}", row.len()),
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Parse {
                    row: i,
                    column: j,
                    message: "non-finite feature value".into(),
                });
            }
        }
        Ok(Self {
            records,
            feature_names,
            labels: None,
            normalization: None,
        })
    }

    /// Attaches a label per record.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_records() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} labels", self.n_records()),
                found: format!("{}", labels.len()),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Min-max scales every feature to [0, 1] in place, recording the
    /// original (min, max) per feature. Constant features map to 0.
    pub fn normalize(&mut self) {
        if self.normalization.is_some() {
            return;
        }
        let n = self.n_features();
        let mut ranges = Vec::with_capacity(n);
        for j in 0..n {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for row in &self.records {
                lo = lo.min(row[j]);
                hi = hi.max(row[j]);
            }
            ranges.push((lo, hi));
        }
        for row in &mut self.records {
            for (j, &(lo, hi)) in ranges.iter().enumerate() {
                row[j] = if hi > lo { (row[j] - lo) / (hi - lo) } else { 0.0 };
            }
        }
        self.normalization = Some(ranges);
    }

    /// Marks the dataset as already scaled from the given per-feature ranges
    /// (used by loaders that apply a fixed transform, e.g. intensity / 255).
    pub(crate) fn set_normalization(&mut self, ranges: Vec<(f64, f64)>) {
        self.normalization = Some(ranges);
    }

    pub fn n_records(&self) -> usize {
        self.records.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn record(&self, k: usize) -> &[f64] {
        &self.records[k]
    }

    pub fn records(&self) -> &[Vec<f64>] {
        &self.records
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// One feature as a column vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.records.iter().map(|r| r[j]).collect()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn normalization(&self) -> Option<&[(f64, f64)]> {
        self.normalization.as_deref()
    }

    /// Per-feature (min, max) over the current (possibly normalized) values.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        (0..self.n_features())
            .map(|j| {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for row in &self.records {
                    lo = lo.min(row[j]);
                    hi = hi.max(row[j]);
                }
                (lo, hi)
            })
            .collect()
    }

    /// The subset of records at `indices`, preserving order, labels, and
    /// normalization metadata.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::DegenerateData("empty record subset".into()));
        }
        let records = indices.iter().map(|&k| self.records[k].clone()).collect();
        let labels = self
            .labels
            .as_ref()
            .map(|ls| indices.iter().map(|&k| ls[k].clone()).collect());
        Ok(Self {
            records,
            feature_names: self.feature_names.clone(),
            labels,
            normalization: self.normalization.clone(),
        })
    }

    /// Appends records (and labels, when labeled) from `other` in order.
    pub(crate) fn append(&mut self, records: Vec<Vec<f64>>, labels: Option<Vec<String>>) -> Result<()> {
        let n = self.n_features();
        for row in &records {
            if row.len() != n {
                return Err(Error::ShapeMismatch {
                    expected: format!("{n} features"),
                    found: format!("{}", row.len()),
                });
            }
        }
        match (&mut self.labels, labels) {
            (Some(mine), Some(extra)) => {
                if extra.len() != records.len() {
                    return Err(Error::ShapeMismatch {
                        expected: format!("{} labels", records.len()),
                        found: format!("{}", extra.len()),
                    });
                }
                mine.extend(extra);
            }
            (None, None) => {}
            (Some(_), None) => {
                return Err(Error::Schema(
                    "appending unlabeled records to a labeled dataset".into(),
                ))
            }
            (None, Some(_)) => {
                return Err(Error::Schema(
                    "appending labeled records to an unlabeled dataset".into(),
                ))
            }
        }
        self.records.extend(records);
        Ok(())
    }
}
