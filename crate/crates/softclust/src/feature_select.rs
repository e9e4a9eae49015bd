use std::collections::HashMap;

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// A feature column reduced to equal-frequency bin indices.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteColumn {
    values: Vec<usize>,
    bin_count: usize,
    bin_edges: Vec<f64>,
}

impl DiscreteColumn {
    pub fn values(&self) -> &[usize] {
        &self.values
    }

    /// Number of distinct bins actually realized in the column.
    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    /// Upper-inclusive bin boundaries (deduplicated quantile cuts).
    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Entropy scores for one feature: symmetric uncertainty against the class
/// column plus per-class conditional relative uncertainty and its complement,
/// aligned with the report's class list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureScore {
    pub feature_index: usize,
    pub feature_name: String,
    pub su: f64,
    pub ru_per_class: Vec<f64>,
    pub bias_per_class: Vec<f64>,
}

/// Ranked feature scores; `classes` fixes the column order of the per-class
/// vectors in every score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionReport {
    pub classes: Vec<String>,
    pub scores: Vec<FeatureScore>,
}

impl SelectionReport {
    pub fn selected_indices(&self) -> Vec<usize> {
        self.scores.iter().map(|s| s.feature_index).collect()
    }
}

/// Equal-frequency discretization: cut points at the `b·N/bins` order
/// statistics (upper-inclusive, duplicates merged), so bin populations differ
/// by at most one wherever ties permit. A constant column collapses to one bin.
pub fn discretize(column: &[f64], bins: usize) -> Result<DiscreteColumn> {
    if bins < 2 {
        return Err(Error::InvalidConfig(format!(
            "bin count must be >= 2, got {bins}"
        )));
    }
    if column.is_empty() {
        return Err(Error::DegenerateData("cannot discretize an empty column".into()));
    }
    if let Some(j) = column.iter().position(|v| !v.is_finite()) {
        return Err(Error::Parse {
            row: j,
            column: 0,
            message: "non-finite value in column".into(),
        });
    }
    let n = column.len();
    let mut sorted = column.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut edges: Vec<f64> = Vec::with_capacity(bins - 1);
    for b in 1..bins {
        let pos = (b * n).div_ceil(bins) - 1;
        let e = sorted[pos];
        if edges.last() != Some(&e) {
            edges.push(e);
        }
    }
    // Values above the last cut fall into one final catch-all bin.
    let values: Vec<usize> = column
        .iter()
        .map(|&v| {
            edges
                .iter()
                .position(|&e| v <= e)
                .unwrap_or(edges.len())
        })
        .collect();
    let mut seen = vec![false; edges.len() + 1];
    for &v in &values {
        seen[v] = true;
    }
    let bin_count = seen.iter().filter(|&&s| s).count();
    Ok(DiscreteColumn {
        values,
        bin_count,
        bin_edges: edges,
    })
}

fn entropy_of_counts<'a>(counts: impl Iterator<Item = &'a usize>, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let h: f64 = counts
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    // A single occupied bin yields −(1·log₂ 1) = −0.0; fold that to +0.0 so
    // zero entropies serialize without a sign.
    h + 0.0
}

fn bin_frequencies(values: &[usize]) -> Vec<usize> {
    let max = values.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0usize; max + 1];
    for &v in values {
        counts[v] += 1;
    }
    counts
}

/// Shannon entropy of the realized bins, in bits.
pub fn entropy(d: &DiscreteColumn) -> f64 {
    entropy_of_counts(bin_frequencies(&d.values).iter(), d.len())
}

/// Entropy normalized by `log₂(min(bin_count, m_samples))`; defined as 0 when
/// that minimum is 1 or less (a single-valued variable carries no uncertainty).
pub fn relative_uncertainty(d: &DiscreteColumn, m_samples: usize) -> f64 {
    let base = d.bin_count.min(m_samples);
    if base <= 1 {
        return 0.0;
    }
    entropy(d) / (base as f64).log2()
}

fn class_member_bins(feature: &DiscreteColumn, labels: &[String], class_j: &str) -> Result<Vec<usize>> {
    if labels.len() != feature.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} labels", feature.len()),
            found: format!("{}", labels.len()),
        });
    }
    let members: Vec<usize> = feature
        .values
        .iter()
        .zip(labels)
        .filter(|(_, l)| l.as_str() == class_j)
        .map(|(&v, _)| v)
        .collect();
    if members.is_empty() {
        return Err(Error::UnknownClass(class_j.to_string()));
    }
    Ok(members)
}

/// Within-class relative uncertainty: the entropy of the feature restricted to
/// `class_j`, normalized by `log₂(min(class size, feature bin count))`;
/// 0 when that minimum is 1 or less.
pub fn conditional_ru(feature: &DiscreteColumn, labels: &[String], class_j: &str) -> Result<f64> {
    let members = class_member_bins(feature, labels, class_j)?;
    let base = members.len().min(feature.bin_count);
    if base <= 1 {
        return Ok(0.0);
    }
    let h = entropy_of_counts(bin_frequencies(&members).iter(), members.len());
    Ok(h / (base as f64).log2())
}

/// The certainty complement `B = 1 − conditional RU`: higher means the feature
/// points at the class more decisively.
pub fn bias_coefficient(feature: &DiscreteColumn, labels: &[String], class_j: &str) -> Result<f64> {
    Ok(1.0 - conditional_ru(feature, labels, class_j)?)
}

/// Symmetric uncertainty from paired discrete values:
/// `2·(H(X) − H(X|Y)) / (H(X) + H(Y))`, 0 when the denominator is 0.
fn su_from_pairs(xs: &[usize], ys: &[usize]) -> f64 {
    let n = xs.len();
    let h_x = entropy_of_counts(bin_frequencies(xs).iter(), n);
    let h_y = entropy_of_counts(bin_frequencies(ys).iter(), n);
    if h_x + h_y == 0.0 {
        return 0.0;
    }
    // H(X|Y) = Σ_y p(y)·H(X | Y = y), from the joint contingency counts.
    let mut by_y: HashMap<usize, Vec<usize>> = HashMap::new();
    for (&x, &y) in xs.iter().zip(ys) {
        by_y.entry(y).or_default().push(x);
    }
    let mut h_x_given_y = 0.0;
    for group in by_y.values() {
        let p_y = group.len() as f64 / n as f64;
        h_x_given_y += p_y * entropy_of_counts(bin_frequencies(group).iter(), group.len());
    }
    let ig = h_x - h_x_given_y;
    (2.0 * ig / (h_x + h_y)).clamp(0.0, 1.0)
}

/// Symmetric uncertainty between a discretized feature and the class column.
pub fn symmetric_uncertainty(feature: &DiscreteColumn, labels: &[String]) -> f64 {
    assert_eq!(
        labels.len(),
        feature.len(),
        "feature column and labels disagree on record count"
    );
    let mut class_ids: HashMap<&str, usize> = HashMap::new();
    let ys: Vec<usize> = labels
        .iter()
        .map(|l| {
            let next = class_ids.len();
            *class_ids.entry(l.as_str()).or_insert(next)
        })
        .collect();
    su_from_pairs(&feature.values, &ys)
}

/// Scores every feature against the labels and returns the top `k` by
/// symmetric uncertainty (descending; ties keep the lower feature index).
pub fn select_features(data: &Dataset, bins: usize, k: usize) -> Result<SelectionReport> {
    let labels = data.labels().ok_or(Error::LabelsRequired)?;
    let n_feat = data.n_features();
    if k < 1 || k > n_feat {
        return Err(Error::InvalidConfig(format!(
            "must select between 1 and {n_feat} features, got {k}"
        )));
    }
    let mut classes: Vec<String> = labels.to_vec();
    classes.sort();
    classes.dedup();

    let mut scores = Vec::with_capacity(n_feat);
    for j in 0..n_feat {
        let column = discretize(&data.column(j), bins)?;
        let su = symmetric_uncertainty(&column, labels);
        let mut ru_per_class = Vec::with_capacity(classes.len());
        let mut bias_per_class = Vec::with_capacity(classes.len());
        for class in &classes {
            let ru = conditional_ru(&column, labels, class)?;
            ru_per_class.push(ru);
            bias_per_class.push(1.0 - ru);
        }
        scores.push(FeatureScore {
            feature_index: j,
            feature_name: data.feature_names()[j].clone(),
            su,
            ru_per_class,
            bias_per_class,
        });
    }
    scores.sort_by(|a, b| {
        b.su
            .partial_cmp(&a.su)
            .unwrap()
            .then(a.feature_index.cmp(&b.feature_index))
    });
    scores.truncate(k);
    Ok(SelectionReport { classes, scores })
}
