use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fcm::MembershipMatrix;

/// The `c × c` prior matrix built from cluster-average memberships: column `k`
/// holds `a[k]` on the diagonal and `1 − a[k]` everywhere else, where `a[k]`
/// is cluster `k`'s mean membership over all records.
#[derive(Debug, Clone, PartialEq)]
pub struct PMatrix {
    p: Vec<Vec<f64>>,
    cluster_avgs: Vec<f64>,
}

impl PMatrix {
    pub fn n_clusters(&self) -> usize {
        self.cluster_avgs.len()
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.p[i][k]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn cluster_avgs(&self) -> &[f64] {
        &self.cluster_avgs
    }
}

/// A certainty threshold in [0, 1]; records scoring strictly below it are
/// flagged ambiguous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertaintyThreshold(f64);

impl CertaintyThreshold {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidConfig(format!(
                "certainty threshold must lie in [0, 1], got {value}"
            )));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Decision for one record: either confidently assigned to its dominant
/// cluster or withheld as ambiguous.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Assigned(usize),
    Ambiguous,
}

impl Status {
    pub fn is_ambiguous(self) -> bool {
        self == Status::Ambiguous
    }

    /// Stable lowercase name used in serialized reports.
    pub fn label(self) -> &'static str {
        match self {
            Status::Assigned(_) => "assigned",
            Status::Ambiguous => "ambiguous",
        }
    }
}

/// Per-record classification outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordOutcome {
    pub record_index: usize,
    pub dominant_cluster: usize,
    pub certainty: f64,
    pub status: Status,
}

/// All record outcomes for one threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeSet {
    pub outcomes: Vec<RecordOutcome>,
    pub threshold: f64,
}

impl OutcomeSet {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn n_ambiguous(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| o.status.is_ambiguous())
            .count()
    }

    pub fn ambiguous_indices(&self) -> Vec<usize> {
        self.outcomes
            .iter()
            .filter(|o| o.status.is_ambiguous())
            .map(|o| o.record_index)
            .collect()
    }

    /// Indices of records that received a confident assignment.
    pub fn decided_indices(&self) -> Vec<usize> {
        self.outcomes
            .iter()
            .filter(|o| !o.status.is_ambiguous())
            .map(|o| o.record_index)
            .collect()
    }
}

/// The ambiguous records handed off for downstream discrimination: original
/// feature values, labels when present, and the outcome annotations that put
/// them here. May be empty.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguousExport {
    pub records: Vec<Vec<f64>>,
    pub feature_names: Vec<String>,
    pub labels: Option<Vec<String>>,
    pub outcomes: Vec<RecordOutcome>,
}

impl AmbiguousExport {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Builds the prior matrix from a fitted membership matrix:
/// `p[i][k] = a[k]` when `i = k`, otherwise `1 − a[k]`.
pub fn compute_p_matrix(u: &MembershipMatrix) -> PMatrix {
    let c = u.n_clusters();
    let n = u.n_records() as f64;
    let cluster_avgs: Vec<f64> = u.rows().iter().map(|row| row.iter().sum::<f64>() / n).collect();
    let p = (0..c)
        .map(|i| {
            (0..c)
                .map(|k| {
                    if i == k {
                        cluster_avgs[k]
                    } else {
                        1.0 - cluster_avgs[k]
                    }
                })
                .collect()
        })
        .collect();
    PMatrix { p, cluster_avgs }
}

fn argmax_lowest(column: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in column.iter().enumerate().skip(1) {
        if v > column[best] {
            best = i;
        }
    }
    best
}

/// The record's certainty: with dominant cluster `C′ = argmax` (ties to the
/// lowest index) and scores `S_k = u_k` for `k = C′` else `1 − u_k`,
/// `CF = (1/c) · Σ_k S_k · p[C′][k]`.
pub fn certainty_factor(record_column: &[f64], p: &PMatrix) -> f64 {
    assert_eq!(
        record_column.len(),
        p.n_clusters(),
        "membership column and prior matrix disagree on cluster count"
    );
    let c = record_column.len();
    let dominant = argmax_lowest(record_column);
    let mut sum = 0.0;
    for (k, &u_k) in record_column.iter().enumerate() {
        let s_k = if k == dominant { u_k } else { 1.0 - u_k };
        sum += s_k * p.get(dominant, k);
    }
    sum / c as f64
}

/// Scores every record and splits them by the threshold: `certainty <
/// threshold` (strictly) is ambiguous, anything else keeps its dominant
/// cluster. The prior matrix must come from a run with the same cluster count.
pub fn classify(
    u: &MembershipMatrix,
    p: &PMatrix,
    threshold: CertaintyThreshold,
) -> Result<OutcomeSet> {
    if u.n_clusters() != p.n_clusters() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} clusters in prior matrix", u.n_clusters()),
            found: format!("{}", p.n_clusters()),
        });
    }
    let t = threshold.value();
    let outcomes = (0..u.n_records())
        .map(|k| {
            let column = u.column(k);
            let dominant = argmax_lowest(&column);
            let certainty = certainty_factor(&column, p);
            let status = if certainty < t {
                Status::Ambiguous
            } else {
                Status::Assigned(dominant)
            };
            RecordOutcome {
                record_index: k,
                dominant_cluster: dominant,
                certainty,
                status,
            }
        })
        .collect();
    Ok(OutcomeSet {
        outcomes,
        threshold: t,
    })
}

/// Extracts the ambiguous records with their annotations, preserving original
/// order, indices, feature values, and labels.
pub fn export_ambiguous(outcomes: &OutcomeSet, dataset: &Dataset) -> Result<AmbiguousExport> {
    if outcomes.len() != dataset.n_records() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} outcomes", dataset.n_records()),
            found: format!("{}", outcomes.len()),
        });
    }
    let picked: Vec<&RecordOutcome> = outcomes
        .outcomes
        .iter()
        .filter(|o| o.status.is_ambiguous())
        .collect();
    let records = picked
        .iter()
        .map(|o| dataset.record(o.record_index).to_vec())
        .collect();
    let labels = dataset.labels().map(|ls| {
        picked
            .iter()
            .map(|o| ls[o.record_index].clone())
            .collect()
    });
    Ok(AmbiguousExport {
        records,
        feature_names: dataset.feature_names().to_vec(),
        labels,
        outcomes: picked.into_iter().cloned().collect(),
    })
}
