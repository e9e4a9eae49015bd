//! Stable serialized forms of the toolkit's outputs. All JSON documents carry
//! a `schema_version` field; all floating-point values print in shortest
//! round-trip form, so a fixed input yields byte-identical reports.

use serde::Serialize;

use crate::ambiguity::OutcomeSet;
use crate::error::Result;
use crate::eval::{PrivacyAggregate, SweepRow};
use crate::fcm::FcmModel;
use crate::feature_select::SelectionReport;

pub const SCHEMA_VERSION: u32 = 1;

fn finish_csv(writer: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(writer.into_inner().expect("in-memory flush cannot fail"))
        .expect("report CSV is UTF-8")
}

/// Per-record outcomes as CSV with columns
/// `record_index,dominant_cluster,certainty,status`.
pub fn outcomes_csv(outcomes: &OutcomeSet) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(["record_index", "dominant_cluster", "certainty", "status"])
        .expect("in-memory write cannot fail");
    for o in &outcomes.outcomes {
        w.write_record([
            o.record_index.to_string(),
            o.dominant_cluster.to_string(),
            format!("{}", o.certainty),
            o.status.label().to_string(),
        ])
        .expect("in-memory write cannot fail");
    }
    finish_csv(w)
}

/// Headline numbers for one clustering run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSummary {
    pub schema_version: u32,
    pub threshold: f64,
    pub n: usize,
    pub n_assigned: usize,
    pub nar: usize,
    pub par: f64,
    pub iterations_run: usize,
    pub converged: bool,
    pub objective: f64,
    pub centroids: Vec<Vec<f64>>,
}

pub fn cluster_summary(outcomes: &OutcomeSet, model: &FcmModel) -> ClusterSummary {
    let n = outcomes.len();
    let nar = outcomes.n_ambiguous();
    ClusterSummary {
        schema_version: SCHEMA_VERSION,
        threshold: outcomes.threshold,
        n,
        n_assigned: n - nar,
        nar,
        par: 100.0 * nar as f64 / n as f64,
        iterations_run: model.iterations_run,
        converged: model.converged,
        objective: *model
            .objective_trace
            .last()
            .expect("trace holds at least the initial objective"),
        centroids: model.centroids.clone(),
    }
}

/// Sweep rows as CSV; an absent accuracy (every record ambiguous) is an
/// empty cell.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record([
        "threshold", "n", "nar", "ntr", "nfr", "nfra", "par", "pbfra", "accuracy",
    ])
    .expect("in-memory write cannot fail");
    for r in rows {
        w.write_record([
            format!("{}", r.threshold),
            r.n.to_string(),
            r.nar.to_string(),
            r.ntr.to_string(),
            r.nfr.to_string(),
            r.nfra.to_string(),
            format!("{}", r.par),
            format!("{}", r.pbfra),
            r.accuracy.map(|a| format!("{a}")).unwrap_or_default(),
        ])
        .expect("in-memory write cannot fail");
    }
    finish_csv(w)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepDocument<'a> {
    pub schema_version: u32,
    pub rows: &'a [SweepRow],
}

pub fn sweep_json(rows: &[SweepRow]) -> String {
    to_json(&SweepDocument {
        schema_version: SCHEMA_VERSION,
        rows,
    })
}

/// Feature scores as CSV: one row per feature, ranked, with per-class
/// conditional-RU and bias columns.
pub fn features_csv(report: &SelectionReport) -> String {
    let mut header = vec!["feature_index".to_string(), "feature_name".to_string(), "su".to_string()];
    for class in &report.classes {
        header.push(format!("ru_{class}"));
        header.push(format!("bias_{class}"));
    }
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(&header).expect("in-memory write cannot fail");
    for s in &report.scores {
        let mut row = vec![
            s.feature_index.to_string(),
            s.feature_name.clone(),
            format!("{}", s.su),
        ];
        for (ru, bias) in s.ru_per_class.iter().zip(&s.bias_per_class) {
            row.push(format!("{ru}"));
            row.push(format!("{bias}"));
        }
        w.write_record(&row).expect("in-memory write cannot fail");
    }
    finish_csv(w)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureDocument<'a> {
    pub schema_version: u32,
    pub classes: &'a [String],
    pub scores: &'a [crate::feature_select::FeatureScore],
}

pub fn features_json(report: &SelectionReport) -> String {
    to_json(&FeatureDocument {
        schema_version: SCHEMA_VERSION,
        classes: &report.classes,
        scores: &report.scores,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrivacyDocument<'a> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub aggregate: &'a PrivacyAggregate,
}

pub fn privacy_json(aggregate: &PrivacyAggregate) -> String {
    to_json(&PrivacyDocument {
        schema_version: SCHEMA_VERSION,
        aggregate,
    })
}

/// Headline numbers for one segmentation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentSummary {
    pub schema_version: u32,
    pub threshold: f64,
    pub width: usize,
    pub height: usize,
    pub n: usize,
    pub nar: usize,
    pub par: f64,
}

pub fn segment_summary(outcomes: &OutcomeSet, width: usize, height: usize) -> SegmentSummary {
    let n = outcomes.len();
    let nar = outcomes.n_ambiguous();
    SegmentSummary {
        schema_version: SCHEMA_VERSION,
        threshold: outcomes.threshold,
        width,
        height,
        n,
        nar,
        par: 100.0 * nar as f64 / n as f64,
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize infallibly");
    s.push('\n');
    s
}

/// Parses a `--thresholds` style comma-separated list.
pub fn parse_threshold_list(raw: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for part in raw.split(',') {
        let t: f64 = part.trim().parse().map_err(|_| crate::error::Error::InvalidConfig(
            format!("invalid threshold {part:?}"),
        ))?;
        out.push(t);
    }
    Ok(out)
}
