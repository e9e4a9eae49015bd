//! Fuzzy c-means clustering with ambiguity detection.
//!
//! The toolkit fits soft clusterings ([`fcm`]), scores every record with a
//! certainty factor derived from cluster-average memberships ([`ambiguity`]),
//! and withholds low-certainty records instead of forcing an assignment.
//! Around that core sit entropy-based feature selection ([`feature_select`]),
//! evaluation and experiment harnesses ([`eval`]), tabular/image/synthetic
//! ingestion ([`ingest`]), and stable serialized reports ([`report`]).
//!
//! ```
//! use softclust::{
//!     certainty_factor, classify, compute_p_matrix, run_fcm, CertaintyThreshold, FcmConfig,
//! };
//!
//! let (data, _centers) =
//!     softclust::make_blobs(2, 50, 0.05, &[(0.0, 1.0), (0.0, 1.0)], 7).unwrap();
//! let model = run_fcm(&data, &FcmConfig::new(2)).unwrap();
//! let p = compute_p_matrix(&model.memberships);
//! let outcomes = classify(
//!     &model.memberships,
//!     &p,
//!     CertaintyThreshold::new(0.4).unwrap(),
//! )
//! .unwrap();
//! assert_eq!(outcomes.len(), 100);
//! let cf = certainty_factor(&model.memberships.column(0), &p);
//! assert!((0.0..=1.0).contains(&cf));
//! ```

// Index loops mirror the subscripted update formulas, and validation uses
// negated comparisons (`!(m > 1.0)`) so NaN inputs fail closed.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod ambiguity;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod fcm;
pub mod feature_select;
pub mod ingest;
pub mod report;

pub use ambiguity::{
    certainty_factor, classify, compute_p_matrix, export_ambiguous, AmbiguousExport,
    CertaintyThreshold, OutcomeSet, PMatrix, RecordOutcome, Status,
};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use eval::{
    accuracy, add_noise_queries, center_error, g_mean, map_clusters_to_labels,
    privacy_experiment, privacy_repeats, sweep, undersample_class, ClusterLabelMap, GMean,
    NoisyDataset, PrivacyAggregate, PrivacyReport, PrivacyRow, SweepRow, ThresholdStats,
};
pub use fcm::{
    init_centroids, objective, run_fcm, update_centroids, update_memberships, FcmConfig,
    FcmModel, MembershipMatrix,
};
pub use feature_select::{
    bias_coefficient, conditional_ru, discretize, entropy, relative_uncertainty,
    select_features, symmetric_uncertainty, DiscreteColumn, FeatureScore, SelectionReport,
};
pub use ingest::{
    image_to_dataset, load_csv, load_pgm, make_blobs, make_diabetes_like, render_segmentation,
    write_csv, write_pgm, CsvSchema, GrayImage, LabelColumn,
};
pub use report::{
    cluster_summary, features_csv, features_json, outcomes_csv, parse_threshold_list,
    privacy_json, segment_summary, sweep_csv, sweep_json, to_json, ClusterSummary,
    FeatureDocument, PrivacyDocument, SegmentSummary, SweepDocument, SCHEMA_VERSION,
};
