//! Batch front end for the softclust pipeline: fit, classify, sweep, segment,
//! rank features, and run the noisy-query privacy experiment.
//!
//! Every command reads its inputs, computes the full result in memory, then
//! writes each artifact through a temp-file rename so a failure never leaves a
//! partial output behind. For a fixed flag set (seed included) the emitted
//! bytes are identical across runs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use softclust::{
    classify, cluster_summary, compute_p_matrix, features_csv, features_json, image_to_dataset,
    load_csv, load_pgm, make_blobs, outcomes_csv, parse_threshold_list, privacy_json,
    privacy_repeats, render_segmentation, run_fcm, segment_summary, select_features, sweep,
    sweep_csv, sweep_json, to_json, write_pgm, CertaintyThreshold, CsvSchema, Dataset, Error,
    FcmConfig, GrayImage, LabelColumn, SCHEMA_VERSION,
};

/// Noise volume added by the privacy experiment, as a fraction of the clean
/// record count.
const PRIVACY_NOISE_FRACTION: f64 = 0.30;
/// Seeded repetitions aggregated by the privacy experiment.
const PRIVACY_REPEATS: usize = 10;

#[derive(Parser)]
#[command(
    name = "softclust",
    version,
    about = "Fuzzy c-means clustering with certainty-based ambiguity detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit FCM on a CSV, classify records by certainty, write outcomes + summary
    Cluster(ClusterArgs),
    /// Fit once, then evaluate a list of certainty thresholds against labels
    Sweep(SweepArgs),
    /// Segment a grayscale PGM image; ambiguous pixels render as pure black
    Segment(SegmentArgs),
    /// Rank features by symmetric uncertainty with per-class uncertainty and bias
    SelectFeatures(SelectFeaturesArgs),
    /// Compare plain and ambiguity-filtered center recovery under uniform noise
    Privacy(PrivacyArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Number of clusters
    #[arg(long)]
    clusters: usize,
    /// Fuzzifier exponent m (must exceed 1)
    #[arg(long, default_value_t = 2.0)]
    fuzzifier: f64,
    /// Iteration cap for the alternating optimization
    #[arg(long, default_value_t = 300)]
    max_iter: usize,
    /// Relative objective-change convergence tolerance
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// RNG seed; the privacy command derives its repeat seeds from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl FitArgs {
    fn config(&self) -> FcmConfig {
        FcmConfig {
            c: self.clusters,
            m: self.fuzzifier,
            max_iter: self.max_iter,
            tol: self.tol,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct TabularArgs {
    /// Input CSV path (header row expected)
    #[arg(long)]
    input: PathBuf,
    /// Label column, by header name or zero-based index
    #[arg(long)]
    label_column: Option<String>,
    /// Keep raw feature scales instead of min-max normalizing to [0, 1]
    #[arg(long)]
    no_normalize: bool,
}

impl TabularArgs {
    fn load(&self) -> softclust::Result<Dataset> {
        let schema = CsvSchema {
            has_header: true,
            label_column: parse_label_column(self.label_column.as_deref()),
            delimiter: b',',
        };
        load_csv(&self.input, &schema, !self.no_normalize)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    tabular: TabularArgs,
    #[command(flatten)]
    fit: FitArgs,
    /// Certainty threshold below which a record is ambiguous
    #[arg(long, default_value_t = 0.4)]
    threshold: f64,
    /// Output directory
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    tabular: TabularArgs,
    #[command(flatten)]
    fit: FitArgs,
    /// Ascending comma-separated certainty thresholds, e.g. 0,0.2,0.4
    #[arg(long)]
    thresholds: String,
    /// Output directory
    #[arg(long)]
    output: PathBuf,
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct SegmentArgs {
    /// Input PGM image (P2 or P5, maxval 255)
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    fit: FitArgs,
    /// Certainty threshold below which a pixel renders black
    #[arg(long, default_value_t = 0.4, conflicts_with = "thresholds")]
    threshold: f64,
    /// Optional comma-separated threshold list; writes one image per threshold
    #[arg(long)]
    thresholds: Option<String>,
    /// Output directory
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct SelectFeaturesArgs {
    #[command(flatten)]
    tabular: TabularArgs,
    /// Equal-frequency bin target per feature
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// Output directory
    #[arg(long)]
    output: PathBuf,
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct PrivacyArgs {
    /// Optional clean input CSV; defaults to a built-in synthetic blob set
    #[arg(long)]
    input: Option<PathBuf>,
    /// Label column, by header name or zero-based index
    #[arg(long)]
    label_column: Option<String>,
    /// Keep raw feature scales instead of min-max normalizing to [0, 1]
    #[arg(long)]
    no_normalize: bool,
    #[command(flatten)]
    fit: FitArgs,
    /// Ascending comma-separated certainty thresholds
    #[arg(long, default_value = "0.4,0.5,0.6")]
    thresholds: String,
    /// Output directory
    #[arg(long)]
    output: PathBuf,
}

/// A numeric `--label-column` value selects by position, anything else by
/// header name.
fn parse_label_column(raw: Option<&str>) -> Option<LabelColumn> {
    raw.map(|s| match s.parse::<usize>() {
        Ok(idx) => LabelColumn::Index(idx),
        Err(_) => LabelColumn::Name(s.to_string()),
    })
}

enum Payload {
    Text(String),
    Image(GrayImage),
}

/// Stages every artifact under a dot-prefixed temp name, then renames them all
/// into place, so an interrupted command never leaves a partial file under a
/// final name.
fn write_artifacts(dir: &Path, artifacts: &[(String, Payload)]) -> softclust::Result<()> {
    fs::create_dir_all(dir)?;
    let mut staged = Vec::with_capacity(artifacts.len());
    for (name, payload) in artifacts {
        let tmp = dir.join(format!(".{name}.tmp"));
        match payload {
            Payload::Text(text) => fs::write(&tmp, text)?,
            Payload::Image(img) => write_pgm(img, &tmp)?,
        }
        staged.push((tmp, dir.join(name)));
    }
    for (tmp, final_path) in staged {
        fs::rename(tmp, final_path)?;
    }
    Ok(())
}

fn cmd_cluster(args: &ClusterArgs) -> softclust::Result<()> {
    let data = args.tabular.load()?;
    let model = run_fcm(&data, &args.fit.config())?;
    let p = compute_p_matrix(&model.memberships);
    let outcomes = classify(&model.memberships, &p, CertaintyThreshold::new(args.threshold)?)?;
    let artifacts = vec![
        (
            "outcomes.csv".to_string(),
            Payload::Text(outcomes_csv(&outcomes)),
        ),
        (
            "summary.json".to_string(),
            Payload::Text(to_json(&cluster_summary(&outcomes, &model))),
        ),
    ];
    write_artifacts(&args.output, &artifacts)
}

fn cmd_sweep(args: &SweepArgs) -> softclust::Result<()> {
    let data = args.tabular.load()?;
    let labels = data.labels().ok_or(Error::LabelsRequired)?.to_vec();
    let thresholds = parse_threshold_list(&args.thresholds)?;
    let model = run_fcm(&data, &args.fit.config())?;
    let rows = sweep(&model, &labels, &thresholds)?;
    let (name, text) = match args.format {
        Format::Csv => ("sweep.csv", sweep_csv(&rows)),
        Format::Json => ("sweep.json", sweep_json(&rows)),
    };
    write_artifacts(&args.output, &[(name.to_string(), Payload::Text(text))])
}

fn cmd_segment(args: &SegmentArgs) -> softclust::Result<()> {
    let image = load_pgm(&args.input)?;
    let data = image_to_dataset(&image);
    let model = run_fcm(&data, &args.fit.config())?;
    let p = compute_p_matrix(&model.memberships);
    let mut artifacts = Vec::new();
    match &args.thresholds {
        None => {
            let outcomes =
                classify(&model.memberships, &p, CertaintyThreshold::new(args.threshold)?)?;
            let seg = render_segmentation(&image, &outcomes, &model.centroids)?;
            let summary = segment_summary(&outcomes, image.width(), image.height());
            artifacts.push(("segmented.pgm".to_string(), Payload::Image(seg)));
            artifacts.push(("summary.json".to_string(), Payload::Text(to_json(&summary))));
        }
        Some(raw) => {
            let mut summaries = Vec::new();
            for t in parse_threshold_list(raw)? {
                let outcomes = classify(&model.memberships, &p, CertaintyThreshold::new(t)?)?;
                let seg = render_segmentation(&image, &outcomes, &model.centroids)?;
                artifacts.push((format!("segmented_t{t}.pgm"), Payload::Image(seg)));
                summaries.push(segment_summary(&outcomes, image.width(), image.height()));
            }
            let doc = serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "rows": summaries,
            });
            artifacts.push(("summary.json".to_string(), Payload::Text(to_json(&doc))));
        }
    }
    write_artifacts(&args.output, &artifacts)
}

fn cmd_select_features(args: &SelectFeaturesArgs) -> softclust::Result<()> {
    let data = args.tabular.load()?;
    let report = select_features(&data, args.bins, data.n_features())?;
    let (name, text) = match args.format {
        Format::Csv => ("features.csv", features_csv(&report)),
        Format::Json => ("features.json", features_json(&report)),
    };
    write_artifacts(&args.output, &[(name.to_string(), Payload::Text(text))])
}

fn cmd_privacy(args: &PrivacyArgs) -> softclust::Result<()> {
    let clean = match &args.input {
        Some(path) => {
            let schema = CsvSchema {
                has_header: true,
                label_column: parse_label_column(args.label_column.as_deref()),
                delimiter: b',',
            };
            load_csv(path, &schema, !args.no_normalize)?
        }
        None => default_privacy_blobs(args.fit.clusters, args.fit.seed)?,
    };
    let thresholds = parse_threshold_list(&args.thresholds)?;
    let aggregate = privacy_repeats(
        &clean,
        PRIVACY_NOISE_FRACTION,
        &args.fit.config(),
        &thresholds,
        PRIVACY_REPEATS,
    )?;
    write_artifacts(
        &args.output,
        &[("privacy.json".to_string(), Payload::Text(privacy_json(&aggregate)))],
    )
}

/// Built-in clean set for `privacy` when no CSV is given: seeded 2-D blobs,
/// one per requested cluster.
fn default_privacy_blobs(c: usize, seed: u64) -> softclust::Result<Dataset> {
    let (data, _centers) = make_blobs(c, 160, 0.05, &[(0.1, 0.9), (0.1, 0.9)], seed)?;
    Ok(data)
}

/// 2 = usage error, 3 = data error, 4 = numeric failure.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_) => 2,
        Error::EmptyCluster { .. } | Error::NoDecidedRecords | Error::DegenerateGMean => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Cluster(args) => cmd_cluster(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Segment(args) => cmd_segment(args),
        Command::SelectFeatures(args) => cmd_select_features(args),
        Command::Privacy(args) => cmd_privacy(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if matches!(err, Error::LabelsRequired) {
                eprintln!("hint: pass --label-column to identify the class column");
            }
            ExitCode::from(exit_code(&err))
        }
    }
}
