use std::fs;
use std::path::Path;
use std::process::Output;

use softclust::{
    classify, compute_p_matrix, load_csv, load_pgm, outcomes_csv, run_fcm, write_pgm,
    CertaintyThreshold, CsvSchema, FcmConfig, GrayImage, LabelColumn,
};

fn softclust_bin(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_softclust"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_code(output: &Output, want: i32) {
    assert_eq!(
        output.status.code(),
        Some(want),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

const TWO_BLOBS: &str = "\
x0,x1,label
0.05,0.10,a
0.10,0.05,a
0.12,0.12,a
0.08,0.15,a
0.90,0.85,b
0.85,0.95,b
0.88,0.90,b
0.93,0.88,b
";

fn write_fixture(dir: &Path) -> String {
    let path = dir.join("blobs.csv");
    fs::write(&path, TWO_BLOBS).unwrap();
    path.to_str().unwrap().to_string()
}

fn json_file(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn cluster_matches_library_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_fixture(tmp.path());
    let out = tmp.path().join("run");
    let result = softclust_bin(&[
        "cluster",
        "--input",
        &input,
        "--label-column",
        "label",
        "--clusters",
        "2",
        "--threshold",
        "0.4",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_code(&result, 0);

    let schema = CsvSchema {
        has_header: true,
        label_column: Some(LabelColumn::Name("label".to_string())),
        delimiter: b',',
    };
    let data = load_csv(Path::new(&input), &schema, true).unwrap();
    let model = run_fcm(&data, &FcmConfig::new(2)).unwrap();
    let p = compute_p_matrix(&model.memberships);
    let outcomes = classify(&model.memberships, &p, CertaintyThreshold::new(0.4).unwrap()).unwrap();

    let written = fs::read_to_string(out.join("outcomes.csv")).unwrap();
    assert_eq!(written, outcomes_csv(&outcomes));
    assert!(written.starts_with("record_index,dominant_cluster,certainty,status\n"));

    let summary = json_file(&out.join("summary.json"));
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["n"], 8);
    assert_eq!(summary["threshold"], 0.4);
    assert_eq!(
        summary["nar"].as_u64().unwrap() as usize,
        outcomes.n_ambiguous()
    );
}

#[test]
fn cluster_threshold_zero_reports_no_ambiguity() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_fixture(tmp.path());
    let out = tmp.path().join("run");
    let result = softclust_bin(&[
        "cluster",
        "--input",
        &input,
        "--label-column",
        "label",
        "--clusters",
        "2",
        "--threshold",
        "0",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_code(&result, 0);
    let summary = json_file(&out.join("summary.json"));
    assert_eq!(summary["nar"], 0);
    let outcomes = fs::read_to_string(out.join("outcomes.csv")).unwrap();
    assert!(!outcomes.contains("ambiguous"));
}

#[test]
fn reruns_emit_byte_identical_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_fixture(tmp.path());
    let cases: [(&[&str], &[&str]); 2] = [
        (
            &["cluster", "--clusters", "2", "--threshold", "0.4"],
            &["outcomes.csv", "summary.json"],
        ),
        (
            &["sweep", "--clusters", "2", "--thresholds", "0,0.4", "--format", "json"],
            &["sweep.json"],
        ),
    ];
    for (cmd, files) in cases {
        let out_a = tmp.path().join(format!("{}_a", cmd[0]));
        let out_b = tmp.path().join(format!("{}_b", cmd[0]));
        for out in [&out_a, &out_b] {
            let mut args: Vec<&str> = cmd.to_vec();
            args.extend(["--input", &input, "--label-column", "label"]);
            args.extend(["--output", out.to_str().unwrap()]);
            assert_code(&softclust_bin(&args), 0);
        }
        for file in files {
            assert_eq!(
                fs::read(out_a.join(file)).unwrap(),
                fs::read(out_b.join(file)).unwrap(),
                "{file} differs between reruns"
            );
        }
    }
}

#[test]
fn sweep_single_threshold_agrees_with_cluster_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_fixture(tmp.path());
    let cluster_out = tmp.path().join("cluster");
    let sweep_out = tmp.path().join("sweep");
    assert_code(
        &softclust_bin(&[
            "cluster", "--input", &input, "--label-column", "label", "--clusters", "2",
            "--threshold", "0.4", "--output", cluster_out.to_str().unwrap(),
        ]),
        0,
    );
    assert_code(
        &softclust_bin(&[
            "sweep", "--input", &input, "--label-column", "label", "--clusters", "2",
            "--thresholds", "0.4", "--format", "json", "--output", sweep_out.to_str().unwrap(),
        ]),
        0,
    );
    let summary = json_file(&cluster_out.join("summary.json"));
    let doc = json_file(&sweep_out.join("sweep.json"));
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["threshold"], 0.4);
    assert_eq!(rows[0]["n"], summary["n"]);
    assert_eq!(rows[0]["nar"], summary["nar"]);
}

#[test]
fn sweep_csv_has_contract_header() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_fixture(tmp.path());
    let out = tmp.path().join("run");
    assert_code(
        &softclust_bin(&[
            "sweep", "--input", &input, "--label-column", "label", "--clusters", "2",
            "--thresholds", "0,0.2,0.4", "--output", out.to_str().unwrap(),
        ]),
        0,
    );
    let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(text.starts_with("threshold,n,nar,ntr,nfr,nfra,par,pbfra,accuracy\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn sweep_without_labels_is_a_data_error_with_hint() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("unlabeled.csv");
    fs::write(&path, "x0,x1\n0.1,0.2\n0.3,0.4\n0.5,0.6\n").unwrap();
    let out = tmp.path().join("run");
    let result = softclust_bin(&[
        "sweep",
        "--input",
        path.to_str().unwrap(),
        "--clusters",
        "2",
        "--thresholds",
        "0.4",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_code(&result, 3);
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("--label-column"), "stderr: {stderr}");
    assert!(!out.exists(), "failed run must not leave outputs");
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_fixture(tmp.path());
    let out = tmp.path().join("run");
    let out_s = out.to_str().unwrap();

    let unknown_flag = softclust_bin(&["cluster", "--input", &input, "--bogus"]);
    assert_code(&unknown_flag, 2);

    let bad_fuzzifier = softclust_bin(&[
        "cluster", "--input", &input, "--label-column", "label", "--clusters", "2",
        "--fuzzifier", "1.0", "--output", out_s,
    ]);
    assert_code(&bad_fuzzifier, 2);

    let bad_threshold = softclust_bin(&[
        "cluster", "--input", &input, "--label-column", "label", "--clusters", "2",
        "--threshold", "1.5", "--output", out_s,
    ]);
    assert_code(&bad_threshold, 2);

    let unsorted = softclust_bin(&[
        "sweep", "--input", &input, "--label-column", "label", "--clusters", "2",
        "--thresholds", "0.5,0.4", "--output", out_s,
    ]);
    assert_code(&unsorted, 2);
    assert!(!out.exists());
}

#[test]
fn data_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_fixture(tmp.path());
    let out = tmp.path().join("run");
    let out_s = out.to_str().unwrap();

    let missing = softclust_bin(&[
        "cluster", "--input", "/nonexistent/x.csv", "--clusters", "2", "--output", out_s,
    ]);
    assert_code(&missing, 3);

    let too_many_clusters = softclust_bin(&[
        "cluster", "--input", &input, "--label-column", "label", "--clusters", "99",
        "--output", out_s,
    ]);
    assert_code(&too_many_clusters, 3);

    let bad_cell = tmp.path().join("bad.csv");
    fs::write(&bad_cell, "x0,x1\n0.1,0.2\n0.3,oops\n").unwrap();
    let unparseable = softclust_bin(&[
        "cluster", "--input", bad_cell.to_str().unwrap(), "--clusters", "2", "--output", out_s,
    ]);
    assert_code(&unparseable, 3);
    assert!(!out.exists());
}

fn two_tone_image() -> GrayImage {
    let (w, h) = (16usize, 8usize);
    let mut pixels = Vec::with_capacity(w * h);
    for _y in 0..h {
        for x in 0..w {
            pixels.push(if x < 8 { 60 } else { 200 });
        }
    }
    GrayImage::new(w, h, pixels).unwrap()
}

#[test]
fn segment_writes_quantized_pgm_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("tones.pgm");
    write_pgm(&two_tone_image(), &input).unwrap();
    let out = tmp.path().join("run");
    assert_code(
        &softclust_bin(&[
            "segment", "--input", input.to_str().unwrap(), "--clusters", "2",
            "--threshold", "0", "--output", out.to_str().unwrap(),
        ]),
        0,
    );
    let seg = load_pgm(&out.join("segmented.pgm")).unwrap();
    assert_eq!((seg.width(), seg.height()), (16, 8));
    let mut tones: Vec<u8> = seg.pixels().to_vec();
    tones.sort_unstable();
    tones.dedup();
    assert_eq!(tones.len(), 2, "plain segmentation quantizes to two tones");
    assert!(!tones.contains(&0), "threshold 0 leaves no ambiguous black");
    let summary = json_file(&out.join("summary.json"));
    assert_eq!(summary["nar"], 0);
    assert_eq!(summary["n"], 128);
}

#[test]
fn segment_threshold_series_grows_black_monotonically() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("tones.pgm");
    write_pgm(&two_tone_image(), &input).unwrap();
    let out = tmp.path().join("run");
    assert_code(
        &softclust_bin(&[
            "segment", "--input", input.to_str().unwrap(), "--clusters", "2",
            "--thresholds", "0,0.5,0.8", "--output", out.to_str().unwrap(),
        ]),
        0,
    );
    let mut blacks = Vec::new();
    for name in ["segmented_t0.pgm", "segmented_t0.5.pgm", "segmented_t0.8.pgm"] {
        let seg = load_pgm(&out.join(name)).unwrap();
        blacks.push(seg.pixels().iter().filter(|&&v| v == 0).count());
    }
    assert!(blacks.windows(2).all(|w| w[0] <= w[1]), "blacks: {blacks:?}");
    let summary = json_file(&out.join("summary.json"));
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn select_features_ranks_label_copy_first() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("feat.csv");
    fs::write(
        &path,
        "copy,flat,label\n0,5,a\n0,5,a\n0,5,a\n1,5,b\n1,5,b\n1,5,b\n",
    )
    .unwrap();
    let out = tmp.path().join("run");
    assert_code(
        &softclust_bin(&[
            "select-features", "--input", path.to_str().unwrap(), "--label-column", "label",
            "--bins", "2", "--output", out.to_str().unwrap(),
        ]),
        0,
    );
    let text = fs::read_to_string(out.join("features.csv")).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("feature_index,feature_name,su,"));
    let first = lines.next().unwrap();
    assert!(first.starts_with("0,copy,1"), "first: {first}");
    let second = lines.next().unwrap();
    assert!(second.starts_with("1,flat,0"), "second: {second}");
}

#[test]
fn privacy_default_blobs_produce_full_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    assert_code(
        &softclust_bin(&[
            "privacy", "--clusters", "3", "--thresholds", "0.4", "--seed", "1",
            "--output", out.to_str().unwrap(),
        ]),
        0,
    );
    let doc = json_file(&out.join("privacy.json"));
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["repeats"], 10);
    assert_eq!(doc["noise_fraction"], 0.3);
    assert_eq!(doc["plain_errors"].as_array().unwrap().len(), 10);
    let stats = &doc["thresholds"][0];
    assert_eq!(stats["threshold"], 0.4);
    assert_eq!(stats["errors"].as_array().unwrap().len(), 10);
}

#[test]
fn help_covers_subcommands_and_flags() {
    let top = softclust_bin(&["--help"]);
    assert_code(&top, 0);
    let text = String::from_utf8_lossy(&top.stdout);
    for sub in ["cluster", "sweep", "segment", "select-features", "privacy"] {
        assert!(text.contains(sub), "missing {sub} in top-level help");
    }
    let cluster = softclust_bin(&["cluster", "--help"]);
    let text = String::from_utf8_lossy(&cluster.stdout);
    for flag in [
        "--input", "--output", "--clusters", "--fuzzifier", "--threshold", "--max-iter",
        "--tol", "--seed", "--label-column", "--no-normalize",
    ] {
        assert!(text.contains(flag), "missing {flag} in cluster help");
    }
}
