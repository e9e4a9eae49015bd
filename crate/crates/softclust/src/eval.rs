use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ambiguity::{classify, compute_p_matrix, CertaintyThreshold, OutcomeSet};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fcm::{run_fcm, FcmConfig, FcmModel};

/// Assigns each cluster index the class label it most plausibly represents.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterLabelMap {
    mapping: Vec<String>,
}

impl ClusterLabelMap {
    pub fn label_of(&self, cluster: usize) -> &str {
        &self.mapping[cluster]
    }

    pub fn mapping(&self) -> &[String] {
        &self.mapping
    }
}

/// One threshold's worth of sweep bookkeeping. `nar + ntr + nfr = n` always;
/// `accuracy` is absent when every record is ambiguous.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub n: usize,
    pub nar: usize,
    pub ntr: usize,
    pub nfr: usize,
    pub nfra: usize,
    pub par: f64,
    pub pbfra: f64,
    pub accuracy: Option<f64>,
}

/// Geometric mean of per-class recalls over decided records. Classes with no
/// decided records are excluded and reported.
#[derive(Debug, Clone, PartialEq)]
pub struct GMean {
    pub value: f64,
    pub excluded_classes: Vec<String>,
}

/// A dataset extended with synthetic noise records, with a per-record origin
/// flag (`true` = synthetic) so the originals remain recoverable.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyDataset {
    pub data: Dataset,
    pub synthetic: Vec<bool>,
}

impl NoisyDataset {
    pub fn n_synthetic(&self) -> usize {
        self.synthetic.iter().filter(|&&s| s).count()
    }
}

/// Center recovery at one threshold of the privacy experiment. `center_error`
/// is absent when the decided subset was too thin to refit (`degenerate`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrivacyRow {
    pub threshold: f64,
    pub n_decided: usize,
    pub n_ambiguous: usize,
    pub center_error: Option<f64>,
    pub degenerate: bool,
}

/// Outcome of one noisy-query center-recovery experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrivacyReport {
    pub n_clean: usize,
    pub n_noise: usize,
    pub c: usize,
    /// Center error of a plain fit on the noised data.
    pub plain_error: f64,
    pub rows: Vec<PrivacyRow>,
}

/// Error statistics for one threshold across repeated seeded experiment runs.
/// `errors` holds one entry per run, absent where a run was degenerate; the
/// mean and (population) variance cover the surviving runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdStats {
    pub threshold: f64,
    pub errors: Vec<Option<f64>>,
    pub mean_error: Option<f64>,
    pub variance: Option<f64>,
    pub n_degenerate: usize,
}

/// The privacy experiment repeated over consecutive seeds, with per-threshold
/// error spread.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrivacyAggregate {
    pub c: usize,
    pub noise_fraction: f64,
    pub repeats: usize,
    pub n_clean: usize,
    pub plain_errors: Vec<f64>,
    pub plain_mean: f64,
    pub plain_variance: f64,
    pub thresholds: Vec<ThresholdStats>,
}

fn mean_of(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn variance_of(values: &[f64]) -> f64 {
    let m = mean_of(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64
}

fn global_majority(labels: &[String]) -> String {
    let mut classes: Vec<&String> = labels.iter().collect();
    classes.sort();
    classes.dedup();
    let count = |class: &str| labels.iter().filter(|l| l.as_str() == class).count();
    classes
        .into_iter()
        .max_by_key(|class| (count(class), std::cmp::Reverse((*class).clone())))
        .expect("labels non-empty")
        .clone()
}

/// Majority-vote mapping from cluster index to class label over the decided
/// records. Within-cluster ties go to the globally more frequent class; a
/// cluster with no decided records falls back to the global majority class.
pub fn map_clusters_to_labels(
    outcomes: &OutcomeSet,
    labels: &[String],
    c: usize,
) -> Result<ClusterLabelMap> {
    if labels.len() != outcomes.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} labels", outcomes.len()),
            found: format!("{}", labels.len()),
        });
    }
    if labels.is_empty() {
        return Err(Error::LabelsRequired);
    }
    let fallback = global_majority(labels);
    let global_count =
        |class: &str| labels.iter().filter(|l| l.as_str() == class).count();
    let mut mapping = Vec::with_capacity(c);
    for cluster in 0..c {
        let members: Vec<&String> = outcomes
            .outcomes
            .iter()
            .filter(|o| !o.status.is_ambiguous() && o.dominant_cluster == cluster)
            .map(|o| &labels[o.record_index])
            .collect();
        if members.is_empty() {
            mapping.push(fallback.clone());
            continue;
        }
        let mut classes: Vec<&String> = members.clone();
        classes.sort();
        classes.dedup();
        let best = classes
            .into_iter()
            .max_by_key(|class| {
                let local = members.iter().filter(|l| l == &class).count();
                (local, global_count(class), std::cmp::Reverse((*class).clone()))
            })
            .expect("members non-empty");
        mapping.push(best.clone());
    }
    Ok(ClusterLabelMap { mapping })
}

/// Percent of decided records whose cluster label matched the truth.
pub fn accuracy(n_true: usize, n_false: usize) -> Result<f64> {
    let total = n_true + n_false;
    if total == 0 {
        return Err(Error::NoDecidedRecords);
    }
    Ok(100.0 * n_true as f64 / total as f64)
}

/// Evaluates every threshold against one fitted model. The prior matrix, the
/// memberships, and the cluster→label map (majority vote with nothing
/// withheld) are all computed once and frozen; only the threshold varies.
pub fn sweep(model: &FcmModel, labels: &[String], thresholds: &[f64]) -> Result<Vec<SweepRow>> {
    let u = &model.memberships;
    let n = u.n_records();
    if labels.len() != n {
        return Err(Error::ShapeMismatch {
            expected: format!("{n} labels"),
            found: format!("{}", labels.len()),
        });
    }
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidConfig(
            "thresholds must be sorted ascending".into(),
        ));
    }
    let p = compute_p_matrix(u);
    let all_decided = classify(u, &p, CertaintyThreshold::new(0.0)?)?;
    let map = map_clusters_to_labels(&all_decided, labels, u.n_clusters())?;
    // Per-record truth of the frozen argmax assignment.
    let correct: Vec<bool> = all_decided
        .outcomes
        .iter()
        .map(|o| map.label_of(o.dominant_cluster) == labels[o.record_index])
        .collect();

    let mut rows = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let out = classify(u, &p, CertaintyThreshold::new(t)?)?;
        let mut nar = 0;
        let mut ntr = 0;
        let mut nfr = 0;
        let mut nfra = 0;
        for (o, &ok) in out.outcomes.iter().zip(&correct) {
            if o.status.is_ambiguous() {
                nar += 1;
                if !ok {
                    nfra += 1;
                }
            } else if ok {
                ntr += 1;
            } else {
                nfr += 1;
            }
        }
        rows.push(SweepRow {
            threshold: t,
            n,
            nar,
            ntr,
            nfr,
            nfra,
            par: 100.0 * nar as f64 / n as f64,
            pbfra: if nar == 0 {
                0.0
            } else {
                100.0 * nfra as f64 / nar as f64
            },
            accuracy: accuracy(ntr, nfr).ok(),
        });
    }
    Ok(rows)
}

/// Geometric mean of per-class recalls over decided records. Classes with no
/// decided records are excluded (and listed); fewer than two surviving
/// classes is an error.
pub fn g_mean(outcomes: &OutcomeSet, labels: &[String], map: &ClusterLabelMap) -> Result<GMean> {
    if labels.len() != outcomes.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} labels", outcomes.len()),
            found: format!("{}", labels.len()),
        });
    }
    let mut classes: Vec<&String> = labels.iter().collect();
    classes.sort();
    classes.dedup();

    let mut recalls = Vec::new();
    let mut excluded = Vec::new();
    for class in classes {
        let mut decided = 0usize;
        let mut hit = 0usize;
        for o in &outcomes.outcomes {
            if labels[o.record_index].as_str() != class.as_str() || o.status.is_ambiguous() {
                continue;
            }
            decided += 1;
            if map.label_of(o.dominant_cluster) == class.as_str() {
                hit += 1;
            }
        }
        if decided == 0 {
            excluded.push(class.clone());
        } else {
            recalls.push(hit as f64 / decided as f64);
        }
    }
    if recalls.len() < 2 {
        return Err(Error::DegenerateGMean);
    }
    let product: f64 = recalls.iter().product();
    Ok(GMean {
        value: product.powf(1.0 / recalls.len() as f64),
        excluded_classes: excluded,
    })
}

/// Appends `⌊fraction·N⌋` uniform-random records drawn inside the per-feature
/// `bounds`. Noise records are flagged synthetic and, on labeled data, carry
/// the label `"noise"`. Originals are untouched; deterministic per seed.
pub fn add_noise_queries(
    dataset: &Dataset,
    fraction: f64,
    bounds: &[(f64, f64)],
    seed: u64,
) -> Result<NoisyDataset> {
    if !(fraction >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "noise fraction must be >= 0, got {fraction}"
        )));
    }
    if bounds.len() != dataset.n_features() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} bounds", dataset.n_features()),
            found: format!("{}", bounds.len()),
        });
    }
    for &(lo, hi) in bounds {
        if !(lo <= hi) {
            return Err(Error::InvalidConfig(format!(
                "invalid noise bound ({lo}, {hi})"
            )));
        }
    }
    let n_noise = (fraction * dataset.n_records() as f64).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n_noise);
    for _ in 0..n_noise {
        records.push(
            bounds
                .iter()
                .map(|&(lo, hi)| if hi > lo { rng.random_range(lo..hi) } else { lo })
                .collect::<Vec<f64>>(),
        );
    }
    let mut data = dataset.clone();
    let mut synthetic = vec![false; dataset.n_records()];
    if n_noise > 0 {
        let labels = data
            .labels()
            .is_some()
            .then(|| vec!["noise".to_string(); n_noise]);
        data.append(records, labels)?;
        synthetic.extend(std::iter::repeat_n(true, n_noise));
    }
    Ok(NoisyDataset { data, synthetic })
}

/// Minimum-cost perfect matching on a square cost matrix; returns the column
/// assigned to each row.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        assign[p[j] - 1] = j - 1;
    }
    assign
}

/// Sum of Euclidean distances between the two center sets under the best
/// possible pairing (cluster indices are arbitrary, so centers are matched by
/// minimum total distance first).
pub fn center_error(true_centers: &[Vec<f64>], estimated_centers: &[Vec<f64>]) -> Result<f64> {
    let c = true_centers.len();
    if c == 0 || estimated_centers.len() != c {
        return Err(Error::ShapeMismatch {
            expected: format!("{c} centers"),
            found: format!("{}", estimated_centers.len()),
        });
    }
    let n = true_centers[0].len();
    for row in true_centers.iter().chain(estimated_centers) {
        if row.len() != n {
            return Err(Error::ShapeMismatch {
                expected: format!("{n} features"),
                found: format!("{}", row.len()),
            });
        }
    }
    let cost: Vec<Vec<f64>> = true_centers
        .iter()
        .map(|a| {
            estimated_centers
                .iter()
                .map(|b| {
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect()
        })
        .collect();
    let assign = hungarian(&cost);
    Ok(assign.iter().enumerate().map(|(i, &j)| cost[i][j]).sum())
}

/// Randomly drops records of one class, keeping `⌊keep_fraction·N_class⌋` of
/// them (seeded, order-preserving). Other classes are untouched.
pub fn undersample_class(
    dataset: &Dataset,
    class: &str,
    keep_fraction: f64,
    seed: u64,
) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&keep_fraction) {
        return Err(Error::InvalidConfig(format!(
            "keep fraction must lie in [0, 1], got {keep_fraction}"
        )));
    }
    let labels = dataset.labels().ok_or(Error::LabelsRequired)?;
    let members: Vec<usize> = (0..dataset.n_records())
        .filter(|&k| labels[k] == class)
        .collect();
    if members.is_empty() {
        return Err(Error::UnknownClass(class.to_string()));
    }
    let keep_n = (keep_fraction * members.len() as f64).floor() as usize;
    let mut shuffled = members.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Fisher-Yates so the kept subset is a uniform seeded draw.
    for i in (1..shuffled.len()).rev() {
        let j = rng.random_range(0..=i);
        shuffled.swap(i, j);
    }
    let mut dropped: Vec<bool> = vec![false; dataset.n_records()];
    for &k in &shuffled[keep_n..] {
        dropped[k] = true;
    }
    let kept: Vec<usize> = (0..dataset.n_records()).filter(|&k| !dropped[k]).collect();
    if kept.is_empty() {
        return Err(Error::DegenerateData("undersampling removed every record".into()));
    }
    dataset.subset(&kept)
}

/// The noisy-query center-recovery experiment: reference centers come from a
/// fit on the clean data; the data is then extended with uniform noise inside
/// the clean bounding box; a plain fit and, per threshold, a refit on only the
/// confidently decided records are each scored by [`center_error`] against the
/// reference. Thresholds that leave too few decided records to refit produce a
/// flagged row instead of an error.
pub fn privacy_experiment(
    clean: &Dataset,
    noise_fraction: f64,
    config: &FcmConfig,
    thresholds: &[f64],
) -> Result<PrivacyReport> {
    let reference = run_fcm(clean, config)?;
    let bounds = clean.bounds();
    let noisy = add_noise_queries(clean, noise_fraction, &bounds, config.seed.wrapping_add(1))?;
    let plain = run_fcm(&noisy.data, config)?;
    let plain_error = center_error(&reference.centroids, &plain.centroids)?;

    let p = compute_p_matrix(&plain.memberships);
    let mut rows = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let out = classify(&plain.memberships, &p, CertaintyThreshold::new(t)?)?;
        let decided = out.decided_indices();
        let n_decided = decided.len();
        let n_ambiguous = out.n_ambiguous();
        let refit_error = if n_decided >= config.c {
            noisy
                .data
                .subset(&decided)
                .and_then(|subset| run_fcm(&subset, config))
                .and_then(|m| center_error(&reference.centroids, &m.centroids))
                .ok()
        } else {
            None
        };
        rows.push(PrivacyRow {
            threshold: t,
            n_decided,
            n_ambiguous,
            degenerate: refit_error.is_none(),
            center_error: refit_error,
        });
    }
    Ok(PrivacyReport {
        n_clean: clean.n_records(),
        n_noise: noisy.n_synthetic(),
        c: config.c,
        plain_error,
        rows,
    })
}

/// Runs [`privacy_experiment`] `repeats` times with consecutive seeds
/// (`config.seed`, `config.seed + 1`, …) and aggregates per-threshold error
/// means and variances. Degenerate rows are dropped from the statistics but
/// counted.
pub fn privacy_repeats(
    clean: &Dataset,
    noise_fraction: f64,
    config: &FcmConfig,
    thresholds: &[f64],
    repeats: usize,
) -> Result<PrivacyAggregate> {
    if repeats < 1 {
        return Err(Error::InvalidConfig("need at least one repeat".into()));
    }
    let mut plain_errors = Vec::with_capacity(repeats);
    let mut per_threshold: Vec<Vec<Option<f64>>> = vec![Vec::with_capacity(repeats); thresholds.len()];
    let mut n_clean = 0;
    for r in 0..repeats {
        let run_config = FcmConfig {
            seed: config.seed.wrapping_add(r as u64),
            ..config.clone()
        };
        let report = privacy_experiment(clean, noise_fraction, &run_config, thresholds)?;
        n_clean = report.n_clean;
        plain_errors.push(report.plain_error);
        for (slot, row) in per_threshold.iter_mut().zip(&report.rows) {
            slot.push(row.center_error);
        }
    }
    let thresholds = thresholds
        .iter()
        .zip(per_threshold)
        .map(|(&threshold, errors)| {
            let present: Vec<f64> = errors.iter().flatten().copied().collect();
            ThresholdStats {
                threshold,
                n_degenerate: errors.len() - present.len(),
                mean_error: (!present.is_empty()).then(|| mean_of(&present)),
                variance: (present.len() >= 2).then(|| variance_of(&present)),
                errors,
            }
        })
        .collect();
    Ok(PrivacyAggregate {
        c: config.c,
        noise_fraction,
        repeats,
        n_clean,
        plain_mean: mean_of(&plain_errors),
        plain_variance: variance_of(&plain_errors),
        plain_errors,
        thresholds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::{RecordOutcome, Status};
    use crate::fcm::MembershipMatrix;
    use proptest::prelude::*;

    fn outcome(idx: usize, cluster: usize, ambiguous: bool) -> RecordOutcome {
        RecordOutcome {
            record_index: idx,
            dominant_cluster: cluster,
            certainty: 0.5,
            status: if ambiguous {
                Status::Ambiguous
            } else {
                Status::Assigned(cluster)
            },
        }
    }

    fn outcome_set(specs: &[(usize, bool)]) -> OutcomeSet {
        OutcomeSet {
            outcomes: specs
                .iter()
                .enumerate()
                .map(|(idx, &(cluster, ambiguous))| outcome(idx, cluster, ambiguous))
                .collect(),
            threshold: 0.5,
        }
    }

    fn strings(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn map_pure_clusters() {
        let out = outcome_set(&[(0, false), (0, false), (1, false), (1, false)]);
        let map = map_clusters_to_labels(&out, &strings(&["a", "a", "b", "b"]), 2).unwrap();
        assert_eq!(map.mapping(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn map_majority_and_fallback() {
        // Cluster 0 splits 3/2 for "a"; cluster 1 has only ambiguous records
        // and falls back to the global majority ("a", 5 vs 4).
        let out = outcome_set(&[
            (0, false),
            (0, false),
            (0, false),
            (0, false),
            (0, false),
            (1, true),
            (1, true),
            (1, true),
            (1, true),
        ]);
        let labels = strings(&["a", "a", "a", "b", "b", "a", "a", "b", "b"]);
        let map = map_clusters_to_labels(&out, &labels, 2).unwrap();
        assert_eq!(map.label_of(0), "a");
        assert_eq!(map.label_of(1), "a");
    }

    #[test]
    fn map_tie_goes_to_globally_frequent_class() {
        // Cluster 1 ties 1/1 between "a" and "b"; "b" is globally more frequent.
        let out = outcome_set(&[(0, false), (0, false), (0, false), (1, false), (1, false)]);
        let labels = strings(&["b", "b", "b", "a", "b"]);
        let map = map_clusters_to_labels(&out, &labels, 2).unwrap();
        assert_eq!(map.label_of(1), "b");
    }

    #[test]
    fn accuracy_hand_values() {
        assert!((accuracy(504, 264).unwrap() - 65.625).abs() < 1e-12);
        assert_eq!(accuracy(10, 0).unwrap(), 100.0);
        assert_eq!(accuracy(0, 10).unwrap(), 0.0);
        assert!(matches!(accuracy(0, 0), Err(Error::NoDecidedRecords)));
    }

    /// A small fitted-model stand-in around the 4-record membership example.
    fn toy_model() -> FcmModel {
        FcmModel {
            centroids: vec![vec![0.0], vec![1.0], vec![2.0]],
            memberships: MembershipMatrix::from_rows(vec![
                vec![0.1, 0.8, 0.0, 0.1],
                vec![0.6, 0.1, 0.2, 0.9],
                vec![0.3, 0.1, 0.8, 0.0],
            ])
            .unwrap(),
            objective_trace: vec![1.0],
            iterations_run: 1,
            converged: true,
        }
    }

    #[test]
    fn sweep_threshold_zero_matches_plain_clustering() {
        let model = toy_model();
        // Argmax clusters: (1, 0, 2, 1). Records 0 and 3 share cluster 1 with
        // labels y/z; the tie resolves to "y", so record 3 is argmax-false.
        let labels = strings(&["y", "y", "z", "z"]);
        let rows = sweep(&model, &labels, &[0.0, 0.48, 1.0]).unwrap();

        let r0 = &rows[0];
        assert_eq!((r0.nar, r0.ntr, r0.nfr, r0.nfra), (0, 3, 1, 0));
        assert_eq!(r0.par, 0.0);
        assert_eq!(r0.accuracy, Some(75.0));

        // CFs are (1.435, 1.325, 1.43, 1.78)/3 ≈ (0.478, 0.442, 0.477, 0.593):
        // at 0.48 the first three records are withheld, leaving only the
        // argmax-false record 3 decided.
        let r1 = &rows[1];
        assert_eq!((r1.nar, r1.ntr, r1.nfr, r1.nfra), (3, 0, 1, 0));
        assert!((r1.par - 75.0).abs() < 1e-12);
        assert_eq!(r1.pbfra, 0.0);
        assert_eq!(r1.accuracy, Some(0.0));

        // Everything ambiguous: accuracy is absent, PBFRA still defined.
        let r2 = &rows[2];
        assert_eq!(r2.nar, 4);
        assert_eq!(r2.accuracy, None);
        assert!((r2.pbfra - 25.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_rejects_unsorted_thresholds() {
        let model = toy_model();
        let labels = strings(&["y", "z", "z", "y"]);
        assert!(sweep(&model, &labels, &[0.5, 0.2]).is_err());
    }

    #[test]
    fn g_mean_hand_values() {
        // 20 records, two pure-by-construction clusters mapped 0→a, 1→b;
        // class a decides 10 with 9 hits, class b decides 10 with 4 hits:
        // √(0.9·0.4) = 0.6.
        let mut specs = Vec::new();
        for i in 0..10 {
            specs.push((if i < 9 { 0 } else { 1 }, false));
        }
        for i in 0..10 {
            specs.push((if i < 4 { 1 } else { 0 }, false));
        }
        let out = outcome_set(&specs);
        let labels: Vec<String> = (0..20)
            .map(|i| if i < 10 { "a".into() } else { "b".into() })
            .collect();
        let map = ClusterLabelMap {
            mapping: strings(&["a", "b"]),
        };
        let g = g_mean(&out, &labels, &map).unwrap();
        assert!((g.value - 0.6).abs() < 1e-12);
        assert!(g.excluded_classes.is_empty());
    }

    #[test]
    fn g_mean_perfect_and_collapsed() {
        let out = outcome_set(&[(0, false), (0, false), (1, false), (1, false)]);
        let labels = strings(&["a", "a", "b", "b"]);
        let map = ClusterLabelMap {
            mapping: strings(&["a", "b"]),
        };
        assert_eq!(g_mean(&out, &labels, &map).unwrap().value, 1.0);

        // Class b fully misclassified → one zero recall wipes the mean.
        let collapsed = ClusterLabelMap {
            mapping: strings(&["a", "a"]),
        };
        assert_eq!(g_mean(&out, &labels, &collapsed).unwrap().value, 0.0);
    }

    #[test]
    fn g_mean_excludes_undecided_class_and_degenerates() {
        // Class c contributes no decided records → excluded but flagged.
        let out = outcome_set(&[(0, false), (0, false), (1, false), (1, true)]);
        let labels = strings(&["a", "a", "b", "c"]);
        let map = ClusterLabelMap {
            mapping: strings(&["a", "b"]),
        };
        let g = g_mean(&out, &labels, &map).unwrap();
        assert_eq!(g.excluded_classes, vec!["c".to_string()]);
        assert_eq!(g.value, 1.0);

        // Only one class left decided → degenerate.
        let thin = outcome_set(&[(0, false), (0, false), (1, true), (1, true)]);
        assert!(matches!(
            g_mean(&thin, &labels, &map),
            Err(Error::DegenerateGMean)
        ));
    }

    fn blob_dataset() -> Dataset {
        let mut records = Vec::new();
        for i in 0..50 {
            let t = (i % 10) as f64 / 100.0;
            records.push(vec![0.1 + t, 0.1 + t]);
        }
        for i in 0..50 {
            let t = (i % 10) as f64 / 100.0;
            records.push(vec![0.8 + t, 0.8 + t]);
        }
        Dataset::new(records, vec!["x".into(), "y".into()]).unwrap()
    }

    #[test]
    fn noise_zero_fraction_is_identity() {
        let data = blob_dataset();
        let noisy = add_noise_queries(&data, 0.0, &data.bounds(), 9).unwrap();
        assert_eq!(noisy.data, data);
        assert_eq!(noisy.n_synthetic(), 0);
    }

    #[test]
    fn noise_appends_flagged_records_inside_bounds() {
        let data = blob_dataset();
        let bounds = vec![(0.0, 1.0), (0.0, 1.0)];
        let noisy = add_noise_queries(&data, 0.5, &bounds, 9).unwrap();
        assert_eq!(noisy.data.n_records(), 150);
        assert_eq!(noisy.n_synthetic(), 50);
        assert!(!noisy.synthetic[..100].iter().any(|&s| s));
        assert!(noisy.synthetic[100..].iter().all(|&s| s));
        for k in 100..150 {
            for (&v, &(lo, hi)) in noisy.data.record(k).iter().zip(&bounds) {
                assert!((lo..=hi).contains(&v));
            }
        }
        // Deterministic per seed, different across seeds.
        let again = add_noise_queries(&data, 0.5, &bounds, 9).unwrap();
        assert_eq!(noisy, again);
        let other = add_noise_queries(&data, 0.5, &bounds, 10).unwrap();
        assert_ne!(noisy, other);
    }

    #[test]
    fn noise_labels_marked_on_labeled_data() {
        let data = Dataset::new(vec![vec![0.0], vec![1.0]], vec!["x".into()])
            .unwrap()
            .with_labels(strings(&["a", "b"]))
            .unwrap();
        let noisy = add_noise_queries(&data, 1.0, &[(0.0, 1.0)], 3).unwrap();
        assert_eq!(
            noisy.data.labels().unwrap(),
            &strings(&["a", "b", "noise", "noise"])[..]
        );
    }

    #[test]
    fn center_error_hand_values() {
        assert_eq!(
            center_error(&[vec![0.0]], &[vec![3.0]]).unwrap(),
            3.0
        );
        let a = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 0.5]];
        let shuffled = vec![a[2].clone(), a[0].clone(), a[1].clone()];
        assert_eq!(center_error(&a, &shuffled).unwrap(), 0.0);
        assert!(center_error(&a, &a[..2]).is_err());
        assert!(center_error(&[vec![0.0]], &[vec![0.0, 1.0]]).is_err());
    }

    /// Exhaustive minimum over every pairing, for cross-checking the matcher.
    fn permutation_oracle(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        fn dist(x: &[f64], y: &[f64]) -> f64 {
            x.iter()
                .zip(y)
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>()
                .sqrt()
        }
        fn go(a: &[Vec<f64>], b: &[Vec<f64>], used: &mut Vec<bool>, i: usize) -> f64 {
            if i == a.len() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for j in 0..b.len() {
                if !used[j] {
                    used[j] = true;
                    let cand = dist(&a[i], &b[j]) + go(a, b, used, i + 1);
                    used[j] = false;
                    best = best.min(cand);
                }
            }
            best
        }
        go(a, b, &mut vec![false; b.len()], 0)
    }

    #[test]
    fn undersample_keeps_requested_fraction() {
        let records: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let labels: Vec<String> = (0..10)
            .map(|i| if i < 6 { "big".into() } else { "small".into() })
            .collect();
        let data = Dataset::new(records, vec!["x".into()])
            .unwrap()
            .with_labels(labels)
            .unwrap();
        let thinned = undersample_class(&data, "big", 0.5, 11).unwrap();
        let remaining_big = thinned
            .labels()
            .unwrap()
            .iter()
            .filter(|l| l.as_str() == "big")
            .count();
        assert_eq!(remaining_big, 3);
        assert_eq!(thinned.n_records(), 7);
        assert_eq!(thinned, undersample_class(&data, "big", 0.5, 11).unwrap());
        assert!(matches!(
            undersample_class(&data, "zzz", 0.5, 11),
            Err(Error::UnknownClass(_))
        ));
    }

    #[test]
    fn privacy_without_noise_recovers_reference_exactly() {
        let data = blob_dataset();
        let config = FcmConfig {
            seed: 5,
            ..FcmConfig::new(2)
        };
        let report = privacy_experiment(&data, 0.0, &config, &[0.0, 0.4]).unwrap();
        assert_eq!(report.n_noise, 0);
        assert_eq!(report.plain_error, 0.0);
        assert_eq!(report.rows[0].center_error, Some(0.0));
    }

    #[test]
    fn privacy_repeats_aggregates_per_threshold() {
        let data = blob_dataset();
        let config = FcmConfig {
            seed: 5,
            ..FcmConfig::new(2)
        };
        let agg = privacy_repeats(&data, 0.3, &config, &[0.0, 1.0], 5).unwrap();
        assert_eq!(agg.repeats, 5);
        assert_eq!(agg.plain_errors.len(), 5);
        let t0 = &agg.thresholds[0];
        assert_eq!(t0.n_degenerate, 0);
        assert!(t0.mean_error.is_some() && t0.variance.is_some());
        // Threshold 0 refits on everything → identical to the plain fit.
        assert!((t0.mean_error.unwrap() - agg.plain_mean).abs() < 1e-12);
        let t1 = &agg.thresholds[1];
        assert_eq!(t1.n_degenerate, 5);
        assert_eq!(t1.mean_error, None);
        assert_eq!(t1.variance, None);
        assert_eq!(t1.errors, vec![None; 5]);
    }

    #[test]
    fn privacy_threshold_zero_row_equals_plain_fit() {
        let data = blob_dataset();
        let config = FcmConfig {
            seed: 5,
            ..FcmConfig::new(2)
        };
        let report = privacy_experiment(&data, 0.3, &config, &[0.0, 0.45, 1.0]).unwrap();
        assert_eq!(report.n_noise, 30);
        let r0 = &report.rows[0];
        assert!(!r0.degenerate);
        assert_eq!(r0.n_ambiguous, 0);
        assert!((r0.center_error.unwrap() - report.plain_error).abs() < 1e-12);
        // Threshold 1.0 marks everything ambiguous → flagged, not an error.
        let r2 = &report.rows[2];
        assert!(r2.degenerate);
        assert_eq!(r2.center_error, None);
        assert_eq!(r2.n_decided, 0);
    }

    proptest! {
        #[test]
        fn hungarian_matches_exhaustive_oracle(
            a in prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 2), 3),
            b in prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 2), 3),
        ) {
            let fast = center_error(&a, &b).unwrap();
            let slow = permutation_oracle(&a, &b);
            prop_assert!((fast - slow).abs() < 1e-9);
        }

        #[test]
        fn center_error_permutation_invariant(
            a in prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 2), 4),
            rotation in 0usize..4,
        ) {
            let mut rotated = a.clone();
            rotated.rotate_left(rotation);
            prop_assert!(center_error(&a, &rotated).unwrap() < 1e-9);
        }

        #[test]
        fn sweep_bookkeeping_always_balances(
            raw in prop::collection::vec(prop::collection::vec(0.05..1.0f64, 8), 3),
            bits in prop::collection::vec(0u8..2, 8),
            t in 0.0..1.0f64,
        ) {
            let mut rows = raw;
            for k in 0..8 {
                let sum: f64 = rows.iter().map(|r| r[k]).sum();
                for row in rows.iter_mut() {
                    row[k] /= sum;
                }
            }
            let model = FcmModel {
                centroids: vec![vec![0.0]; 3],
                memberships: MembershipMatrix::from_rows(rows).unwrap(),
                objective_trace: vec![1.0],
                iterations_run: 1,
                converged: true,
            };
            let labels: Vec<String> = bits.iter().map(|b| format!("c{b}")).collect();
            let swept = sweep(&model, &labels, &[0.0, t, 1.0]).unwrap();
            for row in &swept {
                prop_assert_eq!(row.nar + row.ntr + row.nfr, 8);
                prop_assert!((row.par - 100.0 * row.nar as f64 / 8.0).abs() < 1e-12);
            }
            // Ambiguous counts are nested by construction.
            prop_assert!(swept[0].nar <= swept[1].nar);
            prop_assert!(swept[1].nar <= swept[2].nar);
            // With the frozen map, falsely-argmaxed records either stay wrong
            // or go ambiguous: nfr(t) = nfr(0) − nfra(t).
            prop_assert_eq!(swept[1].nfr, swept[0].nfr - swept[1].nfra);
        }
    }
}
