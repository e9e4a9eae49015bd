use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Records closer than this (squared distance) to a centroid are treated as
/// coincident with it, which short-circuits the membership update.
const COINCIDENT_D2: f64 = 1e-12;

/// Parameters for one fuzzy c-means run.
#[derive(Debug, Clone, PartialEq)]
pub struct FcmConfig {
    /// Number of clusters, `1 ≤ c ≤ N`.
    pub c: usize,
    /// Fuzzifier, strictly greater than 1.
    pub m: f64,
    /// Iteration cap.
    pub max_iter: usize,
    /// Relative objective-change tolerance for convergence.
    pub tol: f64,
    /// Seed for deterministic initialization.
    pub seed: u64,
}

impl FcmConfig {
    /// A config with the library defaults (`m = 2`, `max_iter = 300`,
    /// `tol = 1e-6`, `seed = 0`).
    pub fn new(c: usize) -> Self {
        Self {
            c,
            m: 2.0,
            max_iter: 300,
            tol: 1e-6,
            seed: 0,
        }
    }

    fn validate(&self, n_records: usize) -> Result<()> {
        if self.c < 1 || self.c > n_records {
            return Err(Error::InvalidClusterCount {
                c: self.c,
                n_records,
            });
        }
        if !(self.m > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "fuzzifier must be > 1, got {}",
                self.m
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidConfig("max_iter must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be > 0, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// A `c × N` matrix of membership degrees; every record's column sums to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix {
    u: Vec<Vec<f64>>,
}

impl MembershipMatrix {
    /// Wraps row-major cluster rows, validating shape, range, and column sums.
    pub fn from_rows(u: Vec<Vec<f64>>) -> Result<Self> {
        if u.is_empty() || u[0].is_empty() {
            return Err(Error::ShapeMismatch {
                expected: "non-empty c x N matrix".into(),
                found: "empty matrix".into(),
            });
        }
        let n = u[0].len();
        for row in &u {
            if row.len() != n {
                return Err(Error::ShapeMismatch {
                    expected: format!("{n} columns"),
                    found: format!("{}", row.len()),
                });
            }
        }
        for k in 0..n {
            let mut sum = 0.0;
            for row in &u {
                let v = row[k];
                if !(-1e-9..=1.0 + 1e-9).contains(&v) {
                    return Err(Error::InvalidConfig(format!(
                        "membership {v} outside [0, 1]"
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidConfig(format!(
                    "membership column {k} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(Self { u })
    }

    pub fn n_clusters(&self) -> usize {
        self.u.len()
    }

    pub fn n_records(&self) -> usize {
        self.u[0].len()
    }

    pub fn get(&self, cluster: usize, record: usize) -> f64 {
        self.u[cluster][record]
    }

    /// One record's memberships across all clusters.
    pub fn column(&self, record: usize) -> Vec<f64> {
        self.u.iter().map(|row| row[record]).collect()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.u
    }

    /// Index of the record's strongest cluster; ties resolve to the lowest index.
    pub fn dominant_cluster(&self, record: usize) -> usize {
        let mut best = 0;
        for i in 1..self.n_clusters() {
            if self.u[i][record] > self.u[best][record] {
                best = i;
            }
        }
        best
    }
}

/// A fitted fuzzy c-means model.
#[derive(Debug, Clone, PartialEq)]
pub struct FcmModel {
    pub centroids: Vec<Vec<f64>>,
    pub memberships: MembershipMatrix,
    /// Objective value after initialization and after each iteration.
    pub objective_trace: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Greedy farthest-point seeding: a seeded-random first pick, then each next
/// centroid is the record maximizing its minimum squared distance to the
/// chosen set (ties to the lowest record index).
pub fn init_centroids(data: &Dataset, c: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let n = data.n_records();
    if c < 1 || c > n {
        return Err(Error::InvalidClusterCount { c, n_records: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.random_range(0..n);
    let mut chosen = vec![first];
    let mut min_d2: Vec<f64> = (0..n)
        .map(|k| squared_distance(data.record(k), data.record(first)))
        .collect();
    while chosen.len() < c {
        let mut best = 0;
        for k in 1..n {
            if min_d2[k] > min_d2[best] {
                best = k;
            }
        }
        if min_d2[best] <= 0.0 {
            return Err(Error::DegenerateData(format!(
                "only {} distinct records for {c} clusters",
                chosen.len()
            )));
        }
        chosen.push(best);
        for k in 0..n {
            let d2 = squared_distance(data.record(k), data.record(best));
            if d2 < min_d2[k] {
                min_d2[k] = d2;
            }
        }
    }
    Ok(chosen.iter().map(|&k| data.record(k).to_vec()).collect())
}

/// The membership update: `u_ik ∝ (1/d²_ik)^(1/(m−1))`, normalized per record.
/// A record within [`COINCIDENT_D2`] of one or more centroids splits its
/// membership equally among exactly those centroids.
pub fn update_memberships(
    data: &Dataset,
    centroids: &[Vec<f64>],
    m: f64,
) -> Result<MembershipMatrix> {
    if !(m > 1.0) {
        return Err(Error::InvalidConfig(format!(
            "fuzzifier must be > 1, got {m}"
        )));
    }
    let c = centroids.len();
    if c == 0 {
        return Err(Error::ShapeMismatch {
            expected: "at least one centroid".into(),
            found: "none".into(),
        });
    }
    for v in centroids {
        if v.len() != data.n_features() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} features", data.n_features()),
                found: format!("{} in centroid", v.len()),
            });
        }
    }
    let n = data.n_records();
    let exponent = 1.0 / (m - 1.0);
    let mut u = vec![vec![0.0; n]; c];
    let mut d2 = vec![0.0; c];
    for k in 0..n {
        let x = data.record(k);
        for i in 0..c {
            d2[i] = squared_distance(x, &centroids[i]);
        }
        let coincident = d2.iter().filter(|&&d| d < COINCIDENT_D2).count();
        if coincident > 0 {
            let share = 1.0 / coincident as f64;
            for i in 0..c {
                u[i][k] = if d2[i] < COINCIDENT_D2 { share } else { 0.0 };
            }
        } else {
            let mut sum = 0.0;
            for i in 0..c {
                let w = (1.0 / d2[i]).powf(exponent);
                u[i][k] = w;
                sum += w;
            }
            for row in u.iter_mut() {
                row[k] /= sum;
            }
        }
    }
    Ok(MembershipMatrix { u })
}

/// The centroid update: each centroid is the `u^m`-weighted mean of all records.
pub fn update_centroids(
    data: &Dataset,
    u: &MembershipMatrix,
    m: f64,
) -> Result<Vec<Vec<f64>>> {
    if u.n_records() != data.n_records() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} membership columns", data.n_records()),
            found: format!("{}", u.n_records()),
        });
    }
    let n_feat = data.n_features();
    let mut centroids = Vec::with_capacity(u.n_clusters());
    for (i, row) in u.rows().iter().enumerate() {
        let mut num = vec![0.0; n_feat];
        let mut den = 0.0;
        for (k, &uik) in row.iter().enumerate() {
            let w = uik.powf(m);
            den += w;
            for (j, acc) in num.iter_mut().enumerate() {
                *acc += w * data.record(k)[j];
            }
        }
        if den <= 0.0 {
            return Err(Error::EmptyCluster { cluster: i });
        }
        for acc in num.iter_mut() {
            *acc /= den;
        }
        centroids.push(num);
    }
    Ok(centroids)
}

/// The weighted within-cluster scatter `Q = Σ_i Σ_k u_ik^m · ‖x_k − v_i‖²`.
pub fn objective(
    data: &Dataset,
    u: &MembershipMatrix,
    centroids: &[Vec<f64>],
    m: f64,
) -> Result<f64> {
    if u.n_records() != data.n_records() || u.n_clusters() != centroids.len() {
        return Err(Error::ShapeMismatch {
            expected: format!(
                "{} x {} memberships",
                centroids.len(),
                data.n_records()
            ),
            found: format!("{} x {}", u.n_clusters(), u.n_records()),
        });
    }
    for v in centroids {
        if v.len() != data.n_features() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} features", data.n_features()),
                found: format!("{} in centroid", v.len()),
            });
        }
    }
    let mut q = 0.0;
    for (i, row) in u.rows().iter().enumerate() {
        for (k, &uik) in row.iter().enumerate() {
            q += uik.powf(m) * squared_distance(data.record(k), &centroids[i]);
        }
    }
    Ok(q)
}

/// Runs fuzzy c-means to convergence: seeds centroids, then alternates the
/// centroid and membership updates until the objective change falls below
/// `tol · max(1, Q_prev)` or `max_iter` is reached. Deterministic for a fixed
/// (dataset, config) pair.
pub fn run_fcm(data: &Dataset, config: &FcmConfig) -> Result<FcmModel> {
    config.validate(data.n_records())?;
    let mut centroids = init_centroids(data, config.c, config.seed)?;
    let mut u = update_memberships(data, &centroids, config.m)?;
    let mut q_prev = objective(data, &u, &centroids, config.m)?;
    let mut trace = vec![q_prev];
    let mut converged = false;
    let mut iterations_run = 0;
    for _ in 0..config.max_iter {
        centroids = update_centroids(data, &u, config.m)?;
        u = update_memberships(data, &centroids, config.m)?;
        let q = objective(data, &u, &centroids, config.m)?;
        trace.push(q);
        iterations_run += 1;
        if (q_prev - q).abs() < config.tol * q_prev.max(1.0) {
            converged = true;
            break;
        }
        q_prev = q;
    }
    Ok(FcmModel {
        centroids,
        memberships: u,
        objective_trace: trace,
        iterations_run,
        converged,
    })
}
