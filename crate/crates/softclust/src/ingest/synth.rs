use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Generates `c` Gaussian blobs of `per_cluster` points around
/// seeded-random centers drawn uniformly inside `bounds`, returning the
/// dataset together with the true centers. Deterministic per seed.
pub fn make_blobs(
    c: usize,
    per_cluster: usize,
    spread: f64,
    bounds: &[(f64, f64)],
    seed: u64,
) -> Result<(Dataset, Vec<Vec<f64>>)> {
    if c < 1 {
        return Err(Error::InvalidConfig("need at least one blob".into()));
    }
    if per_cluster < 1 {
        return Err(Error::InvalidConfig("need at least one point per blob".into()));
    }
    if bounds.is_empty() {
        return Err(Error::InvalidConfig("need at least one feature bound".into()));
    }
    if !(spread >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "spread must be >= 0, got {spread}"
        )));
    }
    for &(lo, hi) in bounds {
        if !(lo <= hi) {
            return Err(Error::InvalidConfig(format!("invalid bound ({lo}, {hi})")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..c)
        .map(|_| {
            bounds
                .iter()
                .map(|&(lo, hi)| if hi > lo { rng.random_range(lo..hi) } else { lo })
                .collect()
        })
        .collect();
    let mut records = Vec::with_capacity(c * per_cluster);
    for center in &centers {
        for _ in 0..per_cluster {
            records.push(
                center
                    .iter()
                    .map(|&v| {
                        let z: f64 = rng.sample(StandardNormal);
                        v + spread * z
                    })
                    .collect(),
            );
        }
    }
    let names = (0..bounds.len()).map(|j| format!("x{j}")).collect();
    Ok((Dataset::new(records, names)?, centers))
}

/// A synthetic two-class diagnostic-style dataset: 768 records, 8 features
/// (4 informative), min-max normalized, with labels.
///
/// Class "neg" is a 500-record compact blob and "pos" a 268-record diffuse
/// blob on the other side of the informative midplane. Labels carry
/// asymmetric base noise plus extra flips concentrated near the midplane, so
/// boundary records are both the least certain and the most often mislabeled.
pub fn make_diabetes_like(seed: u64) -> Dataset {
    const DIM: usize = 8;
    const N_INFORMATIVE: usize = 4;
    const N_NEG: usize = 500;
    const N_POS: usize = 268;
    const SEPARATION: f64 = 0.32;
    const SIGMA_NEG: f64 = 0.11;
    const SIGMA_POS: f64 = 0.22;
    const BASE_FLIP_NEG: f64 = 0.16;
    const BASE_FLIP_POS: f64 = 0.40;
    const BUMP: f64 = 0.25;
    const BUMP_WIDTH: f64 = 0.35;

    let mut center_neg = [0.5; DIM];
    let mut center_pos = [0.5; DIM];
    for j in 0..N_INFORMATIVE {
        center_neg[j] -= SEPARATION / 2.0;
        center_pos[j] += SEPARATION / 2.0;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records: Vec<Vec<f64>> = Vec::with_capacity(N_NEG + N_POS);
    for (count, center, sigma) in [
        (N_NEG, &center_neg, SIGMA_NEG),
        (N_POS, &center_pos, SIGMA_POS),
    ] {
        for _ in 0..count {
            records.push(
                center
                    .iter()
                    .map(|&v| {
                        let z: f64 = rng.sample(StandardNormal);
                        v + sigma * z
                    })
                    .collect(),
            );
        }
    }

    // Signed position along the class axis, scaled so the nominal centers sit
    // at ±1; flips pile up where |z| is small (the overlap region).
    let gap: f64 = SEPARATION * (N_INFORMATIVE as f64).sqrt();
    let direction: Vec<f64> = center_pos
        .iter()
        .zip(&center_neg)
        .map(|(&p, &n)| (p - n) / gap)
        .collect();
    let labels: Vec<String> = records
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let nominal_pos = k >= N_NEG;
            let z: f64 = x
                .iter()
                .zip(&direction)
                .map(|(&v, &d)| (v - 0.5) * d)
                .sum::<f64>()
                / (gap / 2.0);
            let base = if nominal_pos { BASE_FLIP_POS } else { BASE_FLIP_NEG };
            let p_flip = (base + BUMP * (-(z / BUMP_WIDTH).powi(2)).exp()).clamp(0.0, 0.9);
            let flip = rng.random::<f64>() < p_flip;
            if nominal_pos != flip { "pos" } else { "neg" }.to_string()
        })
        .collect();

    let names = (0..DIM).map(|j| format!("f{j}")).collect();
    let mut data = Dataset::new(records, names)
        .expect("generator produces a valid dataset")
        .with_labels(labels)
        .expect("one label per record");
    data.normalize();
    data
}
