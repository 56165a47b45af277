//! Synthetic seasons drawn from the block model's generative process.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::league::{Outcome, ResultsMatrix};
use crate::model::ModelError;

/// Ground truth behind a synthetic season.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Planted {
    pub k: usize,
    /// Zero-based block label per team.
    pub z: Vec<u8>,
    /// Row-major `k x k` outcome probabilities (home win, draw, home loss),
    /// indexed `[home block][away block]`.
    pub p: Vec<[f64; 3]>,
}

impl Planted {
    pub fn new(z: Vec<u8>, k: usize, p: Vec<[f64; 3]>) -> Result<Self, ModelError> {
        if k == 0 || z.iter().any(|&l| l as usize >= k) {
            return Err(ModelError::InvalidConfig(format!(
                "labels must lie in 0..{k}"
            )));
        }
        validate_probabilities(&p, k)?;
        Ok(Planted { k, z, p })
    }

    pub fn pair(&self, h: usize, a: usize) -> [f64; 3] {
        self.p[h * self.k + a]
    }
}

/// Each of the `k^2` rows must be a probability vector.
pub fn validate_probabilities(p: &[[f64; 3]], k: usize) -> Result<(), ModelError> {
    if p.len() != k * k {
        return Err(ModelError::InvalidConfig(format!(
            "expected {} probability rows for K = {k}, found {}",
            k * k,
            p.len()
        )));
    }
    for (ix, row) in p.iter().enumerate() {
        let sum: f64 = row.iter().sum();
        if row.iter().any(|x| !x.is_finite() || *x < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(ModelError::InvalidConfig(format!(
                "probabilities for block pair ({}, {}) sum to {sum}, not 1",
                ix / k + 1,
                ix % k + 1
            )));
        }
    }
    Ok(())
}

/// Interaction array with one strength knob `s` in `[0, 1]`: within-block
/// games are uniform, and when a stronger (lower-labelled) block meets a
/// weaker one the stronger side wins with probability `(1 + 2s) / 3`.
pub fn separation_probabilities(k: usize, s: f64) -> Result<Vec<[f64; 3]>, ModelError> {
    if !(0.0..=1.0).contains(&s) {
        return Err(ModelError::InvalidConfig(format!(
            "separation {s} outside [0, 1]"
        )));
    }
    let strong = (1.0 + 2.0 * s) / 3.0;
    let weak = (1.0 - s) / 3.0;
    let mut p = Vec::with_capacity(k * k);
    for h in 0..k {
        for a in 0..k {
            p.push(match h.cmp(&a) {
                std::cmp::Ordering::Equal => [1.0 / 3.0; 3],
                std::cmp::Ordering::Less => [strong, weak, weak],
                std::cmp::Ordering::Greater => [weak, weak, strong],
            });
        }
    }
    Ok(p)
}

/// Contiguous labels for the given block sizes.
pub fn labels_from_sizes(sizes: &[usize]) -> Vec<u8> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &n)| std::iter::repeat_n(b as u8, n))
        .collect()
}

/// Draws every fixture independently given the planted blocks.
pub fn simulate_season<R: Rng>(teams: Vec<String>, truth: &Planted, rng: &mut R) -> ResultsMatrix {
    assert_eq!(teams.len(), truth.z.len(), "one label per team");
    ResultsMatrix::from_fn(teams, |i, j| {
        let p = truth.pair(truth.z[i] as usize, truth.z[j] as usize);
        let u: f64 = rng.random();
        if u < p[0] {
            Outcome::HomeWin
        } else if u < p[0] + p[1] {
            Outcome::Draw
        } else {
            Outcome::HomeLoss
        }
    })
    .expect("generated matrix is complete")
}
