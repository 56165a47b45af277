//! Online relabelling against label switching.
//!
//! Samples are visited in order of increasing number of non-empty blocks
//! (ties by iteration). Each sample gets the label permutation minimising the
//! summed Hamming distance to every sample relabelled before it.
//!
//! Because `sum_t D(sigma z, z_t) = T N - sum_i C[i][sigma(z_i)]`, where
//! `C[i][l]` counts how often team `i` has carried relabelled label `l`, the
//! minimisation is a `K x K` assignment on `G[a][b] = sum_{i: z_i = a} C[i][b]`
//! and the history never has to be revisited.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::{max_gain_exhaustive, min_cost_assignment};
use crate::sampler::{Sample, Trace};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RelabelError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Bijection on `0..k`: `map[old] = new`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation {
    map: Vec<u8>,
}

impl Permutation {
    pub fn identity(k: usize) -> Self {
        Permutation {
            map: (0..k as u8).collect(),
        }
    }

    pub fn from_map(map: Vec<u8>) -> Result<Self, RelabelError> {
        let mut seen = vec![false; map.len()];
        for &m in &map {
            let m = m as usize;
            if m >= map.len() || std::mem::replace(&mut seen[m], true) {
                return Err(RelabelError::InvalidInput(format!(
                    "{map:?} is not a permutation"
                )));
            }
        }
        Ok(Permutation { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn map(&self, label: u8) -> u8 {
        self.map[label as usize]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &m)| i == m as usize)
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u8; self.map.len()];
        for (i, &m) in self.map.iter().enumerate() {
            inv[m as usize] = i as u8;
        }
        Permutation { map: inv }
    }

    /// `self.then(other)` applies `self` first, then `other`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.len(), other.len());
        Permutation {
            map: self.map.iter().map(|&m| other.map(m)).collect(),
        }
    }

    pub fn apply(&self, z: &[u8]) -> Vec<u8> {
        z.iter().map(|&l| self.map(l)).collect()
    }
}

/// Number of positions where two allocations disagree.
pub fn allocation_distance(a: &[u8], b: &[u8]) -> Result<usize, RelabelError> {
    if a.len() != b.len() {
        return Err(RelabelError::InvalidInput(format!(
            "allocations of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelabeledSample {
    /// Position of the sample in the input trace.
    pub original_index: usize,
    pub iteration: u64,
    pub k: usize,
    pub z: Vec<u8>,
    /// Permutation that was applied to the raw labels.
    pub permutation: Permutation,
}

impl RelabeledSample {
    pub fn as_sample(&self) -> Sample {
        Sample {
            iteration: self.iteration,
            k: self.k,
            z: self.z.clone(),
        }
    }
}

/// Relabelled samples in processing order.
#[derive(Debug, Clone, PartialEq)]
pub struct RelabeledTrace {
    pub n: usize,
    pub samples: Vec<RelabeledSample>,
}

impl RelabeledTrace {
    /// The relabelled samples back in input order, as a plain trace.
    pub fn to_trace(&self, template: &Trace) -> Trace {
        let mut samples: Vec<(usize, Sample)> = self
            .samples
            .iter()
            .map(|s| (s.original_index, s.as_sample()))
            .collect();
        samples.sort_by_key(|(ix, _)| *ix);
        Trace {
            n: self.n,
            seed: template.seed,
            chain: template.chain,
            samples: samples.into_iter().map(|(_, s)| s).collect(),
            counters: template.counters,
        }
    }
}

/// Processing order: non-empty block count ascending, then iteration, then
/// input position.
pub fn processing_order(samples: &[Sample]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by_key(|&i| (samples[i].non_empty_blocks(), samples[i].iteration, i));
    order
}

/// Gain of every assignment `a -> b`, scaled so that among maximisers the one
/// with the most fixed points wins (identity whenever it is optimal).
fn tie_broken_gain(g: &[i64], k: usize) -> Vec<i64> {
    let scale = k as i64 + 1;
    let mut out = vec![0; k * k];
    for a in 0..k {
        for b in 0..k {
            out[a * k + b] = scale * g[a * k + b] + i64::from(a == b);
        }
    }
    out
}

/// Best permutation for a `k x k` gain matrix; exhaustive for small `k`.
pub fn best_permutation(g: &[i64], k: usize) -> Permutation {
    let gain = tie_broken_gain(g, k);
    let p = if k <= 4 {
        max_gain_exhaustive(&gain, k)
    } else {
        let cost: Vec<i64> = gain.iter().map(|x| -x).collect();
        min_cost_assignment(&cost, k)
    };
    Permutation {
        map: p.into_iter().map(|x| x as u8).collect(),
    }
}

pub fn relabel_trace(trace: &Trace) -> Result<RelabeledTrace, RelabelError> {
    if trace.samples.is_empty() {
        return Err(RelabelError::InvalidInput("empty trace".into()));
    }
    let n = trace.n;
    let width = trace.samples.iter().map(|s| s.k).max().unwrap_or(1);
    let mut counts = vec![0i64; n * width];
    let mut out = Vec::with_capacity(trace.samples.len());
    let mut g = vec![0i64; width * width];
    for ix in processing_order(&trace.samples) {
        let s = &trace.samples[ix];
        if s.z.len() != n {
            return Err(RelabelError::InvalidInput(format!(
                "sample {ix} has {} labels, expected {n}",
                s.z.len()
            )));
        }
        let k = s.k;
        let g = &mut g[..k * k];
        g.fill(0);
        for (i, &a) in s.z.iter().enumerate() {
            let row = &counts[i * width..i * width + k];
            let a = a as usize;
            for b in 0..k {
                g[a * k + b] += row[b];
            }
        }
        let perm = best_permutation(g, k);
        let z = perm.apply(&s.z);
        for (i, &l) in z.iter().enumerate() {
            counts[i * width + l as usize] += 1;
        }
        out.push(RelabeledSample {
            original_index: ix,
            iteration: s.iteration,
            k,
            z,
            permutation: perm,
        });
    }
    Ok(RelabeledTrace { n, samples: out })
}
