//! Trans-dimensional Metropolis-within-Gibbs sampler over `(z, K)`.
//!
//! Each iteration picks one of three moves:
//!
//! * **MK**: insert or delete an empty block at the top label; `z` unchanged.
//! * **single-site sweep**: visit every team in order and propose a new label
//!   uniformly from the other `K - 1` labels.
//! * **AE**: eject part of a block into a fresh block, or absorb one block
//!   into another.
//!
//! All acceptance tests compare `ln u` against a log ratio built from
//! [`PosteriorTerms`], so unit and general hyperparameters share one code
//! path.
//!
//! Streams: chain `c` of seed `s` uses `Xoshiro256PlusPlus::seed_from_u64(s)`
//! advanced by `c` calls to `jump()` (2^128 steps each).

use std::fmt::Write as _;
use std::io::BufRead;

use rand::Rng;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;
use thiserror::Error;

use crate::league::ResultsMatrix;
use crate::model::{
    apply_move, BlockState, KPrior, ModelError, PosteriorTerms, PriorConfig, SufficientStats,
    TeamContacts,
};

pub type ChainRng = Xoshiro256PlusPlus;

/// Generator for chain `chain` of a run seeded with `seed`.
pub fn chain_rng(seed: u64, chain: u32) -> ChainRng {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    for _ in 0..chain {
        rng.jump();
    }
    rng
}

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("trace parse error on line {line}: {message}")]
    TraceFormat { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub iterations: u64,
    pub burn_in: u64,
    pub seed: u64,
    /// Probabilities of MK, single-site sweep and AE.
    pub move_probabilities: [f64; 3],
    pub thin: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            iterations: 200_000,
            burn_in: 50_000,
            seed: 0,
            move_probabilities: [1.0 / 3.0; 3],
            thin: 1,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.burn_in >= self.iterations {
            return Err(SamplerError::InvalidConfig(format!(
                "burn-in ({}) must be smaller than the number of iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(SamplerError::InvalidConfig(
                "thinning must be at least 1".into(),
            ));
        }
        let p = self.move_probabilities;
        if p.iter().any(|&x| !(x >= 0.0 && x.is_finite()))
            || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(SamplerError::InvalidConfig(format!(
                "move probabilities must be non-negative and sum to 1, got {p:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveCounter {
    pub proposed: u64,
    pub accepted: u64,
}

impl MoveCounter {
    fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += u64::from(accepted);
    }

    pub fn rate(&self) -> Option<f64> {
        (self.proposed > 0).then(|| self.accepted as f64 / self.proposed as f64)
    }
}

/// Acceptance counters. Single-site counts are per proposed relabelling;
/// MK and AE are split by direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveCounters {
    pub insert: MoveCounter,
    pub delete: MoveCounter,
    pub gibbs: MoveCounter,
    pub eject: MoveCounter,
    pub absorb: MoveCounter,
}

impl MoveCounters {
    pub fn merge(&mut self, o: &MoveCounters) {
        for (a, b) in [
            (&mut self.insert, &o.insert),
            (&mut self.delete, &o.delete),
            (&mut self.gibbs, &o.gibbs),
            (&mut self.eject, &o.eject),
            (&mut self.absorb, &o.absorb),
        ] {
            a.proposed += b.proposed;
            a.accepted += b.accepted;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    /// One-based iteration number that produced the state.
    pub iteration: u64,
    pub k: usize,
    /// Zero-based labels.
    pub z: Vec<u8>,
}

impl Sample {
    pub fn state(&self) -> BlockState {
        BlockState {
            z: self.z.clone(),
            k: self.k,
        }
    }

    pub fn non_empty_blocks(&self) -> usize {
        let mut seen = [false; 256];
        self.z
            .iter()
            .filter(|&&l| !std::mem::replace(&mut seen[l as usize], true))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub n: usize,
    pub seed: u64,
    pub chain: u32,
    pub samples: Vec<Sample>,
    pub counters: MoveCounters,
}

impl Trace {
    /// Appends another chain's samples (e.g. when pooling chains).
    pub fn extend(&mut self, other: Trace) {
        assert_eq!(self.n, other.n, "cannot pool traces over different leagues");
        self.samples.extend(other.samples);
        self.counters.merge(&other.counters);
    }

    /// Text form: two `#` header lines, then `iteration k z_1 .. z_N` with
    /// one-based labels, one sample per line.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.samples.len() * (self.n * 3 + 12) + 128);
        let c = &self.counters;
        let _ = writeln!(
            out,
            "# block-league trace v1 seed={} chain={} n={} samples={}",
            self.seed,
            self.chain,
            self.n,
            self.samples.len()
        );
        let _ = writeln!(
            out,
            "# accepted/proposed insert={}/{} delete={}/{} gibbs={}/{} eject={}/{} absorb={}/{}",
            c.insert.accepted,
            c.insert.proposed,
            c.delete.accepted,
            c.delete.proposed,
            c.gibbs.accepted,
            c.gibbs.proposed,
            c.eject.accepted,
            c.eject.proposed,
            c.absorb.accepted,
            c.absorb.proposed
        );
        for s in &self.samples {
            let _ = write!(out, "{} {}", s.iteration, s.k);
            for &l in &s.z {
                let _ = write!(out, " {}", l as usize + 1);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text<R: BufRead>(reader: R) -> Result<Trace, SamplerError> {
        let fail = |line: usize, message: String| SamplerError::TraceFormat { line, message };
        let mut trace = Trace {
            n: 0,
            seed: 0,
            chain: 0,
            samples: Vec::new(),
            counters: MoveCounters::default(),
        };
        let mut saw_header = false;
        for (ix, line) in reader.lines().enumerate() {
            let line = line?;
            let line_no = ix + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for tok in rest.split_whitespace() {
                    let Some((key, val)) = tok.split_once('=') else {
                        continue;
                    };
                    let num = |v: &str| {
                        v.parse::<u64>()
                            .map_err(|_| fail(line_no, format!("bad value for {key}: `{v}`")))
                    };
                    let pair = |v: &str| -> Result<MoveCounter, SamplerError> {
                        let (a, p) = v
                            .split_once('/')
                            .ok_or_else(|| fail(line_no, format!("bad counter `{v}`")))?;
                        Ok(MoveCounter {
                            accepted: num(a)?,
                            proposed: num(p)?,
                        })
                    };
                    match key {
                        "seed" => trace.seed = num(val)?,
                        "chain" => trace.chain = num(val)? as u32,
                        "n" => {
                            trace.n = num(val)? as usize;
                            saw_header = true;
                        }
                        "insert" => trace.counters.insert = pair(val)?,
                        "delete" => trace.counters.delete = pair(val)?,
                        "gibbs" => trace.counters.gibbs = pair(val)?,
                        "eject" => trace.counters.eject = pair(val)?,
                        "absorb" => trace.counters.absorb = pair(val)?,
                        _ => {}
                    }
                }
                continue;
            }
            if !saw_header {
                return Err(fail(line_no, "missing trace header".into()));
            }
            let fields: Vec<u64> = line
                .split_whitespace()
                .map(|f| {
                    f.parse::<u64>()
                        .map_err(|_| fail(line_no, format!("bad field `{f}`")))
                })
                .collect::<Result<_, _>>()?;
            if fields.len() != trace.n + 2 {
                return Err(fail(
                    line_no,
                    format!("expected {} fields, found {}", trace.n + 2, fields.len()),
                ));
            }
            let k = fields[1] as usize;
            if k == 0 || k > 255 {
                return Err(fail(line_no, format!("invalid k = {k}")));
            }
            let z = fields[2..]
                .iter()
                .map(|&l| {
                    if l == 0 || l as usize > k {
                        Err(fail(line_no, format!("label {l} outside 1..={k}")))
                    } else {
                        Ok((l - 1) as u8)
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            trace.samples.push(Sample {
                iteration: fields[0],
                k,
                z,
            });
        }
        if !saw_header {
            return Err(fail(0, "missing trace header".into()));
        }
        Ok(trace)
    }
}

/// Probability of attempting an ejection (rather than an absorption) at `k`.
pub fn eject_probability(k: usize, k_max: usize) -> f64 {
    if k >= k_max {
        0.0
    } else if k == 1 {
        1.0
    } else {
        0.5
    }
}

/// Closed-form acceptance ratio of inserting an empty block at `k`
/// (unit hyperparameters).
pub fn insert_ratio(n: usize, k: usize, k_prior: KPrior) -> f64 {
    let (n, k) = (n as f64, k as f64);
    match k_prior {
        KPrior::TruncatedPoisson => k / ((n + k) * (k + 1.0)),
        KPrior::Uniform => k / (n + k),
    }
}

/// Closed-form acceptance ratio of deleting an empty top block at `k > 1`.
pub fn delete_ratio(n: usize, k: usize, k_prior: KPrior) -> f64 {
    let (n, k) = (n as f64, k as f64);
    match k_prior {
        KPrior::TruncatedPoisson => k * (n + k - 1.0) / (k - 1.0),
        KPrior::Uniform => (n + k - 1.0) / (k - 1.0),
    }
}

/// Log proposal ratio (reverse over forward) of ejecting `n2` of the
/// `n1 + n2` members of a block when moving from `k` to `k + 1` blocks.
///
/// With the ejection probability uniform and integrated out, a particular
/// subset of size `n2` is proposed with probability `n1! n2! / (n1 + n2 + 1)!`.
/// The reverse absorption picks one ordered pair out of `(k + 1) k`, as does
/// the forward choice of ejecting block and post-ejection swap label, so the
/// label-choice factors cancel.
pub fn eject_log_proposal_ratio(k: usize, k_max: usize, n1: usize, n2: usize) -> f64 {
    let forward = eject_probability(k, k_max);
    let reverse = 1.0 - eject_probability(k + 1, k_max);
    (reverse / forward).ln() + ln_factorial((n1 + n2 + 1) as u64)
        - ln_factorial(n1 as u64)
        - ln_factorial(n2 as u64)
}

/// Log proposal ratio of absorbing a block of `n2` into one of `n1` when
/// moving from `k` to `k - 1` blocks: the exact inverse of the ejection.
pub fn absorb_log_proposal_ratio(k: usize, k_max: usize, n1: usize, n2: usize) -> f64 {
    -eject_log_proposal_ratio(k - 1, k_max, n1, n2)
}

/// Mutable chain state plus everything needed to score moves.
#[derive(Debug, Clone)]
pub struct Sampler {
    n: usize,
    y: Vec<u8>,
    terms: PosteriorTerms,
    state: BlockState,
    stats: SufficientStats,
    contacts: TeamContacts,
    pub counters: MoveCounters,
}

impl Sampler {
    pub fn new(
        r: &ResultsMatrix,
        prior: &PriorConfig,
        init: BlockState,
    ) -> Result<Self, ModelError> {
        prior.validate()?;
        if init.k > prior.k_max {
            return Err(ModelError::InvalidState(format!(
                "initial k = {} exceeds k_max = {}",
                init.k, prior.k_max
            )));
        }
        let stats = crate::model::compute_stats(r, &init)?;
        let n = r.n();
        Ok(Sampler {
            n,
            y: r.outcome_indices(),
            terms: PosteriorTerms::new(n, prior)?,
            contacts: TeamContacts {
                home: Vec::new(),
                away: Vec::new(),
            },
            state: init,
            stats,
            counters: MoveCounters::default(),
        })
    }

    pub fn state(&self) -> &BlockState {
        &self.state
    }

    pub fn stats(&self) -> &SufficientStats {
        &self.stats
    }

    pub fn terms(&self) -> &PosteriorTerms {
        &self.terms
    }

    pub fn log_posterior(&self) -> f64 {
        self.terms.log_posterior_unchecked(&self.stats)
    }

    fn k_max(&self) -> usize {
        self.terms.prior().k_max
    }

    fn stats_for(&self, z: &[u8], k: usize) -> SufficientStats {
        crate::model::count_stats(&self.y, self.n, z, k)
    }

    /// Insert-or-delete of an empty top block. Returns whether `K` changed.
    pub fn move_mk<R: Rng>(&mut self, rng: &mut R) -> bool {
        let k = self.state.k;
        if rng.random::<f64>() < 0.5 {
            if k >= self.k_max() {
                self.counters.insert.record(false);
                return false;
            }
            let log_alpha = self.terms.k_term(k + 1) - self.terms.k_term(k);
            let accept = rng.random::<f64>().ln() < log_alpha;
            if accept {
                self.state.k += 1;
                self.stats.push_empty_block();
            }
            self.counters.insert.record(accept);
            accept
        } else {
            if k == 1 || self.stats.size(k - 1) != 0 {
                self.counters.delete.record(false);
                return false;
            }
            let log_alpha = self.terms.k_term(k - 1) - self.terms.k_term(k);
            let accept = rng.random::<f64>().ln() < log_alpha;
            if accept {
                self.state.k -= 1;
                self.stats.pop_empty_block();
            }
            self.counters.delete.record(accept);
            accept
        }
    }

    fn affected_pairs(&self, a: usize, b: usize) -> f64 {
        let k = self.state.k;
        let mut acc = 0.0;
        for l in 0..k {
            acc +=
                self.terms.pair(&self.stats.pair(a, l)) + self.terms.pair(&self.stats.pair(b, l));
            if l != a && l != b {
                acc += self.terms.pair(&self.stats.pair(l, a))
                    + self.terms.pair(&self.stats.pair(l, b));
            }
        }
        acc + self.terms.size(self.stats.size(a)) + self.terms.size(self.stats.size(b))
    }

    /// Log posterior ratio of moving team `i` to label `to`, computed from the
    /// rows and columns of the two labels involved. Leaves the state intact.
    pub fn relabel_log_ratio(&mut self, i: usize, to: usize) -> f64 {
        let from = self.state.z[i] as usize;
        if from == to {
            return 0.0;
        }
        self.contacts
            .fill(&self.y, self.n, &self.state.z, self.state.k, i);
        let before = self.affected_pairs(from, to);
        apply_move(&mut self.stats, &self.contacts, from, to);
        let after = self.affected_pairs(from, to);
        apply_move(&mut self.stats, &self.contacts, to, from);
        after - before
    }

    /// One single-site update of team `i`. Returns whether it was accepted.
    pub fn gibbs_site<R: Rng>(&mut self, i: usize, rng: &mut R) -> bool {
        let k = self.state.k;
        if k == 1 {
            return false;
        }
        let from = self.state.z[i] as usize;
        let draw = rng.random_range(0..k - 1);
        let to = if draw >= from { draw + 1 } else { draw };
        self.contacts.fill(&self.y, self.n, &self.state.z, k, i);
        let before = self.affected_pairs(from, to);
        apply_move(&mut self.stats, &self.contacts, from, to);
        let after = self.affected_pairs(from, to);
        let accept = rng.random::<f64>().ln() < after - before;
        if accept {
            self.state.z[i] = to as u8;
        } else {
            apply_move(&mut self.stats, &self.contacts, to, from);
        }
        self.counters.gibbs.record(accept);
        accept
    }

    /// Single-site updates for every team in order. No-op when `K = 1`.
    pub fn move_gibbs_sweep<R: Rng>(&mut self, rng: &mut R) {
        if self.state.k == 1 {
            return;
        }
        for i in 0..self.n {
            self.gibbs_site(i, rng);
        }
    }

    /// Absorb/eject move. Returns whether the proposal was accepted.
    pub fn move_absorb_eject<R: Rng>(&mut self, rng: &mut R) -> bool {
        let k = self.state.k;
        let k_max = self.k_max();
        let p_e = eject_probability(k, k_max);
        if rng.random::<f64>() < p_e {
            self.eject(rng)
        } else if k == 1 {
            // Only reachable with k_max = 1: neither direction exists.
            false
        } else {
            self.absorb(rng)
        }
    }

    fn eject<R: Rng>(&mut self, rng: &mut R) -> bool {
        let k = self.state.k;
        let k_max = self.k_max();
        let j1 = rng.random_range(0..k) as u8;
        let p_e: f64 = rng.random();
        let mut z = self.state.z.clone();
        let (mut n1, mut n2) = (0usize, 0usize);
        for l in z.iter_mut().filter(|l| **l == j1) {
            if rng.random::<f64>() < p_e {
                *l = k as u8;
                n2 += 1;
            } else {
                n1 += 1;
            }
        }
        let proposed = self.stats_for(&z, k + 1);
        let log_alpha = self.terms.log_posterior_unchecked(&proposed) - self.log_posterior()
            + eject_log_proposal_ratio(k, k_max, n1, n2);
        let accept = rng.random::<f64>().ln() < log_alpha;
        if accept {
            let m = rng.random_range(0..=k) as u8;
            let top = k as u8;
            if m != top {
                for l in z.iter_mut() {
                    if *l == m {
                        *l = top;
                    } else if *l == top {
                        *l = m;
                    }
                }
                self.stats = self.stats_for(&z, k + 1);
            } else {
                self.stats = proposed;
            }
            self.state = BlockState { z, k: k + 1 };
        }
        self.counters.eject.record(accept);
        accept
    }

    fn absorb<R: Rng>(&mut self, rng: &mut R) -> bool {
        let k = self.state.k;
        debug_assert!(k >= 2);
        let k_max = self.k_max();
        let j1 = rng.random_range(0..k);
        let draw = rng.random_range(0..k - 1);
        let j2 = if draw >= j1 { draw + 1 } else { draw };
        let (j1, j2) = (j1 as u8, j2 as u8);
        let top = (k - 1) as u8;
        let n1 = self.stats.size(j1 as usize) as usize;
        let n2 = self.stats.size(j2 as usize) as usize;
        let z: Vec<u8> = self
            .state
            .z
            .iter()
            .map(|&l| {
                let l = if l == j2 { j1 } else { l };
                if l == top && j2 != top {
                    j2
                } else {
                    l
                }
            })
            .collect();
        let proposed = self.stats_for(&z, k - 1);
        let log_alpha = self.terms.log_posterior_unchecked(&proposed) - self.log_posterior()
            + absorb_log_proposal_ratio(k, k_max, n1, n2);
        let accept = rng.random::<f64>().ln() < log_alpha;
        if accept {
            self.stats = proposed;
            self.state = BlockState { z, k: k - 1 };
        }
        self.counters.absorb.record(accept);
        accept
    }

    /// One iteration: a single uniform draw picks the move type.
    pub fn step<R: Rng>(&mut self, probs: &[f64; 3], rng: &mut R) {
        let u: f64 = rng.random();
        if u < probs[0] {
            self.move_mk(rng);
        } else if u < probs[0] + probs[1] {
            self.move_gibbs_sweep(rng);
        } else {
            self.move_absorb_eject(rng);
        }
    }
}

/// Runs one chain from the single-block state.
pub fn run_sampler(
    r: &ResultsMatrix,
    prior: &PriorConfig,
    cfg: &SamplerConfig,
) -> Result<Trace, SamplerError> {
    run_chain(r, prior, cfg, 0)
}

/// Runs chain `chain` of the stream family rooted at `cfg.seed`.
pub fn run_chain(
    r: &ResultsMatrix,
    prior: &PriorConfig,
    cfg: &SamplerConfig,
    chain: u32,
) -> Result<Trace, SamplerError> {
    cfg.validate()?;
    let mut sampler = Sampler::new(r, prior, BlockState::single_block(r.n()))?;
    let mut rng = chain_rng(cfg.seed, chain);
    let kept = (cfg.iterations - cfg.burn_in).div_ceil(cfg.thin);
    let mut samples = Vec::with_capacity(kept as usize);
    for it in 0..cfg.iterations {
        sampler.step(&cfg.move_probabilities, &mut rng);
        if it >= cfg.burn_in && (it - cfg.burn_in).is_multiple_of(cfg.thin) {
            let s = sampler.state();
            samples.push(Sample {
                iteration: it + 1,
                k: s.k,
                z: s.z.clone(),
            });
        }
    }
    Ok(Trace {
        n: r.n(),
        seed: cfg.seed,
        chain,
        samples,
        counters: sampler.counters,
    })
}
