//! Posterior summaries from relabelled traces, and an exact enumeration
//! oracle for small leagues.
//!
//! Every sample is put in strength order before it is counted: label 0 is the
//! block with the best record against the other blocks (wins plus half the
//! draws, over inter-block games), ties going to the block with more home
//! wins among its own members and then to the block holding the
//! lowest-indexed team. Empty blocks go last. A lone occupied block is the
//! strongest by definition. The ordering depends only on the partition, so
//! any two labellings of the same partition align to the same allocation.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use thiserror::Error;

use crate::league::ResultsMatrix;
use crate::model::{
    count_stats, BlockState, ModelError, PosteriorTerms, PriorConfig, SufficientStats,
};
use crate::relabel::{Permutation, RelabeledSample, RelabeledTrace};

#[derive(Debug, Error, PartialEq)]
pub enum PosteriorError {
    #[error("enumeration needs {states} states, over the budget of {budget}")]
    TooLarge { states: u128, budget: u128 },
    #[error("empty trace")]
    EmptyTrace,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Default enumeration budget for the exact oracle.
pub const ORACLE_BUDGET: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Strength {
    occupied: bool,
    // Win share as the fraction num/den; compared by cross-multiplication.
    num: u64,
    den: u64,
    home_wins_within: u32,
    first_member: usize,
    label: usize,
}

impl Strength {
    fn stronger_first(&self, o: &Strength) -> Ordering {
        o.occupied
            .cmp(&self.occupied)
            .then_with(|| (o.num * self.den).cmp(&(self.num * o.den)))
            .then_with(|| o.home_wins_within.cmp(&self.home_wins_within))
            .then_with(|| self.first_member.cmp(&o.first_member))
            .then_with(|| self.label.cmp(&o.label))
    }
}

/// Win share of block `b` against all other blocks, draws counting half, as
/// `(2 wins + draws, 2 games)`. `None` when `b` plays no inter-block games.
pub fn dominance_score(stats: &SufficientStats, b: usize) -> Option<(u64, u64)> {
    let (mut twice_points, mut games) = (0u64, 0u64);
    for l in 0..stats.k() {
        if l == b {
            continue;
        }
        let home = stats.pair(b, l);
        let away = stats.pair(l, b);
        twice_points += 2 * u64::from(home[0] + away[2]) + u64::from(home[1] + away[1]);
        games += u64::from(home.iter().sum::<u32>() + away.iter().sum::<u32>());
    }
    (games > 0).then_some((twice_points, 2 * games))
}

/// Permutation putting the blocks of `z` in strength order (old -> new).
pub fn identify_strongest(z: &[u8], k: usize, stats: &SufficientStats) -> Permutation {
    let mut first = vec![usize::MAX; k];
    for (i, &l) in z.iter().enumerate().rev() {
        first[l as usize] = i;
    }
    let mut blocks: Vec<Strength> = (0..k)
        .map(|b| {
            let occupied = stats.size(b) > 0;
            let (num, den) = dominance_score(stats, b).unwrap_or((1, 2));
            Strength {
                occupied,
                num: if occupied { num } else { 0 },
                den: if occupied { den } else { 1 },
                home_wins_within: stats.pair(b, b)[0],
                first_member: first[b],
                label: b,
            }
        })
        .collect();
    blocks.sort_by(Strength::stronger_first);
    let mut map = vec![0u8; k];
    for (rank, s) in blocks.iter().enumerate() {
        map[s.label] = rank as u8;
    }
    Permutation::from_map(map).expect("ranks form a permutation")
}

/// Strength-ordered copy of an allocation.
pub fn align_strongest(y: &[u8], n: usize, z: &[u8], k: usize) -> (Vec<u8>, Permutation) {
    let stats = count_stats(y, n, z, k);
    let p = identify_strongest(z, k, &stats);
    (p.apply(z), p)
}

/// Applies strength ordering to every sample of a relabelled trace, composing
/// the recorded permutations.
pub fn strongest_first(trace: &RelabeledTrace, r: &ResultsMatrix) -> RelabeledTrace {
    let y = r.outcome_indices();
    let n = r.n();
    RelabeledTrace {
        n: trace.n,
        samples: trace
            .samples
            .iter()
            .map(|s| {
                let (z, p) = align_strongest(&y, n, &s.z, s.k);
                RelabeledSample {
                    original_index: s.original_index,
                    iteration: s.iteration,
                    k: s.k,
                    z,
                    permutation: s.permutation.then(&p),
                }
            })
            .collect(),
    }
}

/// Allocation probabilities conditional on one value of `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalAllocation {
    pub k: usize,
    pub probability: f64,
    /// `probs[team][block]`, blocks in strength order.
    pub probs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub teams: Vec<String>,
    /// Weight behind the estimate: sample count, or enumerated states.
    pub support: u64,
    /// `k_probs[K - 1]` for `K` in `1..=k_max`.
    pub k_probs: Vec<f64>,
    /// One entry per `K` with positive mass.
    pub alloc_probs_given_k: Vec<ConditionalAllocation>,
    pub top_block_marginal: Vec<f64>,
    pub threshold: f64,
    pub top_block_roster: Vec<String>,
    pub top_block_size: usize,
}

impl PosteriorSummary {
    pub fn given_k(&self, k: usize) -> Option<&ConditionalAllocation> {
        self.alloc_probs_given_k.iter().find(|c| c.k == k)
    }

    pub fn modal_k(&self) -> usize {
        self.k_probs
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &p)| {
                if p > best.1 {
                    (i, p)
                } else {
                    best
                }
            })
            .0
            + 1
    }

    /// `P(z_i = b, K = k)` for every team, block and `K`, flattened per `K`.
    pub fn joint_allocation(&self, k: usize) -> Option<Vec<Vec<f64>>> {
        self.given_k(k).map(|c| {
            c.probs
                .iter()
                .map(|row| row.iter().map(|p| p * c.probability).collect())
                .collect()
        })
    }

    pub fn team_marginal(&self, team: &str) -> Option<f64> {
        self.teams
            .iter()
            .position(|t| t == team)
            .map(|i| self.top_block_marginal[i])
    }
}

#[derive(Debug, Clone)]
struct Accumulator {
    n: usize,
    k_max: usize,
    k_mass: Vec<f64>,
    // [k - 1][team * k + block]
    alloc: Vec<Vec<f64>>,
    total: f64,
}

impl Accumulator {
    fn new(n: usize, k_max: usize) -> Self {
        Accumulator {
            n,
            k_max,
            k_mass: vec![0.0; k_max],
            alloc: (1..=k_max).map(|k| vec![0.0; n * k]).collect(),
            total: 0.0,
        }
    }

    fn add(&mut self, z: &[u8], k: usize, w: f64) {
        self.k_mass[k - 1] += w;
        self.total += w;
        let a = &mut self.alloc[k - 1];
        for (i, &l) in z.iter().enumerate() {
            a[i * k + l as usize] += w;
        }
    }

    fn finish(self, teams: &[String], threshold: f64, support: u64) -> PosteriorSummary {
        let n = self.n;
        let k_probs: Vec<f64> = self.k_mass.iter().map(|m| m / self.total).collect();
        let mut given = Vec::new();
        let mut marginal = vec![0.0; n];
        for k in 1..=self.k_max {
            let mass = self.k_mass[k - 1];
            if mass <= 0.0 {
                continue;
            }
            let a = &self.alloc[k - 1];
            let probs: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..k).map(|b| a[i * k + b] / mass).collect())
                .collect();
            // Averaging the conditional top-block probabilities over K.
            for i in 0..n {
                marginal[i] += probs[i][0] * k_probs[k - 1];
            }
            given.push(ConditionalAllocation {
                k,
                probability: k_probs[k - 1],
                probs,
            });
        }
        let roster: Vec<String> = (0..n)
            .filter(|&i| marginal[i] > threshold)
            .map(|i| teams[i].clone())
            .collect();
        PosteriorSummary {
            teams: teams.to_vec(),
            support,
            k_probs,
            alloc_probs_given_k: given,
            top_block_marginal: marginal,
            threshold,
            top_block_size: roster.len(),
            top_block_roster: roster,
        }
    }
}

/// Summarises a strength-ordered trace (see [`strongest_first`]).
pub fn summarize(
    trace: &RelabeledTrace,
    teams: &[String],
    k_max: usize,
    threshold: f64,
) -> Result<PosteriorSummary, PosteriorError> {
    if trace.samples.is_empty() {
        return Err(PosteriorError::EmptyTrace);
    }
    if teams.len() != trace.n {
        return Err(PosteriorError::InvalidInput(format!(
            "{} team names for a {}-team trace",
            teams.len(),
            trace.n
        )));
    }
    let width = trace
        .samples
        .iter()
        .map(|s| s.k)
        .max()
        .unwrap_or(1)
        .max(k_max);
    let mut acc = Accumulator::new(trace.n, width);
    for s in &trace.samples {
        acc.add(&s.z, s.k, 1.0);
    }
    let mut out = acc.finish(teams, threshold, trace.samples.len() as u64);
    out.k_probs.truncate(width.max(1));
    Ok(out)
}

/// Share of samples in which each team carries the strongest label.
pub fn pooled_top_block_frequency(trace: &RelabeledTrace) -> Vec<f64> {
    let mut c = vec![0u64; trace.n];
    for s in &trace.samples {
        for (i, &l) in s.z.iter().enumerate() {
            c[i] += u64::from(l == 0);
        }
    }
    let total = trace.samples.len() as f64;
    c.into_iter().map(|x| x as f64 / total).collect()
}

/// Highest-posterior sampled allocation at the modal `K`, in strength order.
pub fn map_state(
    trace: &RelabeledTrace,
    r: &ResultsMatrix,
    prior: &PriorConfig,
) -> Result<(BlockState, f64), PosteriorError> {
    if trace.samples.is_empty() {
        return Err(PosteriorError::EmptyTrace);
    }
    let width = trace.samples.iter().map(|s| s.k).max().unwrap_or(1);
    let mut counts = vec![0usize; width + 1];
    for s in &trace.samples {
        counts[s.k] += 1;
    }
    let modal = (1..=width)
        .max_by_key(|&k| (counts[k], std::cmp::Reverse(k)))
        .unwrap_or(1);
    let terms = PosteriorTerms::new(r.n(), prior)?;
    let y = r.outcome_indices();
    let mut best: Option<(f64, &[u8])> = None;
    for s in trace.samples.iter().filter(|s| s.k == modal) {
        let lp = terms.log_posterior(&count_stats(&y, r.n(), &s.z, s.k))?;
        if best.is_none_or(|(b, _)| lp > b) {
            best = Some((lp, &s.z));
        }
    }
    let (lp, z) = best.expect("modal K has samples");
    let (z, _) = align_strongest(&y, r.n(), z, modal);
    Ok((BlockState { z, k: modal }, lp))
}

/// Posterior of one block pair's outcome probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairPosterior {
    /// One-based home and away block labels.
    pub home_block: usize,
    pub away_block: usize,
    pub counts: [u32; 3],
    pub alpha: [f64; 3],
    pub mean: [f64; 3],
    pub sd: [f64; 3],
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionPosterior {
    pub k: usize,
    pub credible_mass: f64,
    pub pairs: Vec<PairPosterior>,
}

impl InteractionPosterior {
    /// Pair for one-based block labels.
    pub fn pair(&self, home: usize, away: usize) -> &PairPosterior {
        &self.pairs[(home - 1) * self.k + (away - 1)]
    }
}

/// Inverse CDF of Beta(a, b) by bisection to `tol` on the argument.
pub fn beta_quantile(a: f64, b: f64, q: f64, tol: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    if q >= 1.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if beta_reg(a, b, mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Dirichlet posterior of every block pair's outcome probabilities given an
/// allocation, with central 95% intervals from the Beta marginals.
pub fn interaction_posterior(
    r: &ResultsMatrix,
    state: &BlockState,
    beta: [f64; 3],
) -> Result<InteractionPosterior, PosteriorError> {
    let stats = crate::model::compute_stats(r, state)?;
    let k = state.k;
    let mut pairs = Vec::with_capacity(k * k);
    for h in 0..k {
        for a in 0..k {
            let counts = stats.pair(h, a);
            let alpha = [0, 1, 2].map(|w| f64::from(counts[w]) + beta[w]);
            let a0: f64 = alpha.iter().sum();
            let mean = alpha.map(|x| x / a0);
            let sd = alpha.map(|x| (x * (a0 - x) / (a0 * a0 * (a0 + 1.0))).sqrt());
            let lower = alpha.map(|x| beta_quantile(x, a0 - x, 0.025, 1e-10));
            let upper = alpha.map(|x| beta_quantile(x, a0 - x, 0.975, 1e-10));
            pairs.push(PairPosterior {
                home_block: h + 1,
                away_block: a + 1,
                counts,
                alpha,
                mean,
                sd,
                lower,
                upper,
            });
        }
    }
    Ok(InteractionPosterior {
        k,
        credible_mass: 0.95,
        pairs,
    })
}

/// Number of `(z, K)` states with `K <= k_max` over `n` teams.
pub fn state_count(n: usize, k_max: usize) -> u128 {
    (1..=k_max as u128)
        .map(|k| k.checked_pow(n as u32).unwrap_or(u128::MAX))
        .fold(0u128, |a, b| a.saturating_add(b))
}

/// Visits every `(z, K)` with its unnormalised log posterior.
pub fn for_each_state<F>(
    r: &ResultsMatrix,
    prior: &PriorConfig,
    budget: u128,
    mut f: F,
) -> Result<(), PosteriorError>
where
    F: FnMut(&[u8], usize, f64),
{
    let n = r.n();
    let states = state_count(n, prior.k_max);
    if states > budget {
        return Err(PosteriorError::TooLarge { states, budget });
    }
    let terms = PosteriorTerms::new(n, prior)?;
    let y = r.outcome_indices();
    let mut z = vec![0u8; n];
    for k in 1..=prior.k_max {
        z.fill(0);
        loop {
            let lp = terms.log_posterior_unchecked(&count_stats(&y, n, &z, k));
            f(&z, k, lp);
            // Odometer increment over {0..k}^n.
            let mut i = 0;
            while i < n {
                z[i] += 1;
                if (z[i] as usize) < k {
                    break;
                }
                z[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    Ok(())
}

/// Exact normalised posterior over all labelled states.
pub fn exact_state_distribution(
    r: &ResultsMatrix,
    prior: &PriorConfig,
) -> Result<Vec<(BlockState, f64)>, PosteriorError> {
    let mut states = Vec::new();
    for_each_state(r, prior, ORACLE_BUDGET, |z, k, lp| {
        states.push((BlockState { z: z.to_vec(), k }, lp));
    })?;
    let max = states.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = states.iter().map(|s| (s.1 - max).exp()).sum();
    for s in &mut states {
        s.1 = (s.1 - max).exp() / total;
    }
    Ok(states)
}

/// Exact counterpart of the sampler pipeline's summary.
pub fn exact_posterior_oracle(
    r: &ResultsMatrix,
    prior: &PriorConfig,
    threshold: f64,
) -> Result<PosteriorSummary, PosteriorError> {
    exact_posterior_oracle_with_budget(r, prior, threshold, ORACLE_BUDGET)
}

pub fn exact_posterior_oracle_with_budget(
    r: &ResultsMatrix,
    prior: &PriorConfig,
    threshold: f64,
    budget: u128,
) -> Result<PosteriorSummary, PosteriorError> {
    let n = r.n();
    let y = r.outcome_indices();
    // Two passes: find the maximum, then accumulate shifted weights.
    let mut max = f64::NEG_INFINITY;
    for_each_state(r, prior, budget, |_, _, lp| max = max.max(lp))?;
    let mut acc = Accumulator::new(n, prior.k_max);
    let mut count = 0u64;
    for_each_state(r, prior, budget, |z, k, lp| {
        let (aligned, _) = align_strongest(&y, n, z, k);
        acc.add(&aligned, k, (lp - max).exp());
        count += 1;
    })?;
    Ok(acc.finish(r.teams(), threshold, count))
}

/// Top-block size per season, in input order.
pub fn top_block_size_series<'a, I>(summaries: I) -> Vec<(String, usize)>
where
    I: IntoIterator<Item = (&'a str, &'a PosteriorSummary)>,
{
    summaries
        .into_iter()
        .map(|(season, s)| (season.to_string(), s.top_block_size))
        .collect()
}

pub fn top_block_size_csv(series: &[(String, usize)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["season", "top_block_size"])
        .expect("in-memory write");
    for (season, size) in series {
        w.write_record([season.as_str(), &size.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// Long-format `(season, team, marginal)` rows.
pub fn marginals_csv<'a, I>(summaries: I) -> String
where
    I: IntoIterator<Item = (&'a str, &'a PosteriorSummary)>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["season", "team", "top_block_marginal"])
        .expect("in-memory write");
    for (season, s) in summaries {
        for (team, m) in s.teams.iter().zip(&s.top_block_marginal) {
            w.write_record([season, team.as_str(), &format!("{m:.6}")])
                .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}
