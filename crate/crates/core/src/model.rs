//! Block states, sufficient statistics and the collapsed log-posterior.
//!
//! Labels are zero-based in memory (`0..k`) and one-based wherever they are
//! shown to a user or written to disk.
//!
//! With the Dirichlet weights and interaction probabilities integrated out,
//! the joint posterior over `(z, K)` factorises into
//!
//! * one Dirichlet-multinomial term per ordered block pair,
//! * one term per block size,
//! * a term depending on `K` alone (allocation normaliser plus prior on `K`).
//!
//! [`PosteriorTerms`] precomputes all three so that move acceptance ratios can
//! be assembled from the handful of terms a move actually touches.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::league::ResultsMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Prior on the number of blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KPrior {
    /// Poisson(1) truncated to `1..=k_max`: mass proportional to `1/K!`.
    #[serde(rename = "poisson")]
    TruncatedPoisson,
    /// Equal mass on `1..=k_max`.
    Uniform,
}

impl KPrior {
    /// Unnormalised log prior mass of `k`.
    pub fn ln_mass(self, k: usize) -> f64 {
        match self {
            KPrior::TruncatedPoisson => -ln_factorial(k as u64),
            KPrior::Uniform => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig {
    pub k_prior: KPrior,
    pub k_max: usize,
    /// Symmetric Dirichlet concentration on the block weights.
    pub gamma0: f64,
    /// Dirichlet concentrations on (win, draw, loss) for every block pair.
    pub beta: [f64; 3],
}

impl Default for PriorConfig {
    fn default() -> Self {
        PriorConfig {
            k_prior: KPrior::TruncatedPoisson,
            k_max: 20,
            gamma0: 1.0,
            beta: [1.0; 3],
        }
    }
}

impl PriorConfig {
    pub fn new(k_prior: KPrior, k_max: usize) -> Result<Self, ModelError> {
        let p = PriorConfig {
            k_prior,
            k_max,
            ..PriorConfig::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.k_max < 1 {
            return Err(ModelError::InvalidConfig("k_max must be at least 1".into()));
        }
        // Labels are stored as bytes.
        if self.k_max > 255 {
            return Err(ModelError::InvalidConfig(
                "k_max must be at most 255".into(),
            ));
        }
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return Err(ModelError::InvalidConfig(format!(
                "gamma0 must be positive, got {}",
                self.gamma0
            )));
        }
        if self.beta.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
            return Err(ModelError::InvalidConfig(format!(
                "beta components must be positive, got {:?}",
                self.beta
            )));
        }
        Ok(())
    }

    /// True when the unit hyperparameters admit the factorial closed form.
    pub fn is_unit(&self) -> bool {
        self.gamma0 == 1.0 && self.beta == [1.0; 3]
    }
}

/// Allocation of `N` teams to `k` blocks (zero-based labels, empties allowed).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockState {
    pub z: Vec<u8>,
    pub k: usize,
}

impl BlockState {
    pub fn new(z: Vec<u8>, k: usize) -> Result<Self, ModelError> {
        let s = BlockState { z, k };
        s.validate()?;
        Ok(s)
    }

    /// All teams in a single block.
    pub fn single_block(n: usize) -> Self {
        BlockState {
            z: vec![0; n],
            k: 1,
        }
    }

    /// Builds a state from one-based labels.
    pub fn from_one_based(labels: &[usize], k: usize) -> Result<Self, ModelError> {
        let z = labels
            .iter()
            .map(|&l| {
                if l == 0 || l > k || l > 256 {
                    Err(ModelError::InvalidState(format!(
                        "label {l} outside 1..={k}"
                    )))
                } else {
                    Ok((l - 1) as u8)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        BlockState::new(z, k)
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.z.iter().map(|&l| l as usize + 1).collect()
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.k == 0 {
            return Err(ModelError::InvalidState("k must be at least 1".into()));
        }
        if let Some((i, &l)) = self
            .z
            .iter()
            .enumerate()
            .find(|(_, &l)| l as usize >= self.k)
        {
            return Err(ModelError::InvalidState(format!(
                "team {i} has label {} but k = {}",
                l as usize + 1,
                self.k
            )));
        }
        Ok(())
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.z {
            sizes[l as usize] += 1;
        }
        sizes
    }

    pub fn non_empty_blocks(&self) -> usize {
        self.block_sizes().iter().filter(|&&s| s > 0).count()
    }
}

/// Outcome counts per ordered block pair and block sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SufficientStats {
    k: usize,
    n: usize,
    // Row-major k x k, indexed [home block][away block].
    counts: Vec<[u32; 3]>,
    sizes: Vec<u32>,
}

impl SufficientStats {
    pub fn empty(n: usize, k: usize) -> Self {
        SufficientStats {
            k,
            n,
            counts: vec![[0; 3]; k * k],
            sizes: vec![0; k],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Counts of (home win, draw, home loss) for block `h` at home to block `a`.
    pub fn pair(&self, h: usize, a: usize) -> [u32; 3] {
        self.counts[h * self.k + a]
    }

    pub fn pair_mut(&mut self, h: usize, a: usize) -> &mut [u32; 3] {
        &mut self.counts[h * self.k + a]
    }

    pub fn size(&self, b: usize) -> u32 {
        self.sizes[b]
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn total_games(&self) -> u64 {
        self.counts
            .iter()
            .map(|c| c.iter().map(|&x| u64::from(x)).sum::<u64>())
            .sum()
    }

    /// Appends an empty block with label `k`.
    pub fn push_empty_block(&mut self) {
        let k = self.k;
        let mut counts = vec![[0; 3]; (k + 1) * (k + 1)];
        for h in 0..k {
            counts[h * (k + 1)..h * (k + 1) + k].copy_from_slice(&self.counts[h * k..h * k + k]);
        }
        self.counts = counts;
        self.sizes.push(0);
        self.k = k + 1;
    }

    /// Removes the top label, which must be empty.
    pub fn pop_empty_block(&mut self) {
        let k = self.k;
        assert!(
            k > 1 && self.sizes[k - 1] == 0,
            "top block is not removable"
        );
        let mut counts = vec![[0; 3]; (k - 1) * (k - 1)];
        for h in 0..k - 1 {
            counts[h * (k - 1)..h * (k - 1) + k - 1]
                .copy_from_slice(&self.counts[h * k..h * k + k - 1]);
        }
        self.counts = counts;
        self.sizes.pop();
        self.k = k - 1;
    }
}

pub fn compute_stats(r: &ResultsMatrix, s: &BlockState) -> Result<SufficientStats, ModelError> {
    if s.n() != r.n() {
        return Err(ModelError::InvalidState(format!(
            "allocation has {} entries for {} teams",
            s.n(),
            r.n()
        )));
    }
    s.validate()?;
    Ok(count_stats(&r.outcome_indices(), r.n(), &s.z, s.k))
}

/// Counts from row-major outcome indices (see [`ResultsMatrix::outcome_indices`])
/// and an allocation already known to be valid for `k`.
pub fn count_stats(y: &[u8], n: usize, z: &[u8], k: usize) -> SufficientStats {
    let mut st = SufficientStats::empty(n, k);
    for &l in z {
        st.sizes[l as usize] += 1;
    }
    for i in 0..n {
        let row = i * n;
        let zi = z[i] as usize * k;
        for j in 0..n {
            if i != j {
                st.counts[zi + z[j] as usize][y[row + j] as usize] += 1;
            }
        }
    }
    st
}

/// Outcome counts of one team's games, grouped by the opponent's block.
///
/// `home[l]` holds the team's home results against members of block `l`,
/// `away[l]` the results of games where a member of `l` hosted the team.
/// Both are in home-side coding, ready to be added to pair counts.
#[derive(Debug, Clone)]
pub struct TeamContacts {
    pub home: Vec<[u32; 3]>,
    pub away: Vec<[u32; 3]>,
}

impl TeamContacts {
    pub fn new(y: &[u8], n: usize, z: &[u8], k: usize, team: usize) -> Self {
        let mut c = TeamContacts {
            home: vec![[0; 3]; k],
            away: vec![[0; 3]; k],
        };
        c.fill(y, n, z, k, team);
        c
    }

    pub fn fill(&mut self, y: &[u8], n: usize, z: &[u8], k: usize, team: usize) {
        self.home.clear();
        self.home.resize(k, [0; 3]);
        self.away.clear();
        self.away.resize(k, [0; 3]);
        for j in 0..n {
            if j == team {
                continue;
            }
            let l = z[j] as usize;
            self.home[l][y[team * n + j] as usize] += 1;
            self.away[l][y[j * n + team] as usize] += 1;
        }
    }
}

fn add3(a: &mut [u32; 3], b: &[u32; 3]) {
    for w in 0..3 {
        a[w] += b[w];
    }
}

fn sub3(a: &mut [u32; 3], b: &[u32; 3]) {
    for w in 0..3 {
        a[w] -= b[w];
    }
}

/// Moves one team between blocks in place given its contact counts.
/// Touches only pairs in rows and columns `from` and `to`.
pub fn apply_move(stats: &mut SufficientStats, c: &TeamContacts, from: usize, to: usize) {
    if from == to {
        return;
    }
    let k = stats.k;
    for l in 0..k {
        sub3(stats.pair_mut(from, l), &c.home[l]);
        sub3(stats.pair_mut(l, from), &c.away[l]);
        add3(stats.pair_mut(to, l), &c.home[l]);
        add3(stats.pair_mut(l, to), &c.away[l]);
    }
    stats.sizes[from] -= 1;
    stats.sizes[to] += 1;
}

/// Statistics after relabelling team `i` to `new_label`, computed in `O(N + K)`.
pub fn stats_delta_move(
    stats: &SufficientStats,
    r: &ResultsMatrix,
    s: &BlockState,
    i: usize,
    new_label: usize,
) -> Result<SufficientStats, ModelError> {
    if new_label >= s.k || stats.k != s.k {
        return Err(ModelError::InvalidState(format!(
            "label {} outside 1..={}",
            new_label + 1,
            s.k
        )));
    }
    if i >= s.n() {
        return Err(ModelError::InvalidState(format!(
            "team index {i} out of range"
        )));
    }
    let mut out = stats.clone();
    let c = TeamContacts::new(&r.outcome_indices(), r.n(), &s.z, s.k, i);
    apply_move(&mut out, &c, s.z[i] as usize, new_label);
    Ok(out)
}

/// Precomputed pieces of the collapsed log-posterior for a fixed `N` and
/// prior.
#[derive(Debug, Clone)]
pub struct PosteriorTerms {
    n: usize,
    prior: PriorConfig,
    // ln Gamma(x + beta_w) - ln Gamma(beta_w), indexed by count x.
    outcome: [Vec<f64>; 3],
    // ln Gamma(x + sum beta) - ln Gamma(sum beta).
    total: Vec<f64>,
    // ln Gamma(n + gamma0) - ln Gamma(gamma0).
    size: Vec<f64>,
    // Everything that depends on K alone, indexed by K (entry 0 unused).
    k_term: Vec<f64>,
}

impl PosteriorTerms {
    pub fn new(n: usize, prior: &PriorConfig) -> Result<Self, ModelError> {
        prior.validate()?;
        let max_games = n * n.saturating_sub(1);
        let unit = prior.is_unit();
        let table = |shift: f64| -> Vec<f64> {
            (0..=max_games)
                .map(|x| {
                    if unit && shift == 1.0 {
                        ln_factorial(x as u64)
                    } else if unit && shift == 3.0 {
                        ln_factorial(x as u64 + 2) - std::f64::consts::LN_2
                    } else {
                        ln_gamma(x as f64 + shift) - ln_gamma(shift)
                    }
                })
                .collect()
        };
        let outcome = [
            table(prior.beta[0]),
            table(prior.beta[1]),
            table(prior.beta[2]),
        ];
        let total = table(prior.beta.iter().sum());
        let size = (0..=n)
            .map(|x| {
                if unit {
                    ln_factorial(x as u64)
                } else {
                    ln_gamma(x as f64 + prior.gamma0) - ln_gamma(prior.gamma0)
                }
            })
            .collect();
        let k_term = (0..=prior.k_max)
            .map(|k| {
                if k == 0 {
                    f64::NAN
                } else if unit {
                    ln_factorial(k as u64 - 1) - ln_factorial((n + k - 1) as u64)
                        + prior.k_prior.ln_mass(k)
                } else {
                    let kg = k as f64 * prior.gamma0;
                    ln_gamma(kg) - ln_gamma(n as f64 + kg) + prior.k_prior.ln_mass(k)
                }
            })
            .collect();
        Ok(PosteriorTerms {
            n,
            prior: prior.clone(),
            outcome,
            total,
            size,
            k_term,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prior(&self) -> &PriorConfig {
        &self.prior
    }

    /// Dirichlet-multinomial log marginal of one block pair; 0 when empty.
    #[inline]
    pub fn pair(&self, c: &[u32; 3]) -> f64 {
        let t = (c[0] + c[1] + c[2]) as usize;
        self.outcome[0][c[0] as usize]
            + self.outcome[1][c[1] as usize]
            + self.outcome[2][c[2] as usize]
            - self.total[t]
    }

    #[inline]
    pub fn size(&self, n_k: u32) -> f64 {
        self.size[n_k as usize]
    }

    #[inline]
    pub fn k_term(&self, k: usize) -> f64 {
        self.k_term[k]
    }

    pub fn log_posterior(&self, stats: &SufficientStats) -> Result<f64, ModelError> {
        if stats.k > self.prior.k_max {
            return Err(ModelError::InvalidState(format!(
                "k = {} exceeds k_max = {}",
                stats.k, self.prior.k_max
            )));
        }
        if stats.n != self.n {
            return Err(ModelError::InvalidState(format!(
                "statistics for {} teams scored with terms for {}",
                stats.n, self.n
            )));
        }
        Ok(self.log_posterior_unchecked(stats))
    }

    pub fn log_posterior_unchecked(&self, stats: &SufficientStats) -> f64 {
        let pairs: f64 = stats.counts.iter().map(|c| self.pair(c)).sum();
        let sizes: f64 = stats.sizes.iter().map(|&s| self.size(s)).sum();
        pairs + sizes + self.k_term(stats.k)
    }
}

/// Unnormalised collapsed log-posterior of the state summarised by `stats`.
///
/// Unit hyperparameters go through the factorial closed form; anything else
/// through the general log-gamma form.
pub fn log_collapsed_posterior(
    stats: &SufficientStats,
    prior: &PriorConfig,
) -> Result<f64, ModelError> {
    prior.validate()?;
    if stats.k > prior.k_max {
        return Err(ModelError::InvalidState(format!(
            "k = {} exceeds k_max = {}",
            stats.k, prior.k_max
        )));
    }
    if prior.is_unit() {
        Ok(log_posterior_closed_form(stats, prior.k_prior))
    } else {
        Ok(log_posterior_general_form(stats, prior))
    }
}

/// Factorial form valid for `gamma0 = 1`, `beta = (1, 1, 1)`:
/// `prod 2 * a! b! c! / (a+b+c+2)!  *  prod n_k!  *  (K-1)! / (N+K-1)!  *  prior(K)`.
pub fn log_posterior_closed_form(stats: &SufficientStats, k_prior: KPrior) -> f64 {
    let lf = |x: u32| ln_factorial(u64::from(x));
    let mut acc = 0.0;
    for c in &stats.counts {
        acc += std::f64::consts::LN_2 + lf(c[0]) + lf(c[1]) + lf(c[2])
            - ln_factorial(u64::from(c[0] + c[1] + c[2]) + 2);
    }
    for &s in &stats.sizes {
        acc += lf(s);
    }
    let k = stats.k as u64;
    acc + ln_factorial(k - 1) - ln_factorial(stats.n as u64 + k - 1) + k_prior.ln_mass(stats.k)
}

/// General Beta-function form for arbitrary positive hyperparameters.
pub fn log_posterior_general_form(stats: &SufficientStats, prior: &PriorConfig) -> f64 {
    let b = prior.beta;
    let bsum: f64 = b.iter().sum();
    let norm = ln_gamma(bsum) - b.iter().map(|&x| ln_gamma(x)).sum::<f64>();
    let mut acc = 0.0;
    for c in &stats.counts {
        let t: f64 = c.iter().map(|&x| f64::from(x)).sum();
        acc += norm;
        for w in 0..3 {
            acc += ln_gamma(f64::from(c[w]) + b[w]);
        }
        acc -= ln_gamma(t + bsum);
    }
    let g = prior.gamma0;
    let k = stats.k as f64;
    acc += ln_gamma(k * g) - k * ln_gamma(g);
    for &s in &stats.sizes {
        acc += ln_gamma(f64::from(s) + g);
    }
    acc -= ln_gamma(stats.n as f64 + k * g);
    acc + prior.k_prior.ln_mass(stats.k)
}
