//! Per-season summary documents and batch tables.

use std::collections::BTreeMap;

use block_league::league::ResultsMatrix;
use block_league::model::PriorConfig;
use block_league::posterior::{
    interaction_posterior, map_state, strongest_first, summarize, InteractionPosterior,
    PosteriorSummary,
};
use block_league::relabel::relabel_trace;
use block_league::sampler::Trace;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::manifest::AcceptanceRates;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapReport {
    pub k: usize,
    /// One-based block per team, strongest block first.
    pub z: Vec<usize>,
    pub log_posterior: f64,
    pub blocks: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonReport {
    pub manifest_hash: String,
    pub season: String,
    pub samples: usize,
    pub summary: PosteriorSummary,
    pub map: MapReport,
    pub interaction: InteractionPosterior,
    pub acceptance: AcceptanceRates,
}

impl SeasonReport {
    pub fn from_trace(
        season: &str,
        r: &ResultsMatrix,
        trace: &Trace,
        prior: &PriorConfig,
        threshold: f64,
        manifest_hash: &str,
    ) -> Result<Self, CliError> {
        if trace.n != r.n() {
            return Err(CliError::Input(format!(
                "trace covers {} teams but the season has {}",
                trace.n,
                r.n()
            )));
        }
        let aligned = strongest_first(&relabel_trace(trace)?, r);
        let summary = summarize(&aligned, r.teams(), prior.k_max, threshold)?;
        let (state, log_posterior) = map_state(&aligned, r, prior)?;
        let interaction = interaction_posterior(r, &state, prior.beta)?;
        let mut blocks = vec![Vec::new(); state.k];
        for (team, &l) in r.teams().iter().zip(&state.z) {
            blocks[l as usize].push(team.clone());
        }
        blocks.retain(|b| !b.is_empty());
        Ok(SeasonReport {
            manifest_hash: manifest_hash.to_string(),
            season: season.to_string(),
            samples: trace.samples.len(),
            map: MapReport {
                k: state.k,
                z: state.one_based(),
                log_posterior,
                blocks,
            },
            summary,
            interaction,
            acceptance: AcceptanceRates::from(&trace.counters),
        })
    }
}

/// `season,k1..kK` with percentages to two decimals.
pub fn k_table_csv(rows: &[(&str, &PosteriorSummary)], k_max: usize) -> String {
    let width = rows
        .iter()
        .map(|(_, s)| s.k_probs.len())
        .max()
        .unwrap_or(0)
        .max(k_max);
    let mut out = String::from("season");
    for k in 1..=width {
        out.push_str(&format!(",k{k}"));
    }
    out.push('\n');
    for (season, s) in rows {
        out.push_str(season);
        for k in 0..width {
            out.push_str(&format!(
                ",{:.2}",
                100.0 * s.k_probs.get(k).copied().unwrap_or(0.0)
            ));
        }
        out.push('\n');
    }
    out
}

/// Seasons by teams: `1` in the top block, `0` outside it, empty when the
/// team did not play that season. Teams with the most top-block seasons
/// come first.
pub fn roster_csv(rows: &[(&str, &PosteriorSummary)]) -> String {
    let mut seasons_in: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, s) in rows {
        for t in &s.teams {
            seasons_in.entry(t.as_str()).or_insert(0);
        }
        for t in &s.top_block_roster {
            *seasons_in.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let mut teams: Vec<(&str, usize)> = seasons_in.into_iter().collect();
    teams.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let quote = |t: &str| {
        if t.contains([',', '"']) {
            format!("\"{}\"", t.replace('"', "\"\""))
        } else {
            t.to_string()
        }
    };
    let mut out = String::from("season");
    for (t, _) in &teams {
        out.push(',');
        out.push_str(&quote(t));
    }
    out.push_str(",top_block_size\n");
    for (season, s) in rows {
        out.push_str(season);
        for (t, _) in &teams {
            out.push(',');
            if s.top_block_roster.iter().any(|x| x == t) {
                out.push('1');
            } else if s.teams.iter().any(|x| x == t) {
                out.push('0');
            }
        }
        out.push_str(&format!(",{}\n", s.top_block_size));
    }
    out
}
