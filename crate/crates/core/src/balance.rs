//! Classical points-based balance indices and their agreement with the
//! block-model readout.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::league::PointsTable;

#[derive(Debug, Error, PartialEq)]
pub enum BalanceError {
    #[error("no points were awarded; shares are undefined")]
    DegenerateSeason,
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// `n * sum p_i^2`: 1 for equal shares, larger when points concentrate.
pub fn hhicb(pt: &PointsTable) -> Result<f64, BalanceError> {
    if pt.total_points() == 0 {
        return Err(BalanceError::DegenerateSeason);
    }
    // Integer sums keep equal shares at exactly 1.
    let total = pt.total_points() as f64;
    let sq: f64 = pt.points.iter().map(|&x| f64::from(x) * f64::from(x)).sum();
    Ok(pt.n() as f64 * sq / (total * total))
}

/// Normalised Shannon entropy of the shares, plus whether any zero share had
/// to be skipped (`0 log 0 = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    pub value: f64,
    pub had_zero_share: bool,
}

/// `(sum p_i log p_i) / log(1/n)`: 1 for equal shares.
pub fn relative_entropy(pt: &PointsTable) -> Result<EntropyValue, BalanceError> {
    if pt.total_points() == 0 {
        return Err(BalanceError::DegenerateSeason);
    }
    // Written as 1 - sum p_i ln(n p_i) / ln n, with n p_i formed from integer
    // points, so equal shares give exactly 1.
    let n = pt.n() as f64;
    let total = pt.total_points() as f64;
    let mut had_zero_share = false;
    let mut acc = 0.0;
    for &x in &pt.points {
        if x > 0 {
            let x = f64::from(x);
            acc += x / total * (n * x / total).ln();
        } else {
            had_zero_share = true;
        }
    }
    Ok(EntropyValue {
        value: 1.0 - acc / n.ln(),
        had_zero_share,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub season: String,
    pub hhicb: f64,
    pub relative_entropy: f64,
    pub zero_share_warning: bool,
}

pub fn index_report(season: &str, pt: &PointsTable) -> Result<IndexReport, BalanceError> {
    let e = relative_entropy(pt)?;
    Ok(IndexReport {
        season: season.to_string(),
        hhicb: hhicb(pt)?,
        relative_entropy: e.value,
        zero_share_warning: e.had_zero_share,
    })
}

/// Average ranks (one-based), ties sharing the mean of their positions.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &ix in &idx[i..=j] {
            out[ix] = r;
        }
        i = j + 1;
    }
    out
}

/// Pearson correlation; `None` when either series has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation; `None` when undefined.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() {
        return None;
    }
    pearson(&ranks(x), &ranks(y))
}

/// Least-squares slope of `y` on `x`; `None` when `x` is constant.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(
        x.iter()
            .zip(y)
            .map(|(a, b)| (a - mx) * (b - my))
            .sum::<f64>()
            / sxx,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayRow {
    pub season: String,
    pub hhicb: f64,
    pub relative_entropy: f64,
    pub pi_k1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub rows: Vec<OverlayRow>,
    /// `None` when a series is constant.
    pub spearman_hhicb_pi_k1: Option<f64>,
    pub spearman_entropy_pi_k1: Option<f64>,
}

/// Pairs each season's indices with its posterior probability of a single
/// block.
pub fn index_vs_posterior(
    reports: &[IndexReport],
    pi_k1: &[f64],
) -> Result<CorrelationReport, BalanceError> {
    if reports.len() != pi_k1.len() {
        return Err(BalanceError::LengthMismatch(reports.len(), pi_k1.len()));
    }
    let rows: Vec<OverlayRow> = reports
        .iter()
        .zip(pi_k1)
        .map(|(r, &p)| OverlayRow {
            season: r.season.clone(),
            hhicb: r.hhicb,
            relative_entropy: r.relative_entropy,
            pi_k1: p,
        })
        .collect();
    let h: Vec<f64> = rows.iter().map(|r| r.hhicb).collect();
    let e: Vec<f64> = rows.iter().map(|r| r.relative_entropy).collect();
    Ok(CorrelationReport {
        spearman_hhicb_pi_k1: spearman(&h, pi_k1),
        spearman_entropy_pi_k1: spearman(&e, pi_k1),
        rows,
    })
}
