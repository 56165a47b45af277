//! The smaller subcommands: summarize, indices, simulate and oracle.

use std::path::Path;

use block_league::balance::{index_report, index_vs_posterior, least_squares_slope, IndexReport};
use block_league::league::{load_season, points_table, PointsScheme};
use block_league::posterior::{exact_posterior_oracle, state_count, PosteriorSummary};
use block_league::sampler::{chain_rng, Trace};
use block_league::simulate::{
    labels_from_sizes, separation_probabilities, simulate_season, Planted,
};
use serde::{Deserialize, Serialize};

use crate::args::{season_id, IndicesArgs, OracleArgs, SimulateArgs, SummarizeArgs};
use crate::error::CliError;
use crate::manifest::{write_file, InputFile, RunManifest};
use crate::report::SeasonReport;

pub fn summarize(args: &SummarizeArgs) -> Result<(), CliError> {
    let prior = args.model.prior()?;
    let inputs = vec![
        InputFile::read(&args.trace)?,
        InputFile::read(&args.season)?,
    ];
    let settings = serde_json::json!({
        "format": args.format,
        "prior": prior,
        "threshold": args.threshold,
    });
    let manifest = RunManifest::new("summarize", inputs, settings, &args.out);
    let r = load_season(&args.season, args.format.resolve())?;
    let file = std::fs::File::open(&args.trace)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.trace.display())))?;
    let trace = Trace::from_text(std::io::BufReader::new(file))?;
    let season = season_id(&args.season);
    let report =
        SeasonReport::from_trace(&season, &r, &trace, &prior, args.threshold, &manifest.hash)?;
    write_file(
        &args.out.join(format!("{season}.summary.json")),
        &(serde_json::to_string_pretty(&report)? + "\n"),
    )?;
    manifest.write(&args.out)
}

#[derive(Debug, Serialize, Deserialize)]
struct Correlation {
    manifest_hash: String,
    seasons: usize,
    spearman_hhicb_pi_k1: Option<f64>,
    spearman_entropy_pi_k1: Option<f64>,
    /// Least-squares slopes against season position.
    hhicb_trend: Option<f64>,
    entropy_trend: Option<f64>,
}

fn show(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".into(), |v| format!("{v:.4}"))
}

pub fn indices(args: &IndicesArgs) -> Result<(), CliError> {
    let scheme = PointsScheme::new(args.points_scheme)?;
    let paths = args.input.paths()?;
    let inputs = paths
        .iter()
        .map(|p| InputFile::read(p))
        .collect::<Result<Vec<_>, _>>()?;
    let settings = serde_json::json!({
        "format": args.input.format,
        "points_per_win": scheme.points_per_win(),
        "with_summaries": args.summaries.is_some(),
    });
    let manifest = RunManifest::new("indices", inputs, settings, &args.out);

    let mut reports: Vec<IndexReport> = Vec::new();
    let mut failed: Option<CliError> = None;
    for p in &paths {
        let season = season_id(p);
        let res = load_season(p, args.input.format.resolve())
            .map_err(CliError::from)
            .and_then(|r| Ok(index_report(&season, &points_table(&r, scheme))?));
        match res {
            Ok(rep) => {
                if rep.zero_share_warning {
                    eprintln!("warning: {season}: a team finished on zero points; its entropy term is taken as 0");
                }
                reports.push(rep);
            }
            Err(e) => {
                let e = e.context(&p.display().to_string());
                eprintln!("error: {e}");
                failed.get_or_insert(e);
            }
        }
    }
    let mut csv = manifest.comment() + "season,hhicb,relative_entropy,zero_share_warning\n";
    for r in &reports {
        csv.push_str(&format!(
            "{},{:.12},{:.12},{}\n",
            r.season, r.hhicb, r.relative_entropy, r.zero_share_warning
        ));
    }
    write_file(&args.out.join("indices.csv"), &csv)?;

    if let Some(dir) = &args.summaries {
        let mut paired = Vec::new();
        let mut pi_k1 = Vec::new();
        for r in &reports {
            let path = dir.join(format!("{}.summary.json", r.season));
            match std::fs::read_to_string(&path) {
                Ok(text) => {
                    let rep: SeasonReport = serde_json::from_str(&text)?;
                    paired.push(r.clone());
                    pi_k1.push(rep.summary.k_probs.first().copied().unwrap_or(0.0));
                }
                Err(_) => eprintln!(
                    "warning: no summary for {} in {}; left out of the overlay",
                    r.season,
                    dir.display()
                ),
            }
        }
        if paired.is_empty() {
            eprintln!("warning: no summaries found; overlay omitted");
        } else {
            let c = index_vs_posterior(&paired, &pi_k1)?;
            let mut csv = manifest.comment() + "season,hhicb,relative_entropy,pi_k1\n";
            for row in &c.rows {
                csv.push_str(&format!(
                    "{},{:.12},{:.12},{:.6}\n",
                    row.season, row.hhicb, row.relative_entropy, row.pi_k1
                ));
            }
            write_file(&args.out.join("overlay.csv"), &csv)?;
            let pos: Vec<f64> = (0..c.rows.len()).map(|i| i as f64).collect();
            let h: Vec<f64> = c.rows.iter().map(|r| r.hhicb).collect();
            let e: Vec<f64> = c.rows.iter().map(|r| r.relative_entropy).collect();
            let doc = Correlation {
                manifest_hash: manifest.hash.clone(),
                seasons: c.rows.len(),
                spearman_hhicb_pi_k1: c.spearman_hhicb_pi_k1,
                spearman_entropy_pi_k1: c.spearman_entropy_pi_k1,
                hhicb_trend: least_squares_slope(&pos, &h),
                entropy_trend: least_squares_slope(&pos, &e),
            };
            eprintln!(
                "rank correlation with P(K=1): hhicb {}, entropy {}",
                show(doc.spearman_hhicb_pi_k1),
                show(doc.spearman_entropy_pi_k1)
            );
            write_file(
                &args.out.join("correlation.json"),
                &(serde_json::to_string_pretty(&doc)? + "\n"),
            )?;
        }
    }
    manifest.write(&args.out)?;
    failed.map_or(Ok(()), Err)
}

fn parse_p(arg: &str, k: usize) -> Result<Vec<[f64; 3]>, CliError> {
    let values: Vec<f64> = if Path::new(arg).is_file() {
        let text = std::fs::read_to_string(arg)?;
        let nested: Vec<Vec<f64>> = serde_json::from_str(&text)?;
        nested.into_iter().flatten().collect()
    } else {
        arg.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Input(format!("bad probability `{s}`")))
            })
            .collect::<Result<_, _>>()?
    };
    if values.len() != 3 * k * k {
        return Err(CliError::Input(format!(
            "--p needs {} numbers for K = {k}, got {}",
            3 * k * k,
            values.len()
        )));
    }
    Ok(values.chunks(3).map(|c| [c[0], c[1], c[2]]).collect())
}

#[derive(Debug, Serialize, Deserialize)]
struct Truth {
    manifest_hash: String,
    seed: u64,
    k: usize,
    teams: Vec<String>,
    /// One-based planted block per team.
    z: Vec<usize>,
    /// `p[h][a]` = (home win, draw, home loss) for home block `h`, away block `a`.
    p: Vec<Vec<[f64; 3]>>,
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let k = args.k;
    if args.n < 2 || k == 0 || k > args.n {
        return Err(CliError::Input(format!(
            "need 2 <= n and 1 <= k <= n, got n = {}, k = {k}",
            args.n
        )));
    }
    let sizes = match &args.sizes {
        Some(s) => {
            if s.len() != k || s.iter().sum::<usize>() != args.n {
                return Err(CliError::Input(format!(
                    "--sizes must list {k} sizes summing to {}",
                    args.n
                )));
            }
            s.clone()
        }
        None => (0..k)
            .map(|b| args.n / k + usize::from(b < args.n % k))
            .collect(),
    };
    let p = match (&args.p, args.separation) {
        (Some(arg), _) => parse_p(arg, k)?,
        (None, Some(s)) => separation_probabilities(k, s)?,
        (None, None) => separation_probabilities(k, 0.0)?,
    };
    let truth = Planted::new(labels_from_sizes(&sizes), k, p)?;
    let settings = serde_json::json!({
        "n": args.n, "k": k, "sizes": sizes, "p": truth.p, "seed": args.seed,
    });
    let manifest = RunManifest::new("simulate", Vec::new(), settings, &args.out);
    let width = args.n.to_string().len();
    let teams: Vec<String> = (1..=args.n).map(|i| format!("T{i:0width$}")).collect();
    let r = simulate_season(teams.clone(), &truth, &mut chain_rng(args.seed, 0));
    write_file(
        &args.out.join(format!("{}.csv", args.name)),
        &(manifest.comment() + &r.to_outcome_csv()),
    )?;
    let doc = Truth {
        manifest_hash: manifest.hash.clone(),
        seed: args.seed,
        k,
        teams,
        z: truth.z.iter().map(|&l| l as usize + 1).collect(),
        p: truth.p.chunks(k).map(<[[f64; 3]]>::to_vec).collect(),
    };
    write_file(
        &args.out.join(format!("{}.truth.json", args.name)),
        &(serde_json::to_string_pretty(&doc)? + "\n"),
    )?;
    manifest.write(&args.out)
}

#[derive(Debug, Serialize, Deserialize)]
struct Comparison {
    k_total_variation: f64,
    max_top_block_marginal_error: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct OracleReport {
    manifest_hash: String,
    season: String,
    states: u128,
    summary: PosteriorSummary,
    comparison: Option<Comparison>,
}

pub fn oracle(args: &OracleArgs) -> Result<(), CliError> {
    let prior = args.model.prior()?;
    let mut inputs = vec![InputFile::read(&args.season)?];
    if let Some(c) = &args.compare {
        inputs.push(InputFile::read(c)?);
    }
    let settings = serde_json::json!({
        "format": args.format, "prior": prior, "threshold": args.threshold,
    });
    let manifest = RunManifest::new("oracle", inputs, settings, &args.out);
    let r = load_season(&args.season, args.format.resolve())?;
    let exact = exact_posterior_oracle(&r, &prior, args.threshold)?;
    let comparison = match &args.compare {
        Some(path) => {
            let fitted: SeasonReport = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            let s = &fitted.summary;
            if s.teams != exact.teams {
                return Err(CliError::Input(format!(
                    "{} is for a different set of teams",
                    path.display()
                )));
            }
            let width = s.k_probs.len().max(exact.k_probs.len());
            let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
            let tv = (0..width)
                .map(|i| (at(&exact.k_probs, i) - at(&s.k_probs, i)).abs())
                .sum::<f64>()
                / 2.0;
            let marg = exact
                .top_block_marginal
                .iter()
                .zip(&s.top_block_marginal)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            println!("total variation on K: {tv:.6}");
            println!("max top-block marginal error: {marg:.6}");
            Some(Comparison {
                k_total_variation: tv,
                max_top_block_marginal_error: marg,
            })
        }
        None => None,
    };
    let season = season_id(&args.season);
    let doc = OracleReport {
        manifest_hash: manifest.hash.clone(),
        season: season.clone(),
        states: state_count(r.n(), prior.k_max),
        summary: exact,
        comparison,
    };
    write_file(
        &args.out.join(format!("{season}.oracle.json")),
        &(serde_json::to_string_pretty(&doc)? + "\n"),
    )?;
    manifest.write(&args.out)
}
