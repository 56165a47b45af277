use std::path::{Path, PathBuf};
use std::time::Instant;

use block_league::league::{load_season, MatchFormat};
use block_league::model::PriorConfig;
use block_league::posterior::{marginals_csv, top_block_size_csv, top_block_size_series};
use block_league::sampler::{run_chain, SamplerConfig, Trace};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::{season_id, FitArgs, FormatArg};
use crate::error::CliError;
use crate::manifest::{write_file, AcceptanceRates, InputFile, RunManifest};
use crate::report::{k_table_csv, roster_csv, SeasonReport};

/// Everything in a fit that affects its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSettings {
    pub format: FormatArg,
    pub prior: PriorConfig,
    pub sampler: SamplerConfig,
    pub chains: u32,
    pub threshold: f64,
}

fn pooled_trace(
    r: &block_league::league::ResultsMatrix,
    settings: &FitSettings,
) -> Result<Trace, CliError> {
    let chains: Vec<Trace> = (0..settings.chains)
        .into_par_iter()
        .map(|c| run_chain(r, &settings.prior, &settings.sampler, c))
        .collect::<Result<_, _>>()?;
    let mut it = chains.into_iter();
    let mut pooled = it.next().expect("at least one chain");
    for t in it {
        pooled.extend(t);
    }
    Ok(pooled)
}

fn fit_one(
    path: &Path,
    format: Option<MatchFormat>,
    settings: &FitSettings,
    manifest: &RunManifest,
    out: &Path,
) -> Result<SeasonReport, CliError> {
    let season = season_id(path);
    let r = load_season(path, format)?;
    let trace = pooled_trace(&r, settings)?;
    write_file(
        &out.join(format!("{season}.trace.txt")),
        &(manifest.comment() + &trace.to_text()),
    )?;
    let report = SeasonReport::from_trace(
        &season,
        &r,
        &trace,
        &settings.prior,
        settings.threshold,
        &manifest.hash,
    )?;
    write_file(
        &out.join(format!("{season}.summary.json")),
        &(serde_json::to_string_pretty(&report)? + "\n"),
    )?;
    Ok(report)
}

pub fn run(args: &FitArgs) -> Result<(), CliError> {
    let (paths, settings, out) = match &args.from_manifest {
        Some(mpath) => {
            let m = RunManifest::load(mpath)?;
            if m.command != "fit" {
                return Err(CliError::Input(format!(
                    "manifest is for `{}`, not `fit`",
                    m.command
                )));
            }
            m.verify_inputs()?;
            let settings: FitSettings = serde_json::from_value(m.settings.clone())?;
            let out = args.out.clone().unwrap_or(m.output_dir.clone());
            (
                m.inputs
                    .iter()
                    .map(|i| i.path.clone())
                    .collect::<Vec<PathBuf>>(),
                settings,
                out,
            )
        }
        None => {
            let settings = FitSettings {
                format: args.input.format,
                prior: args.model.prior()?,
                sampler: args.chain.config()?,
                chains: args.chain.chains,
                threshold: args.threshold,
            };
            (
                args.input.paths()?,
                settings,
                args.out.clone().unwrap_or_else(|| PathBuf::from("out")),
            )
        }
    };
    if !(0.0..1.0).contains(&settings.threshold) {
        return Err(CliError::Input(format!(
            "threshold {} outside [0, 1)",
            settings.threshold
        )));
    }
    let inputs = paths
        .iter()
        .map(|p| InputFile::read(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut manifest = RunManifest::new("fit", inputs, serde_json::to_value(&settings)?, &out);
    std::fs::create_dir_all(&out)?;

    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    let format = settings.format.resolve();
    let results: Vec<Result<SeasonReport, CliError>> = pool.install(|| {
        paths
            .par_iter()
            .map(|p| {
                fit_one(p, format, &settings, &manifest, &out)
                    .map_err(|e| e.context(&p.display().to_string()))
            })
            .collect()
    });

    let mut reports = Vec::new();
    let mut first_error: Option<CliError> = None;
    for r in results {
        match r {
            Ok(rep) => {
                eprintln!(
                    "{}: K mode {} ({:.2}%), top block {} teams",
                    rep.season,
                    rep.summary.modal_k(),
                    100.0 * rep.summary.k_probs[rep.summary.modal_k() - 1],
                    rep.summary.top_block_size
                );
                reports.push(rep);
            }
            Err(e) => {
                eprintln!("error: {e}");
                first_error.get_or_insert(e);
            }
        }
    }

    let rows: Vec<(&str, &block_league::posterior::PosteriorSummary)> = reports
        .iter()
        .map(|r| (r.season.as_str(), &r.summary))
        .collect();
    let c = manifest.comment();
    write_file(
        &out.join("k_table.csv"),
        &(c.clone() + &k_table_csv(&rows, settings.prior.k_max)),
    )?;
    write_file(
        &out.join("top_block_size.csv"),
        &(c.clone() + &top_block_size_csv(&top_block_size_series(rows.iter().copied()))),
    )?;
    write_file(
        &out.join("marginals.csv"),
        &(c.clone() + &marginals_csv(rows.iter().copied())),
    )?;
    write_file(&out.join("roster.csv"), &(c + &roster_csv(&rows)))?;

    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.acceptance_rates = reports
        .iter()
        .map(|r| (r.season.clone(), AcceptanceRates::clone(&r.acceptance)))
        .collect();
    manifest.write(&out)?;
    match first_error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
