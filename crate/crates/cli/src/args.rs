use std::path::PathBuf;

use block_league::league::MatchFormat;
use block_league::model::{KPrior, PriorConfig};
use block_league::sampler::SamplerConfig;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "block-league",
    version,
    about = "Block-model competitive balance for round-robin leagues"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the block-model posterior for one or more seasons.
    Fit(FitArgs),
    /// Summarise an existing trace file.
    Summarize(SummarizeArgs),
    /// Points-based balance indices, optionally against fitted summaries.
    Indices(IndicesArgs),
    /// Draw a synthetic season from a planted block structure.
    Simulate(SimulateArgs),
    /// Exact posterior by enumeration, for small leagues.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Auto,
    Outcome,
    Goals,
}

impl FormatArg {
    pub fn resolve(self) -> Option<MatchFormat> {
        match self {
            FormatArg::Auto => None,
            FormatArg::Outcome => Some(MatchFormat::Outcome),
            FormatArg::Goals => Some(MatchFormat::Goals),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PriorArg {
    Poisson,
    Uniform,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Season file (match list CSV); repeatable.
    #[arg(long = "season")]
    pub seasons: Vec<PathBuf>,
    /// Directory whose `*.csv` files are all seasons.
    #[arg(long)]
    pub dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    pub format: FormatArg,
}

impl InputArgs {
    /// Explicit seasons first, then the directory in season order.
    pub fn paths(&self) -> Result<Vec<PathBuf>, CliError> {
        let mut out = self.seasons.clone();
        if let Some(dir) = &self.dir {
            let mut found: Vec<PathBuf> = std::fs::read_dir(dir)
                .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .collect();
            found.sort_by_key(|p| season_sort_key(&season_id(p)));
            out.extend(found);
        }
        if out.is_empty() {
            return Err(CliError::Input(
                "no seasons given (use --season or --dir)".into(),
            ));
        }
        Ok(out)
    }
}

pub fn season_id(path: &std::path::Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Four-digit ids like `9091` or `2122` sort by starting year; other names
/// sort after them alphabetically.
pub fn season_sort_key(id: &str) -> (u32, String) {
    if id.len() == 4 && id.bytes().all(|b| b.is_ascii_digit()) {
        let yy: u32 = id[..2].parse().unwrap_or(0);
        let year = if yy >= 50 { 1900 + yy } else { 2000 + yy };
        return (year, id.to_string());
    }
    (u32::MAX, id.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 20)]
    pub k_max: usize,
    #[arg(long, value_enum, default_value = "poisson")]
    pub prior: PriorArg,
    /// Dirichlet weight on block proportions.
    #[arg(long, default_value_t = 1.0)]
    pub gamma0: f64,
    /// Dirichlet weights on (home win, draw, home loss), comma separated.
    #[arg(long, value_delimiter = ',', num_args = 3, default_value = "1,1,1")]
    pub beta: Vec<f64>,
}

impl ModelArgs {
    pub fn prior(&self) -> Result<PriorConfig, CliError> {
        let k_prior = match self.prior {
            PriorArg::Poisson => KPrior::TruncatedPoisson,
            PriorArg::Uniform => KPrior::Uniform,
        };
        let beta: [f64; 3] = self
            .beta
            .as_slice()
            .try_into()
            .map_err(|_| CliError::Input("--beta takes exactly three values".into()))?;
        let p = PriorConfig {
            k_prior,
            k_max: self.k_max,
            gamma0: self.gamma0,
            beta,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    #[arg(long, default_value_t = 200_000)]
    pub iters: u64,
    #[arg(long, default_value_t = 50_000)]
    pub burn_in: u64,
    #[arg(long, default_value_t = 1)]
    pub thin: u64,
    #[arg(long, env = "BLOCK_LEAGUE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Independent chains per season, pooled after sampling.
    #[arg(long, default_value_t = 1)]
    pub chains: u32,
}

impl ChainArgs {
    pub fn config(&self) -> Result<SamplerConfig, CliError> {
        let cfg = SamplerConfig {
            iterations: self.iters,
            burn_in: self.burn_in,
            seed: self.seed,
            thin: self.thin,
            ..SamplerConfig::default()
        };
        cfg.validate()?;
        if self.chains == 0 {
            return Err(CliError::Input("--chains must be at least 1".into()));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Top-block membership cut-off on the marginal probability.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Seasons fitted concurrently (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory (default `out`, or the manifest's directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Rerun exactly what a previous manifest describes.
    #[arg(long)]
    pub from_manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SummarizeArgs {
    /// Trace written by `fit`.
    #[arg(long)]
    pub trace: PathBuf,
    /// The season the trace was fitted to.
    #[arg(long)]
    pub season: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub format: FormatArg,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct IndicesArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Points for a win: 2 or 3.
    #[arg(long, default_value_t = 3)]
    pub points_scheme: u32,
    /// Directory of `<season>.summary.json` files from `fit`.
    #[arg(long)]
    pub summaries: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Number of teams.
    #[arg(long)]
    pub n: usize,
    /// Number of planted blocks.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Block sizes, comma separated (default: as equal as possible).
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Interaction probabilities: a JSON file holding K*K triples, or
    /// 3*K*K comma-separated numbers in row-major order.
    #[arg(long, conflicts_with = "separation")]
    pub p: Option<String>,
    /// Generate the probabilities from one strength-gap knob in [0, 1].
    #[arg(long)]
    pub separation: Option<f64>,
    #[arg(long, env = "BLOCK_LEAGUE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Base name of the written files.
    #[arg(long, default_value = "synthetic")]
    pub name: String,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub season: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub format: FormatArg,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// A `fit` summary of the same season to compare against.
    #[arg(long)]
    pub compare: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}
