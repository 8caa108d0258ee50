use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use transect_core::bench::Preset;
use transect_core::field_io::FieldMeta;
use transect_core::planners::PolicyKind;

#[derive(Parser)]
#[command(name = "transect", version, about = "Entropy-driven path planning for robots sweeping a transect")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Sample a field from the GP prior and write it with its sidecar.
    Synth(SynthArgs),
    /// Plan a path on a field file.
    Plan(PlanArgs),
    /// Run the policy benchmark on sampled fields.
    Bench(BenchArgs),
    /// Report the approximation bounds and, on small instances, check them.
    Bounds(BoundsArgs),
}

/// Grid and model settings. Anything given here overrides the sidecar.
#[derive(Args, Clone)]
pub struct ModelArgs {
    /// Built-in defaults to start from: `temperature` (the default) or `plankton`.
    #[arg(long)]
    pub preset: Option<Preset>,
    /// Locations per column.
    #[arg(long)]
    pub rows: Option<usize>,
    /// Number of columns.
    #[arg(long)]
    pub cols: Option<usize>,
    /// Horizontal cell width.
    #[arg(long)]
    pub omega1: Option<f64>,
    /// Vertical cell width.
    #[arg(long)]
    pub omega2: Option<f64>,
    /// Horizontal length-scale.
    #[arg(long)]
    pub ell1: Option<f64>,
    /// Vertical length-scale.
    #[arg(long)]
    pub ell2: Option<f64>,
    /// Signal variance.
    #[arg(long)]
    pub signal_var: Option<f64>,
    /// Noise variance.
    #[arg(long)]
    pub noise_var: Option<f64>,
    /// Constant prior mean of the field.
    #[arg(long)]
    pub mean: Option<f64>,
    /// Sampling seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ModelArgs {
    pub fn overrides(&self) -> FieldMeta {
        FieldMeta {
            rows: self.rows,
            cols: self.cols,
            omega1: self.omega1,
            omega2: self.omega2,
            ell1: self.ell1,
            ell2: self.ell2,
            signal_var: self.signal_var,
            noise_var: self.noise_var,
            prior_mean: self.mean,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Output CSV; the sidecar goes next to it with a `.meta` extension.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub field: PathBuf,
    #[arg(long, default_value = "markov")]
    pub policy: PolicyKind,
    /// Number of robots.
    #[arg(short = 'k', long = "robots", default_value_t = 1)]
    pub robots: usize,
    /// Starting rows, comma-separated. Optional for markov only.
    #[arg(long)]
    pub start: Option<String>,
    /// Leaf budget for exhaustive search.
    #[arg(long)]
    pub budget: Option<u128>,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Args)]
pub struct BenchArgs {
    /// TOML experiment file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Robot counts, comma-separated.
    #[arg(short = 'k', long = "robots")]
    pub robots: Option<String>,
    /// Policies, comma-separated.
    #[arg(long)]
    pub policies: Option<String>,
    /// Seeds: a list `0,4,9` or a half-open range `0..20`.
    #[arg(long)]
    pub seeds: Option<String>,
    /// `all`, `worst`, or starts such as `0;2` or `0,1;2,3`.
    #[arg(long)]
    pub starts: Option<String>,
    /// Leaf budget for exhaustive search.
    #[arg(long)]
    pub budget: Option<u128>,
    /// Results CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Args)]
pub struct BoundsArgs {
    /// Field file whose sidecar supplies the model; flags override it.
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// Number of robots.
    #[arg(short = 'k', long = "robots", default_value_t = 1)]
    pub robots: usize,
    /// Horizon `t`; the grid gets `t + 2` columns. Defaults to the grid's own.
    #[arg(short = 't', long)]
    pub horizon: Option<usize>,
    /// Random trials for the covariance-ordering check.
    #[arg(long, default_value_t = 200)]
    pub ordering_trials: usize,
    /// Leaf budget for exhaustive search.
    #[arg(long)]
    pub budget: Option<u128>,
    #[command(flatten)]
    pub model: ModelArgs,
}

/// Parses comma-separated values with `FromStr`.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',').map(|p| p.trim().parse::<T>().map_err(|e| format!("{p:?}: {e}"))).collect()
}

pub fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| format!("bad seed range {s:?}"))?;
        let b: u64 = b.trim().parse().map_err(|_| format!("bad seed range {s:?}"))?;
        return Ok((a..b).collect());
    }
    parse_list(s)
}
