//! Command-line flags. Every flag overrides the matching key of the
//! `--config` JSON file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{InputFormat, RunConfig};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "softmapper", version, about = "Soft Mapper graphs and filter optimization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build one Mapper graph and write mapper.json, mapper.dot, diagram.csv.
    Build(RunArgs),
    /// Optimize a linear filter and write the learning curve and both graphs.
    Optimize(RunArgs),
    /// Write a synthetic point cloud to <output>/points.csv.
    Synth(RunArgs),
    /// Render a saved mapper.json as DOT and/or a trace.csv as SVG.
    Export(ExportArgs),
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// JSON file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    pub format: Option<InputFormat>,
    #[arg(long)]
    pub header: Option<bool>,
    /// circle, cylinder, y_shape or plane_with_leg.
    #[arg(long)]
    pub synthetic: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub noise: Option<f64>,
    /// linear or axis:<k>.
    #[arg(long)]
    pub filter: Option<String>,
    /// Comma-separated linear filter parameters.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,
    #[arg(long)]
    pub color: Option<String>,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub gain: Option<f64>,
    #[arg(long)]
    pub delta_rel: Option<f64>,
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub clusterer: Option<String>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub hausdorff_fraction: Option<f64>,
    #[arg(long)]
    pub hausdorff_factor: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub mc_samples: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub schedule: Option<String>,
    #[arg(long)]
    pub noise_std: Option<f64>,
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub maximize: Option<bool>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// mapper.json to render as DOT.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// trace.csv to render as an SVG learning curve.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, short, default_value = ".")]
    pub output: PathBuf,
}

fn parse_format(s: &str) -> Result<InputFormat, String> {
    match s {
        "csv" => Ok(InputFormat::Csv),
        "off" => Ok(InputFormat::Off),
        _ => Err(format!("unknown format {s:?} (expected csv or off)")),
    }
}

macro_rules! overlay {
    ($cfg:ident, $args:ident; $($field:ident),* ; $($opt:ident),*) => {
        $(if let Some(v) = &$args.$field { $cfg.$field = v.clone(); })*
        $(if let Some(v) = &$args.$opt { $cfg.$opt = Some(v.clone()); })*
    };
}

impl RunArgs {
    /// Defaults, then the config file, then the flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_json_file(path)?,
            None => RunConfig::default(),
        };
        overlay!(cfg, self;
            header, n, noise, filter, resolution, gain, delta_rel, scheme, clusterer,
            hausdorff_fraction, hausdorff_factor, k, max_iter, epochs, mc_samples, lr,
            schedule, noise_std, mode, maximize, output, seed;
            input, format, synthetic, theta, color, threshold);
        Ok(cfg)
    }
}
