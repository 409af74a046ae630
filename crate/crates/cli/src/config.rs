//! Run configuration: a JSON file and/or command-line flags resolved into
//! the typed settings of the library.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use softmapper::cluster::threshold_from_hausdorff;
use softmapper::filter::diagonal_init;
use softmapper::{
    Clusterer, FilterParams, OptimConfig, PersistenceMode, PointCloud, SchemeChoice, StepSchedule,
};

use crate::synth::{self, Shape};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    Csv,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Point cloud file; mutually exclusive with `synthetic`.
    pub input: Option<PathBuf>,
    /// Guessed from the file extension when absent.
    pub format: Option<InputFormat>,
    pub header: bool,
    pub synthetic: Option<String>,
    pub n: usize,
    pub noise: f64,

    /// `linear`, or `axis:<k>` for a fixed coordinate filter.
    pub filter: String,
    /// Linear filter parameters; `diagonal_init` when absent.
    pub theta: Option<Vec<f64>>,
    /// Attribute averaged per node for the exported colors; the filter when absent.
    pub color: Option<String>,

    pub resolution: usize,
    pub gain: f64,
    pub delta_rel: f64,
    /// `standard` or `smooth`.
    pub scheme: String,

    /// `single_linkage` or `kmeans`.
    pub clusterer: String,
    /// Single-linkage threshold; derived from a Hausdorff subsample when absent.
    pub threshold: Option<f64>,
    pub hausdorff_fraction: f64,
    pub hausdorff_factor: f64,
    pub k: usize,
    pub max_iter: usize,

    pub epochs: usize,
    pub mc_samples: usize,
    pub lr: f64,
    /// `constant` or `robbins_monro`.
    pub schedule: String,
    pub noise_std: f64,
    /// `extended` or `regular`.
    pub mode: String,
    pub maximize: bool,

    pub output: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let optim = OptimConfig::default();
        Self {
            input: None,
            format: None,
            header: false,
            synthetic: None,
            n: 600,
            noise: 0.02,
            filter: "linear".into(),
            theta: None,
            color: None,
            resolution: optim.resolution,
            gain: optim.gain,
            delta_rel: optim.delta_rel,
            scheme: "smooth".into(),
            clusterer: "single_linkage".into(),
            threshold: None,
            hausdorff_fraction: 0.1,
            hausdorff_factor: 2.0,
            k: 3,
            max_iter: 100,
            epochs: optim.epochs,
            mc_samples: optim.mc_samples,
            lr: 0.1,
            schedule: "constant".into(),
            noise_std: optim.noise_std,
            mode: "extended".into(),
            maximize: true,
            output: PathBuf::from("out"),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub enum FilterChoice {
    Linear,
    Axis(usize),
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form, with
    /// the output directory left out.
    pub fn hash(&self) -> String {
        let mut keyed = self.clone();
        keyed.output = PathBuf::new();
        let json = serde_json::to_string(&keyed).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn shape(&self) -> Result<Option<Shape>, CliError> {
        self.synthetic
            .as_deref()
            .map(|s| s.parse::<Shape>().map_err(|e| CliError::Usage(e.to_string())))
            .transpose()
    }

    pub fn load_cloud(&self) -> Result<PointCloud, CliError> {
        let usage = |e: softmapper::Error| CliError::Usage(e.to_string());
        match (&self.input, self.shape()?) {
            (Some(_), Some(_)) => Err(CliError::Usage(
                "give either an input file or a synthetic shape, not both".into(),
            )),
            (None, None) => Err(CliError::Usage(
                "no data: pass --input <file> or --synthetic <shape>".into(),
            )),
            (None, Some(shape)) => synth::generate(shape, self.n, self.noise, self.seed).map_err(usage),
            (Some(path), None) => {
                let format = match self.format {
                    Some(f) => f,
                    None => match path.extension().and_then(|e| e.to_str()) {
                        Some(ext) if ext.eq_ignore_ascii_case("off") => InputFormat::Off,
                        _ => InputFormat::Csv,
                    },
                };
                let cloud = match format {
                    InputFormat::Csv => softmapper::cloud::load_csv(path, self.header),
                    InputFormat::Off => softmapper::cloud::load_off_vertices(path),
                };
                cloud.map_err(usage)
            }
        }
    }

    pub fn filter_choice(&self) -> Result<FilterChoice, CliError> {
        if self.filter == "linear" {
            return Ok(FilterChoice::Linear);
        }
        self.filter
            .strip_prefix("axis:")
            .and_then(|k| k.parse().ok())
            .map(FilterChoice::Axis)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown filter {:?} (expected linear or axis:<k>)",
                    self.filter
                ))
            })
    }

    pub fn initial_theta(&self, dim: usize) -> Result<FilterParams, CliError> {
        let params = match &self.theta {
            Some(theta) => FilterParams::new(theta.clone()),
            None => diagonal_init(dim),
        };
        let params = params.map_err(|e| CliError::Usage(e.to_string()))?;
        if params.len() != dim {
            return Err(CliError::Usage(format!(
                "theta has {} entries but the data has dimension {dim}",
                params.len()
            )));
        }
        Ok(params)
    }

    pub fn clusterer(&self, cloud: &PointCloud) -> Result<Clusterer, CliError> {
        let usage = |e: softmapper::Error| CliError::Usage(e.to_string());
        match self.clusterer.as_str() {
            "single_linkage" => match self.threshold {
                Some(t) => Clusterer::single_linkage(t).map_err(usage),
                None => threshold_from_hausdorff(
                    cloud,
                    self.hausdorff_fraction,
                    self.hausdorff_factor,
                    self.seed,
                )
                .map_err(usage),
            },
            "kmeans" => Clusterer::kmeans(self.k, self.max_iter, self.seed).map_err(usage),
            other => Err(CliError::Usage(format!(
                "unknown clusterer {other:?} (expected single_linkage or kmeans)"
            ))),
        }
    }

    pub fn optim(&self) -> Result<OptimConfig, CliError> {
        let schedule = match self.schedule.as_str() {
            "constant" => StepSchedule::Constant(self.lr),
            "robbins_monro" => StepSchedule::RobbinsMonro(self.lr),
            other => return Err(CliError::Usage(format!("unknown schedule {other:?}"))),
        };
        let mode = match self.mode.as_str() {
            "extended" => PersistenceMode::Extended,
            "regular" => PersistenceMode::Regular,
            other => return Err(CliError::Usage(format!("unknown persistence mode {other:?}"))),
        };
        let scheme = match self.scheme.as_str() {
            "smooth" => SchemeChoice::Smooth,
            "standard" => SchemeChoice::Standard,
            other => return Err(CliError::Usage(format!("unknown scheme {other:?}"))),
        };
        let config = OptimConfig {
            epochs: self.epochs,
            mc_samples: self.mc_samples,
            schedule,
            noise_std: self.noise_std,
            seed: self.seed,
            mode,
            scheme,
            delta_rel: self.delta_rel,
            resolution: self.resolution,
            gain: self.gain,
            maximize: self.maximize,
        };
        config
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(config)
    }
}
