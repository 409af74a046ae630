//! Monte-Carlo risk estimation and stochastic subgradient descent over filter
//! parameters.
//!
//! Each epoch rebuilds the interval cover (and the smooth margin `delta`) from
//! the current filter range, draws `M` cover assignments, and averages the
//! per-assignment losses and subgradients. Cover endpoints act as constants
//! inside an epoch: they only influence which assignments are drawn.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::cloud::PointCloud;
use crate::cluster::Clusterer;
use crate::cover::{self, AssignmentScheme};
use crate::error::{Error, Result};
use crate::filter::{FilterFamily, FilterParams, FilterValues};
use crate::mapper;
use crate::persistence::{self, PersistenceMode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    /// `alpha_i = alpha_0 / (1 + i)`.
    RobbinsMonro(f64),
}

impl StepSchedule {
    pub fn step(&self, epoch: usize) -> f64 {
        match *self {
            StepSchedule::Constant(a) => a,
            StepSchedule::RobbinsMonro(a) => a / (1.0 + epoch as f64),
        }
    }

    fn initial(&self) -> f64 {
        match *self {
            StepSchedule::Constant(a) | StepSchedule::RobbinsMonro(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeChoice {
    /// Classical Mapper: a Dirac distribution on the interval indicator.
    Standard,
    /// Intervals widened by a bump of width `delta_rel * (max f - min f)`.
    Smooth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimConfig {
    pub epochs: usize,
    pub mc_samples: usize,
    pub schedule: StepSchedule,
    /// Standard deviation of the Gaussian perturbation added to each averaged
    /// subgradient; 0 disables it.
    pub noise_std: f64,
    pub seed: u64,
    pub mode: PersistenceMode,
    pub scheme: SchemeChoice,
    pub delta_rel: f64,
    pub resolution: usize,
    pub gain: f64,
    /// Minimize `-total persistence` instead of `total persistence`.
    pub maximize: bool,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            mc_samples: 10,
            schedule: StepSchedule::Constant(0.1),
            noise_std: 0.0,
            seed: 0,
            mode: PersistenceMode::Extended,
            scheme: SchemeChoice::Smooth,
            delta_rel: 1e-2,
            resolution: 10,
            gain: 0.3,
            maximize: false,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.mc_samples == 0 {
            return Err(Error::invalid("epochs and mc_samples must be at least 1"));
        }
        let a0 = self.schedule.initial();
        if !(a0 >= 0.0 && a0.is_finite()) {
            return Err(Error::invalid("learning rate must be finite and non-negative"));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::invalid("noise_std must be finite and non-negative"));
        }
        if !(self.delta_rel > 0.0 && self.delta_rel.is_finite()) {
            return Err(Error::invalid("delta_rel must be positive"));
        }
        if self.resolution == 0 || !(self.gain > 0.0 && self.gain < 1.0) {
            return Err(Error::invalid("resolution must be >= 1 and gain in (0, 1)"));
        }
        Ok(())
    }

    fn sign(&self) -> f64 {
        if self.maximize {
            -1.0
        } else {
            1.0
        }
    }
}

/// Cover assignment scheme for the current filter values.
pub fn build_scheme(values: &[f64], config: &OptimConfig) -> Result<AssignmentScheme> {
    let cover = cover::uniform_cover(values, config.resolution, config.gain)?;
    match config.scheme {
        SchemeChoice::Standard => cover::standard_scheme(values, &cover),
        SchemeChoice::Smooth => {
            let (lo, hi) = values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            let range = hi - lo;
            // a constant filter only admits r = 1; any positive margin works
            let delta = if range > 0.0 {
                config.delta_rel * range
            } else {
                config.delta_rel
            };
            cover::smooth_scheme(values, &cover, delta)
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Base seed of an epoch; sample `m` of the epoch uses `base + m`.
pub fn epoch_seed(seed: u64, epoch: usize) -> u64 {
    splitmix64(seed ^ splitmix64(epoch as u64))
}

/// Signed loss and subgradient averaged over `M` assignments drawn from
/// `scheme` with seeds `seed_base + m`.
fn monte_carlo(
    cloud: &PointCloud,
    fv: &FilterValues,
    scheme: &AssignmentScheme,
    clusterer: &Clusterer,
    config: &OptimConfig,
    seed_base: u64,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let per_sample: Vec<Result<(f64, Vec<f64>)>> = (0..config.mc_samples)
        .into_par_iter()
        .map(|m| {
            let e = cover::sample(scheme, seed_base.wrapping_add(m as u64));
            let graph = mapper::map_comp(cloud, &e, clusterer)?;
            persistence::graph_loss_and_subgradient(&graph, fv, config.mode)
        })
        .collect();

    let sign = config.sign();
    let mut losses = Vec::with_capacity(config.mc_samples);
    let mut grad = vec![0.0; fv.n_params()];
    for r in per_sample {
        let (loss, g) = r?;
        losses.push(sign * loss);
        for (acc, x) in grad.iter_mut().zip(g) {
            *acc += sign * x;
        }
    }
    let inv = 1.0 / config.mc_samples as f64;
    grad.iter_mut().for_each(|x| *x *= inv);
    let mean = losses.iter().sum::<f64>() * inv;
    Ok((mean, grad, losses))
}

/// Monte-Carlo estimate of the expected (signed) loss at `params`, using the
/// epoch-0 seed stream of `config`.
pub fn estimate_risk(
    cloud: &PointCloud,
    filter: &dyn FilterFamily,
    params: &FilterParams,
    clusterer: &Clusterer,
    config: &OptimConfig,
) -> Result<f64> {
    Ok(risk_samples(cloud, filter, params, clusterer, config)?
        .iter()
        .sum::<f64>()
        / config.mc_samples as f64)
}

/// The `M` individual signed losses behind [`estimate_risk`].
pub fn risk_samples(
    cloud: &PointCloud,
    filter: &dyn FilterFamily,
    params: &FilterParams,
    clusterer: &Clusterer,
    config: &OptimConfig,
) -> Result<Vec<f64>> {
    config.validate()?;
    let fv = filter.evaluate(cloud, params)?;
    let scheme = build_scheme(&fv.values, config)?;
    let (_, _, losses) = monte_carlo(
        cloud,
        &fv,
        &scheme,
        clusterer,
        config,
        epoch_seed(config.seed, 0),
    )?;
    Ok(losses)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Parameters at which this epoch's risk and gradient were evaluated.
    pub theta: Vec<f64>,
    pub risk: f64,
    pub grad_norm: f64,
    pub seconds: f64,
}

/// Learning curve of an optimization run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub records: Vec<EpochRecord>,
}

impl Trace {
    pub fn risks(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.risk).collect()
    }

    /// CSV: `epoch,risk,grad_norm,theta_0..theta_{s-1},seconds`.
    pub fn to_csv(&self) -> String {
        let s = self.records.first().map_or(0, |r| r.theta.len());
        let mut out = String::from("epoch,risk,grad_norm");
        for k in 0..s {
            out.push_str(&format!(",theta_{k}"));
        }
        out.push_str(",seconds\n");
        for r in &self.records {
            out.push_str(&format!("{},{},{}", r.epoch, r.risk, r.grad_norm));
            for t in &r.theta {
                out.push_str(&format!(",{t}"));
            }
            out.push_str(&format!(",{}\n", r.seconds));
        }
        out
    }
}

/// Run `config.epochs` steps of
/// `theta <- theta - alpha_i * (mean subgradient + xi_i)`.
pub fn optimize(
    cloud: &PointCloud,
    filter: &dyn FilterFamily,
    theta0: &FilterParams,
    clusterer: &Clusterer,
    config: &OptimConfig,
) -> Result<(FilterParams, Trace)> {
    config.validate()?;
    let s = filter.n_params(cloud);
    if s == 0 {
        return Err(Error::invalid("filter has no parameters to optimize"));
    }
    if theta0.len() != s {
        return Err(Error::DimensionMismatch {
            expected: s,
            actual: theta0.len(),
        });
    }
    let noise = Normal::new(0.0, config.noise_std.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::invalid(e.to_string()))?;
    let mut noise_rng = ChaCha8Rng::seed_from_u64(splitmix64(config.seed ^ 0x006e_6f69_7365));

    let mut theta = theta0.theta.clone();
    let mut trace = Trace::default();
    let start = Instant::now();
    for epoch in 0..config.epochs {
        let params = FilterParams::new(theta.clone()).map_err(|_| Error::NonFinite {
            epoch,
            what: "parameters".into(),
        })?;
        let fv = filter.evaluate(cloud, &params)?;
        let scheme = build_scheme(&fv.values, config)?;
        let (risk, mut grad, _) = monte_carlo(
            cloud,
            &fv,
            &scheme,
            clusterer,
            config,
            epoch_seed(config.seed, epoch),
        )?;
        if !risk.is_finite() {
            return Err(Error::NonFinite {
                epoch,
                what: "loss".into(),
            });
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite {
                epoch,
                what: "gradient".into(),
            });
        }
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if config.noise_std > 0.0 {
            for g in grad.iter_mut() {
                *g += noise.sample(&mut noise_rng);
            }
        }
        let alpha = config.schedule.step(epoch);
        trace.records.push(EpochRecord {
            epoch,
            theta: theta.clone(),
            risk,
            grad_norm,
            seconds: start.elapsed().as_secs_f64(),
        });
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= alpha * g;
        }
    }
    let theta_n = FilterParams::new(theta).map_err(|_| Error::NonFinite {
        epoch: config.epochs,
        what: "parameters".into(),
    })?;
    Ok((theta_n, trace))
}

/// Cosine of the angle between two vectors (scale-invariant direction
/// agreement); 0 if either is zero.
pub fn direction_correlation(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::{diagonal_init, FixedFilter, LinearFilter};

    fn arc_cloud() -> PointCloud {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let t = i as f64 / 39.0 * std::f64::consts::PI;
                vec![t.cos(), t.sin()]
            })
            .collect();
        PointCloud::from_rows(&rows).unwrap()
    }

    #[test]
    fn robbins_monro_conditions() {
        let s = StepSchedule::RobbinsMonro(0.5);
        let (mut sum, mut sq) = (0.0, 0.0);
        for i in 0..1_000_000 {
            let a = s.step(i);
            sum += a;
            sq += a * a;
        }
        // partial sums: 0.5 * H_N grows like log N; 0.25 * sum 1/k^2 < 0.25 * pi^2/6
        assert!(sum > 0.5 * (1e6f64).ln());
        assert!(sq < 0.25 * std::f64::consts::PI.powi(2) / 6.0);
        assert_eq!(StepSchedule::Constant(0.2).step(1000), 0.2);
    }

    #[test]
    fn config_validation() {
        let ok = OptimConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            OptimConfig { epochs: 0, ..ok.clone() },
            OptimConfig { mc_samples: 0, ..ok.clone() },
            OptimConfig { noise_std: -1.0, ..ok.clone() },
            OptimConfig { delta_rel: 0.0, ..ok.clone() },
            OptimConfig { gain: 1.0, ..ok.clone() },
            OptimConfig { schedule: StepSchedule::Constant(-0.1), ..ok.clone() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn zero_step_keeps_theta() {
        let cloud = arc_cloud();
        let theta0 = diagonal_init(2).unwrap();
        let config = OptimConfig {
            epochs: 1,
            schedule: StepSchedule::Constant(0.0),
            resolution: 4,
            ..OptimConfig::default()
        };
        let clus = Clusterer::single_linkage(0.2).unwrap();
        let (theta, trace) = optimize(&cloud, &LinearFilter, &theta0, &clus, &config).unwrap();
        assert_eq!(theta, theta0);
        assert_eq!(trace.records.len(), 1);
    }

    #[test]
    fn fixed_filter_cannot_be_optimized() {
        let cloud = arc_cloud();
        let f = FixedFilter::coordinate(&cloud, 1).unwrap();
        let clus = Clusterer::single_linkage(0.2).unwrap();
        let err = optimize(
            &cloud,
            &f,
            &FilterParams::new(vec![]).unwrap(),
            &clus,
            &OptimConfig::default(),
        );
        assert!(err.is_err());
    }

    #[test]
    fn standard_scheme_risk_is_exact() {
        let cloud = arc_cloud();
        let clus = Clusterer::single_linkage(0.2).unwrap();
        let params = FilterParams::new(vec![0.2, 1.0]).unwrap();
        let fv = LinearFilter.evaluate(&cloud, &params).unwrap();
        let config = OptimConfig {
            scheme: SchemeChoice::Standard,
            resolution: 5,
            ..OptimConfig::default()
        };
        let scheme = build_scheme(&fv.values, &config).unwrap();
        let e = cover::sample(&scheme, 0);
        let (exact, _) = persistence::loss_and_subgradient(
            &cloud,
            &e,
            &LinearFilter,
            &params,
            &clus,
            config.mode,
        )
        .unwrap();
        for m in [1, 3, 7] {
            let cfg = OptimConfig {
                mc_samples: m,
                seed: m as u64,
                ..config.clone()
            };
            let samples = risk_samples(&cloud, &LinearFilter, &params, &clus, &cfg).unwrap();
            assert!(samples.iter().all(|&l| l == exact));
            // equal to the single loss up to the rounding of the mean
            let risk = estimate_risk(&cloud, &LinearFilter, &params, &clus, &cfg).unwrap();
            assert!((risk - exact).abs() <= 1e-15 * m as f64 * exact.abs());
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let cloud = arc_cloud();
        let clus = Clusterer::single_linkage(0.2).unwrap();
        let config = OptimConfig {
            epochs: 5,
            mc_samples: 4,
            noise_std: 0.05,
            seed: 17,
            resolution: 6,
            delta_rel: 0.05,
            ..OptimConfig::default()
        };
        let theta0 = diagonal_init(2).unwrap();
        let (a, ta) = optimize(&cloud, &LinearFilter, &theta0, &clus, &config).unwrap();
        let (b, tb) = optimize(&cloud, &LinearFilter, &theta0, &clus, &config).unwrap();
        assert_eq!(a, b);
        let strip = |t: &Trace| {
            t.records
                .iter()
                .map(|r| (r.epoch, r.theta.clone(), r.risk.to_bits(), r.grad_norm.to_bits()))
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&ta), strip(&tb));
        assert!(ta.to_csv().starts_with("epoch,risk,grad_norm,theta_0,theta_1,seconds\n"));
    }

    #[test]
    fn correlation_is_scale_invariant() {
        assert!((direction_correlation(&[0.0, 0.0, 5.0], &[0.0, 0.0, 1.0]) - 1.0).abs() < 1e-15);
        assert!((direction_correlation(&[0.0, 0.0, -2.0], &[0.0, 0.0, 1.0]) + 1.0).abs() < 1e-15);
        assert_eq!(direction_correlation(&[0.0; 3], &[0.0, 0.0, 1.0]), 0.0);
    }
}
