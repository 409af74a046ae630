//! Interval covers of the filter range and cover assignment schemes.
//!
//! A cover assignment scheme is an `n x r` matrix of independent Bernoulli
//! variables: entry `(i, j)` says whether point `i` is placed in latent cover
//! element `j`. The standard scheme is the degenerate (Dirac) case that
//! reproduces classical Mapper; the smooth scheme widens every interval by a
//! bump of width `delta`; the Gaussian scheme uses soft ellipsoidal cover
//! elements in the ambient space.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// `r` closed intervals of equal length `L`, consecutive ones sharing `g * L`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalCover {
    pub intervals: Vec<(f64, f64)>,
    pub gain: f64,
}

impl IntervalCover {
    pub fn resolution(&self) -> usize {
        self.intervals.len()
    }

    pub fn contains(&self, j: usize, value: f64) -> bool {
        let (a, b) = self.intervals[j];
        a <= value && value <= b
    }
}

pub fn uniform_cover(values: &[f64], resolution: usize, gain: f64) -> Result<IntervalCover> {
    if resolution == 0 {
        return Err(Error::invalid("resolution must be at least 1"));
    }
    if !(gain > 0.0 && gain < 1.0) {
        return Err(Error::invalid(format!("gain {gain} not in (0, 1)")));
    }
    if values.is_empty() {
        return Err(Error::invalid("cannot cover an empty set of values"));
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::invalid("filter values must be finite"));
    }
    if hi <= lo && resolution > 1 {
        return Err(Error::invalid(
            "filter values are constant; only resolution 1 is possible",
        ));
    }
    let r = resolution as f64;
    let length = (hi - lo) / (r - (r - 1.0) * gain);
    let step = length * (1.0 - gain);
    let mut intervals: Vec<(f64, f64)> = (0..resolution)
        .map(|j| {
            let a = lo + j as f64 * step;
            (a, a + length)
        })
        .collect();
    // pin the outer endpoints so the union covers [lo, hi] exactly
    intervals[0].0 = lo;
    intervals[resolution - 1].1 = hi;
    Ok(IntervalCover { intervals, gain })
}

/// Smooth relaxation of the indicator of `[a, b]`: 1 on the interval, a
/// `C^inf` bump `exp(1 - 1/(1 - t^2))` over a margin of width `delta` on
/// each side, 0 beyond.
pub fn smooth_membership(f: f64, a: f64, b: f64, delta: f64) -> f64 {
    let t = if f < a {
        (a - f) / delta
    } else if f > b {
        (f - b) / delta
    } else {
        return 1.0;
    };
    if t >= 1.0 {
        return 0.0;
    }
    (1.0 - 1.0 / (1.0 - t * t)).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub enum SchemeKind {
    Standard,
    Smooth { delta: f64 },
    Gaussian,
}

/// Bernoulli success probabilities `p_ij`, stored row-major (`n x r`).
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentScheme {
    pub n: usize,
    pub r: usize,
    pub probs: Vec<f64>,
    pub kind: SchemeKind,
}

impl AssignmentScheme {
    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.probs[i * self.r + j]
    }

    /// True when every probability is 0 or 1, i.e. sampling is deterministic.
    pub fn is_degenerate(&self) -> bool {
        self.probs.iter().all(|&p| p == 0.0 || p == 1.0)
    }
}

pub fn standard_scheme(values: &[f64], cover: &IntervalCover) -> Result<AssignmentScheme> {
    let r = cover.resolution();
    let mut probs = Vec::with_capacity(values.len() * r);
    for (i, &v) in values.iter().enumerate() {
        let start = probs.len();
        probs.extend((0..r).map(|j| if cover.contains(j, v) { 1.0 } else { 0.0 }));
        if probs[start..].iter().all(|&p| p == 0.0) {
            return Err(Error::invalid(format!(
                "value {v} of point {i} lies outside the cover"
            )));
        }
    }
    Ok(AssignmentScheme {
        n: values.len(),
        r,
        probs,
        kind: SchemeKind::Standard,
    })
}

pub fn smooth_scheme(values: &[f64], cover: &IntervalCover, delta: f64) -> Result<AssignmentScheme> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!("delta {delta} must be positive")));
    }
    let probs = values
        .iter()
        .flat_map(|&v| {
            cover
                .intervals
                .iter()
                .map(move |&(a, b)| smooth_membership(v, a, b, delta))
        })
        .collect();
    Ok(AssignmentScheme {
        n: values.len(),
        r: cover.resolution(),
        probs,
        kind: SchemeKind::Smooth { delta },
    })
}

/// `p_ij = exp(-(x_i - c_j)^T S_j^{-1} (x_i - c_j))`.
pub fn gaussian_scheme(
    cloud: &PointCloud,
    centers: &[Vec<f64>],
    covariances: &[DMatrix<f64>],
) -> Result<AssignmentScheme> {
    let p = cloud.dim();
    if centers.len() != covariances.len() || centers.is_empty() {
        return Err(Error::invalid(
            "need one covariance per center and at least one center",
        ));
    }
    let mut factors = Vec::with_capacity(centers.len());
    for (j, (c, cov)) in centers.iter().zip(covariances).enumerate() {
        if c.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: c.len(),
            });
        }
        if cov.shape() != (p, p) {
            return Err(Error::invalid(format!("covariance {j} is not {p}x{p}")));
        }
        let scale = cov.amax().max(f64::MIN_POSITIVE);
        if (cov - cov.transpose()).amax() > 1e-12 * scale {
            return Err(Error::invalid(format!("covariance {j} is not symmetric")));
        }
        let chol = cov
            .clone()
            .cholesky()
            .ok_or_else(|| Error::invalid(format!("covariance {j} is not positive definite")))?;
        factors.push(chol);
    }
    let mut probs = Vec::with_capacity(cloud.len() * centers.len());
    for x in cloud.points() {
        for (c, chol) in centers.iter().zip(&factors) {
            let d = DVector::from_iterator(p, x.iter().zip(c).map(|(a, b)| a - b));
            let q = d.dot(&chol.solve(&d));
            probs.push((-q).exp());
        }
    }
    Ok(AssignmentScheme {
        n: cloud.len(),
        r: centers.len(),
        probs,
        kind: SchemeKind::Gaussian,
    })
}

/// Binary `n x r` cover assignment, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoverAssignment {
    pub n: usize,
    pub r: usize,
    bits: Vec<bool>,
}

impl CoverAssignment {
    pub fn new(n: usize, r: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != n * r {
            return Err(Error::DimensionMismatch {
                expected: n * r,
                actual: bits.len(),
            });
        }
        Ok(Self { n, r, bits })
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let r = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|row| row.len() != r) {
            return Err(Error::invalid("ragged assignment rows"));
        }
        let bits = rows.iter().flatten().map(|&b| b != 0).collect();
        Self::new(rows.len(), r, bits)
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.r + j]
    }

    /// Points assigned to cover element `j`, ascending.
    pub fn column(&self, j: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.get(i, j)).collect()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Reorder rows: row `k` of the result is row `perm[k]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let bits = perm
            .iter()
            .flat_map(|&i| self.bits[i * self.r..(i + 1) * self.r].iter().copied())
            .collect();
        Self {
            n: perm.len(),
            r: self.r,
            bits,
        }
    }
}

/// Draw one assignment; entries are independent Bernoulli draws in row-major
/// order from a ChaCha stream seeded with `seed`.
pub fn sample(scheme: &AssignmentScheme, seed: u64) -> CoverAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits = scheme
        .probs
        .iter()
        .map(|&p| rng.random::<f64>() < p)
        .collect();
    CoverAssignment {
        n: scheme.n,
        r: scheme.r,
        bits,
    }
}

/// Exact `log P(A = e)`; `-inf` when `e` has probability zero.
pub fn log_prob(scheme: &AssignmentScheme, e: &CoverAssignment) -> Result<f64> {
    log_prob_with(scheme, e, |p| p)
}

/// `log P(A = e)` with probabilities clamped to `[1e-12, 1 - 1e-12]`; always
/// finite. Diagnostics only.
pub fn log_prob_clamped(scheme: &AssignmentScheme, e: &CoverAssignment) -> Result<f64> {
    log_prob_with(scheme, e, |p| p.clamp(1e-12, 1.0 - 1e-12))
}

fn log_prob_with(
    scheme: &AssignmentScheme,
    e: &CoverAssignment,
    adjust: impl Fn(f64) -> f64,
) -> Result<f64> {
    if (scheme.n, scheme.r) != (e.n, e.r) {
        return Err(Error::invalid(format!(
            "assignment is {}x{}, scheme is {}x{}",
            e.n, e.r, scheme.n, scheme.r
        )));
    }
    let mut total = 0.0;
    for (&p, &bit) in scheme.probs.iter().zip(&e.bits) {
        let p = adjust(p);
        let q = if bit { p } else { 1.0 - p };
        // 0 log 0 = 0 is implicit: q == 1 contributes ln 1 = 0
        total += q.ln();
    }
    Ok(total)
}
