//! Parameterized filter functions with exact Jacobians.

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FilterParams {
    pub theta: Vec<f64>,
}

impl FilterParams {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("filter parameters must be finite"));
        }
        Ok(Self { theta })
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.theta.iter().map(|t| t * t).sum::<f64>().sqrt()
    }
}

/// `(1/sqrt(p), ..., 1/sqrt(p))`, the unit diagonal direction.
pub fn diagonal_init(p: usize) -> Result<FilterParams> {
    if p == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    FilterParams::new(vec![1.0 / (p as f64).sqrt(); p])
}

/// Filter values `f(x_i)` and the `n x s` Jacobian `d f(x_i) / d theta_k`,
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterValues {
    pub values: Vec<f64>,
    n_params: usize,
    jacobian: Vec<f64>,
}

impl FilterValues {
    pub fn new(values: Vec<f64>, n_params: usize, jacobian: Vec<f64>) -> Result<Self> {
        if jacobian.len() != values.len() * n_params {
            return Err(Error::DimensionMismatch {
                expected: values.len() * n_params,
                actual: jacobian.len(),
            });
        }
        if values.iter().chain(&jacobian).any(|v| !v.is_finite()) {
            return Err(Error::invalid("filter values must be finite"));
        }
        Ok(Self {
            values,
            n_params,
            jacobian,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn jacobian_row(&self, i: usize) -> &[f64] {
        &self.jacobian[i * self.n_params..(i + 1) * self.n_params]
    }

    pub fn range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// A family `theta -> f_theta` of real-valued functions on a point cloud.
pub trait FilterFamily: Sync {
    /// Dimension `s` of the parameter vector; 0 for non-optimizable filters.
    fn n_params(&self, cloud: &PointCloud) -> usize;

    fn evaluate(&self, cloud: &PointCloud, params: &FilterParams) -> Result<FilterValues>;
}

/// `f_theta(x) = <x, theta>`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearFilter;

impl FilterFamily for LinearFilter {
    fn n_params(&self, cloud: &PointCloud) -> usize {
        cloud.dim()
    }

    fn evaluate(&self, cloud: &PointCloud, params: &FilterParams) -> Result<FilterValues> {
        if params.len() != cloud.dim() {
            return Err(Error::DimensionMismatch {
                expected: cloud.dim(),
                actual: params.len(),
            });
        }
        let values = cloud
            .points()
            .map(|x| x.iter().zip(&params.theta).map(|(a, b)| a * b).sum())
            .collect();
        FilterValues::new(values, cloud.dim(), cloud.coords().to_vec())
    }
}

/// Precomputed filter values with no parameters.
#[derive(Debug, Clone)]
pub struct FixedFilter {
    values: Vec<f64>,
}

impl FixedFilter {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("filter value {i} is not finite")));
        }
        Ok(Self { values })
    }

    pub fn coordinate(cloud: &PointCloud, axis: usize) -> Result<Self> {
        if axis >= cloud.dim() {
            return Err(Error::invalid(format!(
                "axis {axis} out of range for dimension {}",
                cloud.dim()
            )));
        }
        Self::new(cloud.points().map(|x| x[axis]).collect())
    }
}

impl FilterFamily for FixedFilter {
    fn n_params(&self, _cloud: &PointCloud) -> usize {
        0
    }

    fn evaluate(&self, cloud: &PointCloud, params: &FilterParams) -> Result<FilterValues> {
        if self.values.len() != cloud.len() {
            return Err(Error::DimensionMismatch {
                expected: cloud.len(),
                actual: self.values.len(),
            });
        }
        if !params.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 0,
                actual: params.len(),
            });
        }
        FilterValues::new(self.values.clone(), 0, Vec::new())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn central_differences(cloud: &PointCloud, theta: &[f64]) -> Vec<Vec<f64>> {
        // d values_i / d theta_k, indexed [i][k]
        let mut out = vec![vec![0.0; theta.len()]; cloud.len()];
        for k in 0..theta.len() {
            let h = 1e-6 * (1.0 + theta[k].abs());
            let mut plus = theta.to_vec();
            let mut minus = theta.to_vec();
            plus[k] += h;
            minus[k] -= h;
            let fp = LinearFilter
                .evaluate(cloud, &FilterParams::new(plus).unwrap())
                .unwrap();
            let fm = LinearFilter
                .evaluate(cloud, &FilterParams::new(minus).unwrap())
                .unwrap();
            for i in 0..cloud.len() {
                out[i][k] = (fp.values[i] - fm.values[i]) / (2.0 * h);
            }
        }
        out
    }

    #[test]
    fn linear_projection() {
        let cloud = PointCloud::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        let fv = LinearFilter
            .evaluate(&cloud, &FilterParams::new(vec![0.0, 0.0, 1.0]).unwrap())
            .unwrap();
        assert_eq!(fv.values, vec![3.0]);
        assert_eq!(fv.jacobian_row(0), &[1.0, 2.0, 3.0]);

        let zero = LinearFilter
            .evaluate(&cloud, &FilterParams::new(vec![0.0; 3]).unwrap())
            .unwrap();
        assert_eq!(zero.values, vec![0.0]);

        let bad = LinearFilter.evaluate(&cloud, &FilterParams::new(vec![1.0]).unwrap());
        assert!(matches!(bad, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn linear_jacobian_matches_finite_differences() {
        let rows = vec![
            vec![0.3, -1.2, 2.0],
            vec![1.5, 0.7, -0.4],
            vec![-2.2, 0.1, 0.9],
            vec![0.0, 3.3, -1.1],
            vec![4.0, -0.5, 0.25],
        ];
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let theta = vec![0.4, -1.3, 2.2];
        let fv = LinearFilter
            .evaluate(&cloud, &FilterParams::new(theta.clone()).unwrap())
            .unwrap();
        let fd = central_differences(&cloud, &theta);
        for i in 0..cloud.len() {
            for k in 0..3 {
                let exact = fv.jacobian_row(i)[k];
                let rel = (exact - fd[i][k]).abs() / exact.abs().max(1e-12);
                assert!(rel < 1e-6, "point {i} param {k}: {exact} vs {}", fd[i][k]);
            }
        }
    }

    #[test]
    fn fixed_filter_has_no_parameters() {
        let cloud = PointCloud::new(vec![0.0, 1.0, 2.0], 1).unwrap();
        let f = FixedFilter::new(vec![0.0, 1.0, 2.0]).unwrap();
        let fv = f.evaluate(&cloud, &FilterParams::new(vec![]).unwrap()).unwrap();
        assert_eq!(fv.n_params(), 0);
        assert!(fv.jacobian_row(1).is_empty());
        assert_eq!(f.n_params(&cloud), 0);
        assert!(FixedFilter::new(vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn diagonal_initialization() {
        let t = diagonal_init(3).unwrap();
        for v in &t.theta {
            assert!((v - 0.5774).abs() < 1e-4);
        }
        assert_eq!(diagonal_init(1).unwrap().theta, vec![1.0]);
        assert!((diagonal_init(4).unwrap().norm() - 1.0).abs() < 1e-12);
        assert!(diagonal_init(0).is_err());
    }

    proptest! {
        #[test]
        fn linear_filter_is_homogeneous(
            rows in prop::collection::vec(prop::collection::vec(-10.0..10.0f64, 3), 1..20),
            theta in prop::collection::vec(-5.0..5.0f64, 3),
            lambda in -4.0..4.0f64,
        ) {
            let cloud = PointCloud::from_rows(&rows).unwrap();
            let base = LinearFilter.evaluate(&cloud, &FilterParams::new(theta.clone()).unwrap()).unwrap();
            let scaled_theta: Vec<f64> = theta.iter().map(|t| lambda * t).collect();
            let scaled = LinearFilter.evaluate(&cloud, &FilterParams::new(scaled_theta).unwrap()).unwrap();
            let scale = rows.iter().flatten().map(|v| v.abs()).sum::<f64>()
                * theta.iter().map(|t| t.abs()).sum::<f64>() * lambda.abs().max(1.0);
            for (a, b) in base.values.iter().zip(&scaled.values) {
                prop_assert!((lambda * a - b).abs() <= 1e-12 * scale.max(1.0));
            }
        }
    }
}
