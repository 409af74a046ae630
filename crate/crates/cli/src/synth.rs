//! Synthetic point clouds whose topologically optimal filter direction is
//! known in closed form.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use softmapper::{Error, PointCloud, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Unit circle in the plane, evenly spaced angles from a random phase.
    Circle,
    /// Radius 1, height 4, axis along z.
    Cylinder,
    /// A unit stem along +z from the origin, with two unit arms leaving its
    /// top at +-45 degrees in the xz-plane.
    YShape,
    /// Unit square in the xy-plane with a long, sparsely sampled leg hanging
    /// down along -z from its center.
    PlaneWithLeg,
}

impl Shape {
    pub fn name(self) -> &'static str {
        match self {
            Shape::Circle => "circle",
            Shape::Cylinder => "cylinder",
            Shape::YShape => "y_shape",
            Shape::PlaneWithLeg => "plane_with_leg",
        }
    }

    /// Direction a topology-maximizing linear filter should find.
    pub fn optimal_direction(self) -> Option<Vec<f64>> {
        match self {
            Shape::YShape | Shape::PlaneWithLeg | Shape::Cylinder => Some(vec![0.0, 0.0, 1.0]),
            Shape::Circle => None,
        }
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(Shape::Circle),
            "cylinder" => Ok(Shape::Cylinder),
            "y_shape" | "y-shape" => Ok(Shape::YShape),
            "plane_with_leg" | "plane-with-leg" => Ok(Shape::PlaneWithLeg),
            other => Err(Error::InvalidInput(format!("unknown shape {other:?}"))),
        }
    }
}

/// Length of the leg of [`Shape::PlaneWithLeg`]. It has to exceed the square's
/// diagonal by a wide margin, otherwise a tilted direction carries more total
/// persistence than the vertical one.
pub const LEG_LENGTH: f64 = 4.0;
/// Fraction of [`Shape::PlaneWithLeg`] points placed (evenly spaced) on the
/// leg. Kept small so the leg does not dominate the point covariance.
pub const LEG_FRACTION: f64 = 0.01;

pub fn generate(shape: Shape, n: usize, noise: f64, seed: u64) -> Result<PointCloud> {
    if n < 10 {
        return Err(Error::InvalidInput("synthetic clouds need n >= 10".into()));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidInput("noise must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    match shape {
        Shape::Circle => {
            let phase = rng.random_range(0.0..2.0 * PI);
            for k in 0..n {
                let t = phase + 2.0 * PI * k as f64 / n as f64;
                rows.push(vec![t.cos(), t.sin()]);
            }
        }
        Shape::Cylinder => {
            for _ in 0..n {
                let t = rng.random_range(0.0..2.0 * PI);
                rows.push(vec![t.cos(), t.sin(), rng.random_range(0.0..4.0)]);
            }
        }
        Shape::YShape => {
            let per_arm = n / 3;
            let stem = n - 2 * per_arm;
            for _ in 0..stem {
                rows.push(vec![0.0, 0.0, rng.random_range(0.0..=1.0)]);
            }
            for side in [1.0, -1.0] {
                for _ in 0..per_arm {
                    let t = rng.random_range(0.0..=1.0) * FRAC_1_SQRT_2;
                    rows.push(vec![side * t, 0.0, 1.0 + t]);
                }
            }
        }
        Shape::PlaneWithLeg => {
            let leg = ((n as f64 * LEG_FRACTION).ceil() as usize).max(2);
            for _ in 0..n - leg {
                rows.push(vec![
                    rng.random_range(-0.5..=0.5),
                    rng.random_range(-0.5..=0.5),
                    0.0,
                ]);
            }
            for k in 0..leg {
                rows.push(vec![0.0, 0.0, -LEG_LENGTH * (k + 1) as f64 / leg as f64]);
            }
        }
    }
    if noise > 0.0 {
        for row in rows.iter_mut() {
            for x in row.iter_mut() {
                *x += noise * gauss.sample(&mut rng);
            }
        }
    }
    PointCloud::from_rows(&rows)
}
