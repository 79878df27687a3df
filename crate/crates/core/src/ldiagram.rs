//! Lagged return maps (x_t, x_{t+l}) and their quadrant occupation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::RealSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet2D {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lag: usize,
}

impl PointSet2D {
    pub fn new(x: Vec<f64>, y: Vec<f64>, lag: usize) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        if let Some(index) = x
            .iter()
            .zip(&y)
            .position(|(a, b)| !a.is_finite() || !b.is_finite())
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { x, y, lag })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.x.iter().copied().zip(self.y.iter().copied())
    }
}

pub fn build_ldiagram(series: &RealSeries, lag: usize) -> Result<PointSet2D> {
    let n = series.len();
    if lag == 0 {
        return Err(Error::InvalidConfig("lag must be at least 1".into()));
    }
    if n <= lag {
        return Err(Error::LagTooLarge { lag, len: n });
    }
    let v = series.values();
    Ok(PointSet2D {
        x: v[..n - lag].to_vec(),
        y: v[lag..].to_vec(),
        lag,
    })
}

/// Occupation of the four quadrants, numbered anticlockwise from (+, +).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadrantStats {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    /// Positive minus negative entries of the original series.
    pub n_pos_minus_neg: i64,
    pub sum_returns: f64,
    /// Points lying on an axis, excluded from the probabilities.
    pub n_axis: usize,
}

impl QuadrantStats {
    pub fn probabilities(&self) -> [f64; 4] {
        [self.p1, self.p2, self.p3, self.p4]
    }
}

pub fn quadrant_stats(points: &PointSet2D, original: &RealSeries) -> Result<QuadrantStats> {
    if points.is_empty() {
        return Err(Error::EmptyInput { needed: 1, got: 0 });
    }
    let mut counts = [0usize; 4];
    let mut n_axis = 0;
    for (x, y) in points.iter() {
        let q = match (x > 0.0, x < 0.0, y > 0.0, y < 0.0) {
            (true, _, true, _) => 0,
            (_, true, true, _) => 1,
            (_, true, _, true) => 2,
            (true, _, _, true) => 3,
            _ => {
                n_axis += 1;
                continue;
            }
        };
        counts[q] += 1;
    }
    let classified: usize = counts.iter().sum();
    let p = |c: usize| {
        if classified == 0 {
            0.0
        } else {
            c as f64 / classified as f64
        }
    };
    let values = original.values();
    let pos = values.iter().filter(|&&v| v > 0.0).count() as i64;
    let neg = values.iter().filter(|&&v| v < 0.0).count() as i64;
    Ok(QuadrantStats {
        p1: p(counts[0]),
        p2: p(counts[1]),
        p3: p(counts[2]),
        p4: p(counts[3]),
        n_pos_minus_neg: pos - neg,
        sum_returns: values.iter().sum(),
        n_axis,
    })
}

/// Occupancy of the band within `width` of either axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NearAxisOccupancy {
    pub width: f64,
    /// Fraction of points with |x| <= width or |y| <= width.
    pub observed: f64,
    /// The same fraction if x and y were independent with their marginals.
    pub expected: f64,
}

impl NearAxisOccupancy {
    /// observed / expected; values well below 1 indicate depleted bands.
    pub fn ratio(&self) -> f64 {
        if self.expected > 0.0 {
            self.observed / self.expected
        } else {
            f64::NAN
        }
    }
}

pub fn near_axis_occupancy(points: &PointSet2D, width: f64) -> Result<NearAxisOccupancy> {
    if points.is_empty() {
        return Err(Error::EmptyInput { needed: 1, got: 0 });
    }
    if !(width >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "band width must be >= 0, got {width}"
        )));
    }
    let n = points.len() as f64;
    let near = |v: f64| v.abs() <= width;
    let a = points.x.iter().filter(|&&v| near(v)).count() as f64 / n;
    let b = points.y.iter().filter(|&&v| near(v)).count() as f64 / n;
    let observed = points.iter().filter(|&(x, y)| near(x) || near(y)).count() as f64 / n;
    Ok(NearAxisOccupancy {
        width,
        observed,
        expected: a + b - a * b,
    })
}
