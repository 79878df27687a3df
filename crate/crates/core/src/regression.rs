//! Least-squares helpers: straight-line fits in log-log space and
//! polynomial detrending over fixed-length windows.

use crate::error::{Error, Result};

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub r2: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = (syy - slope * sxy).max(0.0);
    let stderr = if x.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    LineFit {
        slope,
        intercept,
        stderr,
        r2,
    }
}

/// Orthonormal polynomial basis on `len` equally spaced points.
///
/// Every window of a given length shares the same design matrix, so the
/// basis is built once and each detrend is a projection.
#[derive(Debug, Clone)]
pub struct PolyBasis {
    len: usize,
    columns: Vec<Vec<f64>>,
}

impl PolyBasis {
    pub fn new(len: usize, order: usize) -> Result<Self> {
        if len < order + 1 || len < 2 {
            return Err(Error::SingularFit { len, order });
        }
        let half = (len - 1) as f64 / 2.0;
        let x: Vec<f64> = (0..len).map(|i| (i as f64 - half) / half).collect();
        let mut columns: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let mut v: Vec<f64> = x.iter().map(|&t| t.powi(k as i32)).collect();
            // two rounds of modified Gram-Schmidt
            for _ in 0..2 {
                for q in &columns {
                    let c = dot(q, &v);
                    v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
                }
            }
            let norm = dot(&v, &v).sqrt();
            if !(norm > 1e-10) {
                return Err(Error::SingularFit { len, order });
            }
            v.iter_mut().for_each(|a| *a /= norm);
            columns.push(v);
        }
        Ok(Self { len, columns })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Mean squared residual of `y` after removing its least-squares polynomial.
    pub fn residual_variance(&self, y: &[f64], scratch: &mut Vec<f64>) -> f64 {
        debug_assert_eq!(y.len(), self.len);
        scratch.clear();
        scratch.extend_from_slice(y);
        for q in &self.columns {
            let c = dot(q, scratch);
            scratch.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
        dot(scratch, scratch) / self.len as f64
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
