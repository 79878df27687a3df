use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{MfdfaConfig, ProfileOrder, Segmentation};
use crate::error::{Error, Result};
use crate::regression::PolyBasis;
use crate::series::{mean, RealSeries};

/// Floor applied to a segment variance that detrending drove to zero.
pub const VARIANCE_FLOOR: f64 = 1e-30;

/// Cumulative sum of deviations from the mean, applied once or twice.
pub fn build_profile(series: &RealSeries, order: ProfileOrder) -> Result<RealSeries> {
    series.require_len(2)?;
    let mut y = integrate(series.values());
    if order == ProfileOrder::Double {
        y = integrate(&y);
    }
    Ok(RealSeries::from_finite(y).labeled(series.label()))
}

fn integrate(xs: &[f64]) -> Vec<f64> {
    let m = mean(xs);
    xs.iter()
        .scan(0.0, |acc, x| {
            *acc += x - m;
            Some(*acc)
        })
        .collect()
}

/// F_z(s) for every (window size, moment order) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationTable {
    pub s: Vec<usize>,
    pub z: Vec<f64>,
    /// `f[i][j]` is F at scale `s[i]` and order `z[j]`.
    pub f: Vec<Vec<f64>>,
    /// Segments averaged at each scale.
    pub n_segments: Vec<usize>,
    /// Segment variances that had to be floored at [`VARIANCE_FLOOR`].
    pub floored: usize,
}

impl FluctuationTable {
    pub fn column(&self, z_index: usize) -> Vec<f64> {
        self.f.iter().map(|row| row[z_index]).collect()
    }
}

/// Detrended segment variances and their z-th order averages.
///
/// Scales are processed in parallel; each scale is reduced sequentially
/// in segment order, so the table does not depend on the thread count.
pub fn fluctuation_table(profile: &RealSeries, cfg: &MfdfaConfig) -> Result<FluctuationTable> {
    cfg.validate()?;
    let y = profile.values();
    let n = y.len();
    if let Some(&s) = cfg.s_grid.iter().find(|&&s| s > n / 2) {
        return Err(Error::WindowTooLarge { window: s, len: n });
    }
    let rows: Vec<(Vec<f64>, usize, usize)> = cfg
        .s_grid
        .par_iter()
        .map(|&s| {
            let variances = segment_variances(y, s, cfg.poly_order, cfg.segmentation)?;
            let floored = variances.iter().filter(|&&v| v == VARIANCE_FLOOR).count();
            let row = cfg.z_grid.iter().map(|&z| moment(&variances, z)).collect();
            Ok((row, variances.len(), floored))
        })
        .collect::<Result<_>>()?;

    let floored: usize = rows.iter().map(|r| r.2).sum();
    if floored > 0 {
        warn!("{floored} segment variances were zero and floored at {VARIANCE_FLOOR:e}");
    }
    let (f, n_segments) = rows.into_iter().map(|(row, k, _)| (row, k)).unzip();
    Ok(FluctuationTable {
        s: cfg.s_grid.clone(),
        z: cfg.z_grid.clone(),
        f,
        n_segments,
        floored,
    })
}

fn segment_variances(
    y: &[f64],
    s: usize,
    poly_order: usize,
    segmentation: Segmentation,
) -> Result<Vec<f64>> {
    let basis = PolyBasis::new(s, poly_order)?;
    let n = y.len();
    let count = n / s;
    let mut starts: Vec<usize> = (0..count).map(|v| v * s).collect();
    if segmentation == Segmentation::TwoPass {
        starts.extend((0..count).map(|v| n - (v + 1) * s));
    }
    let mut scratch = Vec::with_capacity(s);
    Ok(starts
        .into_iter()
        .map(|start| {
            let v = basis.residual_variance(&y[start..start + s], &mut scratch);
            if v > VARIANCE_FLOOR {
                v
            } else {
                VARIANCE_FLOOR
            }
        })
        .collect())
}

/// Generalized mean of segment variances, computed in log space.
fn moment(variances: &[f64], z: f64) -> f64 {
    let n = variances.len() as f64;
    if z == 0.0 {
        let mean_log = variances.iter().map(|v| v.ln()).sum::<f64>() / n;
        return (0.5 * mean_log).exp();
    }
    let half = z / 2.0;
    let top = variances
        .iter()
        .map(|v| half * v.ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = variances.iter().map(|v| (half * v.ln() - top).exp()).sum();
    ((top + (sum / n).ln()) / z).exp()
}
