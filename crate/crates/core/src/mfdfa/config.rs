use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of cumulative sums applied before segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileOrder {
    /// Y(t): the standard MF-DFA profile.
    Single,
    /// Y~(t): Y integrated once more; fits use F_z(s)/s.
    Double,
}

impl ProfileOrder {
    pub fn as_int(self) -> u32 {
        match self {
            ProfileOrder::Single => 1,
            ProfileOrder::Double => 2,
        }
    }

    pub fn from_int(order: u32) -> Result<Self> {
        match order {
            1 => Ok(ProfileOrder::Single),
            2 => Ok(ProfileOrder::Double),
            other => Err(Error::InvalidConfig(format!(
                "profile order must be 1 or 2, got {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segmentation {
    /// floor(N/s) windows from the start of the series.
    OnePass,
    /// The forward windows plus floor(N/s) windows anchored at the end.
    TwoPass,
}

/// Largest window used by the default grid.
pub const MAX_DEFAULT_SCALE: usize = 11585;
pub const MIN_DEFAULT_SCALE: usize = 8;
pub const DEFAULT_SCALE_POINTS: usize = 30;
pub const DEFAULT_POLY_ORDER: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfdfaConfig {
    /// Degree of the detrending polynomial.
    pub poly_order: usize,
    pub profile_order: ProfileOrder,
    /// Window sizes, strictly increasing.
    pub s_grid: Vec<usize>,
    /// Moment orders, strictly increasing; must contain 0 and 2.
    pub z_grid: Vec<f64>,
    /// Inclusive window-size range used by the log-log regression.
    pub fit_range: (usize, usize),
    pub segmentation: Segmentation,
}

impl MfdfaConfig {
    /// Default configuration for a series of length `n`: 30 geometric
    /// scales from 8 to min(n/4, 11585), z from -3 to 5 in steps of 0.25,
    /// fifth-order detrending of the double profile.
    ///
    /// The regression runs from the first scale >= 32 (below that a
    /// fifth-order fit leaves too few residual degrees of freedom and negative
    /// moments are biased) up to the last scale still averaging at least
    /// [`DEFAULT_MIN_SEGMENTS`] windows. If that leaves fewer than
    /// [`MIN_FIT_SCALES`](super::MIN_FIT_SCALES) scales the whole grid is used.
    pub fn for_length(n: usize) -> Result<Self> {
        let hi = (n / 4).min(MAX_DEFAULT_SCALE);
        if hi <= MIN_DEFAULT_SCALE {
            return Err(Error::EmptyInput {
                needed: 4 * (MIN_DEFAULT_SCALE + 1),
                got: n,
            });
        }
        let s_grid = geometric_scales(MIN_DEFAULT_SCALE, hi, DEFAULT_SCALE_POINTS);
        let fit_lo = *s_grid
            .iter()
            .find(|&&s| s >= DEFAULT_FIT_LO)
            .unwrap_or(&s_grid[0]);
        let fit_hi = s_grid
            .iter()
            .copied()
            .rfind(|&s| n / s >= DEFAULT_MIN_SEGMENTS)
            .unwrap_or(fit_lo);
        let in_range = s_grid
            .iter()
            .filter(|&&s| s >= fit_lo && s <= fit_hi)
            .count();
        let fit_range = if in_range >= super::MIN_FIT_SCALES {
            (fit_lo, fit_hi)
        } else {
            (s_grid[0], *s_grid.last().unwrap())
        };
        let cfg = Self {
            poly_order: DEFAULT_POLY_ORDER,
            profile_order: ProfileOrder::Double,
            fit_range,
            s_grid,
            z_grid: z_range(-3.0, 5.0, 0.25),
            segmentation: Segmentation::OnePass,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.s_grid.is_empty() {
            return bad("empty scale grid".into());
        }
        if self.s_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("scale grid must be strictly increasing".into());
        }
        if self.s_grid[0] < self.poly_order + 2 {
            return bad(format!(
                "smallest scale {} must be at least poly_order + 2 = {}",
                self.s_grid[0],
                self.poly_order + 2
            ));
        }
        if self.z_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("moment grid must be strictly increasing".into());
        }
        if self.z_grid.iter().any(|z| !z.is_finite()) {
            return bad("moment grid contains non-finite values".into());
        }
        if self.index_of_z(0.0).is_none() || self.index_of_z(2.0).is_none() {
            return bad("moment grid must contain 0 and 2".into());
        }
        let (lo, hi) = self.fit_range;
        let (min, max) = (self.s_grid[0], *self.s_grid.last().unwrap());
        if !(lo < hi && lo >= min && hi <= max) {
            return bad(format!(
                "fit range ({lo}, {hi}) must satisfy {min} <= lo < hi <= {max}"
            ));
        }
        Ok(())
    }

    pub fn index_of_z(&self, z: f64) -> Option<usize> {
        index_of(&self.z_grid, z)
    }

    /// Scales that enter the regression.
    pub fn fit_scales(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (lo, hi) = self.fit_range;
        self.s_grid
            .iter()
            .copied()
            .enumerate()
            .filter(move |&(_, s)| s >= lo && s <= hi)
    }
}

/// Lower edge of the default regression window.
pub const DEFAULT_FIT_LO: usize = 32;
/// Windows per scale required at the upper edge of the default regression.
pub const DEFAULT_MIN_SEGMENTS: usize = 25;

pub(crate) fn index_of(grid: &[f64], z: f64) -> Option<usize> {
    grid.iter().position(|&g| (g - z).abs() < 1e-9)
}

/// `count` integer scales spaced geometrically between `lo` and `hi`
/// (inclusive), with duplicates from rounding removed.
pub fn geometric_scales(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    if count < 2 || hi <= lo {
        return vec![lo];
    }
    let ratio = (hi as f64 / lo as f64).ln() / (count - 1) as f64;
    let mut out: Vec<usize> = (0..count)
        .map(|i| (lo as f64 * (ratio * i as f64).exp()).round() as usize)
        .collect();
    *out.last_mut().unwrap() = hi;
    out.dedup();
    out
}

/// Evenly spaced moment orders from `lo` to `hi`, snapped so that grid
/// points which should be integers are exactly integers.
pub fn z_range(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| {
            let z = lo + i as f64 * step;
            let r = (z * 1e9).round() / 1e9;
            if r == -0.0 {
                0.0
            } else {
                r
            }
        })
        .collect()
}
