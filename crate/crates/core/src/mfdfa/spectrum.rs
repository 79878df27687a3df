use log::debug;
use serde::{Deserialize, Serialize};

use super::config::{index_of, MfdfaConfig};
use super::fluctuation::FluctuationTable;
use crate::error::{Error, Result};
use crate::regression::fit_line;

/// Minimum number of window sizes inside the regression range.
pub const MIN_FIT_SCALES: usize = 4;

/// Generalized Hurst exponents h(z) and mass exponents tau(z) = z h(z) - 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub z: Vec<f64>,
    pub h: Vec<f64>,
    pub tau: Vec<f64>,
    pub stderr: Vec<f64>,
    #[serde(default)]
    pub r2: Vec<f64>,
}

impl ScalingResult {
    /// Builds a result from h(z), deriving tau.
    pub fn from_h(z: Vec<f64>, h: Vec<f64>, stderr: Vec<f64>, r2: Vec<f64>) -> Self {
        let tau = z.iter().zip(&h).map(|(z, h)| z * h - 1.0).collect();
        Self {
            z,
            h,
            tau,
            stderr,
            r2,
        }
    }

    /// h(z_min) - h(z_max).
    pub fn delta_h(&self) -> f64 {
        self.h[0] - self.h[self.h.len() - 1]
    }

    pub fn h_at(&self, z: f64) -> Option<f64> {
        index_of(&self.z, z).map(|i| self.h[i])
    }

    /// Largest |tau(z) - (z/2 - 1)|: distance from the uncorrelated Gaussian line.
    pub fn max_gaussian_deviation(&self) -> f64 {
        self.z
            .iter()
            .zip(&self.tau)
            .map(|(z, t)| (t - (z / 2.0 - 1.0)).abs())
            .fold(0.0, f64::max)
    }
}

/// Log-log regression of F_z(s) / s^(profile_order - 1) against s.
pub fn scaling_exponents(table: &FluctuationTable, cfg: &MfdfaConfig) -> Result<ScalingResult> {
    let (lo, hi) = cfg.fit_range;
    let picked: Vec<usize> = table
        .s
        .iter()
        .enumerate()
        .filter(|(_, &s)| s >= lo && s <= hi)
        .map(|(i, _)| i)
        .collect();
    if picked.len() < MIN_FIT_SCALES {
        return Err(Error::InsufficientScales {
            needed: MIN_FIT_SCALES,
            got: picked.len(),
        });
    }
    let shift = f64::from(cfg.profile_order.as_int() - 1);
    let x: Vec<f64> = picked.iter().map(|&i| (table.s[i] as f64).log2()).collect();
    let mut h = Vec::with_capacity(table.z.len());
    let mut stderr = Vec::with_capacity(table.z.len());
    let mut r2 = Vec::with_capacity(table.z.len());
    for j in 0..table.z.len() {
        let y: Vec<f64> = picked
            .iter()
            .zip(&x)
            .map(|(&i, lx)| table.f[i][j].log2() - shift * lx)
            .collect();
        let fit = fit_line(&x, &y);
        h.push(fit.slope);
        stderr.push(fit.stderr);
        r2.push(fit.r2);
    }
    Ok(ScalingResult::from_h(table.z.clone(), h, stderr, r2))
}

/// Flags raised while building a spectrum. Neither is fatal.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDiagnostics {
    /// alpha(z) increases somewhere along the moment grid.
    pub non_monotonic_alpha: bool,
    /// Grid steps where tau decreases or bends upward beyond its standard error.
    pub tau_shape_violations: usize,
}

/// Singularity spectrum obtained by Legendre transform of tau(z).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultifractalSpectrum {
    pub z: Vec<f64>,
    pub alpha: Vec<f64>,
    #[serde(rename = "f")]
    pub f_alpha: Vec<f64>,
    pub delta_h: f64,
    pub delta_alpha: f64,
    pub hurst: f64,
    pub support_dim: f64,
    #[serde(default)]
    pub diagnostics: SpectrumDiagnostics,
}

/// alpha = h + z dh/dz (central differences, one-sided at the ends) and
/// f = z (alpha - h) + 1.
pub fn legendre_spectrum(result: &ScalingResult) -> Result<MultifractalSpectrum> {
    let z = &result.z;
    let h = &result.h;
    let n = z.len();
    if n < 3 {
        return Err(Error::InvalidConfig(format!(
            "Legendre transform needs at least 3 moment orders, got {n}"
        )));
    }
    let zero =
        index_of(z, 0.0).ok_or_else(|| Error::InvalidConfig("moment grid lacks z = 0".into()))?;
    let two =
        index_of(z, 2.0).ok_or_else(|| Error::InvalidConfig("moment grid lacks z = 2".into()))?;

    let dh: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                i if i == n - 1 => (n - 2, n - 1),
                i => (i - 1, i + 1),
            };
            (h[b] - h[a]) / (z[b] - z[a])
        })
        .collect();
    let alpha: Vec<f64> = (0..n).map(|i| h[i] + z[i] * dh[i]).collect();
    let f_alpha: Vec<f64> = (0..n).map(|i| z[i] * (alpha[i] - h[i]) + 1.0).collect();

    let non_monotonic_alpha = alpha.windows(2).any(|w| w[1] > w[0] + 1e-12);
    if non_monotonic_alpha {
        debug!("alpha(z) is not monotonically decreasing; h(z) estimates are noisy");
    }
    let tau_shape_violations = tau_violations(result);

    let (amin, amax) = alpha
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| {
            (lo.min(a), hi.max(a))
        });
    Ok(MultifractalSpectrum {
        z: z.clone(),
        delta_h: result.delta_h(),
        delta_alpha: amax - amin,
        hurst: h[two],
        support_dim: f_alpha[zero],
        alpha,
        f_alpha,
        diagnostics: SpectrumDiagnostics {
            non_monotonic_alpha,
            tau_shape_violations,
        },
    })
}

fn tau_violations(r: &ScalingResult) -> usize {
    let tol = |i: usize| 2.0 * r.z[i].abs() * r.stderr.get(i).copied().unwrap_or(0.0);
    let mut count = 0;
    for i in 1..r.z.len() {
        if r.tau[i] < r.tau[i - 1] - tol(i) - tol(i - 1) {
            count += 1;
        }
    }
    for i in 1..r.z.len().saturating_sub(1) {
        // concavity: slope must not increase
        let left = (r.tau[i] - r.tau[i - 1]) / (r.z[i] - r.z[i - 1]);
        let right = (r.tau[i + 1] - r.tau[i]) / (r.z[i + 1] - r.z[i]);
        let slack = (tol(i - 1) + 2.0 * tol(i) + tol(i + 1)) / (r.z[i + 1] - r.z[i - 1]);
        if right > left + slack {
            count += 1;
        }
    }
    count
}

/// Split of multifractality into dependence and distribution contributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub z: Vec<f64>,
    /// h(z) - h_shf(z).
    pub h_cor: Vec<f64>,
    /// h_shf(z).
    pub h_pdf: Vec<f64>,
    /// delta_h_shf / delta_h. Not clipped to [0, 1]; noisy estimates can leave it.
    pub weight_pdf: f64,
    pub weight_cor: f64,
    pub delta_h: f64,
    pub delta_h_shf: f64,
    /// max_z |h_shf_rnd(z) - 1/2|; near zero when only dependence and
    /// non-Gaussianity generate the scaling.
    pub shf_rnd_deviation: f64,
}

pub fn decompose(
    h_orig: &ScalingResult,
    h_shf: &ScalingResult,
    h_shf_rnd: &ScalingResult,
) -> Result<Decomposition> {
    let same = |a: &[f64], b: &[f64]| {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    };
    if !same(&h_orig.z, &h_shf.z) || !same(&h_orig.z, &h_shf_rnd.z) {
        return Err(Error::GridMismatch);
    }
    let delta_h = h_orig.delta_h();
    if delta_h == 0.0 {
        return Err(Error::ZeroDeltaH);
    }
    let delta_h_shf = h_shf.delta_h();
    let weight_pdf = delta_h_shf / delta_h;
    Ok(Decomposition {
        z: h_orig.z.clone(),
        h_cor: h_orig.h.iter().zip(&h_shf.h).map(|(a, b)| a - b).collect(),
        h_pdf: h_shf.h.clone(),
        weight_pdf,
        weight_cor: 1.0 - weight_pdf,
        delta_h,
        delta_h_shf,
        shf_rnd_deviation: h_shf_rnd
            .h
            .iter()
            .map(|h| (h - 0.5).abs())
            .fold(0.0, f64::max),
    })
}
