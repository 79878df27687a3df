//! Synthetic series with known scaling or distributional properties.

use rand::Rng as _;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng;
use crate::series::RealSeries;

/// Inverse variance drawn from a density proportional to
/// (x/delta)^gamma exp(-x/delta), i.e. Gamma(shape = gamma + 1, scale = delta).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaVarianceSpec {
    pub gamma: f64,
    pub delta: f64,
    pub seed: u64,
}

impl GammaVarianceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > -1.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "gamma must exceed -1, got {}",
                self.gamma
            )));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        Ok(())
    }

    /// Shape of the conventional Gamma(shape, scale) parameterization.
    pub fn shape(&self) -> f64 {
        self.gamma + 1.0
    }

    /// lambda of the q-Gaussian marginal of sigma * omega.
    pub fn marginal_lambda(&self) -> f64 {
        2.0 * (q_from_gamma(self.gamma).unwrap_or(1.0) - 1.0) / self.delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeSpec {
    /// Fraction of mass sent to the left half at every split.
    pub p: f64,
    pub levels: u32,
}

pub const MAX_CASCADE_LEVELS: u32 = 26;

/// iid standard normal draws.
pub fn gaussian_white(n: usize, seed: u64) -> RealSeries {
    let mut r = rng(seed);
    let v = (0..n).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
    RealSeries::from_finite(v).labeled(format!("white(seed={seed})"))
}

/// Fractional Gaussian noise with unit variance, exact in distribution
/// (circulant embedding of the autocovariance).
pub fn fgn(n: usize, hurst: f64, seed: u64) -> Result<RealSeries> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::InvalidH(hurst));
    }
    if n == 0 {
        return Err(Error::InvalidSpec("fgn length must be positive".into()));
    }
    let m = 2 * n;
    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|k| {
            let lag = if k <= n { k } else { m - k };
            Complex::new(fgn_autocovariance(lag, hurst), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);

    let top = row.iter().map(|c| c.re).fold(0.0, f64::max);
    let mut r = rng(seed);
    let mut w: Vec<Complex<f64>> = row
        .iter()
        .map(|c| {
            let lambda = if c.re < 0.0 && c.re > -1e-9 * top {
                0.0
            } else {
                c.re
            };
            let scale = (lambda.max(0.0) / m as f64).sqrt();
            let a: f64 = r.sample(StandardNormal);
            let b: f64 = r.sample(StandardNormal);
            Complex::new(a * scale, b * scale)
        })
        .collect();
    fft.process(&mut w);
    let v = w.iter().take(n).map(|c| c.re).collect();
    Ok(RealSeries::from_finite(v).labeled(format!("fgn(H={hurst},seed={seed})")))
}

/// Autocovariance of unit-variance fGn at integer lag `k`.
pub fn fgn_autocovariance(k: usize, hurst: f64) -> f64 {
    let k = k as f64;
    let e = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

/// Deterministic binomial multiplicative measure on 2^levels cells.
pub fn binomial_cascade(spec: CascadeSpec) -> Result<RealSeries> {
    if !(spec.p > 0.0 && spec.p < 1.0) {
        return Err(Error::InvalidSpec(format!(
            "cascade weight must lie in (0, 1), got {}",
            spec.p
        )));
    }
    if spec.levels == 0 || spec.levels > MAX_CASCADE_LEVELS {
        return Err(Error::InvalidSpec(format!(
            "cascade levels must be in 1..={MAX_CASCADE_LEVELS}, got {}",
            spec.levels
        )));
    }
    let (left, right) = (spec.p, 1.0 - spec.p);
    let mut cells = vec![1.0];
    for _ in 0..spec.levels {
        cells = cells.iter().flat_map(|&c| [c * left, c * right]).collect();
    }
    Ok(RealSeries::from_finite(cells)
        .labeled(format!("cascade(p={},levels={})", spec.p, spec.levels)))
}

/// y(t) = sigma(t) omega(t) with iid Gamma-distributed sigma^-2 and iid
/// standard normal omega. Returns (y, sigma).
pub fn superstat_series(n: usize, spec: GammaVarianceSpec) -> Result<(RealSeries, RealSeries)> {
    spec.validate()?;
    let gamma =
        Gamma::new(spec.shape(), spec.delta).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    let mut r = rng(spec.seed);
    let mut y = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    for _ in 0..n {
        let inv_var: f64 = gamma.sample(&mut r);
        let s = inv_var.sqrt().recip();
        let w: f64 = r.sample(StandardNormal);
        sigma.push(s);
        y.push(s * w);
    }
    let tag = format!(
        "gamma={},delta={},seed={}",
        spec.gamma, spec.delta, spec.seed
    );
    Ok((
        RealSeries::new(y)?.labeled(format!("superstat({tag})")),
        RealSeries::new(sigma)?.labeled(format!("sigma({tag})")),
    ))
}

/// q = 1 + 2 / (3 + 2 gamma).
pub fn q_from_gamma(gamma: f64) -> Result<f64> {
    if !(gamma > -1.5) || !gamma.is_finite() {
        return Err(Error::DomainError(format!(
            "gamma must exceed -3/2, got {gamma}"
        )));
    }
    Ok(1.0 + 2.0 / (3.0 + 2.0 * gamma))
}

/// Inverse of [`q_from_gamma`]: gamma = 1/(q - 1) - 3/2.
pub fn gamma_from_q(q: f64) -> Result<f64> {
    if !(q > 1.0) || !q.is_finite() {
        return Err(Error::DomainError(format!("q must exceed 1, got {q}")));
    }
    Ok(1.0 / (q - 1.0) - 1.5)
}

/// Heavy-tailed samples from the q-Gaussian (Student-t) family, q in (1, 3),
/// drawn as a Gaussian with Gamma-distributed precision.
pub fn q_gaussian_samples(n: usize, q: f64, lambda: f64, seed: u64) -> Result<RealSeries> {
    if !(q > 1.0 && q < 3.0) {
        return Err(Error::DomainError(format!("q must lie in (1, 3), got {q}")));
    }
    if !(lambda > 0.0) {
        return Err(Error::DomainError(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let spec = GammaVarianceSpec {
        gamma: gamma_from_q(q)?,
        delta: 2.0 * (q - 1.0) / lambda,
        seed,
    };
    Ok(superstat_series(n, spec)?
        .0
        .labeled(format!("qgauss(q={q},lambda={lambda},seed={seed})")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{autocorrelation, mean, variance};

    #[test]
    fn white_noise_moments() {
        let n = 1 << 20;
        let x = gaussian_white(n, 1);
        assert!(mean(x.values()).abs() < 4.0 / (n as f64).sqrt());
        assert!((variance(x.values()) - 1.0).abs() < 0.02);
        assert_eq!(gaussian_white(100, 5), gaussian_white(100, 5));
        assert_ne!(gaussian_white(100, 5), gaussian_white(100, 6));
    }

    #[test]
    fn fgn_half_is_white() {
        let x = fgn(1 << 16, 0.5, 3).unwrap();
        assert!((variance(x.values()) - 1.0).abs() < 0.02);
        assert!(autocorrelation(x.values(), 1).abs() < 3.0 / 256.0);
    }

    #[test]
    fn fgn_lag_one_correlation() {
        for (h, seed) in [(0.3, 11), (0.8, 12)] {
            let x = fgn(1 << 16, h, seed).unwrap();
            let want = 2f64.powf(2.0 * h - 1.0) - 1.0;
            let got = autocorrelation(x.values(), 1);
            assert!((got - want).abs() < 0.02, "H={h}: {got} vs {want}");
        }
    }

    #[test]
    fn fgn_rejects_bad_hurst() {
        assert!(matches!(fgn(16, 1.0, 0), Err(Error::InvalidH(_))));
        assert!(matches!(fgn(16, 0.0, 0), Err(Error::InvalidH(_))));
    }

    #[test]
    fn cascade_uniform_and_conserving() {
        let c = binomial_cascade(CascadeSpec { p: 0.5, levels: 10 }).unwrap();
        assert!(c.values().iter().all(|&v| v == 2f64.powi(-10)));
        for p in [0.1, 0.3, 0.77] {
            let c = binomial_cascade(CascadeSpec { p, levels: 14 }).unwrap();
            assert_eq!(c.len(), 1 << 14);
            assert!((c.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(binomial_cascade(CascadeSpec { p: 1.0, levels: 3 }).is_err());
        assert!(binomial_cascade(CascadeSpec { p: 0.3, levels: 27 }).is_err());
    }

    #[test]
    fn cascade_leftmost_cell() {
        let c = binomial_cascade(CascadeSpec { p: 0.3, levels: 3 }).unwrap();
        assert!((c.values()[0] - 0.027).abs() < 1e-15);
        assert!((c.values()[7] - 0.343).abs() < 1e-15);
    }

    #[test]
    fn superstat_inverse_variance_mean() {
        let spec = GammaVarianceSpec {
            gamma: 1.82,
            delta: 2.0,
            seed: 17,
        };
        let n = 1 << 17;
        let (y, sigma) = superstat_series(n, spec).unwrap();
        let inv: Vec<f64> = sigma.values().iter().map(|s| s.powi(-2)).collect();
        let want = (1.82 + 1.0) * 2.0;
        assert!((mean(&inv) / want - 1.0).abs() < 0.02);
        assert!(autocorrelation(y.values(), 1).abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn superstat_rejects_bad_spec() {
        let bad = GammaVarianceSpec {
            gamma: -1.5,
            delta: 2.0,
            seed: 0,
        };
        assert!(matches!(
            superstat_series(10, bad),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn q_gamma_relations() {
        assert!((q_from_gamma(1.82).unwrap() - 1.3012).abs() < 5e-5);
        for q in [1.01, 1.3, 1.5, 1.66, 2.5] {
            let back = q_from_gamma(gamma_from_q(q).unwrap()).unwrap();
            assert!((back - q).abs() < 1e-14);
        }
        assert!((q_from_gamma(1e12).unwrap() - 1.0).abs() < 1e-11);
        assert!(q_from_gamma(-2.0).is_err());
        assert!(gamma_from_q(1.0).is_err());
    }
}
