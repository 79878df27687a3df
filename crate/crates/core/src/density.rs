//! Histogram densities and least-squares fits of the F-distribution
//! (volatility) and q-Gaussian (returns) families.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand_distr::{Beta, Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, SimplexOptions};
use crate::rng::rng;
use crate::series::RealSeries;

pub const MIN_BINS: usize = 4;
pub const MIN_FIT_BINS: usize = 8;
pub const DEFAULT_LOG_BINS: usize = 50;
/// Cap on the automatic (Freedman-Diaconis) bin count.
pub const MAX_AUTO_BINS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binning {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalPdf {
    pub centers: Vec<f64>,
    pub density: Vec<f64>,
    pub bin_edges: Vec<f64>,
    pub n_samples: usize,
}

impl EmpiricalPdf {
    /// Assemble a histogram from edges and densities; centers are
    /// arithmetic midpoints.
    pub fn from_parts(bin_edges: Vec<f64>, density: Vec<f64>, n_samples: usize) -> Result<Self> {
        if bin_edges.len() != density.len() + 1 {
            return Err(Error::LengthMismatch {
                left: bin_edges.len(),
                right: density.len() + 1,
            });
        }
        if density.len() < MIN_BINS {
            return Err(Error::InsufficientBins {
                needed: MIN_BINS,
                got: density.len(),
            });
        }
        if bin_edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidConfig(
                "bin edges must be strictly increasing".into(),
            ));
        }
        if let Some(index) = density.iter().position(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::NonFinite { index });
        }
        let centers = bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Ok(Self {
            centers,
            density,
            bin_edges,
            n_samples,
        })
    }

    pub fn widths(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn integral(&self) -> f64 {
        self.density
            .iter()
            .zip(self.widths())
            .map(|(d, w)| d * w)
            .sum()
    }

    pub fn nonempty_bins(&self) -> usize {
        self.density.iter().filter(|&&d| d > 0.0).count()
    }

    /// Density of a single count in each bin.
    fn one_count(&self) -> Vec<f64> {
        let n = self.n_samples.max(1) as f64;
        self.widths().iter().map(|w| 1.0 / (n * w)).collect()
    }
}

/// Normalized histogram. `bins = None` picks Freedman-Diaconis for linear
/// and [`DEFAULT_LOG_BINS`] for log binning.
pub fn empirical_pdf(
    series: &RealSeries,
    bins: Option<usize>,
    binning: Binning,
) -> Result<EmpiricalPdf> {
    let xs = series.values();
    if xs.is_empty() {
        return Err(Error::EmptyInput { needed: 1, got: 0 });
    }
    if binning == Binning::Log {
        if let Some(&v) = xs.iter().find(|&&v| v <= 0.0) {
            return Err(Error::NonPositiveForLog(v));
        }
    }
    let bins = match bins {
        Some(b) if b < MIN_BINS => {
            return Err(Error::InsufficientBins {
                needed: MIN_BINS,
                got: b,
            })
        }
        Some(b) => b,
        None => match binning {
            Binning::Linear => freedman_diaconis_bins(xs),
            Binning::Log => DEFAULT_LOG_BINS,
        },
    };
    let (mut lo, mut hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    if lo == hi {
        match binning {
            Binning::Linear => {
                lo -= 0.5;
                hi += 0.5;
            }
            Binning::Log => {
                lo /= 2.0;
                hi *= 2.0;
            }
        }
    }
    let map = |v: f64| match binning {
        Binning::Linear => v,
        Binning::Log => v.ln(),
    };
    let (a, b) = (map(lo), map(hi));
    let step = (b - a) / bins as f64;
    let mut edges: Vec<f64> = (0..=bins)
        .map(|i| {
            let t = a + step * i as f64;
            match binning {
                Binning::Linear => t,
                Binning::Log => t.exp(),
            }
        })
        .collect();
    edges[0] = lo;
    edges[bins] = hi;

    let mut counts = vec![0usize; bins];
    for &x in xs {
        let i = (((map(x) - a) / step).floor() as usize).min(bins - 1);
        counts[i] += 1;
    }
    let n = xs.len() as f64;
    let density = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, w)| c as f64 / (n * (w[1] - w[0])))
        .collect();
    EmpiricalPdf::from_parts(edges, density, xs.len())
}

/// ceil(range / (2 IQR n^(-1/3))), falling back to Sturges' rule when the
/// interquartile range is zero.
pub fn freedman_diaconis_bins(xs: &[f64]) -> usize {
    let n = xs.len();
    if n < 2 {
        return MIN_BINS;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let range = v[n - 1] - v[0];
    let iqr = quantile(&v, 0.75) - quantile(&v, 0.25);
    let bins = if iqr > 0.0 && range > 0.0 {
        let width = 2.0 * iqr * (n as f64).powf(-1.0 / 3.0);
        (range / width).ceil() as usize
    } else {
        (n as f64).log2().ceil() as usize + 1
    };
    bins.clamp(MIN_BINS, MAX_AUTO_BINS)
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// [1 - (1-q) u]^(1/(1-q)), with the exponential at q = 1 and zero where
/// the bracket is not positive.
pub fn q_exponential_decay(u: f64, q: f64) -> f64 {
    if (q - 1.0).abs() < 1e-9 {
        return (-u).exp();
    }
    let base = 1.0 - (1.0 - q) * u;
    if base <= 0.0 {
        0.0
    } else {
        base.powf(1.0 / (1.0 - q))
    }
}

/// Unnormalized F-distribution shape (v/theta)^phi [1 - (1-q) v/theta]^(1/(1-q)).
pub fn f_distribution_shape(v: f64, theta: f64, phi: f64, q: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let u = v / theta;
    u.powf(phi) * q_exponential_decay(u, q)
}

/// q-Gaussian density Z^-1 [1 - (1-q) x^2/lambda]^(1/(1-q)).
pub fn q_gaussian_density(x: f64, q: f64, lambda: f64, z: f64) -> f64 {
    q_exponential_decay(x * x / lambda, q) / z
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    FDistribution,
    QGaussian,
}

impl Family {
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::FDistribution => &["theta", "phi", "q", "amplitude"],
            Family::QGaussian => &["q", "lambda", "z"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub family: Family,
    pub params: BTreeMap<String, f64>,
    /// Mean squared density residual over the fitted bins.
    pub chi2_per_n: f64,
    pub r2: f64,
    /// Gauss-Newton standard errors; NaN when the fit is degenerate.
    pub stderr: BTreeMap<String, f64>,
    pub n_bins: usize,
    pub converged: bool,
}

impl FitReport {
    pub fn param(&self, name: &str) -> f64 {
        self.params.get(name).copied().unwrap_or(f64::NAN)
    }

    pub fn stderr_of(&self, name: &str) -> f64 {
        self.stderr.get(name).copied().unwrap_or(f64::NAN)
    }

    fn values(&self) -> Vec<f64> {
        self.family
            .param_names()
            .iter()
            .map(|n| self.param(n))
            .collect()
    }

    /// Fitted density at `x`.
    pub fn predict(&self, x: f64) -> f64 {
        model(self.family, &self.values(), x)
    }
}

fn model(family: Family, p: &[f64], x: f64) -> f64 {
    match family {
        Family::FDistribution => p[3] * f_distribution_shape(x, p[0], p[1], p[2]),
        Family::QGaussian => q_gaussian_density(x, p[0], p[1], p[2]),
    }
}

/// Bins entering a fit: abscissae, densities and weights 1/max(density, one count).
#[derive(Clone)]
struct FitData {
    x: Vec<f64>,
    d: Vec<f64>,
    w: Vec<f64>,
    floor: Vec<f64>,
}

impl FitData {
    fn new(pdf: &EmpiricalPdf, nonempty_only: bool) -> Result<Self> {
        if pdf.density.iter().all(|&d| d == 0.0) {
            return Err(Error::ConvergenceFailure(
                "density is identically zero".into(),
            ));
        }
        let nonempty = pdf.nonempty_bins();
        if nonempty < MIN_FIT_BINS {
            return Err(Error::InsufficientBins {
                needed: MIN_FIT_BINS,
                got: nonempty,
            });
        }
        let floor = pdf.one_count();
        let mut data = FitData {
            x: Vec::new(),
            d: Vec::new(),
            w: Vec::new(),
            floor: Vec::new(),
        };
        for ((&x, &d), &e) in pdf.centers.iter().zip(&pdf.density).zip(&floor) {
            if nonempty_only && d == 0.0 {
                continue;
            }
            data.x.push(x);
            data.d.push(d);
            data.w.push(1.0 / d.max(e));
            data.floor.push(e);
        }
        Ok(data)
    }

    /// Weighted SSE of `scale * g` with the optimal scale profiled out.
    fn profiled(&self, g: &[f64]) -> (f64, f64) {
        let (mut sgg, mut sgd) = (0.0, 0.0);
        for ((&gi, &di), &wi) in g.iter().zip(&self.d).zip(&self.w) {
            sgg += wi * gi * gi;
            sgd += wi * gi * di;
        }
        if !(sgg > 0.0) || !sgg.is_finite() {
            return (f64::INFINITY, f64::NAN);
        }
        let scale = sgd / sgg;
        let sse = self
            .d
            .iter()
            .zip(g)
            .zip(&self.w)
            .map(|((&di, &gi), &wi)| wi * (scale * gi - di).powi(2))
            .sum();
        (sse, scale)
    }
}

fn fit_options() -> SimplexOptions {
    SimplexOptions {
        max_evals: 20_000,
        f_tol: 1e-15,
        x_tol: 1e-11,
        restarts: 3,
    }
}

/// Runs every start (concurrently) and keeps the lowest objective, ties
/// going to the earlier start.
fn multi_start<F>(objective: F, starts: &[Vec<f64>], step: &[f64]) -> Result<(Vec<f64>, f64, bool)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let runs: Vec<_> = starts
        .par_iter()
        .map(|s| nelder_mead(&objective, s, step, fit_options()))
        .collect();
    let best = runs
        .into_iter()
        .enumerate()
        .filter(|(_, m)| m.f.is_finite())
        .min_by(|a, b| a.1.f.total_cmp(&b.1.f).then(a.0.cmp(&b.0)))
        .map(|(_, m)| m)
        .ok_or_else(|| Error::ConvergenceFailure("no start reached a finite objective".into()))?;
    Ok((best.x, best.f, best.converged))
}

/// Weights start from the empirical density and are then recomputed from
/// the fitted model density; weighting by noisy observed counts alone
/// pulls the fit below sparse tail bins.
const REWEIGHT_ROUNDS: usize = 2;

fn fit_profiled<S>(
    data: &FitData,
    shape: S,
    starts: &[Vec<f64>],
    step: &[f64],
) -> Result<(Vec<f64>, f64, bool, FitData)>
where
    S: Fn(&[f64]) -> Option<Vec<f64>> + Sync,
{
    let mut data = data.clone();
    let objective = |d: &FitData, u: &[f64]| shape(u).map_or(f64::INFINITY, |g| d.profiled(&g).0);
    let (mut u, _, mut converged) = multi_start(|u: &[f64]| objective(&data, u), starts, step)?;
    for _ in 0..REWEIGHT_ROUNDS {
        let g = shape(&u).expect("optimum lies inside the domain");
        let (_, scale) = data.profiled(&g);
        data.w = g
            .iter()
            .zip(&data.floor)
            .map(|(gi, e)| 1.0 / (scale * gi).max(*e))
            .collect();
        let (u2, _, c2) = multi_start(|v: &[f64]| objective(&data, v), &[u.clone()], step)?;
        u = u2;
        converged = c2;
    }
    let g = shape(&u).expect("optimum lies inside the domain");
    let (_, scale) = data.profiled(&g);
    Ok((u, scale, converged, data))
}

/// Weighted least squares of A (v/theta)^phi [1 - (1-q) v/theta]^(1/(1-q))
/// over the nonempty bins.
pub fn fit_f_distribution(pdf: &EmpiricalPdf) -> Result<FitReport> {
    if let Some(&c) = pdf.bin_edges.iter().find(|&&e| e < 0.0) {
        return Err(Error::DomainError(format!(
            "F-distribution fits need nonnegative data, histogram starts at {c}"
        )));
    }
    let data = FitData::new(pdf, true)?;
    let shape = |u: &[f64]| -> Option<Vec<f64>> {
        let (theta, phi, q) = (u[0].exp(), u[1], u[2]);
        if !(phi > -1.0 && phi < 100.0 && q > -2.0 && q < 3.0 && theta.is_finite()) {
            return None;
        }
        Some(
            data.x
                .iter()
                .map(|&v| f_distribution_shape(v, theta, phi, q))
                .collect(),
        )
    };
    let (mean, var) = pdf_moments(pdf);
    let theta0 = (var / mean).max(1e-12);
    let phi0 = (mean * mean / var - 1.0).clamp(-0.5, 50.0);
    let mut starts = Vec::new();
    for q in [1.0, 1.05, 1.1, 1.2, 1.35] {
        for t in [1.0, 0.5] {
            starts.push(vec![(theta0 * t).ln(), phi0, q]);
        }
    }
    let (u, amplitude, converged, data) = fit_profiled(&data, shape, &starts, &[0.3, 0.3, 0.05])?;
    let params = vec![u[0].exp(), u[1], u[2], amplitude];
    Ok(report(Family::FDistribution, params, &data, converged))
}

/// Least squares of Z^-1 [1 - (1-q) x^2/lambda]^(1/(1-q)) over all bins;
/// bins outside a compact (q < 1) support contribute model value 0.
pub fn fit_q_gaussian(pdf: &EmpiricalPdf) -> Result<FitReport> {
    let data = FitData::new(pdf, false)?;
    let shape = |u: &[f64]| -> Option<Vec<f64>> {
        let (q, lambda) = (u[0], u[1].exp());
        if !(q > -2.0 && q < 3.0 && lambda.is_finite() && lambda > 0.0) {
            return None;
        }
        Some(
            data.x
                .iter()
                .map(|&x| q_exponential_decay(x * x / lambda, q))
                .collect(),
        )
    };
    let (_, var) = pdf_moments(pdf);
    let q0 = q_from_kurtosis(pdf_kurtosis(pdf));
    let mut starts = Vec::new();
    for q in [q0, 1.0, 1.2, 1.5, 0.8] {
        let lambda = var * (5.0 - 3.0 * q.min(1.6));
        starts.push(vec![q, lambda.max(1e-12).ln()]);
    }
    let (u, inv_z, converged, data) = fit_profiled(&data, shape, &starts, &[0.05, 0.2])?;
    let params = vec![u[0], u[1].exp(), 1.0 / inv_z];
    Ok(report(Family::QGaussian, params, &data, converged))
}

/// Student-t correspondence: excess kurtosis 6/(nu - 4), q = 1 + 2/(nu + 1).
fn q_from_kurtosis(k: f64) -> f64 {
    if k > 0.01 {
        let nu = 4.0 + 6.0 / k;
        1.0 + 2.0 / (nu + 1.0)
    } else if k < -0.01 {
        0.8
    } else {
        1.0
    }
}

fn pdf_moments(pdf: &EmpiricalPdf) -> (f64, f64) {
    let w = pdf.widths();
    let mass: Vec<f64> = pdf.density.iter().zip(&w).map(|(d, w)| d * w).collect();
    let total: f64 = mass.iter().sum();
    let mean = pdf
        .centers
        .iter()
        .zip(&mass)
        .map(|(c, m)| c * m)
        .sum::<f64>()
        / total;
    let var = pdf
        .centers
        .iter()
        .zip(&mass)
        .map(|(c, m)| (c - mean).powi(2) * m)
        .sum::<f64>()
        / total;
    (mean, var.max(f64::MIN_POSITIVE))
}

fn pdf_kurtosis(pdf: &EmpiricalPdf) -> f64 {
    let (mean, var) = pdf_moments(pdf);
    let w = pdf.widths();
    let total: f64 = pdf.density.iter().zip(&w).map(|(d, w)| d * w).sum();
    let m4 = pdf
        .centers
        .iter()
        .zip(pdf.density.iter().zip(&w))
        .map(|(c, (d, w))| (c - mean).powi(4) * d * w)
        .sum::<f64>()
        / total;
    m4 / (var * var) - 3.0
}

fn report(family: Family, params: Vec<f64>, data: &FitData, converged: bool) -> FitReport {
    let fitted: Vec<f64> = data.x.iter().map(|&x| model(family, &params, x)).collect();
    let n = data.d.len() as f64;
    let ss_res: f64 = fitted
        .iter()
        .zip(&data.d)
        .map(|(m, d)| (m - d).powi(2))
        .sum();
    let mean_d = data.d.iter().sum::<f64>() / n;
    let ss_tot: f64 = data.d.iter().map(|d| (d - mean_d).powi(2)).sum();
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let errs = gauss_newton_stderr(family, &params, data);
    let names = family.param_names();
    FitReport {
        family,
        params: names.iter().map(|n| n.to_string()).zip(params).collect(),
        chi2_per_n: ss_res / n,
        r2,
        stderr: names.iter().map(|n| n.to_string()).zip(errs).collect(),
        n_bins: data.d.len(),
        converged,
    }
}

/// sqrt(diag(s^2 (J^T J)^-1)) for the weighted residuals, with J from
/// central differences in the natural parameters.
fn gauss_newton_stderr(family: Family, params: &[f64], data: &FitData) -> Vec<f64> {
    let p = params.len();
    let n = data.d.len();
    let nan = vec![f64::NAN; p];
    if n <= p {
        return nan;
    }
    let residuals = |pv: &[f64]| -> Vec<f64> {
        data.x
            .iter()
            .zip(&data.d)
            .zip(&data.w)
            .map(|((&x, &d), &w)| w.sqrt() * (model(family, pv, x) - d))
            .collect()
    };
    let r0 = residuals(params);
    let mut jac = DMatrix::<f64>::zeros(n, p);
    for j in 0..p {
        let h = 1e-6 * params[j].abs().max(1e-6);
        let mut up = params.to_vec();
        let mut dn = params.to_vec();
        up[j] += h;
        dn[j] -= h;
        let (ru, rd) = (residuals(&up), residuals(&dn));
        for i in 0..n {
            jac[(i, j)] = (ru[i] - rd[i]) / (2.0 * h);
        }
    }
    let s2 = r0.iter().map(|r| r * r).sum::<f64>() / (n - p) as f64;
    let jtj = jac.transpose() * &jac;
    let Some(inv) = jtj.try_inverse() else {
        return nan;
    };
    (0..p).map(|j| (s2 * inv[(j, j)]).max(0.0).sqrt()).collect()
}

/// Draws from the normalized F-distribution family.
///
/// q > 1: theta/(q-1) * G1/G2 with G1 ~ Gamma(phi+1), G2 ~ Gamma(1/(q-1) - phi - 1);
/// q = 1: theta * Gamma(phi+1); q < 1: theta/(1-q) * Beta(phi+1, 1/(1-q) + 1).
pub fn sample_f_distribution(
    n: usize,
    theta: f64,
    phi: f64,
    q: f64,
    seed: u64,
) -> Result<RealSeries> {
    let bad = |m: String| Error::InvalidSpec(m);
    if !(theta > 0.0) || !(phi > -1.0) {
        return Err(bad(format!(
            "need theta > 0 and phi > -1, got {theta}, {phi}"
        )));
    }
    let mut r = rng(seed);
    let v: Vec<f64> = if (q - 1.0).abs() < 1e-12 {
        let g = Gamma::new(phi + 1.0, theta).map_err(|e| bad(e.to_string()))?;
        (0..n).map(|_| g.sample(&mut r)).collect()
    } else if q > 1.0 {
        let tail = 1.0 / (q - 1.0) - phi - 1.0;
        if !(tail > 0.0) {
            return Err(bad(format!(
                "q = {q} and phi = {phi} give a non-normalizable density"
            )));
        }
        let g1 = Gamma::new(phi + 1.0, 1.0).map_err(|e| bad(e.to_string()))?;
        let g2 = Gamma::new(tail, 1.0).map_err(|e| bad(e.to_string()))?;
        let scale = theta / (q - 1.0);
        (0..n)
            .map(|_| {
                let a: f64 = g1.sample(&mut r);
                let b: f64 = g2.sample(&mut r);
                scale * a / b
            })
            .collect()
    } else {
        let b = Beta::new(phi + 1.0, 1.0 / (1.0 - q) + 1.0).map_err(|e| bad(e.to_string()))?;
        let scale = theta / (1.0 - q);
        (0..n).map(|_| scale * b.sample(&mut r)).collect()
    };
    Ok(RealSeries::new(v)?.labeled(format!("fdist(theta={theta},phi={phi},q={q},seed={seed})")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{
        gamma_from_q, gaussian_white, q_from_gamma, superstat_series, GammaVarianceSpec,
    };
    use proptest::prelude::*;
    use rand::Rng as _;

    fn series(v: Vec<f64>) -> RealSeries {
        RealSeries::new(v).unwrap()
    }

    #[test]
    fn uniform_histogram() {
        let mut r = rng(8);
        let x = series((0..1_000_000).map(|_| r.random::<f64>()).collect());
        let pdf = empirical_pdf(&x, Some(10), Binning::Linear).unwrap();
        assert_eq!(pdf.centers.len(), 10);
        for d in &pdf.density {
            assert!((d - 1.0).abs() < 0.02, "{d}");
        }
    }

    #[test]
    fn histogram_errors() {
        let x = series(vec![1.0, -2.0, 3.0]);
        assert!(matches!(
            empirical_pdf(&x, Some(8), Binning::Log),
            Err(Error::NonPositiveForLog(v)) if v == -2.0
        ));
        assert!(matches!(
            empirical_pdf(&x, Some(3), Binning::Linear),
            Err(Error::InsufficientBins { .. })
        ));
        let flat = empirical_pdf(&series(vec![2.0; 10]), None, Binning::Log).unwrap();
        assert!((flat.integral() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn log_bins_are_geometric() {
        let x = series((1..=1000).map(|i| i as f64 * 0.01).collect());
        let pdf = empirical_pdf(&x, None, Binning::Log).unwrap();
        assert_eq!(pdf.density.len(), DEFAULT_LOG_BINS);
        let r0 = pdf.bin_edges[1] / pdf.bin_edges[0];
        let r1 = pdf.bin_edges[40] / pdf.bin_edges[39];
        assert!((r0 / r1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn freedman_diaconis_width() {
        let mut r = rng(2);
        let x: Vec<f64> = (0..8000).map(|_| r.random::<f64>()).collect();
        // IQR ~ 0.5, width ~ 2 * 0.5 / 20 = 0.05
        let b = freedman_diaconis_bins(&x);
        assert!((18..=22).contains(&b), "{b}");
        assert_eq!(freedman_diaconis_bins(&[1.0; 50]), 7);
    }

    #[test]
    fn q_exponential_limits() {
        assert!((q_exponential_decay(1.3, 1.0) - (-1.3f64).exp()).abs() < 1e-15);
        assert!((q_exponential_decay(1.3, 1.0 + 1e-7) - (-1.3f64).exp()).abs() < 1e-6);
        assert_eq!(q_exponential_decay(3.0, 0.5), 0.0);
        // q = 2 gives 1/(1+u)
        assert!((q_exponential_decay(3.0, 2.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_density_fails() {
        let pdf =
            EmpiricalPdf::from_parts((0..=10).map(|i| i as f64).collect(), vec![0.0; 10], 100)
                .unwrap();
        assert!(matches!(
            fit_f_distribution(&pdf),
            Err(Error::ConvergenceFailure(_))
        ));
        assert!(matches!(
            fit_q_gaussian(&pdf),
            Err(Error::ConvergenceFailure(_))
        ));
    }

    #[test]
    fn too_few_bins() {
        let mut d = vec![0.0; 20];
        d[3] = 0.5;
        d[4] = 0.5;
        let pdf = EmpiricalPdf::from_parts((0..=20).map(|i| i as f64).collect(), d, 100).unwrap();
        assert!(matches!(
            fit_q_gaussian(&pdf),
            Err(Error::InsufficientBins { got: 2, .. })
        ));
    }

    fn exact_pdf(edges: Vec<f64>, f: impl Fn(f64) -> f64) -> EmpiricalPdf {
        let density: Vec<f64> = edges.windows(2).map(|w| f(0.5 * (w[0] + w[1]))).collect();
        EmpiricalPdf::from_parts(edges, density, 1 << 20).unwrap()
    }

    #[test]
    fn noise_free_f_distribution() {
        let edges: Vec<f64> = (0..=200).map(|i| i as f64 * 0.03).collect();
        let truth = [0.32, 1.83, 1.08, 1.7];
        let pdf = exact_pdf(edges, |v| {
            truth[3] * f_distribution_shape(v, truth[0], truth[1], truth[2])
        });
        let fit = fit_f_distribution(&pdf).unwrap();
        assert!(fit.r2 > 0.9999);
        for (name, want) in ["theta", "phi", "q", "amplitude"].iter().zip(truth) {
            assert!(
                (fit.param(name) - want).abs() < 1e-6,
                "{name}: {}",
                fit.param(name)
            );
        }
    }

    #[test]
    fn noise_free_q_gaussian() {
        for (q, lambda) in [(1.3, 0.3), (0.7, 2.0), (1.0, 2.0)] {
            let edges: Vec<f64> = (0..=120).map(|i| -6.0 + i as f64 * 0.1).collect();
            let pdf = exact_pdf(edges, |x| q_gaussian_density(x, q, lambda, 1.25));
            let fit = fit_q_gaussian(&pdf).unwrap();
            assert!(fit.r2 > 0.9999);
            assert!((fit.param("q") - q).abs() < 1e-6, "{fit:?}");
            assert!((fit.param("lambda") - lambda).abs() < 1e-6);
            assert!((fit.param("z") - 1.25).abs() < 1e-6);
        }
    }

    #[test]
    fn gaussian_limit() {
        let x = gaussian_white(1 << 17, 70);
        let fit = fit_q_gaussian(&empirical_pdf(&x, None, Binning::Linear).unwrap()).unwrap();
        assert!((fit.param("q") - 1.0).abs() < 0.03, "{fit:?}");
        assert!((fit.param("lambda") - 2.0).abs() < 0.1);
        assert!(fit.chi2_per_n >= 0.0 && fit.r2 <= 1.0 && fit.converged);
    }

    #[test]
    fn gamma_limit_of_f_distribution() {
        let v = sample_f_distribution(1 << 17, 0.5, 1.0, 1.0, 71).unwrap();
        let fit = fit_f_distribution(&empirical_pdf(&v, None, Binning::Linear).unwrap()).unwrap();
        assert!((fit.param("q") - 1.0).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn f_distribution_recovery() {
        let v = sample_f_distribution(1 << 17, 0.32, 1.83, 1.08, 72).unwrap();
        let fit = fit_f_distribution(&empirical_pdf(&v, None, Binning::Linear).unwrap()).unwrap();
        for (name, want) in [("theta", 0.32), ("phi", 1.83), ("q", 1.08)] {
            assert!((fit.param(name) - want).abs() < 0.05, "{name}: {fit:?}");
        }
    }

    #[test]
    fn sampler_domains() {
        assert!(sample_f_distribution(10, 0.3, 1.0, 1.6, 0).is_err());
        assert!(sample_f_distribution(10, -0.3, 1.0, 1.1, 0).is_err());
        let v = sample_f_distribution(1000, 0.5, 1.0, 0.5, 0).unwrap();
        // compact support below theta / (1 - q)
        assert!(v.values().iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn superstatistics_closes() {
        let spec = GammaVarianceSpec {
            gamma: 1.82,
            delta: 2.0,
            seed: 73,
        };
        let (y, _) = superstat_series(1 << 17, spec).unwrap();
        let fit = fit_q_gaussian(&empirical_pdf(&y, None, Binning::Linear).unwrap()).unwrap();
        let q = fit.param("q");
        assert!((q - 1.30).abs() < 0.05);
        assert!(
            (q - q_from_gamma(1.82).unwrap()).abs() <= fit.stderr_of("q"),
            "{fit:?}"
        );
        assert!((gamma_from_q(q).unwrap() - 1.82).abs() < 0.15);
    }

    #[test]
    fn scale_equivariance() {
        let (y, _) = superstat_series(
            1 << 16,
            GammaVarianceSpec {
                gamma: 1.82,
                delta: 2.0,
                seed: 74,
            },
        )
        .unwrap();
        let c = 3.0;
        let scaled = series(y.values().iter().map(|v| c * v).collect());
        let a = fit_q_gaussian(&empirical_pdf(&y, None, Binning::Linear).unwrap()).unwrap();
        let b = fit_q_gaussian(&empirical_pdf(&scaled, None, Binning::Linear).unwrap()).unwrap();
        assert!((a.param("q") - b.param("q")).abs() <= a.stderr_of("q"));
        let ratio = b.param("lambda") / a.param("lambda");
        assert!((ratio / (c * c) - 1.0).abs() < 0.01, "{ratio}");
    }

    proptest! {
        #[test]
        fn histograms_integrate_to_one(
            xs in proptest::collection::vec(-1e3f64..1e3, 1..500),
            bins in 4usize..80,
        ) {
            let pdf = empirical_pdf(&series(xs.clone()), Some(bins), Binning::Linear).unwrap();
            prop_assert!((pdf.integral() - 1.0).abs() < 1e-6);
            prop_assert!(pdf.bin_edges.windows(2).all(|w| w[0] < w[1]));
            let pos: Vec<f64> = xs.iter().map(|v| v.abs() + 1e-3).collect();
            let pdf = empirical_pdf(&series(pos), Some(bins), Binning::Log).unwrap();
            prop_assert!((pdf.integral() - 1.0).abs() < 1e-6);
        }
    }
}
