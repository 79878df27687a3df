//! Surrogate series: shuffling destroys temporal dependence while keeping
//! the value distribution; phase randomization keeps the power spectrum
//! while Gaussianizing the distribution.

use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng, rng_stream, Rng, RNG_ID};
use crate::series::RealSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurrogateKind {
    Shuffle,
    PhaseRandomize,
    ShuffleThenPhaseRandomize,
}

impl SurrogateKind {
    pub const ALL: [SurrogateKind; 3] = [
        SurrogateKind::Shuffle,
        SurrogateKind::PhaseRandomize,
        SurrogateKind::ShuffleThenPhaseRandomize,
    ];

    /// Short name used on the command line and in file names.
    pub fn short_name(self) -> &'static str {
        match self {
            SurrogateKind::Shuffle => "shuffle",
            SurrogateKind::PhaseRandomize => "phaserand",
            SurrogateKind::ShuffleThenPhaseRandomize => "both",
        }
    }

    pub fn from_short_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.short_name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurrogateSpec {
    pub kind: SurrogateKind,
    pub seed: u64,
}

/// Provenance written next to surrogate output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurrogateMeta {
    pub kind: SurrogateKind,
    pub seed: u64,
    pub stream: u64,
    pub rng: String,
}

impl SurrogateMeta {
    pub fn new(spec: SurrogateSpec, stream: u64) -> Self {
        Self {
            kind: spec.kind,
            seed: spec.seed,
            stream,
            rng: RNG_ID.to_string(),
        }
    }
}

/// Uniform random permutation (Fisher-Yates).
pub fn shuffle(series: &RealSeries, seed: u64) -> Result<RealSeries> {
    shuffle_with(series, &mut rng(seed))
}

/// Fourier phases replaced by uniform random phases with conjugate symmetry.
pub fn phase_randomize(series: &RealSeries, seed: u64) -> Result<RealSeries> {
    phase_randomize_with(series, &mut rng(seed))
}

pub fn make_surrogate(series: &RealSeries, spec: SurrogateSpec) -> Result<RealSeries> {
    make_with(series, spec.kind, &mut rng(spec.seed))
}

/// `count` surrogates; the i-th uses stream i of `base_seed`, so entry 0
/// equals `make_surrogate` with the same seed and the batch does not
/// depend on how it is scheduled.
pub fn surrogate_batch(
    series: &RealSeries,
    kind: SurrogateKind,
    base_seed: u64,
    count: usize,
) -> Result<Vec<RealSeries>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| make_with(series, kind, &mut rng_stream(base_seed, i)))
        .collect()
}

fn make_with(series: &RealSeries, kind: SurrogateKind, r: &mut Rng) -> Result<RealSeries> {
    let out = match kind {
        SurrogateKind::Shuffle => shuffle_with(series, r)?,
        SurrogateKind::PhaseRandomize => phase_randomize_with(series, r)?,
        SurrogateKind::ShuffleThenPhaseRandomize => {
            let shuffled = shuffle_with(series, r)?;
            phase_randomize_with(&shuffled, r)?
        }
    };
    Ok(out.labeled(format!("{}:{}", series.label(), kind.short_name())))
}

fn shuffle_with(series: &RealSeries, r: &mut Rng) -> Result<RealSeries> {
    series.require_len(2)?;
    let mut v = series.values().to_vec();
    v.shuffle(r);
    Ok(RealSeries::from_finite(v))
}

fn phase_randomize_with(series: &RealSeries, r: &mut Rng) -> Result<RealSeries> {
    let n = series.len();
    if n < 4 {
        return Err(Error::TooShort(n));
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut spec: Vec<Complex<f64>> = series
        .values()
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .collect();
    planner.plan_fft_forward(n).process(&mut spec);

    spec[0].im = 0.0;
    let last = n.div_ceil(2) - 1;
    for f in 1..=last {
        let theta: f64 = r.random::<f64>() * TAU;
        let c = Complex::from_polar(spec[f].norm(), theta);
        spec[f] = c;
        spec[n - f] = c.conj();
    }
    if n.is_multiple_of(2) {
        spec[n / 2].im = 0.0;
    }
    planner.plan_fft_inverse(n).process(&mut spec);
    let scale = 1.0 / n as f64;
    Ok(RealSeries::from_finite(
        spec.iter().map(|c| c.re * scale).collect(),
    ))
}

/// |DFT|^2 of a real series; used to check spectrum preservation.
pub fn periodogram(xs: &[f64]) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = xs.iter().map(|&x| Complex::new(x, 0.0)).collect();
    FftPlanner::<f64>::new()
        .plan_fft_forward(xs.len())
        .process(&mut buf);
    buf.iter().map(|c| c.norm_sqr()).collect()
}
