//! Multifractal detrended fluctuation analysis.
//!
//! The pipeline is `build_profile` -> `fluctuation_table` ->
//! `scaling_exponents` -> `legendre_spectrum`; [`analyze`] runs all four.
//! Exponents are always reported on the single-profile scale: with the
//! double profile the regression is done on F_z(s)/s.

mod config;
mod fluctuation;
mod spectrum;

pub use config::{
    geometric_scales, z_range, MfdfaConfig, ProfileOrder, Segmentation, DEFAULT_FIT_LO,
    DEFAULT_MIN_SEGMENTS, DEFAULT_POLY_ORDER, DEFAULT_SCALE_POINTS, MAX_DEFAULT_SCALE,
    MIN_DEFAULT_SCALE,
};
pub use fluctuation::{build_profile, fluctuation_table, FluctuationTable, VARIANCE_FLOOR};
pub use spectrum::{
    decompose, legendre_spectrum, scaling_exponents, Decomposition, MultifractalSpectrum,
    ScalingResult, SpectrumDiagnostics, MIN_FIT_SCALES,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::series::RealSeries;

/// Everything MF-DFA produces for one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub table: FluctuationTable,
    pub scaling: ScalingResult,
    pub spectrum: MultifractalSpectrum,
}

pub fn analyze(series: &RealSeries, cfg: &MfdfaConfig) -> Result<Analysis> {
    let profile = build_profile(series, cfg.profile_order)?;
    let table = fluctuation_table(&profile, cfg)?;
    let scaling = scaling_exponents(&table, cfg)?;
    let spectrum = legendre_spectrum(&scaling)?;
    Ok(Analysis {
        table,
        scaling,
        spectrum,
    })
}

/// Scaling exponents only, with the default configuration for the series length.
pub fn scaling_with_defaults(series: &RealSeries) -> Result<ScalingResult> {
    let cfg = MfdfaConfig::for_length(series.len())?;
    Ok(analyze(series, &cfg)?.scaling)
}
