//! Batch runs over many inputs with a reproducible on-disk layout.
//!
//! ```text
//! OUT/manifest.json
//! OUT/errors.csv                      one row per failed input
//! OUT/mfdfa_summary.csv               per input and variant
//! OUT/average_scaling_<variant>.csv   from tau averaged across inputs
//! OUT/average_spectrum_<variant>.csv
//! OUT/average_decomposition.json
//! OUT/quadrants.csv                   per input and lag
//! OUT/fractal_dimension.csv           per input: d_f at every lag plus surrogates
//! OUT/NNN_<stem>/...                  per-input tables
//! ```
//!
//! Surrogate seeds are derived from the base seed and a hash of the series
//! contents, so an input gets the same surrogates wherever it appears in
//! the list.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boxcount::{box_dimension, BoxCountCurve, DEFAULT_BITS, DEFAULT_FIT_RANGE};
use crate::error::{Error, Result};
use crate::io::{
    format_f64, read_returns, scaling_csv, spectrum_csv, table_csv, to_json, write_file,
};
use crate::ldiagram::{build_ldiagram, near_axis_occupancy, quadrant_stats, QuadrantStats};
use crate::mfdfa::{
    analyze, decompose, legendre_spectrum, Decomposition, MfdfaConfig, MultifractalSpectrum,
    ScalingResult,
};
use crate::rng::{derive_seed, RNG_ID};
use crate::series::{variance, RealSeries};
use crate::surrogate::{make_surrogate, SurrogateKind, SurrogateSpec};

pub const SUITE_LAGS: [usize; 4] = [1, 2, 10, 50];
pub const MANIFEST_FILE: &str = "manifest.json";
/// Half-width of the near-axis band, in standard deviations of the series.
pub const DEFAULT_AXIS_BAND: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Original,
    Shuffled,
    PhaseRandomized,
    ShuffledRandomized,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Original,
        Variant::Shuffled,
        Variant::PhaseRandomized,
        Variant::ShuffledRandomized,
    ];

    pub fn name(self) -> &'static str {
        match self.surrogate() {
            None => "original",
            Some(k) => k.short_name(),
        }
    }

    pub fn surrogate(self) -> Option<SurrogateKind> {
        match self {
            Variant::Original => None,
            Variant::Shuffled => Some(SurrogateKind::Shuffle),
            Variant::PhaseRandomized => Some(SurrogateKind::PhaseRandomize),
            Variant::ShuffledRandomized => Some(SurrogateKind::ShuffleThenPhaseRandomize),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub run_mfdfa: bool,
    pub run_ldiagram: bool,
    /// `None` uses [`MfdfaConfig::for_length`] for each input.
    pub mfdfa: Option<MfdfaConfig>,
    pub lags: Vec<usize>,
    pub bits: u32,
    pub box_fit: (u32, u32),
    pub axis_band: f64,
    pub base_seed: u64,
    pub format: OutputFormat,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            run_mfdfa: true,
            run_ldiagram: true,
            mfdfa: None,
            lags: SUITE_LAGS.to_vec(),
            bits: DEFAULT_BITS,
            box_fit: DEFAULT_FIT_RANGE,
            axis_band: DEFAULT_AXIS_BAND,
            base_seed: 0,
            format: OutputFormat::Csv,
        }
    }
}

/// Surrogate seeds used for one input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub input: String,
    pub shuffle: u64,
    pub phaserand: u64,
    pub both: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRegistry {
    pub base_seed: u64,
    pub rng: String,
    pub derivation: String,
    pub per_input: Vec<SeedRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub config: SuiteConfig,
    pub seeds: SeedRegistry,
    pub version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// FNV-1a over the bit patterns of the values.
pub fn content_hash(series: &RealSeries) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in series.values() {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

pub fn surrogate_seed(base: u64, series: &RealSeries, kind: SurrogateKind) -> u64 {
    let tag = match kind {
        SurrogateKind::Shuffle => 1,
        SurrogateKind::PhaseRandomize => 2,
        SurrogateKind::ShuffleThenPhaseRandomize => 3,
    };
    derive_seed(base, content_hash(series).rotate_left(2) ^ tag)
}

fn seed_record(base: u64, input: &str, series: &RealSeries) -> SeedRecord {
    SeedRecord {
        input: input.to_string(),
        shuffle: surrogate_seed(base, series, SurrogateKind::Shuffle),
        phaserand: surrogate_seed(base, series, SurrogateKind::PhaseRandomize),
        both: surrogate_seed(base, series, SurrogateKind::ShuffleThenPhaseRandomize),
    }
}

fn surrogate(series: &RealSeries, base: u64, kind: SurrogateKind) -> Result<RealSeries> {
    make_surrogate(
        series,
        SurrogateSpec {
            kind,
            seed: surrogate_seed(base, series, kind),
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantResult {
    pub variant: Variant,
    pub scaling: ScalingResult,
    pub spectrum: MultifractalSpectrum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputMfdfa {
    pub label: String,
    pub config: MfdfaConfig,
    pub variants: Vec<VariantResult>,
    /// `None` when the original series has delta_h = 0.
    pub decomposition: Option<Decomposition>,
}

impl InputMfdfa {
    pub fn variant(&self, v: Variant) -> &VariantResult {
        self.variants
            .iter()
            .find(|r| r.variant == v)
            .expect("all variants present")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MfdfaSuiteResult {
    pub inputs: Vec<Result<InputMfdfa, String>>,
    /// Cross-input averages; `None` if every input failed.
    pub average: Option<Vec<VariantResult>>,
    pub average_decomposition: Option<Decomposition>,
}

pub fn mfdfa_one(
    series: &RealSeries,
    cfg: Option<&MfdfaConfig>,
    base_seed: u64,
) -> Result<InputMfdfa> {
    let config = match cfg {
        Some(c) => c.clone(),
        None => MfdfaConfig::for_length(series.len())?,
    };
    let variants = Variant::ALL
        .par_iter()
        .map(|&variant| {
            let input = match variant.surrogate() {
                None => series.clone(),
                Some(kind) => surrogate(series, base_seed, kind)?,
            };
            let a = analyze(&input, &config)?;
            Ok(VariantResult {
                variant,
                scaling: a.scaling,
                spectrum: a.spectrum,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let decomposition = decompose(
        &variants[0].scaling,
        &variants[1].scaling,
        &variants[3].scaling,
    )
    .ok();
    Ok(InputMfdfa {
        label: series.label().to_string(),
        config,
        variants,
        decomposition,
    })
}

/// MF-DFA of every input and its three surrogates, plus the cross-input
/// average taken on tau.
pub fn run_mfdfa_suite(inputs: &[RealSeries], cfg: &SuiteConfig) -> Result<MfdfaSuiteResult> {
    if inputs.is_empty() {
        return Err(Error::EmptyInput { needed: 1, got: 0 });
    }
    let results: Vec<Result<InputMfdfa, String>> = inputs
        .par_iter()
        .map(|s| mfdfa_one(s, cfg.mfdfa.as_ref(), cfg.base_seed).map_err(|e| e.to_string()))
        .collect();
    let ok: Vec<&InputMfdfa> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
    let (average, average_decomposition) = if ok.is_empty() {
        (None, None)
    } else {
        let avg = Variant::ALL
            .iter()
            .enumerate()
            .map(|(i, &variant)| {
                let scalings: Vec<&ScalingResult> =
                    ok.iter().map(|r| &r.variants[i].scaling).collect();
                let scaling = average_tau(&scalings)?;
                let spectrum = legendre_spectrum(&scaling)?;
                Ok(VariantResult {
                    variant,
                    scaling,
                    spectrum,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let dec = decompose(&avg[0].scaling, &avg[1].scaling, &avg[3].scaling).ok();
        (Some(avg), dec)
    };
    Ok(MfdfaSuiteResult {
        inputs: results,
        average,
        average_decomposition,
    })
}

/// Mean of tau(z) across results; h is recovered as (tau + 1)/z, except at
/// z = 0 where tau carries no information and h is averaged directly.
/// The standard error is that of the mean of independent estimates.
pub fn average_tau(results: &[&ScalingResult]) -> Result<ScalingResult> {
    let first = results
        .first()
        .ok_or(Error::EmptyInput { needed: 1, got: 0 })?;
    let z = &first.z;
    for r in results {
        if r.z.len() != z.len() || r.z.iter().zip(z).any(|(a, b)| (a - b).abs() > 1e-12) {
            return Err(Error::GridMismatch);
        }
    }
    let n = results.len() as f64;
    let mean_of = |f: &dyn Fn(&ScalingResult) -> f64| results.iter().map(|r| f(r)).sum::<f64>() / n;
    let mut h = Vec::with_capacity(z.len());
    let mut tau = Vec::with_capacity(z.len());
    let mut stderr = Vec::with_capacity(z.len());
    let mut r2 = Vec::with_capacity(z.len());
    for (j, &zj) in z.iter().enumerate() {
        let t = mean_of(&|r| r.tau[j]);
        tau.push(t);
        h.push(if zj == 0.0 {
            mean_of(&|r| r.h[j])
        } else {
            (t + 1.0) / zj
        });
        stderr.push(
            results
                .iter()
                .map(|r| r.stderr[j].powi(2))
                .sum::<f64>()
                .sqrt()
                / n,
        );
        r2.push(mean_of(&|r| r.r2.get(j).copied().unwrap_or(f64::NAN)));
    }
    Ok(ScalingResult {
        z: z.clone(),
        h,
        tau,
        stderr,
        r2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagResult {
    pub lag: usize,
    pub quadrants: QuadrantStats,
    /// observed / expected occupancy of the near-axis band.
    pub near_axis_ratio: f64,
    pub boxes: BoxCountCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputLdiagram {
    pub label: String,
    pub lags: Vec<LagResult>,
    /// d_f of the lag-1 diagram of the shuffled series.
    pub d_f_shuffled: f64,
    /// d_f of the lag-1 diagram of the phase-randomized series.
    pub d_f_randomized: f64,
}

pub fn ldiagram_one(series: &RealSeries, cfg: &SuiteConfig) -> Result<InputLdiagram> {
    if cfg.lags.is_empty() {
        return Err(Error::InvalidConfig("no lags requested".into()));
    }
    let band = cfg.axis_band * variance(series.values()).sqrt();
    let lags = cfg
        .lags
        .par_iter()
        .map(|&lag| {
            let pts = build_ldiagram(series, lag)?;
            Ok(LagResult {
                lag,
                quadrants: quadrant_stats(&pts, series)?,
                near_axis_ratio: near_axis_occupancy(&pts, band)?.ratio(),
                boxes: box_dimension(&pts, cfg.bits, cfg.box_fit)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let d_f_of = |kind| -> Result<f64> {
        let s = surrogate(series, cfg.base_seed, kind)?;
        let curve = box_dimension(&build_ldiagram(&s, 1)?, cfg.bits, cfg.box_fit)?;
        Ok(curve.d_f.unwrap_or(f64::NAN))
    };
    Ok(InputLdiagram {
        label: series.label().to_string(),
        lags,
        d_f_shuffled: d_f_of(SurrogateKind::Shuffle)?,
        d_f_randomized: d_f_of(SurrogateKind::PhaseRandomize)?,
    })
}

/// Quadrant and box-dimension rows for every input; failures stay per input.
pub fn run_ldiagram_suite(
    inputs: &[RealSeries],
    cfg: &SuiteConfig,
) -> Result<Vec<Result<InputLdiagram, String>>> {
    if inputs.is_empty() {
        return Err(Error::EmptyInput { needed: 1, got: 0 });
    }
    Ok(inputs
        .par_iter()
        .map(|s| ldiagram_one(s, cfg).map_err(|e| e.to_string()))
        .collect())
}

/// How a file-driven run went.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub n_inputs: usize,
    /// (input, message) for every input that failed at any stage.
    pub failures: Vec<(String, String)>,
}

impl SuiteOutcome {
    /// 0 all inputs succeeded, 1 some failed, 3 all failed.
    pub fn exit_code(&self) -> i32 {
        let failed = self
            .failures
            .iter()
            .map(|f| &f.0)
            .collect::<std::collections::BTreeSet<_>>()
            .len();
        if failed == 0 {
            0
        } else if failed < self.n_inputs {
            1
        } else {
            3
        }
    }
}

pub fn new_manifest(command: &str, inputs: Vec<PathBuf>, config: SuiteConfig) -> RunManifest {
    RunManifest {
        command: command.to_string(),
        inputs,
        seeds: SeedRegistry {
            base_seed: config.base_seed,
            rng: RNG_ID.to_string(),
            derivation: "derive_seed(base, fnv1a(value bits) rotl 2 ^ kind), kind: shuffle 1, phaserand 2, both 3".into(),
            per_input: Vec::new(),
        },
        config,
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    }
}

fn input_dir_name(i: usize, path: &Path) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into());
    let clean: String = stem
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{i:03}_{clean}")
}

fn write_table<T: Serialize>(
    dir: &Path,
    name: &str,
    format: OutputFormat,
    csv: impl FnOnce() -> Result<String>,
    value: &T,
) -> Result<()> {
    match format {
        OutputFormat::Csv => write_file(&dir.join(format!("{name}.csv")), &csv()?),
        OutputFormat::Json => write_file(&dir.join(format!("{name}.json")), &to_json(value)?),
    }
}

/// Runs the manifest's analyses over its inputs and writes everything
/// (including the manifest, with the seed registry filled in) under `out`.
pub fn run_manifest(manifest: &RunManifest, out: &Path) -> Result<SuiteOutcome> {
    let cfg = &manifest.config;
    if manifest.inputs.is_empty() {
        return Err(Error::EmptyInput { needed: 1, got: 0 });
    }
    std::fs::create_dir_all(out)?;
    let read: Vec<Result<RealSeries, String>> = manifest
        .inputs
        .par_iter()
        .map(|p| read_returns(p).map_err(|e| e.to_string()))
        .collect();
    let names: Vec<String> = manifest
        .inputs
        .iter()
        .map(|p| p.display().to_string())
        .collect();
    let mut failures: Vec<(String, String)> = Vec::new();
    let mut ok_idx = Vec::new();
    let mut ok_series = Vec::new();
    let mut seeds = Vec::new();
    for (i, r) in read.iter().enumerate() {
        match r {
            Ok(s) => {
                ok_idx.push(i);
                seeds.push(seed_record(cfg.base_seed, &names[i], s));
                ok_series.push(s.clone());
            }
            Err(e) => failures.push((names[i].clone(), e.clone())),
        }
    }

    let dir_of = |i: usize| out.join(input_dir_name(i, &manifest.inputs[i]));

    if cfg.run_mfdfa && !ok_series.is_empty() {
        let res = run_mfdfa_suite(&ok_series, cfg)?;
        let mut summary = Vec::new();
        for (k, r) in res.inputs.iter().enumerate() {
            let i = ok_idx[k];
            match r {
                Err(e) => failures.push((names[i].clone(), format!("mfdfa: {e}"))),
                Ok(m) => {
                    let dir = dir_of(i);
                    write_file(&dir.join("mfdfa_config.json"), &to_json(&m.config)?)?;
                    write_variants(&dir, "", &m.variants, cfg.format)?;
                    write_file(&dir.join("decomposition.json"), &to_json(&m.decomposition)?)?;
                    for v in &m.variants {
                        summary.push(summary_row(&names[i], v));
                    }
                }
            }
        }
        write_file(
            &out.join("mfdfa_summary.csv"),
            &table_csv(
                &[
                    "input",
                    "variant",
                    "hurst",
                    "delta_h",
                    "delta_alpha",
                    "alpha_min",
                    "alpha_max",
                    "support_dim",
                ],
                summary,
            )?,
        )?;
        if let Some(avg) = &res.average {
            write_variants(out, "average_", avg, cfg.format)?;
        }
        write_file(
            &out.join("average_decomposition.json"),
            &to_json(&res.average_decomposition)?,
        )?;
    }

    if cfg.run_ldiagram && !ok_series.is_empty() {
        let res = run_ldiagram_suite(&ok_series, cfg)?;
        let mut quad_rows = Vec::new();
        let mut df_rows = Vec::new();
        for (k, r) in res.iter().enumerate() {
            let i = ok_idx[k];
            match r {
                Err(e) => failures.push((names[i].clone(), format!("ldiagram: {e}"))),
                Ok(l) => {
                    let dir = dir_of(i);
                    let mut row = vec![names[i].clone()];
                    for lr in &l.lags {
                        let q = &lr.quadrants;
                        quad_rows.push(vec![
                            names[i].clone(),
                            lr.lag.to_string(),
                            format_f64(q.p1),
                            format_f64(q.p2),
                            format_f64(q.p3),
                            format_f64(q.p4),
                            q.n_pos_minus_neg.to_string(),
                            format_f64(q.sum_returns),
                            q.n_axis.to_string(),
                            format_f64(lr.near_axis_ratio),
                        ]);
                        row.push(format_f64(lr.boxes.d_f.unwrap_or(f64::NAN)));
                        let counts = lr
                            .boxes
                            .m
                            .iter()
                            .zip(&lr.boxes.n_boxes)
                            .map(|(m, n)| vec![m.to_string(), n.to_string()]);
                        write_file(
                            &dir.join(format!("boxcount_lag{}.csv", lr.lag)),
                            &table_csv(&["m", "n_boxes"], counts)?,
                        )?;
                    }
                    row.push(format_f64(l.d_f_shuffled));
                    row.push(format_f64(l.d_f_randomized));
                    df_rows.push(row);
                    write_file(&dir.join("ldiagram.json"), &to_json(l)?)?;
                }
            }
        }
        write_file(
            &out.join("quadrants.csv"),
            &table_csv(
                &[
                    "input",
                    "lag",
                    "p1",
                    "p2",
                    "p3",
                    "p4",
                    "n_pos_minus_neg",
                    "sum_returns",
                    "n_axis",
                    "near_axis_ratio",
                ],
                quad_rows,
            )?,
        )?;
        let mut header: Vec<String> = vec!["input".into()];
        header.extend(cfg.lags.iter().map(|l| format!("d_f_lag{l}")));
        header.push("d_f_shuffled".into());
        header.push("d_f_randomized".into());
        let header_ref: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
        write_file(
            &out.join("fractal_dimension.csv"),
            &table_csv(&header_ref, df_rows)?,
        )?;
    }

    failures.sort();
    write_file(
        &out.join("errors.csv"),
        &table_csv(
            &["input", "error"],
            failures.iter().map(|(a, b)| vec![a.clone(), b.clone()]),
        )?,
    )?;
    let mut written = manifest.clone();
    written.seeds.per_input = seeds;
    write_file(&out.join(MANIFEST_FILE), &to_json(&written)?)?;
    Ok(SuiteOutcome {
        n_inputs: manifest.inputs.len(),
        failures,
    })
}

fn write_variants(
    dir: &Path,
    prefix: &str,
    variants: &[VariantResult],
    format: OutputFormat,
) -> Result<()> {
    for v in variants {
        let name = v.variant.name();
        write_table(
            dir,
            &format!("{prefix}scaling_{name}"),
            format,
            || scaling_csv(&v.scaling),
            &v.scaling,
        )?;
        write_table(
            dir,
            &format!("{prefix}spectrum_{name}"),
            format,
            || spectrum_csv(&v.spectrum),
            &v.spectrum,
        )?;
    }
    Ok(())
}

fn summary_row(input: &str, v: &VariantResult) -> Vec<String> {
    let s = &v.spectrum;
    let lo = s.alpha.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.alpha.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    vec![
        input.to_string(),
        v.variant.name().to_string(),
        format_f64(s.hurst),
        format_f64(s.delta_h),
        format_f64(s.delta_alpha),
        format_f64(lo),
        format_f64(hi),
        format_f64(s.support_dim),
    ]
}
