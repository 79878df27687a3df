use std::path::{Path, PathBuf};

use serde_json::json;

use mfscale_core::boxcount::{box_count, fractal_dimension, quantize_points, BoxCountCurve};
use mfscale_core::density::{
    empirical_pdf, fit_f_distribution, fit_q_gaussian, Binning, EmpiricalPdf, FitReport,
};
use mfscale_core::io::{
    format_f64, read_input, read_returns, scaling_csv, series_csv, series_csv_with_header,
    single_column, spectrum_csv, table_csv,
};
use mfscale_core::ldiagram::{build_ldiagram, quadrant_stats, PointSet2D};
use mfscale_core::mfdfa::{
    analyze, geometric_scales, z_range, MfdfaConfig, ProfileOrder, Segmentation,
};
use mfscale_core::preprocess::split_sign_magnitude;
use mfscale_core::suite::{new_manifest, run_manifest, RunManifest, SuiteConfig, MANIFEST_FILE};
use mfscale_core::surrogate::{surrogate_batch, SurrogateKind, SurrogateMeta, SurrogateSpec};
use mfscale_core::synth::{
    binomial_cascade, fgn, gaussian_white, superstat_series, CascadeSpec, GammaVarianceSpec,
};
use mfscale_core::{Error, RealSeries, Result};

use crate::output::{emit, Item};
use crate::{
    BinningArg, Cli, Command, FamilyArg, Format, MfdfaOpts, SuiteArgs, SurrogateArg, SynthKind,
};

/// Runs the subcommand and returns the process exit code.
pub fn run(cli: &Cli) -> Result<u8> {
    let out = cli.out.as_ref();
    match &cli.command {
        Command::Preprocess { input, split } => {
            let r = read_returns(input)?;
            let stem = stem(input);
            let mut items = vec![series_item(format!("{stem}_returns"), &r, cli.format)?];
            if *split {
                let (s, v) = split_sign_magnitude(&r);
                items.push(series_item(format!("{stem}_signs"), &s, cli.format)?);
                items.push(series_item(format!("{stem}_magnitudes"), &v, cli.format)?);
            }
            emit(out, cli.format, items)?;
            Ok(0)
        }
        Command::Mfdfa { inputs, opts } => per_input(
            inputs,
            |path| {
                let series = read_returns(path)?;
                let cfg = mfdfa_config(series.len(), opts)?;
                let a = analyze(&series, &cfg)?;
                let stem = stem(path);
                Ok(vec![
                    Item::new(
                        format!("{stem}_scaling"),
                        Some(scaling_csv(&a.scaling)?),
                        &a.scaling,
                    )?,
                    Item::new(
                        format!("{stem}_spectrum"),
                        Some(spectrum_csv(&a.spectrum)?),
                        &a.spectrum,
                    )?,
                ])
            },
            cli,
        ),
        Command::Surrogate {
            input,
            surrogate,
            count,
        } => {
            let series = read_returns(input)?;
            let kind = surrogate_kind(*surrogate);
            let batch = surrogate_batch(&series, kind, cli.seed, (*count).max(1))?;
            let stem = stem(input);
            let spec = SurrogateSpec {
                kind,
                seed: cli.seed,
            };
            let items = batch
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let meta = SurrogateMeta::new(spec, i as u64);
                    let name = if batch.len() == 1 {
                        format!("{stem}_{}", kind.short_name())
                    } else {
                        format!("{stem}_{}_{i}", kind.short_name())
                    };
                    Item::new(
                        name,
                        Some(series_csv_with_header(s, Some(&meta))?),
                        &json!({"meta": meta, "values": s.values()}),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            emit(out, cli.format, items)?;
            Ok(0)
        }
        Command::Ldiagram { inputs, lag, boxes } => per_input(
            inputs,
            |path| {
                let series = read_returns(path)?;
                let pts = build_ldiagram(&series, *lag)?;
                let q = quadrant_stats(&pts, &series)?;
                let grid = quantize_points(&pts, boxes.bits)?;
                let curve = fractal_dimension(
                    &box_count(&grid, boxes.bits)?,
                    (boxes.fit_lo, boxes.fit_hi),
                )?;
                let stem = stem(path);
                let quad_csv = table_csv(
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
                        "d_f",
                    ],
                    [vec![
                        stem.clone(),
                        lag.to_string(),
                        format_f64(q.p1),
                        format_f64(q.p2),
                        format_f64(q.p3),
                        format_f64(q.p4),
                        q.n_pos_minus_neg.to_string(),
                        format_f64(q.sum_returns),
                        q.n_axis.to_string(),
                        format_f64(curve.d_f.unwrap_or(f64::NAN)),
                    ]],
                )?;
                Ok(vec![
                    Item::new(
                        format!("{stem}_quadrants"),
                        Some(quad_csv),
                        &json!({"lag": lag, "quadrants": q, "d_f": curve.d_f}),
                    )?,
                    curve_item(format!("{stem}_boxcount"), &curve)?,
                ])
            },
            cli,
        ),
        Command::Boxdim { input, boxes } => {
            let pts = read_points(input)?;
            let grid = quantize_points(&pts, boxes.bits)?;
            let curve =
                fractal_dimension(&box_count(&grid, boxes.bits)?, (boxes.fit_lo, boxes.fit_hi))?;
            eprintln!(
                "d_f = {} (r2 = {}, levels {:?})",
                format_f64(curve.d_f.unwrap_or(f64::NAN)),
                format_f64(curve.r2.unwrap_or(f64::NAN)),
                curve.fit_range
            );
            emit(
                out,
                cli.format,
                vec![curve_item(format!("{}_boxcount", stem(input)), &curve)?],
            )?;
            Ok(0)
        }
        Command::Synth { kind } => {
            let (name, series) = synth(kind, cli.seed)?;
            let item = Item::new(
                name,
                Some(single_column(&series)),
                &json!({"values": series.values()}),
            )?;
            emit(out, cli.format, vec![item])?;
            Ok(0)
        }
        Command::Fitpdf {
            input,
            family,
            bins,
            binning,
            abs,
            curve,
        } => {
            let mut series = read_returns(input)?;
            if *abs {
                series = RealSeries::new(series.values().iter().map(|v| v.abs()).collect())?;
            }
            let binning = match binning {
                BinningArg::Lin => Binning::Linear,
                BinningArg::Log => Binning::Log,
            };
            let pdf = empirical_pdf(&series, *bins, binning)?;
            let report = match family {
                FamilyArg::Fdist => fit_f_distribution(&pdf)?,
                FamilyArg::Qgauss => fit_q_gaussian(&pdf)?,
            };
            let stem = stem(input);
            let mut items = vec![Item::new(
                format!("{stem}_fit"),
                Some(report_csv(&report)?),
                &report,
            )?];
            if *curve {
                items.push(Item::new(
                    format!("{stem}_curve"),
                    Some(curve_csv(&pdf, &report)?),
                    &json!({"center": pdf.centers, "empirical": pdf.density,
                            "fitted": pdf.centers.iter().map(|&c| report.predict(c)).collect::<Vec<_>>()}),
                )?);
            }
            emit(out, cli.format, items)?;
            Ok(0)
        }
        Command::Suite(args) => suite(cli, args),
    }
}

/// Applies `f` to every input; failures are reported and do not stop the batch.
fn per_input<F>(inputs: &[PathBuf], f: F, cli: &Cli) -> Result<u8>
where
    F: Fn(&Path) -> Result<Vec<Item>>,
{
    let mut failed = 0;
    for path in inputs {
        match f(path).and_then(|items| emit(cli.out.as_ref(), cli.format, items)) {
            Ok(()) => {}
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                failed += 1;
            }
        }
    }
    Ok(match failed {
        0 => 0,
        n if n < inputs.len() => 1,
        _ => 3,
    })
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into())
}

fn series_item(name: String, s: &RealSeries, _format: Format) -> Result<Item> {
    Item::new(name, Some(series_csv(s)?), &json!({"values": s.values()}))
}

fn curve_item(name: String, curve: &BoxCountCurve) -> Result<Item> {
    let rows = curve
        .m
        .iter()
        .zip(&curve.n_boxes)
        .map(|(m, n)| vec![m.to_string(), n.to_string()]);
    Item::new(name, Some(table_csv(&["m", "n_boxes"], rows)?), curve)
}

fn report_csv(r: &FitReport) -> Result<String> {
    let mut rows: Vec<Vec<String>> = r
        .family
        .param_names()
        .iter()
        .map(|n| {
            vec![
                n.to_string(),
                format_f64(r.param(n)),
                format_f64(r.stderr_of(n)),
            ]
        })
        .collect();
    rows.push(vec![
        "chi2_per_n".into(),
        format_f64(r.chi2_per_n),
        String::new(),
    ]);
    rows.push(vec!["r2".into(), format_f64(r.r2), String::new()]);
    table_csv(&["name", "value", "stderr"], rows)
}

fn curve_csv(pdf: &EmpiricalPdf, r: &FitReport) -> Result<String> {
    let rows = pdf
        .centers
        .iter()
        .zip(&pdf.density)
        .map(|(&c, &d)| vec![format_f64(c), format_f64(d), format_f64(r.predict(c))]);
    table_csv(&["center", "empirical", "fitted"], rows)
}

fn surrogate_kind(a: SurrogateArg) -> SurrogateKind {
    match a {
        SurrogateArg::Shuffle => SurrogateKind::Shuffle,
        SurrogateArg::Phaserand => SurrogateKind::PhaseRandomize,
        SurrogateArg::Both => SurrogateKind::ShuffleThenPhaseRandomize,
    }
}

/// Default configuration for length `n` with command-line overrides.
pub fn mfdfa_config(n: usize, o: &MfdfaOpts) -> Result<MfdfaConfig> {
    let mut cfg = MfdfaConfig::for_length(n)?;
    cfg.poly_order = o.poly_order;
    cfg.profile_order = ProfileOrder::from_int(o.profile_order)?;
    if o.s_min.is_some() || o.s_max.is_some() || o.s_points.is_some() {
        let lo = o.s_min.unwrap_or(cfg.s_grid[0]);
        let hi = o.s_max.unwrap_or(*cfg.s_grid.last().unwrap());
        cfg.s_grid = geometric_scales(lo, hi, o.s_points.unwrap_or(cfg.s_grid.len()));
        let (flo, fhi) = cfg.fit_range;
        let first = cfg.s_grid[0];
        let last = *cfg.s_grid.last().unwrap();
        cfg.fit_range = (flo.clamp(first, last), fhi.clamp(first, last));
        if cfg.fit_range.0 >= cfg.fit_range.1 {
            cfg.fit_range = (first, last);
        }
    }
    if let Some(lo) = o.fit_lo {
        cfg.fit_range.0 = lo;
    }
    if let Some(hi) = o.fit_hi {
        cfg.fit_range.1 = hi;
    }
    cfg.z_grid = z_range(o.z_min, o.z_max, o.z_step);
    if o.two_pass {
        cfg.segmentation = Segmentation::TwoPass;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn synth(kind: &SynthKind, seed: u64) -> Result<(String, RealSeries)> {
    Ok(match kind {
        SynthKind::White { n } => (format!("white_n{n}_s{seed}"), gaussian_white(*n, seed)),
        SynthKind::Fgn { n, hurst } => {
            (format!("fgn_h{hurst}_n{n}_s{seed}"), fgn(*n, *hurst, seed)?)
        }
        SynthKind::Cascade { p, levels } => (
            format!("cascade_p{p}_l{levels}"),
            binomial_cascade(CascadeSpec {
                p: *p,
                levels: *levels,
            })?,
        ),
        SynthKind::Superstat { n, gamma, delta } => (
            format!("superstat_g{gamma}_d{delta}_n{n}_s{seed}"),
            superstat_series(
                *n,
                GammaVarianceSpec {
                    gamma: *gamma,
                    delta: *delta,
                    seed,
                },
            )?
            .0,
        ),
    })
}

/// Points from a two-column numeric file (an `x,y` style header is skipped).
fn read_points(path: &Path) -> Result<PointSet2D> {
    let text = std::fs::read_to_string(path)?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<Vec<f64>> = fields.iter().map(|f| f.parse().ok()).collect();
        match (parsed, fields.len()) {
            (Some(v), 2) => {
                x.push(v[0]);
                y.push(v[1]);
            }
            (None, 2) if x.is_empty() => continue,
            _ => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    msg: "expected two numeric columns".into(),
                })
            }
        }
    }
    PointSet2D::new(x, y, 0)
}

fn suite(cli: &Cli, args: &SuiteArgs) -> Result<u8> {
    let out = cli
        .out
        .clone()
        .ok_or_else(|| Error::InvalidConfig("suite needs --out DIR".into()))?;
    let manifest = match &args.manifest {
        Some(path) => {
            let mut m = RunManifest::load(path)?;
            m.timestamp = new_manifest("", Vec::new(), SuiteConfig::default()).timestamp;
            m
        }
        None => {
            if args.inputs.is_empty() {
                return Err(Error::InvalidConfig(
                    "suite needs input files or --manifest".into(),
                ));
            }
            let overrides = mfdfa_overridden(&args.mfdfa);
            let mfdfa = if overrides {
                // resolve against the first readable input's length
                let n = args
                    .inputs
                    .iter()
                    .find_map(|p| read_input(p).ok().and_then(|d| d.into_returns().ok()))
                    .map(|s| s.len())
                    .ok_or_else(|| Error::InvalidConfig("no readable input".into()))?;
                Some(mfdfa_config(n, &args.mfdfa)?)
            } else {
                None
            };
            let config = SuiteConfig {
                run_mfdfa: !args.no_mfdfa,
                run_ldiagram: !args.no_ldiagram,
                mfdfa,
                lags: args.lags.clone(),
                bits: args.bits,
                base_seed: cli.seed,
                format: cli.format.into(),
                ..SuiteConfig::default()
            };
            new_manifest("suite", args.inputs.clone(), config)
        }
    };
    let outcome = run_manifest(&manifest, &out)?;
    for (input, msg) in &outcome.failures {
        eprintln!("error: {input}: {msg}");
    }
    eprintln!(
        "{} inputs, {} failed; results in {}",
        outcome.n_inputs,
        outcome
            .failures
            .iter()
            .map(|f| &f.0)
            .collect::<std::collections::BTreeSet<_>>()
            .len(),
        out.join(MANIFEST_FILE).display()
    );
    Ok(outcome.exit_code() as u8)
}

fn mfdfa_overridden(o: &MfdfaOpts) -> bool {
    o.poly_order != 5
        || o.profile_order != 2
        || o.s_min.is_some()
        || o.s_max.is_some()
        || o.s_points.is_some()
        || o.fit_lo.is_some()
        || o.fit_hi.is_some()
        || o.z_min != -3.0
        || o.z_max != 5.0
        || o.z_step != 0.25
        || o.two_pass
}
