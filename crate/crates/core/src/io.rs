//! File formats.
//!
//! Inputs are auto-detected from the first non-comment line:
//! * header `day,minute,price`: raw prices, one trading record per row;
//! * header `index,value`: a series as written by [`write_series_csv`];
//! * otherwise one number per line (an optional non-numeric header is skipped).
//!
//! Lines starting with `#` are comments. Numbers are written with the
//! shortest decimal representation that parses back to the same `f64`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mfdfa::{MultifractalSpectrum, ScalingResult};
use crate::preprocess::preprocess_prices;
use crate::series::{PricedRecord, RealSeries};

#[derive(Debug, Clone, PartialEq)]
pub enum InputData {
    Prices(Vec<PricedRecord>),
    Series(RealSeries),
}

impl InputData {
    /// Prices go through the full preprocessing pipeline; series are used as-is.
    pub fn into_returns(self) -> Result<RealSeries> {
        match self {
            InputData::Prices(p) => preprocess_prices(&p),
            InputData::Series(s) => Ok(s),
        }
    }
}

/// Shortest round-trip decimal; non-finite values as `NaN`, `inf`, `-inf`.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn read_input(path: &Path) -> Result<InputData> {
    let text = fs::read_to_string(path)?;
    let data = parse_input(&text, path)?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(match data {
        InputData::Series(s) => InputData::Series(s.labeled(stem)),
        other => other,
    })
}

/// Reads any supported file and returns the series to analyze.
pub fn read_returns(path: &Path) -> Result<RealSeries> {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(read_input(path)?.into_returns()?.labeled(stem))
}

pub fn parse_input(text: &str, path: &Path) -> Result<InputData> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line() as usize);
        records.push((line, rec));
    }
    let Some((_, first)) = records.first() else {
        return Err(err(1, "no data rows".into()));
    };
    let header: Vec<String> = first.iter().map(|f| f.to_ascii_lowercase()).collect();
    let num = |line: usize, field: &str| -> Result<f64> {
        field
            .parse::<f64>()
            .map_err(|_| err(line, format!("not a number: {field:?}")))
    };
    let int = |line: usize, field: &str| -> Result<u32> {
        field
            .parse::<u32>()
            .map_err(|_| err(line, format!("not a non-negative integer: {field:?}")))
    };

    if header == ["day", "minute", "price"] {
        let mut prices = Vec::with_capacity(records.len());
        for (line, rec) in &records[1..] {
            if rec.len() != 3 {
                return Err(err(
                    *line,
                    format!("expected 3 fields, found {}", rec.len()),
                ));
            }
            prices.push(PricedRecord::new(
                int(*line, &rec[0])?,
                int(*line, &rec[1])?,
                num(*line, &rec[2])?,
            ));
        }
        return Ok(InputData::Prices(prices));
    }

    let two_column = header == ["index", "value"];
    let skip = usize::from(two_column || first.len() == 1 && first[0].parse::<f64>().is_err());
    let mut values = Vec::with_capacity(records.len());
    for (line, rec) in &records[skip..] {
        let field = match (two_column, rec.len()) {
            (true, 2) => &rec[1],
            (false, 1) => &rec[0],
            (_, n) => {
                return Err(err(
                    *line,
                    format!(
                        "expected {} field(s), found {n}",
                        if two_column { 2 } else { 1 }
                    ),
                ))
            }
        };
        let v = num(*line, field)?;
        if !v.is_finite() {
            return Err(err(*line, format!("non-finite value {field:?}")));
        }
        values.push(v);
    }
    Ok(InputData::Series(RealSeries::new(values)?))
}

/// `index,value` rows, 0-based index.
pub fn series_csv(series: &RealSeries) -> Result<String> {
    series_csv_with_header::<()>(series, None)
}

/// As [`series_csv`], preceded by a `# ` comment line holding `meta` as JSON.
pub fn series_csv_with_header<M: Serialize>(
    series: &RealSeries,
    meta: Option<&M>,
) -> Result<String> {
    let mut out = Vec::new();
    if let Some(m) = meta {
        writeln!(out, "# {}", serde_json::to_string(m)?)?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "value"])?;
    for (i, v) in series.values().iter().enumerate() {
        w.write_record([i.to_string(), format_f64(*v)])?;
    }
    finish(w)
}

/// One value per line, no header.
pub fn single_column(series: &RealSeries) -> String {
    let mut s = String::with_capacity(series.len() * 20);
    for v in series.values() {
        s.push_str(&format_f64(*v));
        s.push('\n');
    }
    s
}

/// Columns `z,h,tau,stderr,r2`.
pub fn scaling_csv(r: &ScalingResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["z", "h", "tau", "stderr", "r2"])?;
    for i in 0..r.z.len() {
        let r2 = r.r2.get(i).copied().unwrap_or(f64::NAN);
        w.write_record([r.z[i], r.h[i], r.tau[i], r.stderr[i], r2].map(format_f64))?;
    }
    finish(w)
}

/// Columns `z,alpha,f`.
pub fn spectrum_csv(s: &MultifractalSpectrum) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["z", "alpha", "f"])?;
    for i in 0..s.z.len() {
        w.write_record([s.z[i], s.alpha[i], s.f_alpha[i]].map(format_f64))?;
    }
    finish(w)
}

/// CSV with the given header and rows of preformatted fields.
pub fn table_csv<R, I>(header: &[&str], rows: R) -> Result<String>
where
    R: IntoIterator<Item = I>,
    I: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes `contents`, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, contents)?;
    Ok(())
}
