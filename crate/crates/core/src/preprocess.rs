//! Minute-bar preprocessing: log-returns, removal of the intraday
//! volatility pattern, standardization, and the sign/magnitude split.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{mean, variance, PricedRecord, RealSeries};

/// Mean absolute return per minute of the trading session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntradayProfile {
    pub minute_index: Vec<u32>,
    pub lambda: Vec<f64>,
}

impl IntradayProfile {
    pub fn lambda_at(&self, minute: u32) -> Option<f64> {
        self.minute_index
            .binary_search(&minute)
            .ok()
            .map(|i| self.lambda[i])
    }
}

/// One-step log price changes. Returns that would span two trading days
/// are dropped; each return carries the tag of its later price.
pub fn log_returns(prices: &[PricedRecord]) -> Result<RealSeries> {
    if prices.len() < 2 {
        return Err(Error::EmptyInput {
            needed: 2,
            got: prices.len(),
        });
    }
    for (index, rec) in prices.iter().enumerate() {
        if !(rec.price > 0.0) || !rec.price.is_finite() {
            return Err(Error::NonPositivePrice {
                index,
                price: rec.price,
            });
        }
    }
    let mut values = Vec::with_capacity(prices.len() - 1);
    let mut tags = Vec::with_capacity(prices.len() - 1);
    for (i, pair) in prices.windows(2).enumerate() {
        let (prev, next) = (&pair[0], &pair[1]);
        if next.tag() <= prev.tag() {
            return Err(Error::UnorderedRecords { index: i + 1 });
        }
        if next.day != prev.day {
            continue;
        }
        values.push(next.price.ln() - prev.price.ln());
        tags.push(next.tag());
    }
    RealSeries::with_tags(values, tags)
}

/// Average |r| at each minute of day, over the days on which that minute traded.
pub fn intraday_profile(returns: &RealSeries) -> Result<IntradayProfile> {
    let tags = returns.tags().ok_or(Error::MissingTags)?;
    let mut acc: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for (tag, r) in tags.iter().zip(returns.values()) {
        let slot = acc.entry(tag.minute).or_insert((0.0, 0));
        slot.0 += r.abs();
        slot.1 += 1;
    }
    let mut minute_index = Vec::with_capacity(acc.len());
    let mut lambda = Vec::with_capacity(acc.len());
    for (minute, (sum, count)) in acc {
        if sum == 0.0 {
            return Err(Error::ZeroProfileMinute { minute });
        }
        minute_index.push(minute);
        lambda.push(sum / count as f64);
    }
    Ok(IntradayProfile {
        minute_index,
        lambda,
    })
}

/// Divides every return by the profile value at its minute. The result is untagged.
pub fn deseasonalize(returns: &RealSeries, profile: &IntradayProfile) -> Result<RealSeries> {
    let tags = returns.tags().ok_or(Error::MissingTags)?;
    let values = tags
        .iter()
        .zip(returns.values())
        .map(|(tag, r)| {
            profile
                .lambda_at(tag.minute)
                .map(|l| r / l)
                .ok_or(Error::UnknownMinute { minute: tag.minute })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RealSeries::from_finite(values).labeled(returns.label()))
}

/// Zero mean, unit population standard deviation.
pub fn standardize(series: &RealSeries) -> Result<RealSeries> {
    series.require_len(2)?;
    let xs = series.values();
    let m = mean(xs);
    let sd = variance(xs).sqrt();
    if !(sd > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let values: Vec<f64> = xs.iter().map(|x| (x - m) / sd).collect();
    let out = match series.tags() {
        Some(t) => RealSeries::with_tags(values, t.to_vec())?,
        None => RealSeries::from_finite(values),
    };
    Ok(out.labeled(series.label()))
}

/// Full price-file pipeline: log-returns, intraday normalization, standardization.
pub fn preprocess_prices(prices: &[PricedRecord]) -> Result<RealSeries> {
    let r = log_returns(prices)?;
    let profile = intraday_profile(&r)?;
    standardize(&deseasonalize(&r, &profile)?)
}

/// Splits r(t) into s(t) in {-1, 0, +1} and v(t) = |r(t)|.
///
/// A zero return keeps its own signed zero as the sign so that
/// `recombine` reproduces the input bit for bit.
pub fn split_sign_magnitude(returns: &RealSeries) -> (RealSeries, RealSeries) {
    let (signs, mags): (Vec<f64>, Vec<f64>) = returns
        .values()
        .iter()
        .map(|&x| {
            let s = if x > 0.0 {
                1.0
            } else if x < 0.0 {
                -1.0
            } else {
                x
            };
            (s, x.abs())
        })
        .unzip();
    let attach = |v: Vec<f64>, suffix: &str| {
        let s = match returns.tags() {
            Some(t) => RealSeries::with_tags(v, t.to_vec()).expect("lengths match"),
            None => RealSeries::from_finite(v),
        };
        s.labeled(format!("{}{}", returns.label(), suffix))
    };
    (attach(signs, ":sign"), attach(mags, ":magnitude"))
}

/// Elementwise product of a sign sequence and a non-negative magnitude sequence.
pub fn recombine(signs: &RealSeries, magnitudes: &RealSeries) -> Result<RealSeries> {
    if signs.len() != magnitudes.len() {
        return Err(Error::LengthMismatch {
            left: signs.len(),
            right: magnitudes.len(),
        });
    }
    if let Some((index, &value)) = magnitudes
        .values()
        .iter()
        .enumerate()
        .find(|(_, v)| **v < 0.0)
    {
        return Err(Error::NegativeMagnitude { index, value });
    }
    let values = signs
        .values()
        .iter()
        .zip(magnitudes.values())
        .map(|(s, v)| s * v)
        .collect();
    Ok(RealSeries::from_finite(values))
}

/// Convenience for building single-day records from a price list.
pub fn single_day(prices: &[f64]) -> Vec<PricedRecord> {
    prices
        .iter()
        .enumerate()
        .map(|(i, &p)| PricedRecord::new(0, i as u32, p))
        .collect()
}
