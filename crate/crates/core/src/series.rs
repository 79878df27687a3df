//! The series carrier shared by every stage of the pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Position of an observation inside the trading calendar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CalendarTag {
    pub day: u32,
    /// Minute of the trading session, 0-based.
    pub minute: u32,
}

impl CalendarTag {
    pub fn new(day: u32, minute: u32) -> Self {
        Self { day, minute }
    }
}

/// One row of a minute-bar price file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricedRecord {
    pub day: u32,
    pub minute: u32,
    pub price: f64,
}

impl PricedRecord {
    pub fn new(day: u32, minute: u32, price: f64) -> Self {
        Self { day, minute, price }
    }

    pub fn tag(&self) -> CalendarTag {
        CalendarTag::new(self.day, self.minute)
    }
}

/// An ordered sequence of finite reals with optional calendar tags.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RealSeries {
    values: Vec<f64>,
    tags: Option<Vec<CalendarTag>>,
    label: String,
}

impl RealSeries {
    /// Builds an untagged series, rejecting NaN and infinities.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_finite(&values)?;
        Ok(Self {
            values,
            tags: None,
            label: String::new(),
        })
    }

    pub fn with_tags(values: Vec<f64>, tags: Vec<CalendarTag>) -> Result<Self> {
        check_finite(&values)?;
        if tags.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: tags.len(),
            });
        }
        Ok(Self {
            values,
            tags: Some(tags),
            label: String::new(),
        })
    }

    /// Internal constructor for values already known to be finite.
    pub(crate) fn from_finite(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self {
            values,
            tags: None,
            label: String::new(),
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn tags(&self) -> Option<&[CalendarTag]> {
        self.tags.as_deref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    /// Same values, tags removed.
    pub fn untagged(mut self) -> Self {
        self.tags = None;
        self
    }

    pub(crate) fn require_len(&self, needed: usize) -> Result<()> {
        if self.len() < needed {
            Err(Error::EmptyInput {
                needed,
                got: self.len(),
            })
        } else {
            Ok(())
        }
    }
}

impl TryFrom<Vec<f64>> for RealSeries {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population variance (denominator N).
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

/// Sample excess kurtosis with population moments.
pub fn excess_kurtosis(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let n = xs.len() as f64;
    let (m2, m4) = xs.iter().fold((0.0, 0.0), |(a, b), &x| {
        let d = (x - m) * (x - m);
        (a + d, b + d * d)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    m4 / (m2 * m2) - 3.0
}

/// Lag-k sample autocorrelation.
pub fn autocorrelation(xs: &[f64], lag: usize) -> f64 {
    let m = mean(xs);
    let denom: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    let num: f64 = xs
        .iter()
        .zip(&xs[lag..])
        .map(|(a, b)| (a - m) * (b - m))
        .sum();
    num / denom
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nan() {
        assert!(matches!(
            RealSeries::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn tags_must_match_length() {
        let err = RealSeries::with_tags(vec![1.0, 2.0], vec![CalendarTag::new(0, 0)]);
        assert!(matches!(err, Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn kurtosis_of_two_point_distribution() {
        // +-1 with equal weight: m4/m2^2 = 1
        let xs = [1.0, -1.0, 1.0, -1.0];
        assert!((excess_kurtosis(&xs) + 2.0).abs() < 1e-12);
    }
}
