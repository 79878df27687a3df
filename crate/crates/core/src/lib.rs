//! Multifractal analysis of time series.
//!
//! * [`preprocess`]: log-returns, intraday de-seasonalization, standardization,
//!   sign/magnitude split.
//! * [`mfdfa`]: fluctuation functions, h(z), tau(z), the singularity spectrum
//!   and the dependence / non-Gaussianity decomposition.
//! * [`surrogate`]: shuffled and phase-randomized surrogates.
//! * [`synth`]: white noise, fGn, binomial cascades, superstatistical series.
//! * [`ldiagram`], [`boxcount`]: lagged return maps, quadrant statistics and
//!   box-counting dimension.
//! * [`density`]: histograms and F-distribution / q-Gaussian fits.
//! * [`io`]: input detection and CSV / JSON output.
//! * [`suite`]: batch runs driven by a reproducible manifest.

// `!(a > b)` is used on purpose so NaN lands on the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boxcount;
pub mod density;
pub mod error;
pub mod io;
pub mod ldiagram;
pub mod mfdfa;
pub mod optimize;
pub mod preprocess;
pub mod regression;
pub mod rng;
pub mod series;
pub mod suite;
pub mod surrogate;
pub mod synth;

pub use error::{Error, Result};
pub use series::{CalendarTag, PricedRecord, RealSeries};
