mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mfscale_core::suite::OutputFormat;

#[derive(Parser, Debug)]
#[command(
    name = "mfscale",
    version,
    about = "Multifractal and lag-diagram analysis of time series"
)]
pub struct Cli {
    /// Base seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory; without it results go to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Prices (day,minute,price) to standardized, de-seasonalized returns.
    Preprocess {
        input: PathBuf,
        /// Also write the sign and magnitude series.
        #[arg(long)]
        split: bool,
    },
    /// Generalized Hurst exponents, tau(z) and the singularity spectrum.
    Mfdfa {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        opts: MfdfaOpts,
    },
    /// Shuffled and/or phase-randomized copies of a series.
    Surrogate {
        input: PathBuf,
        #[arg(long, value_enum)]
        surrogate: SurrogateArg,
        /// Number of surrogates (stream i of the seed for the i-th).
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Quadrant statistics and box-counting dimension of the lag diagram.
    Ldiagram {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        lag: usize,
        #[command(flatten)]
        boxes: BoxOpts,
    },
    /// Box-counting dimension of a planar point set (two numeric columns).
    Boxdim {
        input: PathBuf,
        #[command(flatten)]
        boxes: BoxOpts,
    },
    /// Synthetic series in the single-column format.
    Synth {
        #[command(subcommand)]
        kind: SynthKind,
    },
    /// Histogram density and parametric fit.
    Fitpdf {
        input: PathBuf,
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Bin count (default: Freedman-Diaconis for lin, 50 for log).
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long, value_enum, default_value_t = BinningArg::Lin)]
        binning: BinningArg,
        /// Fit |x| instead of x (volatility from returns).
        #[arg(long)]
        abs: bool,
        /// Also emit the (center, empirical, fitted) curve.
        #[arg(long)]
        curve: bool,
    },
    /// Full batch run: MF-DFA with surrogates and lag diagrams over many inputs.
    Suite(SuiteArgs),
}

#[derive(Args, Debug, Clone)]
pub struct MfdfaOpts {
    #[arg(long, default_value_t = 5)]
    pub poly_order: usize,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub profile_order: u32,
    #[arg(long)]
    pub s_min: Option<usize>,
    #[arg(long)]
    pub s_max: Option<usize>,
    #[arg(long)]
    pub s_points: Option<usize>,
    /// Smallest window in the regression.
    #[arg(long)]
    pub fit_lo: Option<usize>,
    /// Largest window in the regression.
    #[arg(long)]
    pub fit_hi: Option<usize>,
    #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
    pub z_min: f64,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    pub z_max: f64,
    #[arg(long, default_value_t = 0.25)]
    pub z_step: f64,
    /// Add windows anchored at the end of the series.
    #[arg(long)]
    pub two_pass: bool,
}

#[derive(Args, Debug, Clone)]
pub struct BoxOpts {
    #[arg(long, default_value_t = 16)]
    pub bits: u32,
    #[arg(long, default_value_t = 2)]
    pub fit_lo: u32,
    #[arg(long, default_value_t = 8)]
    pub fit_hi: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SurrogateArg {
    Shuffle,
    Phaserand,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Fdist,
    Qgauss,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BinningArg {
    Lin,
    Log,
}

#[derive(Subcommand, Debug)]
pub enum SynthKind {
    /// iid standard normal.
    White {
        #[arg(long)]
        n: usize,
    },
    /// Fractional Gaussian noise.
    Fgn {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        hurst: f64,
    },
    /// Binomial multiplicative cascade on 2^levels cells.
    Cascade {
        #[arg(long, default_value_t = 0.3)]
        p: f64,
        #[arg(long, default_value_t = 16)]
        levels: u32,
    },
    /// Gaussian noise with Gamma-distributed inverse variance.
    Superstat {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.82)]
        gamma: f64,
        #[arg(long, default_value_t = 2.0)]
        delta: f64,
    },
}

#[derive(Args, Debug)]
pub struct SuiteArgs {
    /// Input files (ignored with --manifest).
    pub inputs: Vec<PathBuf>,
    /// Re-run a previous manifest.json.
    #[arg(long, conflicts_with = "inputs")]
    pub manifest: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 10, 50])]
    pub lags: Vec<usize>,
    #[arg(long, default_value_t = 16)]
    pub bits: u32,
    #[arg(long)]
    pub no_mfdfa: bool,
    #[arg(long)]
    pub no_ldiagram: bool,
    #[command(flatten)]
    pub mfdfa: MfdfaOpts,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let code = match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            3
        }
    };
    ExitCode::from(code)
}
