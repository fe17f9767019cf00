//! `gpremium`: cost, premium, diffusion-fit and forecast pipelines that
//! write CSV.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::{CliError, Result};

#[derive(Parser, Debug)]
#[command(name = "gpremium", version, about = "EV green-premium and diffusion toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Write the CSV here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Also write a JSON run manifest to this path
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    /// Round floats to this many significant digits (default: shortest exact form)
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(1..=17))]
    pub sig_digits: Option<u8>,

    /// Directory searched for `<name>.toml` scenario files
    #[arg(long, global = true, env = "GPREMIUM_CONFIG_DIR")]
    pub config_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Cost, TCO and LCOD breakdown for one year
    Tco {
        #[arg(long, default_value = "long-range")]
        scenario: String,
        #[arg(long, default_value_t = 2021)]
        year: i32,
    },
    /// Production, acquisition and lifecycle premiums with LCODs per year
    PremiumSeries(SeriesArgs),
    /// First year each premium reaches zero
    Parity(SeriesArgs),
    /// Fit Bass parameters to annual sales
    Fit {
        #[command(flatten)]
        fit: FitArgs,
        /// Pin beta at zero (plain Bass model)
        #[arg(long)]
        vanilla: bool,
    },
    /// Fit the plain and premium-driven models and compare them
    Compare {
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Project annual and cumulative sales from fitted parameters
    Forecast {
        /// Parameter file written by `fit`
        #[arg(long)]
        params: PathBuf,
        /// Scenario supplying premiums (default: the one recorded in the params file)
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, default_value_t = 2030)]
        to: i32,
        #[arg(long, value_enum, default_value_t = Units::Thousands)]
        units: Units,
    },
    /// One-at-a-time sensitivity of a premium to each input
    Sensitivity {
        #[arg(long, default_value = "long-range")]
        scenario: String,
        #[arg(long, default_value_t = 2021)]
        year: i32,
        #[arg(long, value_enum, default_value_t = Kind::Lifecycle)]
        kind: Kind,
    },
}

#[derive(Args, Debug, Clone)]
pub struct SeriesArgs {
    #[arg(long, default_value = "long-range")]
    pub scenario: String,
    /// First year (default: start of the schedule)
    #[arg(long)]
    pub from: Option<i32>,
    /// Last year (default: end of the schedule)
    #[arg(long)]
    pub to: Option<i32>,
}

#[derive(Args, Debug, Clone)]
pub struct FitArgs {
    /// Sales CSV with header `year,annual_sales` (default: bundled China sample)
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value = "long-range")]
    pub scenario: String,
    /// RNG seed; a random one is chosen and reported when absent
    #[arg(long)]
    pub seed: Option<u64>,
    /// TOML file with GA settings
    #[arg(long)]
    pub fit_config: Option<PathBuf>,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub population: Option<usize>,
    /// Fix market potential (thousands of vehicles)
    #[arg(long, conflicts_with = "m_free")]
    pub m: Option<f64>,
    /// Search market potential between two bounds (thousands)
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub m_free: Option<Vec<f64>>,
    /// Run every generation instead of stopping on stagnation
    #[arg(long)]
    pub no_early_stop: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Production,
    Acquisition,
    Lifecycle,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Thousands,
    Vehicles,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match commands::execute(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "gpremium: {e}");
            e.exit_code()
        }
    }
}
