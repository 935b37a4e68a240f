use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "coupler", version, about = "Data for the SQUID-tuned cavity-waveguide coupler")]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    /// JSON file with device parameters; missing keys keep their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output format. `cavity` defaults to json, everything else to csv.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Output file, or `-` for stdout.
    #[arg(long, global = true, value_name = "PATH", default_value = "-")]
    pub output: String,

    #[command(flatten)]
    pub device: DeviceOverrides,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Per-field overrides, applied on top of the config file.
#[derive(Debug, Default, Args)]
pub struct DeviceOverrides {
    #[arg(long, allow_negative_numbers = true, global = true, value_name = "M_PER_S")]
    pub v_m_per_s: Option<f64>,
    #[arg(long, allow_negative_numbers = true, global = true, value_name = "OHM")]
    pub impedance_ohm: Option<f64>,
    #[arg(long, allow_negative_numbers = true, global = true, value_name = "MM")]
    pub l2_mm: Option<f64>,
    #[arg(long, allow_negative_numbers = true, global = true, value_name = "MM")]
    pub l3_mm: Option<f64>,
    #[arg(long, allow_negative_numbers = true, global = true, value_name = "FF")]
    pub cs_ff: Option<f64>,
    #[arg(long, allow_negative_numbers = true, global = true, value_name = "UA")]
    pub ic_ua: Option<f64>,
}

/// SQUID flux bias, given one of three ways.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct BiasArgs {
    /// External phase φ_ex in radians.
    #[arg(long, allow_negative_numbers = true)]
    pub phiex: Option<f64>,
    /// Loop flux in units of the flux quantum.
    #[arg(long, allow_negative_numbers = true)]
    pub flux: Option<f64>,
    /// Target stub frequency ω₃/2π in GHz.
    #[arg(long, allow_negative_numbers = true)]
    pub omega3_ghz: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resolved device parameters and derived quantities.
    Params,
    /// ω₃/2π against loop flux.
    #[command(name = "omega3-sweep")]
    Omega3Sweep {
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        flux_min: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
        flux_max: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1001)]
        points: usize,
    },
    /// Reflection phase and stored energy per input power over a frequency range.
    Spectrum {
        #[command(flatten)]
        bias: BiasArgs,
        #[arg(long, allow_negative_numbers = true, default_value_t = 9.0)]
        fmin_ghz: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 11.0)]
        fmax_ghz: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 2001)]
        points: usize,
    },
    /// ω_c and κ at one bias point from both estimators.
    Cavity {
        #[command(flatten)]
        bias: BiasArgs,
    },
    /// ω_c and κ over a list or range of ω₃ targets.
    #[command(name = "cavity-sweep")]
    CavitySweep {
        /// Explicit targets in GHz; overrides the range.
        #[arg(long, allow_negative_numbers = true, value_delimiter = ',', value_name = "GHZ,...")]
        f3_ghz: Vec<f64>,
        #[arg(long, allow_negative_numbers = true, default_value_t = 9.0)]
        f3_min_ghz: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 9.95)]
        f3_max_ghz: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 20)]
        points: usize,
    },
    /// Critical photon number of the decoupled mode against stub length.
    Ncrit {
        /// Explicit stub lengths in mm; overrides the range.
        #[arg(long, allow_negative_numbers = true, value_delimiter = ',', value_name = "MM,...")]
        l3_values_mm: Vec<f64>,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.05)]
        l3_min_mm: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 5.0)]
        l3_max_mm: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 100)]
        points: usize,
    },
}
