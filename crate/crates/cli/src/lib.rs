//! Command implementations behind the `levelsim` binary.

// `!(x < y)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod output;
pub mod seed;

mod commands;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use levelsim::engine::Scheme;
use levelsim::netlist::parse_value;

pub use commands::execute;
pub use error::CliError;

/// Values with engineering suffixes, e.g. `10p`, `2.2`, `40f`.
fn eng_value(s: &str) -> Result<f64, String> {
    parse_value(s).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "levelsim",
    version,
    about = "Level-shifter simulation and characterization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Tr,
    Be,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Tr => Scheme::Tr,
            SchemeArg::Be => Scheme::Be,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    Vddh,
    Vddl,
    #[value(name = "vin_hi", alias = "vin-hi")]
    VinHi,
    Cload,
    #[value(name = "w_n_stacked", alias = "w-n-stacked")]
    WNStacked,
}

/// Topology parameter overrides; unset flags keep the defaults.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct ParamFlags {
    #[arg(long, value_parser = eng_value)]
    pub vddh: Option<f64>,
    #[arg(long, value_parser = eng_value)]
    pub vddl: Option<f64>,
    /// Stimulus high level.
    #[arg(long, value_parser = eng_value)]
    pub vin_hi: Option<f64>,
    #[arg(long, value_parser = eng_value)]
    pub cload: Option<f64>,
    #[arg(long, value_parser = eng_value)]
    pub w_p: Option<f64>,
    #[arg(long, value_parser = eng_value)]
    pub w_n: Option<f64>,
    #[arg(long, value_parser = eng_value)]
    pub w_n_stacked: Option<f64>,
    /// Channel length of every device.
    #[arg(long, value_parser = eng_value)]
    pub l: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a netlist file; write waveforms and, when possible, a report.
    Run {
        netlist: PathBuf,
        #[arg(long, value_parser = eng_value)]
        tstep: Option<f64>,
        #[arg(long, value_parser = eng_value)]
        tstop: Option<f64>,
        #[arg(long, value_enum, default_value = "tr")]
        scheme: SchemeArg,
        /// Waveform CSV path (default: stdout).
        #[arg(long, short = 'o')]
        out_csv: Option<PathBuf>,
        /// Report JSON path (default: stdout, or stderr when the CSV goes to stdout).
        #[arg(long)]
        report_json: Option<PathBuf>,
        /// Stimulus node for delay measurement (default `in` if present).
        #[arg(long)]
        in_node: Option<String>,
        /// Output node for measurement (default `out` if present).
        #[arg(long)]
        out_node: Option<String>,
    },
    /// Emit the netlist of a built-in topology.
    Gen {
        topology: String,
        #[command(flatten)]
        params: ParamFlags,
        /// Output path (default: stdout).
        #[arg(long, short = 'o')]
        out: Option<PathBuf>,
    },
    /// Characterize built-in topologies at default parameters.
    Bench {
        /// `all` or topology ids, space- or comma-separated.
        #[arg(default_value = "all")]
        topologies: Vec<String>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Characterize one topology over a linear parameter grid.
    Sweep {
        topology: String,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long, value_parser = eng_value, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, value_parser = eng_value, allow_hyphen_values = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        /// Output path (default: stdout).
        #[arg(long, short = 'o')]
        out_csv: Option<PathBuf>,
    },
}
