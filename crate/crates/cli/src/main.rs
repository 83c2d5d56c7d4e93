//! `dbfrx`: simulate, plan and analyse the beamforming receiver.

mod commands;
mod units;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use units::parse_positive_si;

#[derive(Parser)]
#[command(name = "dbfrx", version, about = "Digital beamforming receiver simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Placement {
    Direct,
    Inverted,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArchArg {
    Proposed,
    Standard,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WindowArg {
    Auto,
    Rectangular,
    BlackmanHarris,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Component {
    Complex,
    I,
    Q,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Nyquist zone of a carrier, or under-sampling rate ranges for a zone.
    Plan {
        /// Carrier frequency (Hz, k/M/G suffixes allowed).
        #[arg(long, value_parser = parse_positive_si)]
        fc: f64,
        /// Signal bandwidth, needed for --zone.
        #[arg(long, value_parser = parse_positive_si)]
        bw: Option<f64>,
        /// Sampling rate to evaluate.
        #[arg(long, value_parser = parse_positive_si)]
        fs: Option<f64>,
        /// Zone parameter n: direct placement lands in zone 2n+1, inverted in zone 2n.
        #[arg(long)]
        zone: Option<u32>,
        #[arg(long, value_enum, default_value = "both")]
        placement: Placement,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Run a JSON configuration and write all artifacts.
    Simulate {
        config: PathBuf,
        /// Overrides run.output_dir.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Worker threads for independent architecture runs.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Array response of a weight set over an angle grid.
    Beampattern {
        /// Take array and weights from a run configuration.
        #[arg(long, conflicts_with_all = ["elements", "carrier", "spacing", "steer"])]
        config: Option<PathBuf>,
        #[arg(long)]
        elements: Option<usize>,
        #[arg(long, value_parser = parse_positive_si)]
        carrier: Option<f64>,
        /// Element spacing in meters; half a wavelength when omitted.
        #[arg(long, value_parser = parse_positive_si)]
        spacing: Option<f64>,
        /// Steering angle in degrees.
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        steer: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = -90.0)]
        start: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 90.0)]
        stop: f64,
        #[arg(long, default_value_t = 0.25)]
        step: f64,
        /// Write beam_pattern.csv and beam_pattern.json here.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Multiplier and adder counts of one architecture.
    Resources {
        #[arg(long, value_enum)]
        arch: ArchArg,
        #[arg(long, default_value_t = 4)]
        channels: u64,
        #[arg(long, default_value_t = 64)]
        taps: u64,
        #[arg(long, default_value_t = 8)]
        parallel: u64,
        #[arg(long)]
        json: bool,
    },
    /// Spectral metrics of a baseband CSV.
    Metrics {
        csv: PathBuf,
        /// Sample rate; read from the sibling .json metadata when omitted.
        #[arg(long, value_parser = parse_positive_si)]
        fs: Option<f64>,
        /// Leading samples to skip; defaults to the metadata warm-up.
        #[arg(long)]
        warmup: Option<usize>,
        #[arg(long, default_value_t = 5)]
        harmonics: usize,
        #[arg(long, value_enum, default_value = "auto")]
        window: WindowArg,
        #[arg(long, value_enum, default_value = "all")]
        component: Component,
        /// Also write the complex spectrum as CSV.
        #[arg(long)]
        spectrum: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

/// Failure classes mapped to exit codes.
pub enum CliError {
    /// Bad flags, configuration or input files: exit 2.
    Usage(String),
    /// A model invariant did not hold: exit 3.
    Invariant(String),
}

impl From<dbfrx_core::Error> for CliError {
    fn from(e: dbfrx_core::Error) -> Self {
        match e {
            dbfrx_core::Error::Invariant(m) => CliError::Invariant(m),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Plan {
            fc,
            bw,
            fs,
            zone,
            placement,
            json,
        } => commands::plan(fc, bw, fs, zone, placement, json),
        Command::Simulate {
            config,
            output_dir,
            jobs,
        } => commands::simulate(&config, output_dir, jobs),
        Command::Beampattern {
            config,
            elements,
            carrier,
            spacing,
            steer,
            start,
            stop,
            step,
            output_dir,
            json,
        } => commands::beampattern(commands::BeamArgs {
            config,
            elements,
            carrier,
            spacing,
            steer,
            grid: (start, stop, step),
            output_dir,
            json,
        }),
        Command::Resources {
            arch,
            channels,
            taps,
            parallel,
            json,
        } => commands::resources(arch, channels, taps, parallel, json),
        Command::Metrics {
            csv,
            fs,
            warmup,
            harmonics,
            window,
            component,
            spectrum,
            json,
        } => commands::metrics(commands::MetricsArgs {
            csv,
            fs,
            warmup,
            harmonics,
            window,
            component,
            spectrum,
            json,
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Invariant(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(3)
        }
    }
}
