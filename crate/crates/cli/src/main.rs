use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod io;

use config::Settings;

/// Activity pipeline over inertial and ambient sensor logs.
#[derive(Debug, Parser)]
#[command(name = "adlsense", version, about)]
struct Cli {
    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Don't print the effective configuration to stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(flatten)]
    settings: Settings,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a household from daily scripts.
    Simulate {
        /// Day script (CSV); repeat for consecutive days.
        #[arg(long = "script", required = true)]
        scripts: Vec<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Interpolate short gaps and low-pass filter an inertial file.
    Filter {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Cut a filtered inertial file into sliding windows.
    Segment {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Feature table for a window file.
    Features {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Classify window files with a centroid model or weights bundle.
    Classify {
        /// Window file; repeat to classify several in order.
        #[arg(long = "input", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Room and appliance intervals from ambient event logs.
    Occupancy {
        /// Event log; several logs are merged.
        #[arg(long = "events", required = true)]
        events: Vec<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fuse classified windows with occupancy into derived activities.
    Fuse {
        #[arg(long)]
        classified: PathBuf,
        /// Occupancy CSV from `occupancy`.
        #[arg(long, conflicts_with = "events", required_unless_present = "events")]
        occupancy: Option<PathBuf>,
        /// Raw event logs instead of an occupancy CSV.
        #[arg(long)]
        events: Vec<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write the Unnatural/Anomaly report here.
        #[arg(long)]
        flags: Option<PathBuf>,
    },
    /// One label per profiling window.
    Label {
        /// `ts,label[,flag]` timeline.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Day and week profiles (JSON) from window labels.
    Profile {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Human-readable summary or plot-ready CSV from window labels.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: ReportFormat,
        /// Time-of-day range `HH:MM-HH:MM` for a bout query.
        #[arg(long, requires = "label")]
        query: Option<String>,
        /// Label counted by `--query`.
        #[arg(long, requires = "query")]
        label: Option<String>,
    },
    /// Run every stage end to end.
    Pipeline {
        /// Simulate from these day scripts.
        #[arg(long = "script", conflicts_with = "inertial")]
        scripts: Vec<PathBuf>,
        /// Inertial file per day, in order.
        #[arg(long = "inertial", requires = "events")]
        inertial: Vec<PathBuf>,
        #[arg(long = "events")]
        events: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let settings = match Settings::resolve(&cli.settings, cli.config.as_deref()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{}", io::error_report(&e));
            return ExitCode::FAILURE;
        }
    };
    if !cli.quiet {
        eprintln!("# effective configuration\n{}", settings.to_toml());
    }
    match commands::run(cli.command, &settings) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", io::error_report(&e));
            ExitCode::FAILURE
        }
    }
}
