//! `rdcn`: design, generate, analyze and simulate periodic circuit-switched
//! datacenter networks.
//!
//! Units at this boundary are microseconds, Gbps and megabytes.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rdcn::{Error, ErrorKind};

#[derive(Debug, Parser)]
#[command(name = "rdcn", version, about = "Periodic reconfigurable datacenter network toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Copy)]
struct Fabric {
    /// Number of ToR switches
    #[arg(long, default_value_t = 16)]
    nt: usize,
    /// Uplinks (circuit switches) per ToR
    #[arg(long, default_value_t = 2)]
    nu: usize,
    /// Timeslot length, microseconds
    #[arg(long, default_value_t = 100.0)]
    delta_us: f64,
    /// Reconfiguration time inside each slot, microseconds
    #[arg(long, default_value_t = 0.0)]
    delta_r_us: f64,
    /// Link capacity, Gbps
    #[arg(long, default_value_t = 400.0)]
    cap_gbps: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pick the degree allowed by a buffer and/or latency budget and emit its schedule
    Design {
        #[command(flatten)]
        fabric: Fabric,
        /// Per-ToR buffer, MB
        #[arg(long)]
        buffer_mb: Option<f64>,
        /// Worst-case delay budget, microseconds
        #[arg(long)]
        latency_us: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory receiving report.json and schedule.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the schedule for an emulated graph
    GenSchedule {
        #[command(flatten)]
        fabric: Fabric,
        /// debruijn, complete, static or random-regular
        #[arg(long, default_value = "debruijn")]
        kind: String,
        /// Emulated degree; defaults to nt for complete and nu for static
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Schedule JSON destination (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the emulated graph as an edge list
        #[arg(long)]
        edges_csv: Option<PathBuf>,
    },
    /// Throughput, delay and buffer figures for a schedule
    Analyze {
        /// Schedule JSON ("-" for stdin)
        #[arg(long)]
        schedule: PathBuf,
        /// Demand CSV (src,dst,rate_gbps); saturated all-to-all when absent
        #[arg(long)]
        demand: Option<PathBuf>,
    },
    /// Exact maximum concurrent flow on a small instance
    Oracle {
        /// Edge list CSV (src,dst[,label],capacity_bps)
        #[arg(long, group = "topo")]
        graph: Option<PathBuf>,
        /// Schedule JSON; the emulated graph is used unless --temporal
        #[arg(long, group = "topo")]
        schedule: Option<PathBuf>,
        /// Complete graph on N vertices with unit capacities
        #[arg(long, group = "topo")]
        complete: Option<usize>,
        /// Demand CSV (src,dst,rate_gbps)
        #[arg(long, group = "dm")]
        demand: Option<PathBuf>,
        /// Saturated permutation, e.g. 1,2,3,0
        #[arg(long, group = "dm", value_delimiter = ',')]
        perm: Option<Vec<usize>>,
        /// Search for the worst saturated permutation
        #[arg(long, group = "dm")]
        worst_case: bool,
        /// Solve over temporal paths of the evolving graph
        #[arg(long, requires = "schedule")]
        temporal: bool,
        /// Longest path considered
        #[arg(long)]
        hop_cap: Option<usize>,
    },
    /// Run one simulation
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
        /// Print the full result as JSON instead of a CSV row
        #[arg(long)]
        json: bool,
        /// Write per-slot buffer occupancy as CSV
        #[arg(long)]
        trace_csv: Option<PathBuf>,
    },
    /// Run one simulation per value of an axis and print CSV
    Sweep {
        #[command(flatten)]
        sim: SimArgs,
        /// buffer (MB), load or degree
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
    },
    /// The four reference designs as CSV
    Table2 {
        #[command(flatten)]
        fabric: Fabric,
        /// Buffer for the shallow-buffer rows, MB
        #[arg(long, default_value_t = 20.0)]
        small_buffer_mb: f64,
    },
}

#[derive(Debug, Args, Clone)]
struct SimArgs {
    /// Simulation config JSON
    #[arg(long)]
    config: PathBuf,
    /// Replace the config's schedule
    #[arg(long)]
    schedule: Option<PathBuf>,
    #[arg(long)]
    load: Option<f64>,
    #[arg(long)]
    buffer_mb: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run length, slots
    #[arg(long)]
    duration: Option<u64>,
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Validation => 2,
        ErrorKind::Infeasible => 3,
        ErrorKind::Budget => 4,
    }
}

fn kind_name(kind: ErrorKind) -> &'static str {
    match kind {
        ErrorKind::Validation => "validation",
        ErrorKind::Infeasible => "infeasible",
        ErrorKind::Budget => "budget",
    }
}

fn report(kind: ErrorKind, message: String) -> ExitCode {
    let body = serde_json::json!({ "error": kind_name(kind), "message": message });
    eprintln!("{body}");
    ExitCode::from(exit_code(kind))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default().trim_start_matches("error: ");
            return report(ErrorKind::Validation, first.to_string());
        }
    };
    match commands::run(cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => report(e.kind(), e.to_string()),
    }
}

pub(crate) fn io_err(path: &std::path::Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}
