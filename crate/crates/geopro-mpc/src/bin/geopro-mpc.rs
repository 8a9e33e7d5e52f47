//! Thin CLI over the library: run one scenario, run a benchmark suite, or
//! replot saved traces.
//!
//! Exit codes: 0 success, 2 usage/validation errors, 3 runtime failures
//! (I/O, solver, enumeration limits).

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use geopro_mpc::harness::suite::sanitize_stem;
use geopro_mpc::{
    emit_plot, load_scenario, run_closed_loop, run_suite, Error, Method, SimTrace,
};

#[derive(Parser)]
#[command(
    name = "geopro-mpc",
    version,
    about = "Projection-based MPC collision-avoidance simulator"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario with one method and write trace artifacts.
    Simulate {
        /// Scenario JSON file.
        #[arg(long)]
        scenario: PathBuf,
        /// geopro-vo | geopro-ed | reactive-vo | minlp-oracle
        #[arg(long, value_parser = Method::from_str)]
        method: Method,
        /// Override the scenario's prediction horizon.
        #[arg(long)]
        horizon: Option<usize>,
        /// Output directory for <name>_<method>_N<h>.{csv,meta.json,svg,summary.txt}.
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario's seed (recorded in the trace metadata).
        #[arg(long)]
        seed: Option<u64>,
        /// Write zeros to the solve-time column for byte-reproducible output.
        #[arg(long)]
        zero_timing: bool,
    },
    /// Run every scenario in a directory against methods x horizons.
    Bench {
        /// Directory of scenario JSON files.
        #[arg(long)]
        suite: PathBuf,
        /// Comma-separated method list.
        #[arg(long, default_value = "geopro-vo,geopro-ed,reactive-vo")]
        methods: String,
        /// Comma-separated horizon list.
        #[arg(long, default_value = "2,6")]
        horizons: String,
        /// Output directory for per-run artifacts and report.{txt,json}.
        #[arg(long)]
        out: PathBuf,
        /// Write zeros to solve-time columns for byte-reproducible output.
        #[arg(long)]
        zero_timing: bool,
    },
    /// Overlay saved traces into one SVG.
    Plot {
        /// Trace CSV files (each with its .meta.json sidecar).
        #[arg(long, num_args = 1.., required = true)]
        traces: Vec<PathBuf>,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Validation and usage problems exit 2 (matching the argument parser's own
/// convention); runtime failures exit 3.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation { .. } | Error::Parse(_) | Error::InvalidParameter(_) => 2,
        _ => 3,
    }
}

fn run(cli: Cli) -> geopro_mpc::Result<()> {
    match cli.cmd {
        Cmd::Simulate {
            scenario,
            method,
            horizon,
            out,
            seed,
            zero_timing,
        } => {
            let mut scen = load_scenario(&scenario)?;
            if let Some(seed) = seed {
                scen.seed = seed;
            }
            let trace = run_closed_loop(&scen, method, horizon)?;
            let stem = out.join(format!(
                "{}_{}_N{}",
                sanitize_stem(&scen.name),
                method.name(),
                trace.horizon
            ));
            let files = trace.write_files(&stem, zero_timing)?;
            print!("{}", trace.summary_text(zero_timing));
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Cmd::Bench {
            suite,
            methods,
            horizons,
            out,
            zero_timing,
        } => {
            let methods = parse_list(&methods, Method::from_str, "methods")?;
            let horizons = parse_list(
                &horizons,
                |s| s.parse::<usize>().map_err(|e| e.to_string()),
                "horizons",
            )?;
            let report = run_suite(&suite, &methods, &horizons, &out, zero_timing)?;
            print!("{}", report.table_text());
            println!(
                "wrote {} and {}",
                out.join("report.txt").display(),
                out.join("report.json").display()
            );
            Ok(())
        }
        Cmd::Plot { traces, out } => {
            let loaded: Vec<SimTrace> = traces
                .iter()
                .map(|p| SimTrace::read_files(p))
                .collect::<geopro_mpc::Result<_>>()?;
            emit_plot(&loaded, &out)?;
            println!("wrote {}", out.display());
            Ok(())
        }
    }
}

fn parse_list<T>(
    text: &str,
    parse: impl Fn(&str) -> Result<T, String>,
    what: &str,
) -> geopro_mpc::Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            parse(s).map_err(|e| Error::Validation {
                field: what.to_string(),
                message: e,
            })
        })
        .collect()
}
