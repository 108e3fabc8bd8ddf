//! Command-line front end for the verification suites.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use mnl::harness::{
    emit_report, init_thread_pool, parse_grid_spec, render_tables, run_suite, CheckRecord,
    Comparison, ConfigFile, ReportFormat, SuiteConfig,
};

#[derive(Parser)]
#[command(name = "mnl", version, about = "Checks structural invariants of free-field models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a check suite and report every measured invariant.
    Verify(VerifyArgs),
    /// Print the registered wave equations and their fibre projections.
    Tables {
        /// Output format: text or json.
        #[arg(long, default_value = "text")]
        format: String,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite to run: spinor, sections, wave-eq, massive, weyl, maxwell,
    /// vector-potential, fock, or all.
    #[arg(long)]
    suite: Option<String>,
    /// Momentum grid as NRxNTHETAxNPHI, e.g. 48x32x64.
    #[arg(long)]
    grid: Option<String>,
    /// Radial cutoff of the momentum grid.
    #[arg(long)]
    rmax: Option<f64>,
    /// Seed for all sampled group elements and packets.
    #[arg(long)]
    seed: Option<u64>,
    /// Multiplies every documented tolerance.
    #[arg(long)]
    tol_scale: Option<f64>,
    /// Write a report file (.json or .csv decides the default format).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Report format: json or csv. Defaults to the report extension.
    #[arg(long)]
    format: Option<String>,
    /// Key-value config file; explicit flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn merge_config(args: &VerifyArgs) -> Result<(SuiteConfig, Option<PathBuf>, ReportFormat), String> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            ConfigFile::parse(&text).map_err(|e| e.to_string())?
        }
        None => ConfigFile::default(),
    };

    let mut config = SuiteConfig::default();
    if let Some(suite) = file.suite {
        config.suite = suite;
    }
    if let Some((n_r, n_theta, n_phi)) = file.grid {
        (config.n_r, config.n_theta, config.n_phi) = (n_r, n_theta, n_phi);
    }
    if let Some(r_max) = file.r_max {
        config.r_max = r_max;
    }
    if let Some(seed) = file.seed {
        config.seed = seed;
    }
    if let Some(tol_scale) = file.tol_scale {
        config.tol_scale = tol_scale;
    }

    if let Some(suite) = &args.suite {
        config.suite = suite.parse().map_err(|e: mnl::harness::HarnessError| e.to_string())?;
    }
    if let Some(grid) = &args.grid {
        let (n_r, n_theta, n_phi) = parse_grid_spec(grid).map_err(|e| e.to_string())?;
        (config.n_r, config.n_theta, config.n_phi) = (n_r, n_theta, n_phi);
    }
    if let Some(r_max) = args.rmax {
        config.r_max = r_max;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(tol_scale) = args.tol_scale {
        config.tol_scale = tol_scale;
    }

    let report = args.report.clone().or_else(|| file.report.as_ref().map(PathBuf::from));
    let format = match (&args.format, file.format) {
        (Some(name), _) => ReportFormat::from_str(name).map_err(|e| e.to_string())?,
        (None, Some(from_file)) => from_file,
        (None, None) => match &report {
            Some(path) => ReportFormat::for_path(path),
            None => ReportFormat::Json,
        },
    };
    Ok((config, report, format))
}

fn print_records(records: &[CheckRecord]) {
    for record in records {
        let relation = match record.comparison {
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
        };
        let status = if record.pass { "pass" } else { "FAIL" };
        println!(
            "{status}  {:38} {:>12.4e} {relation} {:.4e}  ({} ms)",
            record.check_id, record.measured, record.tolerance, record.runtime_ms
        );
    }
    let failed = records.iter().filter(|r| !r.pass).count();
    println!("{} checks, {} failed", records.len(), failed);
}

fn run_verify(args: &VerifyArgs) -> Result<bool, String> {
    let (config, report, format) = merge_config(args)?;
    let records = run_suite(&config).map_err(|e| e.to_string())?;
    print_records(&records);
    if let Some(path) = report {
        emit_report(&config, &records, &path, format).map_err(|e| e.to_string())?;
        println!("report written to {}", path.display());
    }
    Ok(records.iter().all(|r| r.pass))
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    match cli.command {
        Command::Verify(args) => match run_verify(&args) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(message) => {
                eprintln!("error: {message}");
                ExitCode::from(2)
            }
        },
        Command::Tables { format } => {
            let format = match format.as_str() {
                "text" => ReportFormat::Csv,
                other => match ReportFormat::from_str(other) {
                    Ok(f) => f,
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                },
            };
            print!("{}", render_tables(format));
            ExitCode::SUCCESS
        }
    }
}
