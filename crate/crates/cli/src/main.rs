//! `hbd` command line: run outage/diversity/Monte-Carlo sweeps over a
//! scenario file and write a CSV table.
//!
//! Exit codes: 0 full success, 1 configuration error, 2 when any table cell
//! is non-convergent.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hbd_cli::sweep::{self, Axis, Metric, SweepMode, SweepSpec};

#[derive(Parser)]
#[command(name = "hbd", version, about = "Hybrid-duplex link outage and diversity sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate metrics over a parameter grid and emit a CSV table.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Scenario file (flat key-value TOML; `_db` suffix accepts dB values).
    scenario: PathBuf,

    /// Sweep as <axis>=<start>:<stop>:<step>; axis is one of
    /// omega_db, rf, alpha_12.
    #[arg(long)]
    sweep: String,

    /// Comma-separated metrics: outage, df_fixed, df_variable, mc_outage.
    #[arg(long, value_delimiter = ',', required = true)]
    metrics: Vec<String>,

    /// Comma-separated modes: gs_hbd, as2_ii, as2_sic, gs_hd, as2_hd,
    /// system_ii, system_sic, system_hd.
    #[arg(long, value_delimiter = ',', required = true)]
    modes: Vec<String>,

    /// Monte-Carlo samples per mc_outage cell.
    #[arg(long, default_value_t = 10_000_000)]
    samples: u64,

    /// Master seed for all Monte-Carlo cells.
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

fn parse_sweep(text: &str) -> Result<(Axis, f64, f64, f64), String> {
    let (axis_str, grid) = text
        .split_once('=')
        .ok_or_else(|| format!("sweep `{text}` is not <axis>=<start>:<stop>:<step>"))?;
    let axis = Axis::parse(axis_str)
        .ok_or_else(|| format!("unknown axis `{axis_str}` (omega_db, rf, alpha_12)"))?;
    let parts: Vec<&str> = grid.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid `{grid}` is not <start>:<stop>:<step>"));
    }
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| format!("bad grid number `{s}`: {e}"))
    };
    Ok((axis, num(parts[0])?, num(parts[1])?, num(parts[2])?))
}

fn build_spec(args: &AnalyzeArgs) -> Result<SweepSpec, String> {
    let (axis, start, stop, step) = parse_sweep(&args.sweep)?;
    let metrics = args
        .metrics
        .iter()
        .map(|m| Metric::parse(m).ok_or_else(|| format!("unknown metric `{m}`")))
        .collect::<Result<Vec<_>, _>>()?;
    let modes = args
        .modes
        .iter()
        .map(|m| SweepMode::parse(m).ok_or_else(|| format!("unknown mode `{m}`")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepSpec {
        axis,
        start,
        stop,
        step,
        metrics,
        modes,
        samples: args.samples,
        seed: args.seed,
        output_path: args.out.clone(),
    })
}

fn init_threads() {
    if let Ok(n) = std::env::var("HBD_THREADS") {
        if let Ok(n) = n.parse::<usize>() {
            // Ignore failure: the global pool may already exist.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        } else {
            eprintln!("warning: HBD_THREADS is not an integer; using default");
        }
    }
}

enum Outcome {
    Clean,
    NonConvergent,
}

fn run() -> Result<Outcome, String> {
    // Clap usage errors are configuration errors: exit 1, not clap's 2.
    // Help and version requests are not errors at all.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            let _ = e.print();
            return Ok(Outcome::Clean);
        }
        Err(e) => return Err(e.to_string()),
    };
    init_threads();
    match cli.command {
        Command::Analyze(args) => {
            let spec = build_spec(&args)?;
            let table = sweep::run_sweep(&args.scenario, &spec).map_err(|e| e.to_string())?;
            sweep::emit_csv(&table, &spec.output_path).map_err(|e| e.to_string())?;
            let converged = table.fully_converged();
            eprintln!(
                "wrote {} rows x {} columns to {}{}",
                table.rows.len(),
                table.header.len(),
                spec.output_path.display(),
                if converged { "" } else { " (non-convergent cells present)" }
            );
            Ok(if converged {
                Outcome::Clean
            } else {
                Outcome::NonConvergent
            })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(Outcome::Clean) => ExitCode::from(0),
        Ok(Outcome::NonConvergent) => ExitCode::from(2),
        Err(msg) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}
