//! `sharks`: run single simulations or parameter sweeps and turn their output
//! into summary and plot-ready CSV.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sharks_core::io::record::DEFAULT_SERIES_STRIDE;
use sharks_core::io::table::{plot_data, write_sweep_outputs};
use sharks_core::io::{parse_config_json, parse_raw_csv, parse_sweep_spec, render_sweep_spec, write_summary_csv};
use sharks_core::sweep::{aggregate, parse_dimensions, RowStatus, View};
use sharks_core::{run_simulation, run_sweep, DelayPolicy, Error, RunRecord, SimConfig, SweepSpec};

const EXIT_CONFIG: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(name = "sharks", version, about = "Adversarial corralling of a SHARKS perimeter swarm")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and emit a JSON run record.
    Run(RunArgs),
    /// Run every configuration of a sweep spec and write CSV tables.
    Sweep(SweepArgs),
    /// Summarize a raw.csv grouped by the given dimensions.
    Aggregate(AggregateArgs),
    /// Emit plot-ready columns for one view of a raw.csv.
    Plotdata(PlotArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Start from a JSON SimConfig or run record; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    adversaries: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    /// none, stability or stability+K
    #[arg(long)]
    delay: Option<DelayPolicy>,
    #[arg(long)]
    rounds: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Adversary entry angle in compass degrees.
    #[arg(long)]
    entry_angle: Option<f64>,
    /// Accept delta <= epsilon, clamping the band's inner radius at zero.
    #[arg(long)]
    allow_degenerate_band: bool,
    /// Keep every round in the series instead of every tenth.
    #[arg(long)]
    full_series: bool,
    /// Write the record here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML sweep spec; omitted keys take the default grid's values.
    #[arg(required_unless_present = "print_default_spec")]
    spec: Option<PathBuf>,
    #[arg(long, required_unless_present = "print_default_spec")]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Print the default spec and exit.
    #[arg(long)]
    print_default_spec: bool,
}

#[derive(Args)]
struct AggregateArgs {
    raw: PathBuf,
    /// Comma-separated: population, adversaries, delta, epsilon, d, c, delay,
    /// congestion[:WIDTH], congestion_exact
    #[arg(long)]
    by: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    raw: PathBuf,
    /// fig1, table2, table3, delay or fig4
    view: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Aggregate(args) => cmd_aggregate(args),
        Command::Plotdata(args) => cmd_plotdata(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("sharks: {e}");
            ExitCode::from(match e {
                Error::Io(_) => EXIT_IO,
                _ => EXIT_CONFIG,
            })
        }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
        }
        None => Ok(io::stdout().lock().write_all(text.as_bytes())?),
    }
}

fn cmd_run(a: RunArgs) -> Result<ExitCode, Error> {
    let mut cfg = match &a.config {
        Some(path) => parse_config_json(&read(path)?)?,
        None => SimConfig::default(),
    };
    macro_rules! set {
        ($($flag:ident => $($field:ident).+),* $(,)?) => {
            $(if let Some(v) = a.$flag { cfg.$($field).+ = v; })*
        };
    }
    set! {
        population => population,
        adversaries => num_adversaries,
        delta => params.delta,
        epsilon => params.epsilon,
        d => params.d,
        c => params.c,
        r => params.r,
        delay => delay,
        rounds => max_rounds,
        seed => seed,
        entry_angle => adversary_entry_angle,
    }
    cfg.allow_degenerate_band |= a.allow_degenerate_band;
    let outcome = run_simulation(&cfg)?;
    let stride = if a.full_series { 1 } else { DEFAULT_SERIES_STRIDE };
    let mut json = RunRecord::new(&cfg, &outcome, stride).to_json();
    json.push('\n');
    emit(&json, a.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(a: SweepArgs) -> Result<ExitCode, Error> {
    if a.print_default_spec {
        emit(&render_sweep_spec(&SweepSpec::default()), None)?;
        return Ok(ExitCode::SUCCESS);
    }
    let (Some(spec_path), Some(out)) = (a.spec, a.out) else {
        unreachable!("clap enforces spec and --out");
    };
    let spec = parse_sweep_spec(&read(&spec_path)?)?;
    let workers = a.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let result = run_sweep(&spec, workers)?;
    write_sweep_outputs(&result, &out)?;
    let bad: Vec<_> = result.rows.iter().filter(|r| !matches!(r.status, RowStatus::Ok(_))).collect();
    eprintln!("sharks: {} runs, {} not ok, tables in {}", result.rows.len(), bad.len(), out.display());
    for row in bad.iter().take(10) {
        eprintln!("  {} #{}: {:?}", row.digest, row.replication, row.status);
    }
    Ok(if bad.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_PARTIAL) })
}

fn cmd_aggregate(a: AggregateArgs) -> Result<ExitCode, Error> {
    let dims = parse_dimensions(&a.by)?;
    let rows = parse_raw_csv(&read(&a.raw)?)?;
    emit(&write_summary_csv(&aggregate(&rows, &dims)), a.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_plotdata(a: PlotArgs) -> Result<ExitCode, Error> {
    let view: View = a.view.parse()?;
    let rows = parse_raw_csv(&read(&a.raw)?)?;
    emit(&plot_data(&rows, view).to_csv(), a.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}
