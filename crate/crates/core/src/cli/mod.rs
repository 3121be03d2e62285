//! Command-line front end: `reduction-sim run|ensemble|compare <scenario>`.
//!
//! Exit statuses: 0 success, 1 usage or I/O error, 2 invalid scenario,
//! 3 statistical check failed under `compare --strict`.

pub mod format;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::analysis::{compare_statistics, run_ensemble_trajectories, skip_rate, EnsembleStats};
use crate::config::RunConfig;
use crate::dynamics::run_trajectory_with;
use crate::graph::CouplingGraph;
use crate::trace::{write_events_csv, ModulusTrace, TRACE_ROW_LIMIT};

pub use format::{emit_scenario, parse_scenario, parse_scenario_str, ScenarioFileError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_STATISTICS: i32 = 3;

/// Ensemble thread cap; 0 or unset lets rayon decide.
pub const THREADS_ENV: &str = "REDUCTION_SIM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "reduction-sim", version, about = "Stochastic state-reduction trajectory simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, clap::Args)]
pub struct CommonArgs {
    /// Scenario file.
    pub scenario: PathBuf,
    /// Override the selection-rule setting of the scenario file.
    #[arg(long, value_enum)]
    pub rule4: Option<Switch>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of trajectories (ensemble/compare).
    #[arg(long)]
    pub n: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write modulus traces (run) or all hit events (ensemble).
    #[arg(long)]
    pub trace: bool,
    /// Do not downsample the modulus trace.
    #[arg(long)]
    pub full_trace: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a single trajectory and write its events (and trace).
    Run(CommonArgs),
    /// Run an ensemble and write the statistics report.
    Ensemble(CommonArgs),
    /// Run the scenario with the selection rule on and off and compare.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Exit with status 3 if the endpoint statistics disagree.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioFileError),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario(ScenarioFileError::Io(_)) | CliError::Io(_) | CliError::Usage(_) => EXIT_USAGE,
            CliError::Scenario(_) | CliError::Validation(_) => EXIT_VALIDATION,
        }
    }
}

fn load(args: &CommonArgs) -> Result<(CouplingGraph, RunConfig), CliError> {
    let (graph, mut config) = parse_scenario(&args.scenario)?;
    if let Some(r) = args.rule4 {
        config.rule4_enabled = r == Switch::On;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(n) = args.n {
        config.n_trajectories = n;
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    config.emit_traces |= args.trace;
    config.full_trace |= args.full_trace;
    config.check().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok((graph, config))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn cmd_run(args: &CommonArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (graph, config) = load(args)?;
    let mut trace = ModulusTrace::new(graph.len());
    let traj = run_trajectory_with(&graph, &config, 0, |s| {
        if config.emit_traces {
            trace.record(s)
        }
    })
    .map_err(|e| CliError::Validation(e.to_string()))?;

    let dir = &config.output_dir;
    let mut w = create(dir, "events.csv")?;
    write_events_csv(&mut w, std::slice::from_ref(&traj))?;
    w.flush()?;
    if config.emit_traces {
        let mut w = create(dir, "trace.csv")?;
        let limit = (!config.full_trace).then_some(TRACE_ROW_LIMIT);
        trace.write_csv(&mut w, limit)?;
        w.flush()?;
    }
    let visits: Vec<String> = traj.visit_sequence.iter().map(usize::to_string).collect();
    writeln!(out, "visit_sequence = {}", visits.join(" "))?;
    writeln!(out, "terminated = {}", traj.terminated.as_str())?;
    writeln!(out, "end_time = {}", traj.end_time)?;
    writeln!(out, "output = {}", dir.display())?;
    Ok(EXIT_OK)
}

fn ensemble(graph: &CouplingGraph, config: &RunConfig, pool: &rayon::ThreadPool) -> Result<EnsembleStats, CliError> {
    let results = pool
        .install(|| run_ensemble_trajectories(graph, config, config.n_trajectories))
        .map_err(|e| CliError::Validation(e.to_string()))?;
    if config.emit_traces {
        let ok: Vec<_> = results.iter().filter_map(|r| r.as_ref().ok()).cloned().collect();
        let name = format!("events_rule4_{}.csv", if config.rule4_enabled { "on" } else { "off" });
        let mut w = create(&config.output_dir, &name)?;
        write_events_csv(&mut w, &ok)?;
        w.flush()?;
    }
    Ok(crate::analysis::aggregate_results(graph, config.rule4_enabled, &results))
}

fn cmd_ensemble(args: &CommonArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (graph, config) = load(args)?;
    let pool = thread_pool()?;
    let stats = ensemble(&graph, &config, &pool)?;
    let mut w = create(&config.output_dir, "report.txt")?;
    w.write_all(stats.to_report().as_bytes())?;
    w.flush()?;
    writeln!(out, "n_trajectories = {}", stats.n_trajectories)?;
    writeln!(out, "absorbed = {}", stats.absorption_count)?;
    writeln!(out, "skip_rate = {}", skip_rate(&stats))?;
    if let Some(p) = stats.path_counts {
        writeln!(
            out,
            "paths = clockwise {} counterclockwise {} direct {}",
            p.clockwise, p.counterclockwise, p.direct
        )?;
    }
    writeln!(out, "report = {}", config.output_dir.join("report.txt").display())?;
    Ok(EXIT_OK)
}

fn cmd_compare(args: &CommonArgs, strict: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let (graph, config) = load(args)?;
    let pool = thread_pool()?;
    let on = ensemble(&graph, &config.clone().with_rule4(true), &pool)?;
    let off = ensemble(&graph, &config.clone().with_rule4(false), &pool)?;
    let report = compare_statistics(&on, &off).map_err(|e| CliError::Validation(e.to_string()))?;

    let dir = &config.output_dir;
    for (name, text) in [
        ("report_rule4_on.txt", on.to_report()),
        ("report_rule4_off.txt", off.to_report()),
        ("comparison.txt", report.to_report("rule4_on", "rule4_off")),
    ] {
        let mut w = create(dir, name)?;
        w.write_all(text.as_bytes())?;
        w.flush()?;
    }
    writeln!(out, "endpoint_tv = {}", report.endpoint_tv)?;
    writeln!(out, "endpoint_max_abs_z = {}", report.max_abs_endpoint_z())?;
    writeln!(out, "endpoint_discrepancy = {}", report.endpoint_discrepancy)?;
    writeln!(out, "orders_differ = {}", report.orders_differ())?;
    writeln!(out, "report = {}", dir.join("comparison.txt").display())?;
    if strict && report.endpoint_discrepancy {
        return Ok(EXIT_STATISTICS);
    }
    Ok(EXIT_OK)
}

/// Parse `args` (including the program name) and run the command, writing
/// the summary to `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args, out),
        Command::Ensemble(args) => cmd_ensemble(args, out),
        Command::Compare { common, strict } => cmd_compare(common, *strict, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
