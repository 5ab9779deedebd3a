//! `sam-prior {analyze|calibrate|simulate|curve|serve}`.

use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use sam_prior::{config, Engine};

use crate::commands::{self, AnalyzeOverrides, Rendered, RunOverrides};

#[derive(Debug, Parser)]
#[command(name = "sam-prior", version, about = "Self-adapting mixture priors: analysis, calibration and operating characteristics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze one trial's observed data.
    Analyze(AnalyzeArgs),
    /// Calibrate decision cutoffs for every scenario design in a batch.
    Calibrate(RunArgs),
    /// Calibrate, then estimate operating characteristics for a batch.
    Simulate(RunArgs),
    /// Mean SAM weight over a grid of true control parameters.
    Curve(RunArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Write the JSON report here as well as to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicates: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output path: the CSV goes to `<out>.csv`, the JSON mirror to `<out>.json`.
    /// Without it the JSON report is printed to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write every per-replicate decision as JSON lines (simulate only).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Suppress progress output on stderr.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: SocketAddr,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Persist job results here, one `<job id>.json` file per job.
    #[arg(long)]
    pub results_dir: Option<PathBuf>,
    /// Allowed CORS origin; repeatable. Defaults to any origin.
    #[arg(long = "cors-origin", env = "SAM_PRIOR_CORS_ORIGIN", value_delimiter = ',')]
    pub cors_origins: Vec<String>,
}

/// Exit status for a failed command: 2 for configuration and schema errors,
/// 1 for everything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    use sam_prior::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::Config { .. } | E::UnsupportedMethod(_) | E::InvalidMethod { .. } | E::InvalidScenario { .. }) => 2,
        _ if err.downcast_ref::<ConfigIo>().is_some() => 2,
        _ => 1,
    }
}

/// The configuration file could not be read.
#[derive(Debug)]
pub struct ConfigIo(pub String);

impl std::fmt::Display for ConfigIo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigIo {}

fn read_config(path: &Path) -> anyhow::Result<serde_json::Value> {
    let text = fs::read_to_string(path).map_err(|e| ConfigIo(format!("cannot read {}: {e}", path.display())))?;
    Ok(config::parse_value(&text)?)
}

fn engine(threads: Option<usize>) -> anyhow::Result<Engine> {
    Ok(match threads {
        Some(t) => Engine::new().with_threads(t)?,
        None => Engine::new(),
    })
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn emit(rendered: &Rendered, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(out) => {
            let csv = out.with_extension("csv");
            let json = out.with_extension("json");
            write_file(&csv, &rendered.csv)?;
            write_file(&json, &rendered.json)?;
            tracing::info!(csv = %csv.display(), json = %json.display(), "wrote results");
        }
        None => std::io::stdout().write_all(rendered.json.as_bytes())?,
    }
    Ok(())
}

/// Runs `work` with a progress line on stderr every half second.
fn with_progress<T>(engine: Engine, total: u64, quiet: bool, work: impl FnOnce(&Engine) -> T) -> T {
    if quiet || total == 0 {
        return work(&engine);
    }
    let ticks = Arc::new(AtomicU64::new(0));
    let counter = ticks.clone();
    let engine = engine.with_progress(move || {
        counter.fetch_add(1, Ordering::Relaxed);
    });
    let finished = AtomicBool::new(false);
    let print = |done: u64| eprint!("\rprogress: {:5.1}% ({done}/{total})", 100.0 * done as f64 / total as f64);
    std::thread::scope(|s| {
        s.spawn(|| {
            let mut waited = Duration::ZERO;
            while !finished.load(Ordering::Relaxed) {
                std::thread::sleep(Duration::from_millis(50));
                waited += Duration::from_millis(50);
                if waited >= Duration::from_millis(500) {
                    print(ticks.load(Ordering::Relaxed));
                    waited = Duration::ZERO;
                }
            }
            print(ticks.load(Ordering::Relaxed));
            eprintln!();
        });
        let out = work(&engine);
        finished.store(true, Ordering::Relaxed);
        out
    })
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> anyhow::Result<String> {
    let value = read_config(&args.config)?;
    let config = commands::analyze_config(
        value,
        AnalyzeOverrides {
            cutoff: args.cutoff,
            delta: args.delta,
        },
    )?;
    let report = commands::analyze_json(&config)?;
    if let Some(out) = &args.out {
        write_file(out, &report)?;
    }
    std::io::stdout().write_all(report.as_bytes())?;
    Ok(report)
}

fn overrides(args: &RunArgs) -> RunOverrides {
    RunOverrides {
        seed: args.seed,
        replicates: args.replicates,
    }
}

pub fn cmd_calibrate(args: &RunArgs) -> anyhow::Result<Rendered> {
    let config = commands::batch_config(read_config(&args.config)?, overrides(args), true)?;
    let total = config.calibration_work()?;
    let rendered = with_progress(engine(args.threads)?, total, args.quiet, |e| commands::calibrate(e, &config))?;
    emit(&rendered, args.out.as_deref())?;
    Ok(rendered)
}

pub fn cmd_simulate(args: &RunArgs) -> anyhow::Result<Rendered> {
    let config = commands::batch_config(read_config(&args.config)?, overrides(args), false)?;
    let total = config.simulation_work()?;
    let engine = engine(args.threads)?;
    let rendered = match &args.trace {
        Some(path) => {
            let (rendered, trace) = with_progress(engine, total, args.quiet, |e| commands::simulate_traced(e, &config))?;
            let mut lines = String::new();
            for record in &trace {
                lines.push_str(&serde_json::to_string(record)?);
                lines.push('\n');
            }
            write_file(path, &lines)?;
            rendered
        }
        None => with_progress(engine, total, args.quiet, |e| commands::simulate(e, &config))?,
    };
    emit(&rendered, args.out.as_deref())?;
    Ok(rendered)
}

pub fn cmd_curve(args: &RunArgs) -> anyhow::Result<Rendered> {
    let config = commands::curve_config(read_config(&args.config)?, overrides(args))?;
    let total = config.work()?;
    let rendered = with_progress(engine(args.threads)?, total, args.quiet, |e| commands::curve(e, &config))?;
    emit(&rendered, args.out.as_deref())?;
    Ok(rendered)
}

pub fn cmd_serve(args: &ServeArgs) -> anyhow::Result<()> {
    let state = crate::server::AppState::new(engine(args.threads)?, args.results_dir.clone())?;
    let cors = crate::server::cors_layer(&args.cors_origins)?;
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(crate::server::serve(args.bind, state, cors))
}

/// Dispatches a parsed command line.
pub fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a).map(|_| ()),
        Command::Calibrate(a) => cmd_calibrate(a).map(|_| ()),
        Command::Simulate(a) => cmd_simulate(a).map(|_| ()),
        Command::Curve(a) => cmd_curve(a).map(|_| ()),
        Command::Serve(a) => cmd_serve(a),
    }
}
