//! `proxflow gen | run | plot`
//!
//! Exit codes: 0 on success, 2 for bad configs or inputs (including
//! unreadable trace files), 1 when a run fails after its inputs were
//! accepted. Solver divergence is recorded in the trace and is not an error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use proxflow::bench::{self, ExperimentConfig, GenConfig};
use proxflow::Error;

#[derive(Parser, Debug)]
#[command(name = "proxflow", version, about = "Run and compare l1/TV solvers")]
struct Cli {
    /// Cap on worker threads for the dense kernels.
    #[arg(long, env = "PROXFLOW_THREADS", global = true, hide_env_values = true)]
    threads: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write A, y and x_true in the flat binary format plus meta.json.
    Gen {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every configured solver and write one trace CSV each.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for the traces; overrides paths in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run the solvers concurrently.
        #[arg(long)]
        parallel: bool,
    },
    /// Plot objective gap against wall-clock for one or more traces.
    Plot {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        /// SVG file to write.
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure split by exit code.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    /// Input-shaped errors are the caller's fault, everything else is ours.
    fn classify(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::Input(_)
            | Error::Parameter(_)
            | Error::Dimension { .. }
            | Error::Json(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn runtime(e: Error) -> Failure {
    Failure::Runtime(e.to_string())
}

fn configure_threads(threads: Option<&str>) -> Result<(), Failure> {
    let Some(raw) = threads else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("PROXFLOW_THREADS must be a positive integer, got {raw:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Runtime(format!("cannot size thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn gen(config: &Path, seed: Option<u64>, out: &Path) -> Result<(), Failure> {
    let (cfg, base) = GenConfig::load(config).map_err(Failure::classify)?;
    let seed = seed.unwrap_or(cfg.seed);
    let data = bench::generate(&cfg.problem, seed, &base).map_err(Failure::classify)?;
    let written = bench::write_generated(out, &cfg.problem, seed, &data).map_err(runtime)?;
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn run(config: &Path, seed: Option<u64>, out: Option<&Path>, parallel: bool) -> Result<(), Failure> {
    let (mut cfg, base) = ExperimentConfig::load(config).map_err(Failure::classify)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let (problem, _) = bench::build_problem(&cfg, &base).map_err(Failure::classify)?;
    let paths = bench::trace_paths(&cfg, &base, out);
    let traces = bench::run_solvers(&cfg, &problem, parallel).map_err(runtime)?;
    for (trace, path) in traces.iter().zip(&paths) {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| runtime(e.into()))?;
        }
        bench::write_trace_file(path, trace).map_err(runtime)?;
        let last = trace.rows.last().expect("traces start with the initial row");
        println!(
            "{:<16} iters {:>6}  objective {:.10e}  {:>9.3}s  {}{}",
            trace.label,
            last.iter,
            last.objective,
            last.seconds,
            path.display(),
            if trace.diverged() { "  [diverged]" } else { "" }
        );
    }
    Ok(())
}

fn plot(traces: &[PathBuf], out: &Path) -> Result<(), Failure> {
    let loaded = traces
        .iter()
        .map(bench::read_trace_file)
        .collect::<Result<Vec<_>, _>>()
        .map_err(Failure::classify)?;
    let svg = bench::plot_traces(&loaded).map_err(Failure::classify)?;
    std::fs::write(out, svg).map_err(|e| runtime(e.into()))?;
    println!("{}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads(cli.threads.as_deref()).and_then(|()| match &cli.command {
        Command::Gen { config, seed, out } => gen(config, *seed, out),
        Command::Run {
            config,
            seed,
            out,
            parallel,
        } => run(config, *seed, out.as_deref(), *parallel),
        Command::Plot { traces, out } => plot(traces, out),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
