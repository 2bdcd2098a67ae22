use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use wordeq::bench::{instances, run_all, write_csv};
use wordeq::model::render;
use wordeq::trace::write_trace;
use wordeq::{load, StdClock};
use wordeq_core::oracle::{brute_force, OracleResult, DEFAULT_NODE_CAP};
use wordeq_core::{solve, Error, Mode, SolveOptions, SolveResult};

#[derive(Parser)]
#[command(name = "wordeq", version, about = "Word equation solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Quadratic,
    Cubic,
    Complete,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Quadratic => Mode::Quadratic,
            ModeArg::Cubic => Mode::CubicCut,
            ModeArg::Complete => Mode::Complete,
        }
    }
}

#[derive(clap::Args)]
struct Limits {
    /// Wall-clock limit in seconds; 0 disables it.
    #[arg(long, default_value_t = 20.0)]
    timeout: f64,
    /// Iteration limit of the reachability loop.
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

impl Limits {
    fn options(&self) -> SolveOptions {
        let mut o = SolveOptions { mode: self.mode.map(Mode::from), ..SolveOptions::default() };
        o.budget.max_iters = self.iters;
        o.budget.timeout = (self.timeout > 0.0).then(|| Duration::from_secs_f64(self.timeout));
        o
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one instance (`.smt2` or the native format).
    Solve {
        file: PathBuf,
        #[command(flatten)]
        limits: Limits,
        /// Write reach sets and a step log into this directory.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Print a model after `sat`.
        #[arg(long)]
        model: bool,
    },
    /// Solve every instance in a directory and write a CSV report.
    Bench {
        dir: PathBuf,
        #[arg(long)]
        csv: PathBuf,
        #[command(flatten)]
        limits: Limits,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Bounded brute-force search for a model.
    Oracle {
        file: PathBuf,
        #[arg(long)]
        maxlen: usize,
        #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
        nodes: u64,
    },
}

const INPUT_ERROR: u8 = 2;
const INTERNAL_ERROR: u8 = 3;

fn solver_exit(e: &Error) -> u8 {
    match e {
        Error::Internal(_) | Error::Decode(_) => INTERNAL_ERROR,
        _ => INPUT_ERROR,
    }
}

fn run(cli: Cli) -> Result<(), (u8, String)> {
    let input_err = |e: wordeq::InputError| (INPUT_ERROR, e.to_string());
    let mut stdout = std::io::stdout().lock();
    match cli.cmd {
        Cmd::Solve { file, limits, trace, model } => {
            let input = load(&file).map_err(input_err)?;
            let out = match solve(&input.problem, &limits.options(), &StdClock::start()) {
                Ok(o) => o,
                Err(Error::Resource(m)) => {
                    let _ = writeln!(stdout, "unknown");
                    eprintln!("resource limit: {m}");
                    return Ok(());
                }
                Err(e) => return Err((solver_exit(&e), e.to_string())),
            };
            let _ = writeln!(stdout, "{}", out.result.verdict());
            match &out.result {
                SolveResult::Sat(m) if model => {
                    let _ = write!(stdout, "{}", render(&input, m));
                }
                SolveResult::Unknown(r) => eprintln!("reason: {r}"),
                _ => {}
            }
            if let Some(dir) = trace {
                write_trace(&dir, &out).map_err(|e| (INTERNAL_ERROR, format!("writing trace: {e}")))?;
            }
        }
        Cmd::Bench { dir, csv, limits, jobs } => {
            let paths = instances(&dir).map_err(|e| (INPUT_ERROR, format!("{}: {e}", dir.display())))?;
            let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let rows = run_all(&paths, &limits.options(), jobs);
            let f = std::fs::File::create(&csv).map_err(|e| (INPUT_ERROR, format!("{}: {e}", csv.display())))?;
            write_csv(&rows, f).map_err(|e| (INTERNAL_ERROR, e.to_string()))?;
            let _ = writeln!(stdout, "{} instances", rows.len());
        }
        Cmd::Oracle { file, maxlen, nodes } => {
            let input = load(&file).map_err(input_err)?;
            match brute_force(&input.problem, maxlen, nodes) {
                OracleResult::Sat(m) => {
                    let _ = write!(stdout, "sat\n{}", render(&input, &m));
                }
                OracleResult::NoModelUpTo(k) => {
                    let _ = writeln!(stdout, "unknown\nno model with values up to length {k}");
                }
                OracleResult::Cap { nodes, max_len } => {
                    let _ = writeln!(
                        stdout,
                        "unknown\nnode limit reached after {nodes} nodes, bound {max_len} not exhausted"
                    );
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
