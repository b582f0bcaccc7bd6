//! Command-line front end for the straight-line string constraint solver.
//!
//! Exit codes: 0 sat (or straight-line for `check`), 1 unsat (or rejected
//! for `check`), 2 usage, input or parse error, 3 bound exhausted or
//! resource limit.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use slstr_core::constraints::{parse_problem, quote_str, Assignment, Problem};
use slstr_core::oracle::{brute_force_solve, OracleConfig, OracleOutcome};
use slstr_core::solver::{solve_with_stats, SolveError, SolverConfig, Verdict};
use slstr_core::straightline::{check_straightline, dimension};
use slstr_core::websec::load_benchmark;

const EXIT_SAT: u8 = 0;
const EXIT_UNSAT: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_BOUND: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "slstr",
    version,
    about = "Decide straight-line string constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide a problem file.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        opts: SolveOpts,
    },
    /// Report whether a problem file is straight-line.
    Check { file: PathBuf },
    /// Print the dimension (maximum split count) of a problem file.
    Dimension {
        file: PathBuf,
        /// Let constant segments of concatenations count towards splits.
        #[arg(long)]
        count_constants: bool,
    },
    /// Search all assignments up to the given bounds.
    Oracle {
        file: PathBuf,
        /// Longest string to try.
        #[arg(long)]
        max_len: usize,
        /// Largest integer to try.
        #[arg(long, default_value_t = 0)]
        max_int: i64,
        /// Print the assignment found.
        #[arg(long)]
        model: bool,
    },
    /// Decide one of the shipped web-security benchmarks.
    Bench {
        /// Benchmark name, e.g. ex_cacm.
        name: String,
        #[command(flatten)]
        opts: SolveOpts,
    },
}

#[derive(Args, Debug)]
struct SolveOpts {
    /// Bound on integers and counters for integer, character, IndexOf and
    /// disequality constraints.
    #[arg(long)]
    int_bound: Option<u64>,
    /// Print a model after `sat`.
    #[arg(long)]
    model: bool,
    /// Print work counters to standard error.
    #[arg(long)]
    stats: bool,
    /// Give up after this many seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Give up after deciding this many forests.
    #[arg(long)]
    max_forests: Option<u64>,
    /// Decide forests on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

impl SolveOpts {
    fn config(&self) -> Result<SolverConfig> {
        let timeout = self
            .timeout
            .map(Duration::try_from_secs_f64)
            .transpose()
            .context("invalid --timeout")?;
        let mut cfg = SolverConfig {
            int_bound: self.int_bound,
            max_forests: self.max_forests,
            timeout,
            ..SolverConfig::default()
        };
        if self.sequential {
            cfg.parallel = false;
        }
        Ok(cfg)
    }
}

/// Failure with a fixed exit code.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn load(path: &Path) -> Result<Problem> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| Exit(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    parse_problem(&src).map_err(|e| Exit(EXIT_INPUT, format!("{}:{e}", path.display())).into())
}

fn print_model(p: &Problem, m: &Assignment) {
    for (name, w) in p.str_vars.iter().zip(&m.strs) {
        println!("model {name} = {}", quote_str(&p.alphabet.decode(w), '"'));
    }
    for (name, v) in p.int_vars.iter().zip(&m.ints) {
        println!("model {name} = {v}");
    }
}

fn run_solve(p: &Problem, opts: &SolveOpts) -> Result<u8> {
    let cfg = opts.config()?;
    let (verdict, stats) = solve_with_stats(p, &cfg).map_err(|e| match e {
        SolveError::ResourceLimit(_) => Exit(EXIT_BOUND, e.to_string()),
        SolveError::NotStraightLine(r) => {
            Exit(EXIT_INPUT, format!("not straight-line: {}", r.describe(p)))
        }
        SolveError::Malformed(_) => Exit(EXIT_INPUT, e.to_string()),
        _ => Exit(EXIT_BOUND, e.to_string()),
    })?;
    let code = match &verdict {
        Verdict::Sat(m) => {
            println!("sat");
            if opts.model {
                print_model(p, m);
            }
            EXIT_SAT
        }
        Verdict::Unsat => {
            println!("unsat");
            EXIT_UNSAT
        }
        Verdict::UnsatWithinBounds(n) => {
            println!("unsat-within-bounds int-bound={n}");
            EXIT_BOUND
        }
    };
    if opts.stats {
        for line in stats.lines() {
            eprintln!("stats {line}");
        }
    }
    Ok(code)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve { file, opts } => run_solve(&load(&file)?, &opts),
        Command::Bench { name, opts } => {
            let (p, _) = load_benchmark(&name).map_err(|e| Exit(EXIT_INPUT, e.to_string()))?;
            run_solve(&p, &opts)
        }
        Command::Check { file } => {
            let p = load(&file)?;
            Ok(match check_straightline(&p) {
                Ok(_) => {
                    println!("straight-line");
                    EXIT_SAT
                }
                Err(r) => {
                    println!("not straight-line: {}", r.describe(&p));
                    EXIT_UNSAT
                }
            })
        }
        Command::Dimension {
            file,
            count_constants,
        } => {
            let p = load(&file)?;
            let d = dimension(&p, count_constants)
                .map_err(|r| Exit(EXIT_INPUT, format!("not straight-line: {}", r.describe(&p))))?;
            println!("{d}");
            Ok(EXIT_SAT)
        }
        Command::Oracle {
            file,
            max_len,
            max_int,
            model,
        } => {
            let p = load(&file)?;
            if max_int < 0 {
                return Err(Exit(EXIT_INPUT, "--max-int must be non-negative".into()).into());
            }
            Ok(
                match brute_force_solve(&p, OracleConfig { max_len, max_int }) {
                    OracleOutcome::Sat(m) => {
                        println!("sat");
                        if model {
                            print_model(&p, &m);
                        }
                        EXIT_SAT
                    }
                    OracleOutcome::Exhausted => {
                        println!("exhausted max-len={max_len} max-int={max_int}");
                        EXIT_BOUND
                    }
                },
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Exit>().map_or(EXIT_INPUT, |x| x.0);
            ExitCode::from(code)
        }
    }
}
