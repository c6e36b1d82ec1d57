//! Command line front end.
//!
//! Exit codes: 0 on success, 1 when the engine or guest program
//! fails, 2 on usage errors.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, ValueEnum};

use rvsym::bench;
use rvsym::config::Config;
use rvsym::engine::{run, ExitStatus};
use rvsym::explorer::explore;
use rvsym::machine::MachineState;
use rvsym::solver::{Backend, Model, Session};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Debug)]
enum Mode {
    /// Single run on the program's initial data.
    Concrete,
    /// Full concolic path exploration.
    Explore,
    /// Timed exploration over a benchmark suite.
    Bench,
}

fn parse_u32_maybe_hex(s: &str) -> Result<u32, String> {
    let parsed = if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        u32::from_str_radix(hex, 16)
    } else {
        s.parse()
    };
    parsed.map_err(|e| e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "rvsym", version, about = "Concolic execution for RV32IM binaries")]
struct Args {
    /// RV32IM ELF executable (not used in bench mode).
    image: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "explore")]
    mode: Mode,

    /// Initial stack pointer (decimal or 0x-prefixed hex).
    #[arg(long, value_parser = parse_u32_maybe_hex, default_value = "0x80000000")]
    stack_top: u32,

    /// Instruction budget per run.
    #[arg(long, default_value_t = 10_000_000)]
    step_limit: u64,

    /// Stop exploring after this many paths.
    #[arg(long, default_value_t = 1 << 20)]
    max_paths: u64,

    /// Stop exploring after this many program runs.
    #[arg(long, default_value_t = 1 << 20)]
    max_runs: u64,

    /// Per-query solver budget in seconds.
    #[arg(long, default_value_t = 30)]
    query_timeout: u64,

    /// Fault on reads of unmapped memory instead of returning zero.
    #[arg(long)]
    strict_memory: bool,

    /// Write every solver query to this directory as .smt2.
    #[arg(long, value_name = "DIR")]
    dump_smt: Option<PathBuf>,

    /// Report destination (JSONL for explore, JSON for bench).
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,

    /// Solver backend: "internal" or "external:<command>".
    #[arg(long, default_value = "internal")]
    solver: String,

    /// Benchmark suite JSON (bench mode).
    #[arg(long, value_name = "PATH")]
    suite: Option<PathBuf>,

    /// Repetitions per benchmark case.
    #[arg(long, default_value_t = 5)]
    repetitions: u32,
}

fn backend_from_flag(flag: &str) -> Result<Backend, String> {
    if flag == "internal" {
        return Ok(Backend::BitBlast);
    }
    if let Some(cmd) = flag.strip_prefix("external:") {
        let parts: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
        if parts.is_empty() {
            return Err("external solver command is empty".into());
        }
        return Ok(Backend::External(parts));
    }
    Err(format!("unknown solver backend {flag:?} (use internal or external:<command>)"))
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn failure(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    env_logger::init();
    let args = Args::parse();

    let backend = match backend_from_flag(&args.solver) {
        Ok(b) => b,
        Err(e) => return usage_error(&e),
    };
    let config = Config {
        stack_top: args.stack_top,
        step_limit: args.step_limit,
        max_paths: args.max_paths,
        max_runs: args.max_runs,
        query_timeout: Duration::from_secs(args.query_timeout),
        strict_memory: args.strict_memory,
        dump_smt: args.dump_smt.clone(),
        solver_backend: backend,
    };

    match args.mode {
        Mode::Bench => {
            let Some(suite) = args.suite.as_deref() else {
                return usage_error("bench mode needs --suite");
            };
            match bench::run_suite(suite, &config, args.repetitions) {
                Ok(rows) => {
                    print!("{}", bench::render_tsv(&rows));
                    if let Some(path) = &args.report {
                        let json = serde_json::to_string_pretty(&rows).expect("rows serialize");
                        if let Err(e) = std::fs::write(path, json) {
                            return failure(&format!("writing {}: {e}", path.display()));
                        }
                    }
                    if rows.iter().any(|r| r.matched == Some(false)) {
                        return failure("path count mismatch against expectations");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => failure(&e.to_string()),
            }
        }
        Mode::Concrete | Mode::Explore => {
            let Some(image_path) = args.image.as_deref() else {
                return usage_error("an ELF image argument is required");
            };
            let image = match std::fs::read(image_path) {
                Ok(b) => b,
                Err(e) => return failure(&format!("reading {}: {e}", image_path.display())),
            };
            if args.mode == Mode::Concrete {
                run_concrete(&image, &config)
            } else {
                run_explore(&image, &config, args.report.as_deref())
            }
        }
    }
}

fn run_concrete(image: &[u8], config: &Config) -> ExitCode {
    let mut session = Session::new(config.solver_config());
    let mut state = MachineState::new(config.strict_memory);
    if let Err(e) = state.load_elf(image, config.stack_top) {
        return failure(&e.to_string());
    }
    let result = run(state, &mut session, &Model::new(), config.run_limits());
    if !result.output.is_empty() {
        print!("{}", String::from_utf8_lossy(&result.output));
    }
    println!("status: {:?}", result.exit);
    println!("steps: {}", result.steps);
    match result.exit {
        ExitStatus::Exited(_) => ExitCode::SUCCESS,
        _ => ExitCode::from(1),
    }
}

fn run_explore(image: &[u8], config: &Config, report: Option<&std::path::Path>) -> ExitCode {
    match explore(image, &config.explore_config()) {
        Ok(outcome) => {
            let jsonl = outcome.report.to_jsonl();
            match report {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &jsonl) {
                        return failure(&format!("writing {}: {e}", path.display()));
                    }
                    let s = &outcome.report.summary;
                    println!(
                        "paths: {} completed, {} truncated ({} runs, {} queries, exhausted: {})",
                        s.paths_completed, s.paths_truncated, s.runs, s.solver_queries, s.exhausted
                    );
                }
                None => print!("{jsonl}"),
            }
            ExitCode::SUCCESS
        }
        Err(e) => failure(&e.to_string()),
    }
}
