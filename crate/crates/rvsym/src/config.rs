//! Engine-wide configuration shared by the CLI and library callers.

use std::path::PathBuf;
use std::time::Duration;

use crate::engine::RunLimits;
use crate::explorer::{ExploreConfig, ExploreLimits};
use crate::solver::{Backend, SolverConfig};

/// Everything tunable about a run or exploration.
#[derive(Clone, Debug)]
pub struct Config {
    /// Initial value of the stack pointer (x2).
    pub stack_top: u32,
    /// Instruction budget per run.
    pub step_limit: u64,
    /// Path budget per exploration (completed + truncated).
    pub max_paths: u64,
    /// Run budget per exploration.
    pub max_runs: u64,
    /// Per-query solver budget.
    pub query_timeout: Duration,
    /// Fault on reads of unmapped memory instead of returning zero.
    pub strict_memory: bool,
    /// Directory receiving one `.smt2` file per solver query.
    pub dump_smt: Option<PathBuf>,
    pub solver_backend: Backend,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            stack_top: 0x8000_0000,
            step_limit: 10_000_000,
            max_paths: 1 << 20,
            max_runs: 1 << 20,
            query_timeout: Duration::from_secs(30),
            strict_memory: false,
            dump_smt: None,
            solver_backend: Backend::BitBlast,
        }
    }
}

impl Config {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            backend: self.solver_backend.clone(),
            timeout: self.query_timeout,
            dump_dir: self.dump_smt.clone(),
        }
    }

    pub fn run_limits(&self) -> RunLimits {
        RunLimits { step_limit: self.step_limit }
    }

    pub fn explore_config(&self) -> ExploreConfig {
        ExploreConfig {
            stack_top: self.stack_top,
            strict_memory: self.strict_memory,
            solver: self.solver_config(),
            limits: ExploreLimits {
                max_paths: self.max_paths,
                max_runs: self.max_runs,
                run: self.run_limits(),
            },
        }
    }
}
