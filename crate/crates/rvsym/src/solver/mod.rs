//! Solver sessions: term construction, satisfiability queries, models.
//!
//! A [`Session`] owns the hash-consed term table for one exploration
//! and dispatches `check` calls to the configured backend: the
//! built-in bit-blasting SAT backend (default, no external tooling
//! needed) or an external SMT-LIB process. Queries are conjunctions of
//! "this term is nonzero" assertions; a satisfying assignment comes
//! back as a byte value per input variable.

pub mod bitblast;
pub mod external;
pub mod smtlib;
pub mod term;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::expr::{BvExpr, ExprError, Width};

pub use term::{Term, TermHandle, TermTable};

/// Identity of one symbolic input byte: the running index of the
/// `make_symbolic` call that created it plus the byte offset within
/// that call's region. Renders as `in_<call>_<offset>`, which is also
/// the SMT variable name.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId {
    pub call: u32,
    pub offset: u32,
}

impl VarId {
    pub fn from_name(name: &str) -> Option<VarId> {
        let rest = name.strip_prefix("in_")?;
        let (call, offset) = rest.split_once('_')?;
        Some(VarId { call: call.parse().ok()?, offset: offset.parse().ok()? })
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "in_{}_{}", self.call, self.offset)
    }
}

/// Satisfying assignment: one byte per input variable. Variables
/// absent from a model are unconstrained and read as zero.
pub type Model = BTreeMap<VarId, u8>;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum UnknownReason {
    Timeout,
    Backend(String),
}

/// Outcome of a satisfiability query.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SatResult {
    Sat(Model),
    Unsat,
    Unknown(UnknownReason),
}

#[derive(Error, Clone, PartialEq, Eq, Debug)]
pub enum SolverError {
    #[error("variable {0} already declared")]
    DuplicateVariable(VarId),
}

/// Which decision procedure answers queries.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Backend {
    /// Built-in bit-blasting over a CDCL SAT solver.
    BitBlast,
    /// External SMT-LIB process; the query file path is appended to
    /// the argument vector.
    External(Vec<String>),
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub backend: Backend,
    /// Per-query budget; exceeding it yields `Unknown(Timeout)`.
    pub timeout: Duration,
    /// If set, every query is also written here as
    /// `query_<seq>.smt2`.
    pub dump_dir: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: Backend::BitBlast,
            timeout: Duration::from_secs(30),
            dump_dir: None,
        }
    }
}

#[derive(Clone, Copy, Default, Debug)]
pub struct SolverStats {
    pub queries: u64,
    pub sat: u64,
    pub unsat: u64,
    pub unknown: u64,
    pub solve_time: Duration,
}

/// One exploration's solver state.
pub struct Session {
    terms: TermTable,
    vars: BTreeMap<VarId, TermHandle>,
    config: SolverConfig,
    stats: SolverStats,
    query_seq: u32,
}

impl Session {
    pub fn new(config: SolverConfig) -> Self {
        Session {
            terms: TermTable::new(),
            vars: BTreeMap::new(),
            config,
            stats: SolverStats::default(),
            query_seq: 0,
        }
    }

    pub fn terms(&self) -> &TermTable {
        &self.terms
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Declare a fresh 8-bit input variable; re-declaring is an error.
    pub fn declare_var(&mut self, id: VarId) -> Result<TermHandle, SolverError> {
        if self.vars.contains_key(&id) {
            return Err(SolverError::DuplicateVariable(id));
        }
        let h = self.terms.var(id);
        self.vars.insert(id, h);
        Ok(h)
    }

    /// Declare-or-fetch: the same [`VarId`] always yields the same
    /// handle, so re-running a program keeps path conditions from
    /// earlier runs meaningful.
    pub fn var(&mut self, id: VarId) -> TermHandle {
        if let Some(&h) = self.vars.get(&id) {
            return h;
        }
        let h = self.terms.var(id);
        self.vars.insert(id, h);
        h
    }

    pub fn lookup_var(&self, id: VarId) -> Option<TermHandle> {
        self.vars.get(&id).copied()
    }

    pub fn declared_vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars.keys().copied()
    }

    pub fn constant(&mut self, width: Width, value: u64) -> TermHandle {
        self.terms.constant(width, value)
    }

    /// Lower an expression over term handles into the table.
    pub fn lower(&mut self, e: &BvExpr<TermHandle>) -> Result<TermHandle, ExprError> {
        self.terms.lower(e)
    }

    /// Evaluate a term under a model (absent variables read zero).
    pub fn eval(&self, h: TermHandle, model: &Model) -> u64 {
        self.terms.eval(h, model)
    }

    pub fn render_smtlib(&self, assertions: &[TermHandle]) -> String {
        smtlib::render_query(&self.terms, assertions)
    }

    /// Decide the conjunction of nonzero-assertions.
    pub fn check(&mut self, assertions: &[TermHandle]) -> SatResult {
        if let Some(dir) = &self.config.dump_dir {
            let _ = fs::create_dir_all(dir);
            let path = dir.join(format!("query_{:05}.smt2", self.query_seq));
            let _ = fs::write(path, self.render_smtlib(assertions));
        }
        self.query_seq += 1;
        self.stats.queries += 1;
        let started = Instant::now();
        let result = match &self.config.backend {
            Backend::BitBlast => bitblast::check(&self.terms, assertions, self.config.timeout),
            Backend::External(cmd) => {
                external::check(cmd, &self.terms, assertions, self.config.timeout)
            }
        };
        self.stats.solve_time += started.elapsed();
        match &result {
            SatResult::Sat(_) => self.stats.sat += 1,
            SatResult::Unsat => self.stats.unsat += 1,
            SatResult::Unknown(_) => self.stats.unknown += 1,
        }
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn var_identity_is_stable() {
        let mut s = Session::new(SolverConfig::default());
        let id = VarId { call: 0, offset: 0 };
        let a = s.declare_var(id).unwrap();
        assert_eq!(s.declare_var(id), Err(SolverError::DuplicateVariable(id)));
        assert_eq!(s.var(id), a, "get-or-declare returns the original handle");
    }

    #[test]
    fn var_names_round_trip() {
        let id = VarId { call: 12, offset: 345 };
        assert_eq!(id.to_string(), "in_12_345");
        assert_eq!(VarId::from_name("in_12_345"), Some(id));
        assert_eq!(VarId::from_name("x7"), None);
    }

    #[test]
    fn check_solves_and_counts() {
        let mut s = Session::new(SolverConfig::default());
        let id = VarId { call: 0, offset: 0 };
        let v = s.var(id);
        let e = BvExpr::leaf(v)
            .zext(24)
            .eq(BvExpr::int(Width::W32, 0x2A));
        let cond = s.lower(&e).unwrap();
        match s.check(&[cond]) {
            SatResult::Sat(m) => {
                assert_eq!(m[&id], 0x2A);
                assert_eq!(s.eval(cond, &m), 1);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(s.stats().queries, 1);
        assert_eq!(s.stats().sat, 1);
    }

    #[test]
    fn dump_writes_query_files() {
        let dir = std::env::temp_dir().join(format!("rvsym-dump-test-{}", std::process::id()));
        let mut s = Session::new(SolverConfig {
            dump_dir: Some(dir.clone()),
            ..Default::default()
        });
        let one = s.constant(Width::W32, 1);
        let _ = s.check(&[one]);
        let dumped = std::fs::read_to_string(dir.join("query_00000.smt2")).unwrap();
        assert!(dumped.contains("(check-sat)"));
        let _ = std::fs::remove_dir_all(dir);
    }
}
