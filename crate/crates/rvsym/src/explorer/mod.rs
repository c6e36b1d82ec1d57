//! Path exploration over the execution tree.
//!
//! Each run's branch trace is folded into a binary tree: internal
//! nodes are symbolic branch sites (condition term + PC), edges are
//! directions, leaves are terminal outcomes. Exploration repeatedly
//! picks the first unexplored child slot in a depth-first walk that
//! visits taken-children first, builds the path condition that forces
//! execution into that slot (every prefix direction asserted, with the
//! final one flipped against what was observed), asks the solver for a
//! model, and re-runs the program on it.
//!
//! Soundness is checked on every driven run: the new trace must agree
//! with the requested prefix through the flipped position, and a run
//! passing through an existing node must see the same PC and condition
//! there. Violations abort the exploration rather than silently
//! producing a wrong tree.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::engine::{run, ExitStatus, Fault, RunLimits, RunResult, Trace};
use crate::expr::BvExpr;
use crate::machine::{ElfError, MachineState};
use crate::solver::{Model, SatResult, Session, SolverConfig, TermHandle, UnknownReason};

/// Terminal outcome stored at a leaf.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Terminal {
    Exited(u32),
    Fault(Fault),
    Truncated,
}

impl Terminal {
    pub fn from_exit(exit: ExitStatus) -> Terminal {
        match exit {
            ExitStatus::Exited(c) => Terminal::Exited(c),
            ExitStatus::Fault(f) => Terminal::Fault(f),
            ExitStatus::StepLimit => Terminal::Truncated,
        }
    }
}

/// State of one child slot (or of the root before any run).
#[derive(Clone, Copy, PartialEq, Eq, Default, Debug)]
pub enum SlotState {
    /// No run has gone this way and nobody asked yet.
    #[default]
    Unexplored,
    /// A solver query for this slot is in flight.
    Pending,
    /// The solver proved no input reaches this slot.
    Unsat,
    /// The solver gave up (timeout or failure); reachability unknown.
    Unknown,
    /// An interior branch node.
    Node(u32),
    /// A terminal outcome.
    Leaf(Terminal),
}

/// Interior node: a symbolic branch site.
#[derive(Clone, Copy, Debug)]
pub struct TreeNode {
    pub pc: u32,
    pub cond: TermHandle,
    /// Children indexed by direction: `[not taken, taken]`.
    pub children: [SlotState; 2],
}

/// Where a slot lives, for writing results back.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum SlotRef {
    Root,
    Child { node: u32, taken: bool },
}

#[derive(Error, Clone, Copy, PartialEq, Eq, Debug)]
pub enum TreeError {
    #[error("trace position {position}: branch at {found_pc:#010x}, tree expects {expected_pc:#010x}")]
    PcMismatch { position: usize, expected_pc: u32, found_pc: u32 },
    #[error("trace position {position}: branch condition differs from the tree's")]
    CondMismatch { position: usize },
    #[error("trace position {position}: run reached a subtree proven unsatisfiable")]
    ReachedUnsat { position: usize },
    #[error("trace position {position}: run continued past a terminal leaf")]
    PastLeaf { position: usize },
    #[error("run terminated at an interior node (position {position})")]
    StoppedAtNode { position: usize },
    #[error("trace position {position}: leaf terminal changed between runs")]
    TerminalChanged { position: usize },
}

/// The execution tree accumulated over all runs.
#[derive(Default, Debug)]
pub struct ExecTree {
    root: SlotState,
    nodes: Vec<TreeNode>,
}

impl ExecTree {
    pub fn new() -> Self {
        ExecTree { root: SlotState::Unexplored, nodes: Vec::new() }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> SlotState {
        self.root
    }

    pub fn node(&self, index: u32) -> &TreeNode {
        &self.nodes[index as usize]
    }

    fn slot(&self, r: SlotRef) -> SlotState {
        match r {
            SlotRef::Root => self.root,
            SlotRef::Child { node, taken } => {
                self.nodes[node as usize].children[usize::from(taken)]
            }
        }
    }

    fn set_slot(&mut self, r: SlotRef, s: SlotState) {
        match r {
            SlotRef::Root => self.root = s,
            SlotRef::Child { node, taken } => {
                self.nodes[node as usize].children[usize::from(taken)] = s;
            }
        }
    }

    /// Record a solver verdict for a target from [`ExecTree::next_target`],
    /// releasing its pending reservation. Sat targets need no explicit
    /// resolution: inserting the driven run's trace fills the slot.
    pub fn resolve(&mut self, target: &PathTarget, s: SlotState) {
        self.set_slot(target.slot, s);
    }

    /// Fold one run's trace and terminal outcome into the tree.
    ///
    /// Open slots (unexplored, pending, unknown) materialize into
    /// nodes and leaves as the trace walks through them; a truncated
    /// leaf may deepen into a node when a longer run passes through.
    pub fn insert_trace(&mut self, trace: &Trace, terminal: Terminal) -> Result<(), TreeError> {
        let mut cursor = SlotRef::Root;
        for (position, ev) in trace.iter().enumerate() {
            let next = match self.slot(cursor) {
                SlotState::Unexplored
                | SlotState::Pending
                | SlotState::Unknown
                | SlotState::Leaf(Terminal::Truncated) => {
                    let idx = self.nodes.len() as u32;
                    self.nodes.push(TreeNode {
                        pc: ev.pc,
                        cond: ev.cond,
                        children: [SlotState::Unexplored; 2],
                    });
                    self.set_slot(cursor, SlotState::Node(idx));
                    idx
                }
                SlotState::Node(idx) => {
                    let node = &self.nodes[idx as usize];
                    if node.pc != ev.pc {
                        return Err(TreeError::PcMismatch {
                            position,
                            expected_pc: node.pc,
                            found_pc: ev.pc,
                        });
                    }
                    if node.cond != ev.cond {
                        return Err(TreeError::CondMismatch { position });
                    }
                    idx
                }
                SlotState::Unsat => return Err(TreeError::ReachedUnsat { position }),
                SlotState::Leaf(_) => return Err(TreeError::PastLeaf { position }),
            };
            cursor = SlotRef::Child { node: next, taken: ev.taken };
        }
        match self.slot(cursor) {
            SlotState::Unexplored | SlotState::Pending | SlotState::Unknown => {
                self.set_slot(cursor, SlotState::Leaf(terminal));
                Ok(())
            }
            SlotState::Leaf(old) if old == terminal => Ok(()),
            SlotState::Leaf(Terminal::Truncated) => {
                // A longer budget or richer model finished what an
                // earlier run could not.
                self.set_slot(cursor, SlotState::Leaf(terminal));
                Ok(())
            }
            SlotState::Leaf(_) => Err(TreeError::TerminalChanged { position: trace.len() }),
            SlotState::Node(_) => {
                // Ending inside the tree is only consistent when the
                // run simply ran out of budget.
                if terminal == Terminal::Truncated {
                    Ok(())
                } else {
                    Err(TreeError::StoppedAtNode { position: trace.len() })
                }
            }
            SlotState::Unsat => Err(TreeError::ReachedUnsat { position: trace.len() }),
        }
    }

    /// Pick the next slot to aim for: the first `Unexplored` child in
    /// a depth-first walk visiting taken-children before not-taken.
    /// The chosen slot is marked `Pending`; the returned prefix gives
    /// the direction the new run must take at every node on the way,
    /// its final element being the flip into the unexplored side.
    pub fn next_target(&mut self) -> Option<PathTarget> {
        let root_idx = match self.root {
            SlotState::Node(i) => i,
            _ => return None,
        };
        // frames[i].node is entered via the edge path[i - 1]
        let mut frames: Vec<(u32, u8)> = vec![(root_idx, 0)];
        let mut path: Vec<(u32, bool)> = Vec::new();
        while let Some(frame) = frames.last_mut() {
            let (node, stage) = *frame;
            if stage >= 2 {
                frames.pop();
                if !frames.is_empty() {
                    path.pop();
                }
                continue;
            }
            frame.1 += 1;
            let taken = stage == 0;
            match self.nodes[node as usize].children[usize::from(taken)] {
                SlotState::Unexplored => {
                    let mut prefix: Vec<(TermHandle, bool)> = path
                        .iter()
                        .map(|&(n, d)| (self.nodes[n as usize].cond, d))
                        .collect();
                    prefix.push((self.nodes[node as usize].cond, taken));
                    let flipped_index = prefix.len() - 1;
                    let slot = SlotRef::Child { node, taken };
                    self.set_slot(slot, SlotState::Pending);
                    return Some(PathTarget { prefix, flipped_index, slot });
                }
                SlotState::Node(child) => {
                    path.push((node, taken));
                    frames.push((child, 0));
                }
                _ => {}
            }
        }
        None
    }

    /// Count leaves by kind: (completed, truncated).
    pub fn leaf_counts(&self) -> (u64, u64) {
        let mut completed = 0;
        let mut truncated = 0;
        let mut count = |s: SlotState| match s {
            SlotState::Leaf(Terminal::Truncated) => truncated += 1,
            SlotState::Leaf(_) => completed += 1,
            _ => {}
        };
        count(self.root);
        for n in &self.nodes {
            count(n.children[0]);
            count(n.children[1]);
        }
        (completed, truncated)
    }

    /// Count slots resolved as Unsat / Unknown.
    pub fn pruned_counts(&self) -> (u64, u64) {
        let mut unsat = 0;
        let mut unknown = 0;
        for n in &self.nodes {
            for c in n.children {
                match c {
                    SlotState::Unsat => unsat += 1,
                    SlotState::Unknown => unknown += 1,
                    _ => {}
                }
            }
        }
        (unsat, unknown)
    }

    /// Multi-line ASCII rendering (taken edge first, matching the
    /// exploration order).
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_slot(self.root, "", &mut out);
        out
    }

    fn render_slot(&self, slot: SlotState, indent: &str, out: &mut String) {
        match slot {
            SlotState::Node(i) => {
                let n = &self.nodes[i as usize];
                out.push_str(&format!("branch @ {:#010x}\n", n.pc));
                for (label, child) in [("1", n.children[1]), ("0", n.children[0])] {
                    out.push_str(&format!("{indent}+-{label}-> "));
                    let deeper = format!("{indent}|      ");
                    self.render_slot(child, &deeper, out);
                }
            }
            SlotState::Leaf(Terminal::Exited(c)) => out.push_str(&format!("exit({c})\n")),
            SlotState::Leaf(Terminal::Fault(f)) => out.push_str(&format!("fault({f:?})\n")),
            SlotState::Leaf(Terminal::Truncated) => out.push_str("truncated\n"),
            SlotState::Unexplored => out.push_str("unexplored\n"),
            SlotState::Pending => out.push_str("pending\n"),
            SlotState::Unsat => out.push_str("unsat\n"),
            SlotState::Unknown => out.push_str("unknown\n"),
        }
    }
}

/// A slot to drive the next run into.
#[derive(Clone, Debug)]
pub struct PathTarget {
    /// `(condition, direction)` per tree level; directions are the
    /// ones the driven run must follow.
    pub prefix: Vec<(TermHandle, bool)>,
    /// Index of the element whose direction was negated relative to
    /// the runs observed so far; always the final element.
    pub flipped_index: usize,
    slot: SlotRef,
}

/// Build the assertion list forcing a run along `target`: each prefix
/// condition asserted nonzero where the direction is taken, and equal
/// to zero where it is not.
pub fn path_condition(session: &mut Session, target: &PathTarget) -> Vec<TermHandle> {
    target
        .prefix
        .iter()
        .map(|&(cond, taken)| {
            if taken {
                cond
            } else {
                let zero = BvExpr::leaf(cond).eq(BvExpr::int(cond.width(), 0));
                session.lower(&zero).expect("negation of interned term is well-formed")
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug)]
pub struct ExploreLimits {
    /// Stop once this many paths (completed + truncated) exist.
    pub max_paths: u64,
    /// Stop after this many program runs.
    pub max_runs: u64,
    pub run: RunLimits,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        ExploreLimits { max_paths: 1 << 20, max_runs: 1 << 20, run: RunLimits::default() }
    }
}

#[derive(Clone, Debug)]
pub struct ExploreConfig {
    pub stack_top: u32,
    pub strict_memory: bool,
    pub solver: SolverConfig,
    pub limits: ExploreLimits,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            stack_top: 0x8000_0000,
            strict_memory: false,
            solver: SolverConfig::default(),
            limits: ExploreLimits::default(),
        }
    }
}

#[derive(Error, Debug)]
pub enum ExploreError {
    #[error("loading image: {0}")]
    Elf(#[from] ElfError),
    #[error("inconsistent trace: {0}")]
    Tree(#[from] TreeError),
    #[error(
        "replay divergence on run {run}: position {position} expected direction {expected}, got {found}"
    )]
    ReplayDivergence { run: u64, position: usize, expected: bool, found: bool },
    #[error("replay divergence on run {run}: trace ended at position {position} with {exit:?}, expected {expected} decisions")]
    ReplayTooShort { run: u64, position: usize, expected: usize, exit: ExitStatus },
}

/// One line of the exploration report.
#[derive(Clone, Serialize, Debug)]
pub struct RunRecord {
    pub run_id: u64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exit_code: Option<u32>,
    pub steps: u64,
    pub trace_len: usize,
    pub decisions: String,
    /// Input bytes as `variable name -> hex value`.
    pub inputs: BTreeMap<String, String>,
}

impl RunRecord {
    fn new(run_id: u64, r: &RunResult) -> Self {
        let (status, exit_code) = match r.exit {
            ExitStatus::Exited(c) => ("exited".to_string(), Some(c)),
            ExitStatus::Fault(f) => (format!("fault: {f:?}"), None),
            ExitStatus::StepLimit => ("step_limit".to_string(), None),
        };
        RunRecord {
            run_id,
            status,
            exit_code,
            steps: r.steps,
            trace_len: r.trace.len(),
            decisions: r.decisions(),
            inputs: r
                .inputs
                .iter()
                .map(|(k, v)| (k.to_string(), format!("{v:#04x}")))
                .collect(),
        }
    }
}

/// Aggregate statistics for one exploration.
#[derive(Clone, Serialize, Debug)]
pub struct Summary {
    pub runs: u64,
    pub paths_completed: u64,
    pub paths_truncated: u64,
    pub unsat_targets: u64,
    pub unknown_targets: u64,
    pub tree_nodes: usize,
    pub solver_queries: u64,
    /// Model-driven re-runs whose trace was verified against the
    /// target prefix. Any mismatch aborts the exploration instead.
    pub replay_checks: u64,
    pub exhausted: bool,
    pub concretized_addresses: u64,
    pub concretized_pc_writes: u64,
    pub solve_time_s: f64,
    pub exec_time_s: f64,
    pub total_time_s: f64,
}

#[derive(Clone, Serialize, Debug)]
pub struct ExplorationReport {
    pub runs: Vec<RunRecord>,
    pub summary: Summary,
}

impl ExplorationReport {
    /// One JSON object per line: every run, then `{"summary": ...}`.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.runs {
            out.push_str(&serde_json::to_string(r).expect("report serializes"));
            out.push('\n');
        }
        #[derive(Serialize)]
        struct Tail<'a> {
            summary: &'a Summary,
        }
        out.push_str(&serde_json::to_string(&Tail { summary: &self.summary }).expect("report serializes"));
        out.push('\n');
        out
    }
}

/// Result of [`explore`]: the report plus the raw tree and solver
/// session for further inspection.
pub struct Exploration {
    pub report: ExplorationReport,
    pub tree: ExecTree,
    pub session: Session,
}

/// Explore an ELF image: seed run on default inputs, then repeatedly
/// flip the deepest-first unexplored branch until the tree is
/// exhausted or a budget runs out.
pub fn explore(image: &[u8], config: &ExploreConfig) -> Result<Exploration, ExploreError> {
    let total_start = Instant::now();
    let mut session = Session::new(config.solver.clone());
    let mut base = MachineState::new(config.strict_memory);
    base.load_elf(image, config.stack_top)?;

    let mut tree = ExecTree::new();
    let mut records: Vec<RunRecord> = Vec::new();
    let mut exec_time = Duration::ZERO;
    let mut concretized_addresses = 0;
    let mut concretized_pc_writes = 0;
    let mut replay_checks = 0;
    let mut exhausted = false;

    let run_once = |session: &mut Session,
                        overrides: &Model,
                        exec_time: &mut Duration,
                        records: &mut Vec<RunRecord>|
     -> RunResult {
        let started = Instant::now();
        let result = run(base.clone(), session, overrides, config.limits.run);
        *exec_time += started.elapsed();
        records.push(RunRecord::new(records.len() as u64, &result));
        result
    };

    let seed = run_once(&mut session, &Model::new(), &mut exec_time, &mut records);
    concretized_addresses += seed.warnings.concretized_addresses;
    concretized_pc_writes += seed.warnings.concretized_pc_writes;
    tree.insert_trace(&seed.trace, Terminal::from_exit(seed.exit))?;

    loop {
        let (completed, truncated) = tree.leaf_counts();
        if completed + truncated >= config.limits.max_paths {
            break;
        }
        if records.len() as u64 >= config.limits.max_runs {
            break;
        }
        let Some(target) = tree.next_target() else {
            exhausted = true;
            break;
        };
        let assertions = path_condition(&mut session, &target);
        match session.check(&assertions) {
            SatResult::Unsat => {
                tree.resolve(&target, SlotState::Unsat);
            }
            SatResult::Unknown(reason) => {
                if let UnknownReason::Backend(msg) = &reason {
                    log::warn!("solver backend trouble: {msg}");
                }
                tree.resolve(&target, SlotState::Unknown);
            }
            SatResult::Sat(model) => {
                let run_id = records.len() as u64;
                let result = run_once(&mut session, &model, &mut exec_time, &mut records);
                concretized_addresses += result.warnings.concretized_addresses;
                concretized_pc_writes += result.warnings.concretized_pc_writes;
                check_replay(run_id, &target, &result)?;
                replay_checks += 1;
                if result.trace.len() <= target.flipped_index {
                    // Budget ran out before the flip point; the slot
                    // stays open but undecidable at this budget.
                    tree.resolve(&target, SlotState::Unknown);
                }
                tree.insert_trace(&result.trace, Terminal::from_exit(result.exit))?;
            }
        }
    }

    let (paths_completed, paths_truncated) = tree.leaf_counts();
    let (unsat_targets, unknown_targets) = tree.pruned_counts();
    let stats = session.stats();
    let summary = Summary {
        runs: records.len() as u64,
        paths_completed,
        paths_truncated,
        unsat_targets,
        unknown_targets,
        tree_nodes: tree.node_count(),
        solver_queries: stats.queries,
        replay_checks,
        exhausted,
        concretized_addresses,
        concretized_pc_writes,
        solve_time_s: stats.solve_time.as_secs_f64(),
        exec_time_s: exec_time.as_secs_f64(),
        total_time_s: total_start.elapsed().as_secs_f64(),
    };
    Ok(Exploration {
        report: ExplorationReport { runs: records, summary },
        tree,
        session,
    })
}

/// A model-driven run must follow the target prefix through the
/// flipped position; anything else is an engine or solver bug, except
/// running out of budget on the way.
fn check_replay(run_id: u64, target: &PathTarget, result: &RunResult) -> Result<(), ExploreError> {
    let want = target.flipped_index + 1;
    for (i, &(_, expected)) in target.prefix.iter().enumerate().take(result.trace.len().min(want)) {
        if result.trace[i].taken != expected {
            return Err(ExploreError::ReplayDivergence {
                run: run_id,
                position: i,
                expected,
                found: result.trace[i].taken,
            });
        }
    }
    if result.trace.len() < want && result.exit != ExitStatus::StepLimit {
        return Err(ExploreError::ReplayTooShort {
            run: run_id,
            position: result.trace.len(),
            expected: want,
            exit: result.exit,
        });
    }
    Ok(())
}
