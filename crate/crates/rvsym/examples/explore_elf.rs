//! Explore every path through a RISC-V ELF binary.
//!
//! This is the packaged entry point: load the image, seed a run on
//! default inputs, then keep flipping the deepest unexplored branch
//! until no reachable slot remains. The result carries one record per
//! run, aggregate statistics, and the final execution tree.
//!
//! Run with: `cargo run --example explore_elf [path/to/guest.elf]`
//!
//! Without an argument it picks a small prebuilt guest from
//! `benchmarks/bin/` that classifies one symbolic byte into four
//! ranges.

use std::path::PathBuf;

use rvsym::explorer::{explore, ExploreConfig};

fn main() {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks/bin/hc2.elf")
    });
    let image = std::fs::read(&path).unwrap_or_else(|e| {
        eprintln!("reading {}: {e}", path.display());
        std::process::exit(1);
    });

    let exploration = explore(&image, &ExploreConfig::default()).unwrap_or_else(|e| {
        eprintln!("exploring {}: {e}", path.display());
        std::process::exit(1);
    });

    println!("{}:", path.display());
    for r in &exploration.report.runs {
        let inputs: Vec<String> =
            r.inputs.iter().map(|(var, value)| format!("{var}={value}")).collect();
        println!(
            "  run {}: {} decisions={:?} steps={} inputs=[{}]",
            r.run_id,
            match r.exit_code {
                Some(c) => format!("exit({c})"),
                None => r.status.clone(),
            },
            r.decisions,
            r.steps,
            inputs.join(", "),
        );
    }

    let s = &exploration.report.summary;
    println!("\n{}", exploration.tree.render());
    println!("paths:   {} completed, {} truncated", s.paths_completed, s.paths_truncated);
    println!("pruned:  {} unsat, {} unknown", s.unsat_targets, s.unknown_targets);
    println!("solver:  {} queries, {:.3}s", s.solver_queries, s.solve_time_s);
    println!("replay:  {} verified re-runs", s.replay_checks);
    println!("exhausted: {}", s.exhausted);
}
