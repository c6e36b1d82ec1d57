//! External SMT solver backend.
//!
//! Renders the query to a temporary `.smt2` file, runs the configured
//! command with the file path appended, and parses the `sat`/`unsat`/
//! `unknown` verdict plus the `get-value` model. Any SMT-LIB 2
//! compliant QF_BV solver works (`z3`, `cvc5 --produce-models`, ...).

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use super::smtlib::render_query;
use super::term::{TermHandle, TermTable};
use super::{Model, SatResult, UnknownReason, VarId};

static QUERY_COUNTER: AtomicU64 = AtomicU64::new(0);

fn scratch_path() -> PathBuf {
    let n = QUERY_COUNTER.fetch_add(1, Ordering::Relaxed);
    std::env::temp_dir().join(format!("rvsym-{}-{n}.smt2", std::process::id()))
}

/// Run one query through the external solver command.
pub fn check(
    command: &[String],
    table: &TermTable,
    assertions: &[TermHandle],
    timeout: Duration,
) -> SatResult {
    let (prog, args) = match command.split_first() {
        Some(x) => x,
        None => return SatResult::Unknown(UnknownReason::Backend("empty solver command".into())),
    };
    let script = render_query(table, assertions);
    let path = scratch_path();
    if let Err(e) = fs::write(&path, &script) {
        return SatResult::Unknown(UnknownReason::Backend(format!("write query: {e}")));
    }
    let spawned = Command::new(prog)
        .args(args)
        .arg(&path)
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn();
    let mut child = match spawned {
        Ok(c) => c,
        Err(e) => {
            let _ = fs::remove_file(&path);
            return SatResult::Unknown(UnknownReason::Backend(format!("spawn {prog}: {e}")));
        }
    };
    let deadline = Instant::now() + timeout;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) => {
                if Instant::now() >= deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    let _ = fs::remove_file(&path);
                    return SatResult::Unknown(UnknownReason::Timeout);
                }
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(e) => {
                let _ = fs::remove_file(&path);
                return SatResult::Unknown(UnknownReason::Backend(format!("wait: {e}")));
            }
        }
    };
    let output = child.wait_with_output();
    let _ = fs::remove_file(&path);
    let output = match output {
        Ok(o) => o,
        Err(e) => return SatResult::Unknown(UnknownReason::Backend(format!("read output: {e}"))),
    };
    let stdout = String::from_utf8_lossy(&output.stdout);
    parse_response(&stdout, &status.to_string())
}

fn parse_response(stdout: &str, status: &str) -> SatResult {
    let mut lines = stdout.lines().map(str::trim).filter(|l| !l.is_empty());
    match lines.next() {
        Some("sat") => {
            let rest: String = lines.collect::<Vec<_>>().join(" ");
            match parse_model(&rest) {
                Ok(model) => SatResult::Sat(model),
                Err(e) => SatResult::Unknown(UnknownReason::Backend(e)),
            }
        }
        Some("unsat") => SatResult::Unsat,
        Some("unknown") => {
            SatResult::Unknown(UnknownReason::Backend("solver reported unknown".into()))
        }
        other => SatResult::Unknown(UnknownReason::Backend(format!(
            "unrecognized solver output {other:?} ({status})"
        ))),
    }
}

/// Parse a `get-value` response such as
/// `((in_0_0 #x7f) (in_0_1 (_ bv3 8)))`.
fn parse_model(text: &str) -> Result<Model, String> {
    let spaced = text.replace(['(', ')'], " ");
    let tokens: Vec<&str> = spaced.split_whitespace().collect();
    let mut model = Model::new();
    let mut i = 0;
    while i < tokens.len() {
        if let Some(var) = VarId::from_name(tokens[i]) {
            let value = tokens
                .get(i + 1)
                .copied()
                .and_then(|t| {
                    if t == "_" {
                        tokens.get(i + 2).copied()
                    } else {
                        Some(t)
                    }
                })
                .ok_or_else(|| format!("missing value for {}", tokens[i]))?;
            model.insert(var, parse_value(value)?);
        }
        i += 1;
    }
    Ok(model)
}

fn parse_value(token: &str) -> Result<u8, String> {
    let parsed = if let Some(hex) = token.strip_prefix("#x") {
        u32::from_str_radix(hex, 16).ok()
    } else if let Some(bin) = token.strip_prefix("#b") {
        u32::from_str_radix(bin, 2).ok()
    } else if let Some(dec) = token.strip_prefix("bv") {
        dec.parse().ok()
    } else {
        None
    };
    parsed
        .filter(|v| *v <= 0xFF)
        .map(|v| v as u8)
        .ok_or_else(|| format!("bad model value {token:?}"))
}
