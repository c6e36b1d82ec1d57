//! Path-count benchmark harness.
//!
//! A suite is a JSON array of cases, each naming an ELF image and
//! optionally the exact number of paths its exploration must find.
//! Every case is explored `repetitions` times; the table reports the
//! path count, its match against the expectation, and the mean and
//! population standard deviation of the wall time.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Config;
use crate::explorer::{explore, ExploreError};

#[derive(Clone, Deserialize, Debug)]
pub struct BenchCase {
    pub name: String,
    /// ELF path, relative to the suite file's directory.
    pub elf: PathBuf,
    #[serde(default)]
    pub expected_paths: Option<u64>,
}

#[derive(Error, Debug)]
pub enum BenchError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing suite {path}: {source}")]
    Suite { path: PathBuf, source: serde_json::Error },
    #[error("case {name}: {source}")]
    Explore { name: String, source: ExploreError },
}

/// One row of the result table.
#[derive(Clone, Serialize, Debug)]
pub struct BenchRow {
    pub name: String,
    pub paths: u64,
    pub expected_paths: Option<u64>,
    /// Present iff an expectation exists.
    pub matched: Option<bool>,
    pub runs: u64,
    pub solver_queries: u64,
    pub repetitions: u32,
    pub mean_s: f64,
    pub stddev_s: f64,
}

fn read(path: &Path) -> Result<Vec<u8>, BenchError> {
    fs::read(path).map_err(|source| BenchError::Io { path: path.to_path_buf(), source })
}

/// Explore one image `repetitions` times and summarize.
pub fn run_case(
    name: &str,
    image: &[u8],
    expected_paths: Option<u64>,
    config: &Config,
    repetitions: u32,
) -> Result<BenchRow, BenchError> {
    assert!(repetitions > 0);
    let mut times = Vec::with_capacity(repetitions as usize);
    let mut last = None;
    for _ in 0..repetitions {
        let outcome = explore(image, &config.explore_config())
            .map_err(|source| BenchError::Explore { name: name.to_string(), source })?;
        times.push(outcome.report.summary.total_time_s);
        last = Some(outcome.report.summary);
    }
    let summary = last.expect("at least one repetition");
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    let variance = times.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / times.len() as f64;
    let paths = summary.paths_completed + summary.paths_truncated;
    Ok(BenchRow {
        name: name.to_string(),
        paths,
        expected_paths,
        matched: expected_paths.map(|e| e == paths),
        runs: summary.runs,
        solver_queries: summary.solver_queries,
        repetitions,
        mean_s: mean,
        stddev_s: variance.sqrt(),
    })
}

/// Load a suite file and run every case.
pub fn run_suite(
    suite_path: &Path,
    config: &Config,
    repetitions: u32,
) -> Result<Vec<BenchRow>, BenchError> {
    let text = read(suite_path)?;
    let cases: Vec<BenchCase> = serde_json::from_slice(&text)
        .map_err(|source| BenchError::Suite { path: suite_path.to_path_buf(), source })?;
    let base = suite_path.parent().unwrap_or_else(|| Path::new("."));
    let mut rows = Vec::with_capacity(cases.len());
    for case in cases {
        let image = read(&base.join(&case.elf))?;
        rows.push(run_case(&case.name, &image, case.expected_paths, config, repetitions)?);
    }
    Ok(rows)
}

/// Render rows as a tab-separated table with a header line.
pub fn render_tsv(rows: &[BenchRow]) -> String {
    let mut out = String::from("name\tpaths\texpected\tmatch\truns\tqueries\tmean_s\tstddev_s\n");
    for r in rows {
        let expected = r
            .expected_paths
            .map_or_else(|| "-".to_string(), |e| e.to_string());
        let matched = match r.matched {
            Some(true) => "yes",
            Some(false) => "NO",
            None => "-",
        };
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{:.4}\t{:.4}",
            r.name, r.paths, expected, matched, r.runs, r.solver_queries, r.mean_s, r.stddev_s
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tsv_shape() {
        let rows = vec![BenchRow {
            name: "case".into(),
            paths: 6,
            expected_paths: Some(6),
            matched: Some(true),
            runs: 11,
            solver_queries: 12,
            repetitions: 5,
            mean_s: 0.5,
            stddev_s: 0.01,
        }];
        let text = render_tsv(&rows);
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "name\tpaths\texpected\tmatch\truns\tqueries\tmean_s\tstddev_s"
        );
        assert_eq!(lines.next().unwrap(), "case\t6\t6\tyes\t11\t12\t0.5000\t0.0100");
    }

    #[test]
    fn suite_parse_errors_are_reported() {
        let dir = std::env::temp_dir().join(format!("rvsym-bench-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("suite.json");
        std::fs::write(&path, b"[{\"name\": 3}]").unwrap();
        let err = run_suite(&path, &Config::default(), 1).unwrap_err();
        assert!(matches!(err, BenchError::Suite { .. }));
        let _ = std::fs::remove_dir_all(dir);
    }
}
