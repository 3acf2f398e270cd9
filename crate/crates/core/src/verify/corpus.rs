//! Frozen regression cases: `<dir>/<name>/{config.json, expected.ndjson}`.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::exec::ExecMode;

use super::config::JobConfig;
use super::suites::run;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CaseOutcome {
    Match,
    /// First differing line (1-based) with expected and actual text.
    Diff {
        line: usize,
        expected: String,
        actual: String,
    },
    Missing(String),
    Error(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseResult {
    pub name: String,
    pub outcome: CaseOutcome,
}

impl CaseResult {
    pub fn pass(&self) -> bool {
        self.outcome == CaseOutcome::Match
    }
}

pub fn case_dirs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.join("config.json").is_file())
        .collect();
    out.sort();
    Ok(out)
}

fn first_diff(expected: &str, actual: &str) -> Option<(usize, String, String)> {
    let mut e = expected.lines();
    let mut a = actual.lines();
    let mut i = 0;
    loop {
        i += 1;
        match (e.next(), a.next()) {
            (None, None) => return None,
            (x, y) if x == y => continue,
            (x, y) => return Some((i, x.unwrap_or("<end>").into(), y.unwrap_or("<end>").into())),
        }
    }
}

/// Regenerate the report of one case.
pub fn render_case(case: &Path) -> Result<String> {
    let cfg = JobConfig::from_path(&case.join("config.json"))?;
    Ok(run(&cfg, ExecMode::Sequential)?.to_ndjson())
}

pub fn run_case(case: &Path) -> CaseResult {
    let name = case.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let expected_path = case.join("expected.ndjson");
    let outcome = match std::fs::read_to_string(&expected_path) {
        Err(_) => CaseOutcome::Missing(expected_path.display().to_string()),
        Ok(expected) => match render_case(case) {
            Err(e) => CaseOutcome::Error(e.to_string()),
            Ok(actual) => match first_diff(&expected, &actual) {
                None => CaseOutcome::Match,
                Some((line, expected, actual)) => CaseOutcome::Diff { line, expected, actual },
            },
        },
    };
    CaseResult { name, outcome }
}

/// Every case, sequentially and in name order.
pub fn corpus_run(dir: &Path) -> Result<Vec<CaseResult>> {
    let cases = case_dirs(dir)?;
    if cases.is_empty() {
        return Err(Error::Config(format!("no cases under {}", dir.display())));
    }
    Ok(cases.iter().map(|c| run_case(c)).collect())
}

/// Write `expected.ndjson` for one case from the current code.
pub fn freeze_case(case: &Path) -> Result<()> {
    let text = render_case(case)?;
    std::fs::write(case.join("expected.ndjson"), text)?;
    Ok(())
}
