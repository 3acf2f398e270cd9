//! Report records, NDJSON and CSV output.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relative_character::Cell;

/// Floats are written with 12 significant digits so reports diff cleanly.
pub fn canon(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let v: f64 = format!("{x:.11e}").parse().expect("float");
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

/// Values below `1e-12` are rounding noise of the brute force; they print as `0`.
pub fn snap(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        0.0
    } else {
        canon(x)
    }
}

pub fn pair(z: Complex64) -> [f64; 2] {
    [snap(z.re), snap(z.im)]
}

/// One grid point of the main comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub pair: String,
    pub c_pair: u32,
    pub level: u32,
    pub tau: [String; 3],
    pub depths: [u32; 3],
    pub cell: Cell,
    pub lhs_bruteforce: Option<[f64; 2]>,
    pub lhs_table: Option<[f64; 2]>,
    pub rhs_closed: Option<f64>,
    pub rhs_lattice: Option<f64>,
    /// Exact closed-form value.
    pub rhs_exact: Option<String>,
    /// Closed form and lattice sum agree as rationals.
    pub lattice_exact: bool,
    /// Brute force over the hyperbola integral, when the latter is nonzero.
    pub ratio: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub pass: bool,
}

/// One scalar check of the factor or operator suites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: String,
    pub check: String,
    pub params: String,
    /// `None` when the check could not be evaluated.
    pub residual: Option<f64>,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Record {
    Main(VerifyRecord),
    Check(CheckRecord),
}

impl Record {
    pub fn pass(&self) -> bool {
        match self {
            Record::Main(r) => r.pass,
            Record::Check(r) => r.pass,
        }
    }
}

/// A group of records in the CSV summary: a pair for the main suite, a
/// check name otherwise. `worst` is the largest residual in the group (for
/// pairs: the spread of the ratio).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub suite: String,
    pub name: String,
    pub count: usize,
    pub passed: usize,
    pub worst: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub records: Vec<Record>,
    pub summary: Vec<SummaryRow>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(Record::pass) && self.summary.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.pass()).count()
    }

    pub fn to_ndjson(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&serde_json::to_string(r).expect("record serializes"));
            s.push('\n');
        }
        s
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.summary {
            w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("utf8"))
    }

    /// Writes `<prefix>.ndjson` and `<prefix>.csv`.
    pub fn write(&self, prefix: &Path) -> Result<()> {
        let mut ndjson = prefix.as_os_str().to_owned();
        ndjson.push(".ndjson");
        let mut csvp = prefix.as_os_str().to_owned();
        csvp.push(".csv");
        std::fs::File::create(&ndjson)?.write_all(self.to_ndjson().as_bytes())?;
        std::fs::File::create(&csvp)?.write_all(self.to_csv()?.as_bytes())?;
        Ok(())
    }

    pub fn parse_ndjson(text: &str) -> Result<Vec<Record>> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| Error::Io(format!("bad record: {e}"))))
            .collect()
    }
}

/// Per-check summary rows, in first-seen order.
pub fn summarize_checks(records: &[CheckRecord]) -> Vec<SummaryRow> {
    let mut order = Vec::new();
    let mut rows: BTreeMap<(String, String), SummaryRow> = BTreeMap::new();
    for r in records {
        let key = (r.suite.clone(), r.check.clone());
        let row = rows.entry(key.clone()).or_insert_with(|| {
            order.push(key.clone());
            SummaryRow { suite: r.suite.clone(), name: r.check.clone(), count: 0, passed: 0, worst: 0.0, pass: true }
        });
        row.count += 1;
        row.passed += r.pass as usize;
        row.worst = canon(row.worst.max(r.residual.unwrap_or(f64::INFINITY)));
        row.pass &= r.pass;
    }
    order.into_iter().map(|k| rows.remove(&k).expect("row")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canon_is_stable() {
        assert_eq!(canon(0.1 + 0.2), 0.3);
        assert_eq!(canon(-0.0).to_bits(), 0f64.to_bits());
        assert_eq!(canon(canon(1.0 / 3.0)), canon(1.0 / 3.0));
        assert_eq!(canon(2.5e-17), 2.5e-17);
        assert_eq!(pair(Complex64::new(1.0, -1.7e-15)), [1.0, 0.0]);
    }

    #[test]
    fn ndjson_round_trip() {
        let rec = Record::Check(CheckRecord {
            suite: "factors".into(),
            check: "epsilon_unitarity".into(),
            params: "p=3".into(),
            residual: Some(1e-16),
            tol: 1e-10,
            pass: true,
        });
        let rep = Report { records: vec![rec.clone()], summary: summarize_checks(&[]) };
        let back = Report::parse_ndjson(&rep.to_ndjson()).unwrap();
        assert_eq!(back, vec![rec]);
    }
}
