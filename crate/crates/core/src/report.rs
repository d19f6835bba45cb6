//! Run reports: result tables written as CSV and verdicts written as JSON.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One checked inequality with the numbers it compared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
    pub passed: bool,
}

impl Verdict {
    /// `lhs <= rhs + tol`.
    pub fn le(check: impl Into<String>, lhs_name: &str, lhs: f64, rhs_name: &str, rhs: f64, tol: f64) -> Self {
        Verdict {
            check: check.into(),
            inequality: format!("{lhs_name} <= {rhs_name} + tol"),
            lhs,
            rhs,
            tol,
            passed: lhs <= rhs + tol,
        }
    }

    /// `lhs >= rhs - tol`.
    pub fn ge(check: impl Into<String>, lhs_name: &str, lhs: f64, rhs_name: &str, rhs: f64, tol: f64) -> Self {
        Verdict {
            check: check.into(),
            inequality: format!("{lhs_name} >= {rhs_name} - tol"),
            lhs,
            rhs,
            tol,
            passed: lhs >= rhs - tol,
        }
    }

    /// `|lhs - rhs| <= tol`.
    pub fn close(check: impl Into<String>, lhs_name: &str, lhs: f64, rhs_name: &str, rhs: f64, tol: f64) -> Self {
        Verdict {
            check: check.into(),
            inequality: format!("|{lhs_name} - {rhs_name}| <= tol"),
            lhs,
            rhs,
            tol,
            passed: (lhs - rhs).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub step: String,
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// A CSV cell. Floats use the shortest representation that parses back to
/// the same bits.
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}
impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::S(x.to_string())
    }
}
impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.into())
    }
}
impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::F(x) => format!("{x:?}"),
            Cell::I(i) => i.to_string(),
            Cell::S(s) => s,
        }
    }
}

#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => {
        vec![$($crate::report::Cell::from($x)),*]
    };
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width differs from header of {}", self.name);
        self.rows.push(row.into_iter().map(Cell::render).collect());
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let fail = |e: csv::Error| Error::io(format!("{}.csv", self.name), std::io::Error::other(e));
        w.write_record(&self.header).map_err(fail)?;
        for r in &self.rows {
            w.write_record(r).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::io(format!("{}.csv", self.name), e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn read_csv(path: &Path) -> Result<Table> {
        let fail = |e: csv::Error| Error::io(path, std::io::Error::other(e));
        let mut r = csv::ReaderBuilder::new().from_path(path).map_err(fail)?;
        let header = r.headers().map_err(fail)?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
            .collect::<std::result::Result<_, _>>()
            .map_err(fail)?;
        Ok(Table {
            name: path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            header,
            rows,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    /// Radius conventions of the constructions involved.
    pub conventions: Vec<String>,
    pub tables: Vec<Table>,
    pub verdicts: Vec<Verdict>,
    pub runtimes: Vec<Timing>,
}

impl RunReport {
    pub fn new(scenario: &str, seed: u64) -> Self {
        RunReport {
            scenario: scenario.into(),
            seed,
            conventions: Vec::new(),
            tables: Vec::new(),
            verdicts: Vec::new(),
            runtimes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

#[derive(Serialize)]
struct VerdictFile<'a> {
    scenario: &'a str,
    seed: u64,
    passed: bool,
    conventions: &'a [String],
    verdicts: &'a [Verdict],
    runtimes: &'a [Timing],
}

/// Write `<dir>/<table>.csv` for every table and `<dir>/verdicts.json`.
pub fn emit_report(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for t in &report.tables {
        let path = dir.join(format!("{}.csv", t.name));
        fs::write(&path, t.to_csv()?).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    let path = dir.join("verdicts.json");
    let file = VerdictFile {
        scenario: &report.scenario,
        seed: report.seed,
        passed: report.passed(),
        conventions: &report.conventions,
        verdicts: &report.verdicts,
        runtimes: &report.runtimes,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("verdicts serialize");
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new("sandwich", &["set", "mu", "lower_bound", "estimate", "upper_bound", "verdict"]);
        assert_eq!(t.to_csv().unwrap(), "set,mu,lower_bound,estimate,upper_bound,verdict\n");
    }

    #[test]
    fn quoting_and_line_endings() {
        let mut t = Table::new("t", &["a", "b"]);
        t.push(row!["x,y", "say \"hi\""]);
        t.push(row![0.1, 3usize]);
        assert_eq!(t.to_csv().unwrap(), "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n0.1,3\n");
    }

    #[test]
    fn floats_round_trip_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let values = [0.1 + 0.2, 1.0 / 3.0, 1e-300, 5e-324, -0.0, 1.0, f64::INFINITY, 2.5e17, std::f64::consts::PI];
        let mut t = Table::new("vals", &["v"]);
        for v in values {
            t.push(row![v]);
        }
        let mut rep = RunReport::new("demo", 1);
        rep.tables.push(t);
        emit_report(&rep, dir.path()).unwrap();
        let back = Table::read_csv(&dir.path().join("vals.csv")).unwrap();
        for (v, r) in values.iter().zip(&back.rows) {
            assert_eq!(r[0].parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert!(dir.path().join("verdicts.json").exists());
    }

    #[test]
    fn verdicts_carry_their_numbers() {
        let v = Verdict::le("cover", "value", 0.5, "bound", 0.4, 0.0);
        assert!(!v.passed);
        assert_eq!(v.inequality, "value <= bound + tol");
        assert!(Verdict::close("c", "a", 1.0, "b", 1.0 + 1e-10, 1e-9).passed);
        assert!(Verdict::ge("g", "a", 1.0, "b", 1.0, 0.0).passed);
    }

    #[test]
    fn io_errors_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = emit_report(&RunReport::new("x", 0), &blocker.join("sub")).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}
