//! CSV and JSON output. Floats are written with 17 significant digits so
//! identical inputs give byte-identical files and values round-trip exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{NetlumpError, Result};
use crate::grid::GridFunction;
use crate::lumping::ConvergenceReport;

pub const REPORT_HEADER: &str = "eps,error_l1,error_sup";
pub const GRID_HEADER: &str = "edge,x,value";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSidecar {
    pub fitted_order: Option<f64>,
    pub intercept: Option<f64>,
    pub pass: bool,
    pub band: (f64, f64),
    pub degenerate: Option<String>,
    pub config_digest: String,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| NetlumpError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn report_csv(report: &ConvergenceReport) -> String {
    let mut s = String::from(REPORT_HEADER);
    s.push('\n');
    for ((e, l1), sup) in report.eps_list.iter().zip(&report.errors).zip(&report.errors_sup) {
        let _ = writeln!(s, "{},{},{}", fmt_f64(*e), fmt_f64(*l1), fmt_f64(*sup));
    }
    s
}

pub fn report_sidecar(report: &ConvergenceReport, config_digest: &str) -> ReportSidecar {
    ReportSidecar {
        fitted_order: report.fitted_order,
        intercept: report.intercept,
        pass: report.pass,
        band: report.band,
        degenerate: report.degenerate.clone(),
        config_digest: config_digest.to_string(),
    }
}

/// Path of the JSON sidecar written next to `csv_path`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes the CSV to `path` and the sidecar to `path` with a `.json`
/// extension. Returns the sidecar path.
pub fn emit_report(report: &ConvergenceReport, config_digest: &str, path: &Path) -> Result<PathBuf> {
    write_file(path, &report_csv(report))?;
    let side = sidecar_path(path);
    let json = serde_json::to_string_pretty(&report_sidecar(report, config_digest))
        .map_err(|e| NetlumpError::Config(format!("serializing report: {e}")))?;
    write_file(&side, &(json + "\n"))?;
    Ok(side)
}

/// Parses a report CSV back into `(eps, error_l1, error_sup)` rows.
pub fn parse_report_csv(text: &str) -> Result<Vec<(f64, f64, f64)>> {
    let mut lines = text.lines();
    if lines.next() != Some(REPORT_HEADER) {
        return Err(NetlumpError::Config(format!("report CSV must start with {REPORT_HEADER:?}")));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let vals: Vec<f64> = l
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| NetlumpError::Config(format!("report CSV line {}: {e}", i + 2)))?;
            match vals[..] {
                [a, b, c] => Ok((a, b, c)),
                _ => Err(NetlumpError::Config(format!("report CSV line {}: expected 3 fields", i + 2))),
            }
        })
        .collect()
}

/// Per-node samples with header `edge,x,value`.
pub fn grid_csv(u: &GridFunction) -> String {
    let mut s = String::from(GRID_HEADER);
    s.push('\n');
    for (j, row) in u.rows().enumerate() {
        for (i, v) in row.iter().enumerate() {
            let _ = writeln!(s, "{j},{},{}", fmt_f64(u.x(i)), fmt_f64(*v));
        }
    }
    s
}

pub fn emit_grid(u: &GridFunction, path: &Path) -> Result<()> {
    write_file(path, &grid_csv(u))
}

/// Several named grid functions in one file, header `component,edge,x,value`.
pub fn components_csv(parts: &[(&str, &GridFunction)]) -> String {
    let mut s = String::from("component,edge,x,value\n");
    for (name, u) in parts {
        for (j, row) in u.rows().enumerate() {
            for (i, v) in row.iter().enumerate() {
                let _ = writeln!(s, "{name},{j},{},{}", fmt_f64(u.x(i)), fmt_f64(*v));
            }
        }
    }
    s
}

pub fn emit_text(text: &str, path: &Path) -> Result<()> {
    write_file(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lumping::estimate_order;

    #[test]
    fn degenerate_report_has_one_row_and_null_order() {
        let r = estimate_order(&[0.1], &[0.01], &[0.02], (0.8, 1.2)).unwrap();
        let csv = report_csv(&r);
        assert_eq!(csv.lines().count(), 2);
        let json = serde_json::to_value(report_sidecar(&r, "abc")).unwrap();
        assert!(json["fitted_order"].is_null());
        assert_eq!(json["pass"], false);
    }

    #[test]
    fn report_round_trips() {
        let eps = [0.2, 0.1, 0.05];
        let l1 = [0.1 / 3.0, 0.0171, std::f64::consts::PI * 1e-3];
        let sup = [1.0 / 7.0, 0.05, 0.025];
        let r = estimate_order(&eps, &l1, &sup, (0.8, 1.2)).unwrap();
        let rows = parse_report_csv(&report_csv(&r)).unwrap();
        for (k, row) in rows.iter().enumerate() {
            assert_eq!(*row, (eps[k], l1[k], sup[k]));
        }
    }

    #[test]
    fn grid_csv_layout() {
        let u = GridFunction::from_fn(2, 2, |j, x| j as f64 + x).unwrap();
        let csv = grid_csv(&u);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "edge,x,value");
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[4], format!("1,{},{}", fmt_f64(0.0), fmt_f64(1.0)));
    }

    #[test]
    fn bad_csv_rejected() {
        assert!(parse_report_csv("a,b\n").is_err());
        assert!(parse_report_csv("eps,error_l1,error_sup\n1,2\n").is_err());
        assert!(parse_report_csv("eps,error_l1,error_sup\n1,x,3\n").is_err());
    }
}
