//! CSV and JSON rendering for the suite reports.
//!
//! Every renderer is deterministic: identical inputs produce byte-identical
//! output. Floats print with Rust's shortest round-trip formatting, which is
//! locale-independent and always uses `.` as the decimal separator.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::corpus::CorpusCheckResult;
use crate::rings::RingScanReport;
use crate::weakform::{MollifierBoundsRow, TraceReport, WeakResidualReport};
use crate::{Error, Result};

/// Output format selector shared by every subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Precondition(format!(
                "unknown format '{other}' (expected csv or json)"
            ))),
        }
    }
}

/// A report that can render itself as a CSV table or a JSON document.
pub trait Report {
    fn to_csv(&self) -> String;

    fn to_json(&self) -> Result<String>;

    fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => Ok(self.to_csv()),
            Format::Json => self.to_json(),
        }
    }
}

fn json_of<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Shortest round-trip float formatting; empty string for an absent value.
fn num(v: f64) -> String {
    format!("{v}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl Report for RingScanReport {
    fn to_csv(&self) -> String {
        let mut out = String::from("k,R,I,cumulative-min,slope\n");
        let mut cmin = f64::INFINITY;
        for (k, (&r, &v)) in self.radii.iter().zip(&self.values).enumerate() {
            cmin = cmin.min(v);
            // per-row log-log slope against the previous radius
            let slope = if k > 0 {
                let (r0, v0) = (self.radii[k - 1], self.values[k - 1]);
                if v > 0.0 && v0 > 0.0 && r > r0 {
                    Some((v.ln() - v0.ln()) / (r.ln() - r0.ln()))
                } else {
                    None
                }
            } else {
                None
            };
            let _ = writeln!(out, "{k},{},{},{},{}", num(r), num(v), num(cmin), opt_num(slope));
        }
        out
    }

    fn to_json(&self) -> Result<String> {
        json_of(self)
    }
}

impl Report for WeakResidualReport {
    fn to_csv(&self) -> String {
        let mut out = String::from("index,lhs,rhs-mu,rhs-nu,scale,residual,slack\n");
        for (i, e) in self.entries.iter().enumerate() {
            let _ = writeln!(
                out,
                "{i},{},{},{},{},{},{}",
                num(e.lhs),
                num(e.rhs_mu),
                num(e.rhs_nu),
                num(e.scale),
                num(e.residual),
                num(e.slack)
            );
        }
        out
    }

    fn to_json(&self) -> Result<String> {
        json_of(self)
    }
}

impl Report for TraceReport {
    fn to_csv(&self) -> String {
        let mut out = String::from("eps,value\n");
        for (&eps, &v) in self.ladder.iter().zip(&self.values) {
            let _ = writeln!(out, "{},{}", num(eps), num(v));
        }
        out
    }

    fn to_json(&self) -> Result<String> {
        json_of(self)
    }
}

impl Report for [CorpusCheckResult] {
    fn to_csv(&self) -> String {
        let mut out = String::from("entry,dim,check,expected,actual,passed,min-value,slope\n");
        for r in self {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.entry,
                r.dim,
                r.check,
                r.expected,
                r.actual,
                r.passed,
                num(r.min_value),
                opt_num(r.slope)
            );
        }
        out
    }

    fn to_json(&self) -> Result<String> {
        json_of(&self)
    }
}

impl Report for [MollifierBoundsRow] {
    fn to_csv(&self) -> String {
        let mut out = String::from(
            "eps,pairing-dipole,upper-dipole,dipole-within-bound,\
             pairing-dipole-plus,lower-dipole-plus,dipole-plus-exceeds,\
             pairing-unscaled,pairing-unscaled-plus\n",
        );
        for r in self {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                num(r.eps),
                num(r.pairing_dipole),
                num(r.upper_dipole),
                r.dipole_within_bound,
                num(r.pairing_dipole_plus),
                num(r.lower_dipole_plus),
                r.dipole_plus_exceeds,
                num(r.pairing_unscaled),
                num(r.pairing_unscaled_plus)
            );
        }
        out
    }

    fn to_json(&self) -> Result<String> {
        json_of(&self)
    }
}

/// Write a rendered report to `path`, or to stdout when no path is given.
pub fn write_report(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::Verdict;

    fn sample_scan() -> RingScanReport {
        RingScanReport {
            condition: "(R+0)".into(),
            center: vec![0.0, 1.0],
            h: 0.0,
            radii: vec![4.0, 8.0, 16.0, 32.0],
            values: vec![0.5, 0.25, 0.125, 0.0625],
            min_value: 0.0625,
            slope: Some(-1.0),
            verdict: Verdict::Satisfied,
            verdict_tol: 1e-4,
        }
    }

    #[test]
    fn ring_scan_csv_has_the_documented_columns() {
        let csv = sample_scan().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("k,R,I,cumulative-min,slope"));
        // first data row has no slope; later rows carry the dyadic slope -1
        assert_eq!(lines.next(), Some("0,4,0.5,0.5,"));
        let row = lines.next().unwrap();
        assert!(row.starts_with("1,8,0.25,0.25,-1"), "row was {row}");
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn ring_scan_cumulative_min_is_nonincreasing() {
        let mut report = sample_scan();
        report.values = vec![0.5, 0.7, 0.1, 0.3];
        let csv = report.to_csv();
        let mins: Vec<f64> = csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
            .collect();
        assert_eq!(mins, vec![0.5, 0.5, 0.1, 0.1]);
    }

    #[test]
    fn json_round_trips_and_is_deterministic() {
        let report = sample_scan();
        let a = report.to_json().unwrap();
        let b = report.to_json().unwrap();
        assert_eq!(a, b);
        let parsed: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(parsed["condition"], "(R+0)");
        assert_eq!(parsed["verdict"], "satisfied");
    }

    #[test]
    fn csv_rendering_is_deterministic() {
        let report = sample_scan();
        assert_eq!(report.to_csv(), report.to_csv());
    }

    #[test]
    fn format_parses_case_insensitively_and_rejects_junk() {
        assert_eq!(Format::from_str("CSV").unwrap(), Format::Csv);
        assert_eq!(Format::from_str("json").unwrap(), Format::Json);
        assert!(Format::from_str("yaml").is_err());
    }

    #[test]
    fn floats_print_with_a_dot_decimal_separator() {
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(1e-7), "0.0000001");
        assert_eq!(num(-3.25), "-3.25");
    }
}
