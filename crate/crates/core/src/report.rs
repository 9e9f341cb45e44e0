//! Measured two-sided inequality reports.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;

/// Quote a CSV field when it contains a separator or a quote.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One input of an inequality check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateCase {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; `None` when the case was skipped (zero datum).
    pub ratio: Option<f64>,
    pub flags: Vec<String>,
}

impl EstimateCase {
    pub fn new(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let mut case = Self {
            label: label.into(),
            lhs,
            rhs,
            ratio: None,
            flags: Vec::new(),
        };
        if lhs == 0.0 && rhs == 0.0 {
            case.flags.push("zero-datum".into());
        } else if rhs == 0.0 {
            case.ratio = Some(f64::INFINITY);
        } else {
            case.ratio = Some(lhs / rhs);
        }
        case
    }

    pub fn with_flag(mut self, flag: impl Into<String>) -> Self {
        self.flags.push(flag.into());
        self
    }
}

/// Left and right sides of an inequality over a family of inputs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub id: String,
    pub h: f64,
    pub exponent_id: String,
    pub cases: Vec<EstimateCase>,
    /// Report-wide flags, e.g. `estimate` for sampled lower bounds.
    pub flags: Vec<String>,
}

impl EstimateReport {
    pub fn new(id: impl Into<String>, h: f64, exponent_id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            h,
            exponent_id: exponent_id.into(),
            cases: Vec::new(),
            flags: Vec::new(),
        }
    }

    pub fn push(&mut self, case: EstimateCase) {
        self.cases.push(case);
    }

    pub fn flag(&mut self, flag: impl Into<String>) {
        let flag = flag.into();
        if !self.flags.contains(&flag) {
            self.flags.push(flag);
        }
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    /// Supremum of the case ratios, i.e. the empirical constant.
    pub fn sup_ratio(&self) -> Option<f64> {
        self.cases
            .iter()
            .filter_map(|c| c.ratio)
            .fold(None, |m, r| Some(m.map_or(r, |m: f64| m.max(r))))
    }

    /// Single-case convenience accessors.
    pub fn lhs(&self) -> f64 {
        self.cases.first().map_or(0.0, |c| c.lhs)
    }

    pub fn rhs(&self) -> f64 {
        self.cases.first().map_or(0.0, |c| c.rhs)
    }

    pub fn ratio(&self) -> Option<f64> {
        self.cases.first().and_then(|c| c.ratio)
    }

    pub const CSV_HEADER: &'static str =
        "experiment,inequality,case,lhs,rhs,ratio,h,exponent,seed,flags";

    /// One CSV row per case.
    pub fn write_csv_rows(&self, experiment: &str, seed: u64, mut w: impl Write) -> Result<()> {
        for c in &self.cases {
            let mut flags = self.flags.clone();
            flags.extend(c.flags.iter().cloned());
            writeln!(
                w,
                "{},{},{},{:e},{:e},{},{:e},{},{},{}",
                csv_field(experiment),
                csv_field(&self.id),
                csv_field(&c.label),
                c.lhs,
                c.rhs,
                c.ratio.map_or_else(|| "nan".to_string(), |r| format!("{r:e}")),
                self.h,
                csv_field(&self.exponent_id),
                seed,
                flags.join("|")
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cases_are_skipped() {
        let mut r = EstimateReport::new("x", 0.1, "const(2)");
        r.push(EstimateCase::new("a", 0.0, 0.0));
        r.push(EstimateCase::new("b", 1.0, 4.0));
        assert_eq!(r.sup_ratio(), Some(0.25));
        assert!(r.cases[0].flags.contains(&"zero-datum".to_string()));
    }

    #[test]
    fn csv_rows() {
        let mut r = EstimateReport::new("holder", 0.125, "const(2)");
        r.flag("estimate");
        r.push(EstimateCase::new("c0", 1.0, 2.0));
        let mut out = Vec::new();
        r.write_csv_rows("exp", 7, &mut out).unwrap();
        let line = String::from_utf8(out).unwrap();
        assert_eq!(line.trim_end().split(',').count(), 10);
        assert!(line.contains(",7,estimate"));
    }

    #[test]
    fn fields_with_commas_are_quoted() {
        assert_eq!(csv_field("bump(2,1,0.5)"), "\"bump(2,1,0.5)\"");
        assert_eq!(csv_field("const(2)"), "const(2)");
    }
}
