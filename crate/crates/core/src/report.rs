//! Run reports in JSON lines, CSV and plain text, plus sweep aggregates.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bounds::{Check, CheckStatus, CurvatureReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub holds: bool,
    pub status: CheckStatus,
    pub margin: Option<f64>,
}

impl From<&Check> for CheckSummary {
    fn from(c: &Check) -> Self {
        CheckSummary { name: c.name.clone(), holds: c.holds(), status: c.status, margin: c.margin }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance_id: String,
    pub scheme: String,
    pub adp_actions: Vec<usize>,
    pub optimal_actions: Vec<usize>,
    pub adp_value: f64,
    pub optimal_value: f64,
    pub ratio: f64,
    pub beta: f64,
    pub epsilons: Vec<f64>,
    pub etas: Vec<f64>,
    pub min_eta: f64,
    pub shift: f64,
    pub checks: Vec<CheckSummary>,
}

impl RunReport {
    pub fn new(instance_id: impl Into<String>, scheme: impl Into<String>, r: &CurvatureReport) -> Self {
        RunReport {
            instance_id: instance_id.into(),
            scheme: scheme.into(),
            adp_actions: r.greedy.to_vec(),
            optimal_actions: r.optimal.to_vec(),
            adp_value: r.greedy_value,
            optimal_value: r.optimal_value,
            ratio: r.ratio,
            beta: r.beta,
            epsilons: r.epsilons.clone(),
            etas: r.etas.clone(),
            min_eta: r.min_eta,
            shift: r.shift_applied,
            checks: r.checks.iter().map(CheckSummary::from).collect(),
        }
    }

    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckSummary> {
        self.checks.iter().filter(|c| !c.holds)
    }

    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialises")
    }

    pub fn csv_row(&self) -> String {
        let failed: Vec<&str> = self.failed().map(|c| c.name.as_str()).collect();
        [
            csv_field(&self.instance_id),
            csv_field(&self.scheme),
            self.adp_value.to_string(),
            self.optimal_value.to_string(),
            self.ratio.to_string(),
            self.beta.to_string(),
            self.min_eta.to_string(),
            join(&self.epsilons),
            join(&self.etas),
            self.holds().to_string(),
            failed.join(";"),
        ]
        .join(",")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "instance      {}", self.instance_id);
        let _ = writeln!(s, "scheme        {}", self.scheme);
        let _ = writeln!(s, "adp actions   {}", fmt_actions(&self.adp_actions));
        let _ = writeln!(s, "adp value     {}", self.adp_value);
        let _ = writeln!(s, "optimal       {} = {}", fmt_actions(&self.optimal_actions), self.optimal_value);
        let _ = writeln!(s, "ratio         {}", self.ratio);
        let _ = writeln!(s, "beta          {}", self.beta);
        let _ = writeln!(s, "epsilons      {:?}", self.epsilons);
        let _ = writeln!(s, "etas          {:?}", self.etas);
        if self.shift != 0.0 {
            let _ = writeln!(s, "shift         {}", self.shift);
        }
        for c in &self.checks {
            let margin = c.margin.map(|m| format!("  margin {m:.3e}")).unwrap_or_default();
            let _ = writeln!(s, "  {:<8} {}{}", status_label(c.status), c.name, margin);
        }
        s
    }
}

pub const CSV_HEADER: &str = "instance_id,scheme,adp_value,optimal_value,ratio,beta,min_eta,epsilons,etas,holds,failed_checks";

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn fmt_actions(a: &[usize]) -> String {
    let inner: Vec<String> = a.iter().map(usize::to_string).collect();
    format!("({})", inner.join(","))
}

pub fn status_label(s: CheckStatus) -> &'static str {
    match s {
        CheckStatus::Pass => "PASS",
        CheckStatus::Fail => "FAIL",
        CheckStatus::Warn => "WARN",
        CheckStatus::Skipped => "SKIPPED",
        CheckStatus::NotApplicable => "N/A",
    }
}

/// Per-scheme aggregate over a batch of reports.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub runs: usize,
    pub failed_runs: usize,
    pub bound_violations: usize,
    /// Bound violations where some `η_k < 0`.
    pub violations_with_negative_eta: usize,
    pub runs_with_negative_eta: usize,
    pub min_ratio: f64,
    pub min_beta: f64,
    pub min_slack: f64,
    pub check_failures: BTreeMap<String, usize>,
    pub skipped_checks: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub errors: usize,
    pub schemes: BTreeMap<String, SchemeSummary>,
}

impl SweepSummary {
    pub fn add(&mut self, r: &RunReport) {
        let key = r.scheme.clone();
        let s = self.schemes.entry(key).or_insert_with(|| SchemeSummary {
            min_ratio: f64::INFINITY,
            min_beta: f64::INFINITY,
            min_slack: f64::INFINITY,
            ..Default::default()
        });
        s.runs += 1;
        if !r.holds() {
            s.failed_runs += 1;
        }
        let negative_eta = r.min_eta < 0.0;
        if negative_eta {
            s.runs_with_negative_eta += 1;
        }
        if r.check("performance_bound").is_some_and(|c| !c.holds) {
            s.bound_violations += 1;
            if negative_eta {
                s.violations_with_negative_eta += 1;
            }
        }
        s.min_ratio = s.min_ratio.min(r.ratio);
        s.min_beta = s.min_beta.min(r.beta);
        s.min_slack = s.min_slack.min(r.ratio - r.beta);
        for c in &r.checks {
            if !c.holds {
                *s.check_failures.entry(c.name.clone()).or_default() += 1;
            }
            if c.status == CheckStatus::Skipped {
                s.skipped_checks += 1;
            }
        }
    }

    pub fn bound_violations(&self) -> usize {
        self.schemes.values().map(|s| s.bound_violations).sum()
    }

    pub fn failed_runs(&self) -> usize {
        self.schemes.values().map(|s| s.failed_runs).sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<15} {:>6} {:>7} {:>10} {:>10} {:>6} {:>10} {:>10} {:>11}",
            "scheme", "runs", "failed", "bound_viol", "viol_eta<0", "eta<0", "min_ratio", "min_beta", "min_slack"
        );
        for (name, s) in &self.schemes {
            let _ = writeln!(
                out,
                "{:<15} {:>6} {:>7} {:>10} {:>10} {:>6} {:>10.6} {:>10.6} {:>11.3e}",
                name,
                s.runs,
                s.failed_runs,
                s.bound_violations,
                s.violations_with_negative_eta,
                s.runs_with_negative_eta,
                s.min_ratio,
                s.min_beta,
                s.min_slack
            );
            for (check, n) in &s.check_failures {
                let _ = writeln!(out, "    {check}: {n} failing runs");
            }
        }
        if self.errors > 0 {
            let _ = writeln!(out, "errors: {}", self.errors);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adp::myopic_vtg;
    use crate::bounds::verify_thm3;
    use crate::generate::builtin_tiny;

    fn tiny_report() -> RunReport {
        RunReport::new("tiny", "myopic", &verify_thm3(&builtin_tiny(), &myopic_vtg()).unwrap())
    }

    #[test]
    fn json_round_trip() {
        let r = tiny_report();
        let back: RunReport = serde_json::from_str(&r.to_json_line()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.beta, 0.25);
    }

    #[test]
    fn csv_matches_header() {
        let row = tiny_report().csv_row();
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
        assert!(row.starts_with("tiny,myopic,3,6,0.5,0.25,"));
        assert_eq!(csv_field("a,b"), "\"a,b\"");
    }

    #[test]
    fn summary_counts() {
        let mut s = SweepSummary::default();
        let r = tiny_report();
        s.add(&r);
        s.add(&r);
        let m = &s.schemes["myopic"];
        assert_eq!(m.runs, 2);
        assert_eq!(m.bound_violations, 0);
        assert_eq!(m.min_beta, 0.25);
        assert!(s.to_text().contains("myopic"));
    }
}
