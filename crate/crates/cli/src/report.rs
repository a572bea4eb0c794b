//! Deterministic reporting: key/value output in text or machine form,
//! check lists for the reproduction pipelines, and the exit-code map.

use std::fmt;

/// Exit codes shared by every subcommand.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Machine,
}

/// Ordered key/value lines; machine output sorts lexicographically by
/// key so diffs are stable regardless of computation order.
#[derive(Clone, Debug, Default)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Report {
        Report::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.lines.push((key.into(), value.to_string()));
    }

    pub fn render(&self, format: OutputFormat) -> String {
        let mut lines = self.lines.clone();
        if format == OutputFormat::Machine {
            lines.sort();
        }
        let mut out = String::new();
        for (k, v) in &lines {
            if v.contains('\n') {
                // multi-line values are indented under their key
                out.push_str(&format!("{k}:\n"));
                for l in v.lines() {
                    out.push_str(&format!("  {l}\n"));
                }
            } else {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail => write!(f, "fail"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub verdict: Verdict,
}

/// Result of one reproduction pipeline.
#[derive(Clone, Debug)]
pub struct ReproReport {
    pub case: String,
    pub checks: Vec<Check>,
}

impl ReproReport {
    pub fn new(case: impl Into<String>) -> ReproReport {
        ReproReport {
            case: case.into(),
            checks: Vec::new(),
        }
    }

    /// Record a check whose verdict is pass iff expected == observed.
    pub fn check(&mut self, name: &str, expected: impl fmt::Display, observed: impl fmt::Display) {
        let expected = expected.to_string();
        let observed = observed.to_string();
        let verdict = if expected == observed {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        self.checks.push(Check {
            name: name.to_owned(),
            expected,
            observed,
            verdict,
        });
    }

    /// Informational line carried in the check list; always passes.
    pub fn info(&mut self, name: &str, value: impl fmt::Display) {
        let value = value.to_string();
        self.checks.push(Check {
            name: name.to_owned(),
            expected: "(recorded)".to_owned(),
            observed: value,
            verdict: Verdict::Pass,
        });
    }

    pub fn inconclusive(&mut self, name: &str, expected: impl fmt::Display, note: &str) {
        self.checks.push(Check {
            name: name.to_owned(),
            expected: expected.to_string(),
            observed: note.to_owned(),
            verdict: Verdict::Inconclusive,
        });
    }

    pub fn overall(&self) -> Verdict {
        if self.checks.iter().any(|c| c.verdict == Verdict::Fail) {
            Verdict::Fail
        } else if self
            .checks
            .iter()
            .any(|c| c.verdict == Verdict::Inconclusive)
        {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.overall() {
            Verdict::Pass => EXIT_PASS,
            Verdict::Fail => EXIT_FAIL,
            Verdict::Inconclusive => EXIT_INCONCLUSIVE,
        }
    }

    pub fn render(&self, format: OutputFormat) -> String {
        let mut r = Report::new();
        r.push("case", &self.case);
        for c in &self.checks {
            r.push(format!("{}.expected", c.name), &c.expected);
            r.push(format!("{}.observed", c.name), &c.observed);
            r.push(format!("{}.verdict", c.name), c.verdict);
        }
        r.push("overall", self.overall());
        r.render(format)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn machine_lines_are_sorted() {
        let mut r = Report::new();
        r.push("zeta", 1);
        r.push("alpha", 2);
        let m = r.render(OutputFormat::Machine);
        assert_eq!(m, "alpha = 2\nzeta = 1\n");
        let t = r.render(OutputFormat::Text);
        assert_eq!(t, "zeta = 1\nalpha = 2\n");
    }

    #[test]
    fn overall_verdict_aggregation() {
        let mut rep = ReproReport::new("demo");
        rep.check("c1", "x", "x");
        assert_eq!(rep.overall(), Verdict::Pass);
        rep.inconclusive("c2", "y", "gave up");
        assert_eq!(rep.overall(), Verdict::Inconclusive);
        rep.check("c3", "x", "z");
        assert_eq!(rep.overall(), Verdict::Fail);
        assert_eq!(rep.exit_code(), EXIT_FAIL);
    }
}
