use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Rendered residual; `0` when the identity holds.
    pub residual: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    /// Number of cases behind the check.
    pub cases: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl Check {
    pub fn new(name: impl Into<String>, ok: bool, residual: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            residual: residual.into(),
            value: None,
            witness: None,
            cases: 1,
            wall_time_ms: None,
        }
    }

    pub fn with_value(mut self, v: impl Into<String>) -> Self {
        self.value = Some(v.into());
        self
    }

    pub fn with_witness(mut self, w: Option<String>) -> Self {
        self.witness = w;
        self
    }

    pub fn with_cases(mut self, n: usize) -> Self {
        self.cases = n;
        self
    }

    pub fn with_time(mut self, t: Duration) -> Self {
        self.wall_time_ms = Some(t.as_secs_f64() * 1e3);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Emitted bracket or density, when not written to a file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emitted: Option<String>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report { command: command.into(), ..Default::default() }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn note(&mut self, n: impl Into<String>) {
        self.notes.push(n.into());
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    /// Sorts checks by name and drops timings unless `timings`.
    pub fn finish(mut self, timings: bool) -> Self {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
        if !timings {
            for c in &mut self.checks {
                c.wall_time_ms = None;
            }
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.command);
        for c in &self.checks {
            let tag = if c.passed() { "PASS" } else { "FAIL" };
            let _ = write!(s, "[{tag}] {}", c.name);
            if c.cases != 1 {
                let _ = write!(s, " ({} cases)", c.cases);
            }
            if let Some(t) = c.wall_time_ms {
                let _ = write!(s, " [{t:.1} ms]");
            }
            let _ = writeln!(s);
            if let Some(v) = &c.value {
                let _ = writeln!(s, "    value: {v}");
            }
            let _ = writeln!(s, "    residual: {}", c.residual);
            if let Some(w) = &c.witness {
                let _ = writeln!(s, "    witness: {w}");
            }
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        let passed = self.checks.iter().filter(|c| c.passed()).count();
        let _ = writeln!(s, "{passed}/{} checks passed", self.checks.len());
        s
    }
}
