//! Named check results and their canonical renderings.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Pass,
    /// Passes, but a boundary case or a noted discrepancy was hit.
    Warn,
    /// Informational value; never affects the overall verdict.
    Info,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Warn => "warn",
            Verdict::Info => "info",
            Verdict::Fail => "fail",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    pub value: String,
}

impl Check {
    pub fn new(name: impl Into<String>, verdict: Verdict, value: impl fmt::Display) -> Self {
        Check {
            name: name.into(),
            verdict,
            value: value.to_string(),
        }
    }

    pub fn pass_if(name: impl Into<String>, ok: bool, value: impl fmt::Display) -> Self {
        Check::new(name, Verdict::from_bool(ok), value)
    }

    pub fn info(name: impl Into<String>, value: impl fmt::Display) -> Self {
        Check::new(name, Verdict::Info, value)
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

/// True when no check in the list failed.
pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(Check::passed)
}

/// An ordered list of checks with a title; the order of insertion is the
/// order of every rendering.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub title: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Appends checks with `prefix.` prepended to their names.
    pub fn extend_prefixed(&mut self, prefix: &str, checks: impl IntoIterator<Item = Check>) {
        for mut c in checks {
            c.name = format!("{prefix}.{}", c.name);
            self.checks.push(c);
        }
    }

    pub fn overall(&self) -> Verdict {
        if all_passed(&self.checks) {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// One record per line: `name<TAB>verdict<TAB>value`, closed by an
    /// `overall` record.
    pub fn render_machine(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!("{}\t{}\t{}\n", c.name, c.verdict, one_line(&c.value)));
        }
        out.push_str(&format!("overall\t{}\t{}\n", self.overall(), self.title));
        out
    }

    pub fn render_human(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = format!("== {} ==\n", self.title);
        for c in &self.checks {
            let tag = format!("[{}]", c.verdict.as_str().to_uppercase());
            out.push_str(&format!("{tag:<6} {:<width$}  {}\n", c.name, c.value));
        }
        out.push_str(&format!("overall: {}\n", self.overall().as_str().to_uppercase()));
        out
    }
}

fn one_line(s: &str) -> String {
    s.replace(['\t', '\n'], " ")
}
