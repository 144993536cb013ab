use serde::{Deserialize, Serialize};

/// One invariant check with the measured value and its threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Yes/no check; `value` and `threshold` are then 0/1 placeholders.
    #[serde(default)]
    pub flag: bool,
}

impl Check {
    /// Passes when `value < threshold`.
    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value < threshold, flag: false }
    }

    /// Passes when `value <= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value <= threshold, flag: false }
    }

    pub fn describe(&self) -> String {
        if self.flag {
            format!("{}: {}", self.name, if self.pass { "yes" } else { "no" })
        } else {
            format!("{} = {:.4e} (limit {:.4e})", self.name, self.value, self.threshold)
        }
    }

    pub fn flag(name: impl Into<String>, pass: bool) -> Self {
        Self { name: name.into(), value: pass as u8 as f64, threshold: 1.0, pass, flag: true }
    }
}

/// Files and checks produced by one experiment.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub files: Vec<(String, String)>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn file(&mut self, name: impl Into<String>, contents: impl Into<String>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn json<S: Serialize>(&mut self, name: impl Into<String>, value: &S) {
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        self.file(name, text);
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: Report) {
        self.files.extend(other.files);
        self.checks.extend(other.checks);
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// CSV text from a header and rows of already formatted cells.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

/// Filename-safe tag for a parameter pair, e.g. `q0.5_lambda2`.
pub fn tag(q: f64, lambda: f64) -> String {
    format!("q{q}_lambda{lambda}")
}

/// Formats an optional value as an empty cell when absent.
pub fn cell(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}
