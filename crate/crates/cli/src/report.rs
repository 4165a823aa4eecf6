use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// `value <= bound`, or a verdict computed elsewhere.
    AtMost,
    AtLeast,
    /// Pass or fail without a number.
    Flag,
    /// Recorded only; always passes.
    Measurement,
}

/// One check: a measured value against a bound.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub value: Option<f64>,
    pub bound: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub code_version: String,
    pub seed: Option<u64>,
    pub threads: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Phase {
    pub name: String,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub checks: Vec<Check>,
    pub provenance: Provenance,
    pub timings: Vec<Phase>,
    /// Per-step logs (mass, scalings, distances).
    pub logs: BTreeMap<String, Vec<f64>>,
    #[serde(skip)]
    clock: Option<(String, Instant)>,
}

pub fn sha256_hex(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl RunReport {
    pub fn new(command: &str, config_text: &str, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            checks: Vec::new(),
            provenance: Provenance {
                config_sha256: sha256_hex(config_text),
                code_version: env!("CARGO_PKG_VERSION").to_string(),
                seed,
                threads: rayon::current_num_threads(),
            },
            timings: Vec::new(),
            logs: BTreeMap::new(),
            clock: None,
        }
    }

    fn push(&mut self, check: Check) {
        assert!(
            !self.checks.iter().any(|c| c.name == check.name),
            "check {} recorded twice",
            check.name
        );
        self.checks.push(check);
    }

    /// A verdict computed elsewhere; `kind` only affects how the bound prints.
    pub fn record(
        &mut self,
        name: &str,
        kind: CheckKind,
        value: f64,
        bound: Option<f64>,
        pass: bool,
    ) {
        self.push(Check {
            name: name.into(),
            kind,
            value: Some(value),
            bound,
            pass,
            note: String::new(),
        });
    }

    /// `value <= bound`; a non-finite value fails.
    pub fn at_most(&mut self, name: &str, value: f64, bound: f64) {
        self.push(Check {
            name: name.into(),
            kind: CheckKind::AtMost,
            value: Some(value),
            bound: Some(bound),
            pass: value.is_finite() && value <= bound,
            note: String::new(),
        });
    }

    /// `value >= bound`.
    pub fn at_least(&mut self, name: &str, value: f64, bound: f64) {
        self.push(Check {
            name: name.into(),
            kind: CheckKind::AtLeast,
            value: Some(value),
            bound: Some(bound),
            pass: value.is_finite() && value >= bound,
            note: String::new(),
        });
    }

    pub fn flag(&mut self, name: &str, pass: bool, note: impl Into<String>) {
        self.push(Check {
            name: name.into(),
            kind: CheckKind::Flag,
            value: None,
            bound: None,
            pass,
            note: note.into(),
        });
    }

    pub fn measure(&mut self, name: &str, value: f64) {
        self.push(Check {
            name: name.into(),
            kind: CheckKind::Measurement,
            value: Some(value),
            bound: None,
            pass: true,
            note: String::new(),
        });
    }

    pub fn log(&mut self, name: &str, values: Vec<f64>) {
        self.logs.insert(name.into(), values);
    }

    /// Starts timing `name`, closing the previous phase.
    pub fn phase(&mut self, name: &str) {
        self.end_phase();
        self.clock = Some((name.to_string(), Instant::now()));
    }

    pub fn end_phase(&mut self) {
        if let Some((name, start)) = self.clock.take() {
            self.timings.push(Phase {
                name,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn print(&self) {
        for c in &self.checks {
            let tag = match (c.kind, c.pass) {
                (CheckKind::Measurement, _) => "INFO",
                (_, true) => "PASS",
                (_, false) => "FAIL",
            };
            let mut line = format!("{tag} {}", c.name);
            if let Some(v) = c.value {
                line += &format!(" = {v:.6e}");
            }
            if let Some(b) = c.bound {
                let op = if c.kind == CheckKind::AtLeast {
                    ">="
                } else {
                    "<="
                };
                line += &format!(" ({op} {b:.3e})");
            }
            if !c.note.is_empty() {
                line += &format!(" ({})", c.note);
            }
            println!("{line}");
        }
    }

    pub fn write(&mut self, path: &Path) -> std::io::Result<()> {
        self.end_phase();
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(path, text + "\n")
    }
}
