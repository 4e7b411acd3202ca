use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::commands::Command;

/// Everything a command reports; rendered once per invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub command: Command,
    pub exit_code: i32,
    pub error: Option<String>,
    pub warnings: Vec<String>,
    pub sections: Vec<(String, Vec<(String, String)>)>,
    /// Canonical configuration, absent when it failed to load.
    pub config_echo: Option<String>,
}

impl RunSummary {
    pub fn new(command: Command) -> Self {
        RunSummary {
            command,
            exit_code: 0,
            error: None,
            warnings: Vec::new(),
            sections: Vec::new(),
            config_echo: None,
        }
    }

    pub fn section(&mut self, name: impl Into<String>, entries: Vec<(String, String)>) {
        self.sections.push((name.into(), entries));
    }

    /// Looks up `key` in section `name`.
    pub fn value(&self, name: &str, key: &str) -> Option<&str> {
        self.sections
            .iter()
            .find(|(n, _)| n == name)
            .and_then(|(_, kv)| kv.iter().find(|(k, _)| k == key))
            .map(|(_, v)| v.as_str())
    }

    /// Text form: run status, result sections, then the configuration
    /// echo, which loads back as a configuration file on its own.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[run]");
        let _ = writeln!(out, "command = {}", self.command);
        let _ = writeln!(out, "status = {}", if self.exit_code == 0 { "ok" } else { "failed" });
        let _ = writeln!(out, "exit_code = {}", self.exit_code);
        if let Some(e) = &self.error {
            let _ = writeln!(out, "error = {e}");
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning = {w}");
        }
        for (name, entries) in &self.sections {
            let _ = writeln!(out, "\n[{name}]");
            for (k, v) in entries {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        if let Some(echo) = &self.config_echo {
            let _ = writeln!(out, "\n# configuration");
            out.push_str(echo);
        }
        out
    }
}

/// A named output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Writes the artifacts and `summary.txt` into `directory`, creating it.
pub fn write_report(summary: &RunSummary, artifacts: &[Artifact], directory: &Path) -> std::io::Result<()> {
    fs::create_dir_all(directory)?;
    for a in artifacts {
        fs::write(directory.join(&a.name), &a.bytes)?;
    }
    fs::write(directory.join("summary.txt"), summary.to_text())
}
