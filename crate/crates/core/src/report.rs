//! Key-value report format: one `key = value` per line, `#` comments.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

/// An ordered report. Floats are rendered with 17 significant digits so
/// re-parsing reproduces them exactly.
#[derive(Debug, Default, Clone)]
pub struct Report {
    lines: Vec<ReportLine>,
}

#[derive(Debug, Clone)]
enum ReportLine {
    Comment(String),
    Entry(String, String),
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn comment(&mut self, text: &str) -> &mut Self {
        self.lines.push(ReportLine::Comment(text.to_string()));
        self
    }

    pub fn entry(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.lines.push(ReportLine::Entry(key.to_string(), value.to_string()));
        self
    }

    pub fn entry_f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.lines.push(ReportLine::Entry(key.to_string(), format!("{value:.17e}")));
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            match line {
                ReportLine::Comment(text) => {
                    let _ = writeln!(out, "# {text}");
                }
                ReportLine::Entry(key, value) => {
                    let _ = writeln!(out, "{key} = {value}");
                }
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.render())
    }
}

/// Parses rendered report text back to a key -> value map (comments are
/// dropped, later duplicates win).
pub fn parse_report(text: &str) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some((key, value)) = trimmed.split_once('=') {
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
    }
    map
}
