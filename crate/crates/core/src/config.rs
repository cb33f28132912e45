//! Flat `key = value` text dialect shared by scenario, synth and run manifest
//! files. `#` starts a comment line; blank lines are ignored; keys are unique.

use std::str::FromStr;

use crate::error::{Diagnostic, Error, Location, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyValues {
    entries: Vec<Entry>,
}

impl KeyValues {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut entries: Vec<Entry> = Vec::new();
        let mut diags = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                diags.push(Diagnostic::at(
                    Location::line(line),
                    format!("expected 'key = value', found '{trimmed}'"),
                ));
                continue;
            };
            let key = key.trim();
            if key.is_empty() {
                diags.push(Diagnostic::at(Location::line(line), "empty key"));
                continue;
            }
            if let Some(prev) = entries.iter().find(|e| e.key == key) {
                diags.push(Diagnostic::at(
                    Location::line(line),
                    format!("duplicate key '{key}' (first set on line {})", prev.line),
                ));
                continue;
            }
            entries.push(Entry {
                key: key.to_string(),
                value: value.trim().to_string(),
                line,
            });
        }
        if !diags.is_empty() {
            return Err(Error::invalid(source, diags));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    /// Parses `key` if present. A malformed value is pushed to `diags`.
    pub fn optional<T: FromStr>(&self, key: &str, diags: &mut Vec<Diagnostic>) -> Option<T> {
        let entry = self.get(key)?;
        match entry.value.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                diags.push(Diagnostic::at(
                    Location::line(entry.line),
                    format!("invalid value '{}' for '{key}'", entry.value),
                ));
                None
            }
        }
    }

    pub fn required<T: FromStr>(&self, key: &str, diags: &mut Vec<Diagnostic>) -> Option<T> {
        if self.get(key).is_none() {
            diags.push(Diagnostic::general(format!("missing required key '{key}'")));
            return None;
        }
        self.optional(key, diags)
    }

    /// Flags every key that is neither in `known` nor starts with one of `prefixes`.
    pub fn reject_unknown(&self, known: &[&str], prefixes: &[&str], diags: &mut Vec<Diagnostic>) {
        for e in &self.entries {
            let ok = known.contains(&e.key.as_str())
                || prefixes.iter().any(|p| e.key.starts_with(p));
            if !ok {
                diags.push(Diagnostic::at(
                    Location::line(e.line),
                    format!("unknown key '{}'", e.key),
                ));
            }
        }
    }
}
