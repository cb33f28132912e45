//! Binary competency-to-process mapping (`1` = competency applies to process).

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Diagnostic, Error, Location, Result};
use crate::model::{check_ids, EnterpriseModel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompetencyMatrix {
    competency_ids: Vec<String>,
    process_ids: Vec<String>,
    entries: Vec<bool>,
}

impl CompetencyMatrix {
    pub fn new(
        competency_ids: Vec<String>,
        process_ids: Vec<String>,
        rows: Vec<Vec<u8>>,
    ) -> Result<Self> {
        let mut diags = Vec::new();
        if competency_ids.len() != rows.len() {
            diags.push(Diagnostic::general(format!(
                "{} competency ids for {} rows",
                competency_ids.len(),
                rows.len()
            )));
        }
        let mut seen = HashSet::new();
        for id in &competency_ids {
            if !seen.insert(id.as_str()) {
                diags.push(Diagnostic::general(format!("duplicate competency id '{id}'")));
            }
        }
        let mut seen = HashSet::new();
        for id in &process_ids {
            if !seen.insert(id.as_str()) {
                diags.push(Diagnostic::general(format!("duplicate process id '{id}'")));
            }
        }
        let mut entries = Vec::with_capacity(rows.len() * process_ids.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != process_ids.len() {
                diags.push(Diagnostic::general(format!(
                    "row {}: expected {} entries, found {}",
                    i + 1,
                    process_ids.len(),
                    row.len()
                )));
                continue;
            }
            for (j, &e) in row.iter().enumerate() {
                match e {
                    0 => entries.push(false),
                    1 => entries.push(true),
                    _ => diags.push(Diagnostic::general(format!(
                        "non-binary entry at ({}, {}): {e}",
                        i + 1,
                        j + 1
                    ))),
                }
            }
        }
        if !diags.is_empty() {
            return Err(Error::invalid("competency matrix", diags));
        }
        Ok(Self {
            competency_ids,
            process_ids,
            entries,
        })
    }

    pub fn competency_ids(&self) -> &[String] {
        &self.competency_ids
    }

    pub fn process_ids(&self) -> &[String] {
        &self.process_ids
    }

    /// Number of competencies `m`.
    pub fn m(&self) -> usize {
        self.competency_ids.len()
    }

    pub fn n(&self) -> usize {
        self.process_ids.len()
    }

    pub fn covers(&self, competency: usize, process: usize) -> bool {
        self.entries[competency * self.n() + process]
    }

    pub fn competency_index(&self, id: &str) -> Option<usize> {
        self.competency_ids.iter().position(|c| c == id)
    }

    /// Processes covered by competency `competency`, ascending.
    pub fn covered_processes(&self, competency: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |&j| self.covers(competency, j))
    }

    /// Fails unless the process columns equal the model's, in the same order.
    pub fn check_against(&self, model: &EnterpriseModel) -> Result<()> {
        if self.process_ids == model.process_ids() {
            return Ok(());
        }
        let mut diags = Vec::new();
        if self.n() != model.n() {
            diags.push(Diagnostic::general(format!(
                "shape mismatch: matrix has {} process columns, model '{}' has {}",
                self.n(),
                model.label(),
                model.n()
            )));
        }
        for (j, id) in self.process_ids.iter().enumerate() {
            match model.process_ids().iter().position(|p| p == id) {
                None => diags.push(Diagnostic::at(
                    Location::cell(1, j + 2),
                    format!("unknown process id '{id}'"),
                )),
                Some(k) if k != j => diags.push(Diagnostic::at(
                    Location::cell(1, j + 2),
                    format!("process '{id}' is column {} in the model", k + 1),
                )),
                _ => {}
            }
        }
        for id in model.process_ids() {
            if !self.process_ids.contains(id) {
                diags.push(Diagnostic::general(format!(
                    "model process '{id}' missing from matrix"
                )));
            }
        }
        Err(Error::invalid("competency matrix", diags))
    }
}

pub fn load_competency_matrix(path: impl AsRef<Path>) -> Result<CompetencyMatrix> {
    let path = path.as_ref();
    let text = crate::read_text(path)?;
    parse_competency_matrix(&text, &path.display().to_string())
}

/// Parses the `competency,<pid1>,...,<pidn>` CSV dialect; cells must be `0` or `1`.
pub fn parse_competency_matrix(text: &str, source: &str) -> Result<CompetencyMatrix> {
    let records = crate::csv_records(text).map_err(|d| Error::invalid(source, vec![d]))?;
    let Some((header_line, header)) = records.first() else {
        return Err(Error::invalid(source, vec![Diagnostic::general("empty file")]));
    };
    let header_line = *header_line;
    let mut diags = Vec::new();
    if header.first().map(String::as_str) != Some("competency") {
        diags.push(Diagnostic::at(
            Location::cell(header_line, 1),
            "header must start with 'competency'",
        ));
    }
    let process_ids: Vec<String> = header.iter().skip(1).cloned().collect();
    if process_ids.is_empty() {
        diags.push(Diagnostic::at(
            Location::line(header_line),
            "header names no process columns",
        ));
    }
    check_ids(&process_ids, header_line, "process id", &mut diags);

    let mut competency_ids = Vec::new();
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (line, record) in records.iter().skip(1) {
        let line = *line;
        if record.len() != header.len() {
            diags.push(Diagnostic::at(
                Location::line(line),
                format!(
                    "ragged row: expected {} fields, found {}",
                    header.len(),
                    record.len()
                ),
            ));
            continue;
        }
        let id = &record[0];
        if id.is_empty() {
            diags.push(Diagnostic::at(Location::cell(line, 1), "empty competency id"));
        } else if !seen.insert(id.clone()) {
            diags.push(Diagnostic::at(
                Location::cell(line, 1),
                format!("duplicate competency id '{id}'"),
            ));
        }
        let i = competency_ids.len() + 1;
        let mut row = Vec::with_capacity(process_ids.len());
        for (c, cell) in record.iter().enumerate().skip(1) {
            match cell.as_str() {
                "0" => row.push(0),
                "1" => row.push(1),
                other => diags.push(Diagnostic::at(
                    Location::cell(line, c + 1),
                    format!("non-binary entry at ({i},{c}): '{other}'"),
                )),
            }
        }
        competency_ids.push(id.clone());
        rows.push(row);
    }
    if records.len() == 1 {
        diags.push(Diagnostic::general("no competency rows"));
    }
    if !diags.is_empty() {
        return Err(Error::invalid(source, diags));
    }
    CompetencyMatrix::new(competency_ids, process_ids, rows)
}
