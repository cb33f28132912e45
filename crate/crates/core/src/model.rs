//! The enterprise model: `n` process indicator series over `T_max` periods.
//!
//! Periods are 1-based. A model may also carry pre-history rows (periods
//! `<= 0`) that only feed the trailing windows of the first periods; they are
//! never part of the reporting horizon.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use crate::error::{Diagnostic, Error, Location, Result};

/// Money values are thousand rubles per period.
#[derive(Debug, Clone, PartialEq)]
pub struct EnterpriseModel {
    label: String,
    process_ids: Vec<String>,
    first_period: i64,
    values: Vec<f64>,
}

impl EnterpriseModel {
    /// Builds a model whose rows are periods `1..=rows.len()`.
    pub fn new(
        label: impl Into<String>,
        process_ids: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        Self::with_prehistory(label, process_ids, 1, rows)
    }

    /// Builds a model whose first row is `first_period` (`<= 1`).
    pub fn with_prehistory(
        label: impl Into<String>,
        process_ids: Vec<String>,
        first_period: i64,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let label = label.into();
        let mut diags = Vec::new();
        let n = process_ids.len();
        if n == 0 {
            diags.push(Diagnostic::general("model needs at least one process"));
        }
        let mut seen = HashSet::new();
        for id in &process_ids {
            if !seen.insert(id.as_str()) {
                diags.push(Diagnostic::general(format!("duplicate process id '{id}'")));
            }
        }
        if first_period > 1 {
            diags.push(Diagnostic::general(format!(
                "first period is {first_period}, periods must start at or before 1"
            )));
        }
        let last = first_period + rows.len() as i64 - 1;
        if last < 1 {
            diags.push(Diagnostic::general("model needs at least one period >= 1"));
        }
        let mut values = Vec::with_capacity(rows.len() * n);
        for (r, row) in rows.iter().enumerate() {
            let period = first_period + r as i64;
            if row.len() != n {
                diags.push(Diagnostic::general(format!(
                    "period {period}: expected {n} values, found {}",
                    row.len()
                )));
                continue;
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    diags.push(Diagnostic::general(format!(
                        "period {period}, process '{}': non-finite value {v}",
                        process_ids[j]
                    )));
                }
            }
            values.extend_from_slice(row);
        }
        if !diags.is_empty() {
            return Err(Error::invalid(format!("model '{label}'"), diags));
        }
        Ok(Self {
            label,
            process_ids,
            first_period,
            values,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn process_ids(&self) -> &[String] {
        &self.process_ids
    }

    /// Number of processes `n`.
    pub fn n(&self) -> usize {
        self.process_ids.len()
    }

    /// `T_max`, the last reported period.
    pub fn periods(&self) -> usize {
        (self.last_period()) as usize
    }

    pub fn first_period(&self) -> i64 {
        self.first_period
    }

    pub fn last_period(&self) -> i64 {
        self.first_period + self.row_count() as i64 - 1
    }

    /// Rows stored before period 1.
    pub fn prehistory(&self) -> usize {
        (1 - self.first_period) as usize
    }

    /// Total stored rows, pre-history included.
    pub fn row_count(&self) -> usize {
        self.values.len() / self.n()
    }

    /// Values of all processes at `period`.
    ///
    /// Panics if `period` is outside `first_period..=T_max`.
    pub fn row(&self, period: i64) -> &[f64] {
        let idx = self.row_index(period).unwrap_or_else(|| {
            panic!(
                "period {period} outside {}..={}",
                self.first_period,
                self.last_period()
            )
        });
        self.row_at(idx)
    }

    pub fn value(&self, period: i64, process: usize) -> f64 {
        self.row(period)[process]
    }

    pub(crate) fn row_index(&self, period: i64) -> Option<usize> {
        if period < self.first_period || period > self.last_period() {
            None
        } else {
            Some((period - self.first_period) as usize)
        }
    }

    pub(crate) fn row_at(&self, idx: usize) -> &[f64] {
        let n = self.n();
        &self.values[idx * n..(idx + 1) * n]
    }

    /// Iterates `(period, row)` over every stored row, pre-history first.
    pub fn rows(&self) -> impl Iterator<Item = (i64, &[f64])> + '_ {
        self.values
            .chunks_exact(self.n())
            .enumerate()
            .map(move |(i, row)| (self.first_period + i as i64, row))
    }

    /// Copy of this model with every cell of period `>= from_period` passed
    /// through `f(period, process, value)`.
    pub(crate) fn map_from(
        &self,
        from_period: i64,
        mut f: impl FnMut(i64, usize, f64) -> f64,
    ) -> Self {
        let n = self.n();
        let mut values = self.values.clone();
        for (i, row) in values.chunks_exact_mut(n).enumerate() {
            let period = self.first_period + i as i64;
            if period < from_period {
                continue;
            }
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(period, j, *v);
            }
        }
        Self {
            label: self.label.clone(),
            process_ids: self.process_ids.clone(),
            first_period: self.first_period,
            values,
        }
    }
}

/// Sum of every cell over the reported periods `1..=T_max`, row by row.
/// Pre-history rows are excluded.
pub fn total_expense(model: &EnterpriseModel) -> f64 {
    let mut total = 0.0;
    for (period, row) in model.rows() {
        if period < 1 {
            continue;
        }
        for v in row {
            total += v;
        }
    }
    total
}

pub fn load_enterprise_model(path: impl AsRef<Path>, label: &str) -> Result<EnterpriseModel> {
    let path = path.as_ref();
    let text = crate::read_text(path)?;
    parse_enterprise_model(&text, &path.display().to_string(), label)
}

/// Parses the `period,<pid1>,...,<pidn>` CSV dialect. `source` names the
/// input in diagnostics. Every problem found is reported, not only the first.
pub fn parse_enterprise_model(text: &str, source: &str, label: &str) -> Result<EnterpriseModel> {
    let mut diags = Vec::new();
    let records = match crate::csv_records(text) {
        Ok(r) => r,
        Err(d) => return Err(Error::invalid(source, vec![d])),
    };
    let Some((header_line, header)) = records.first() else {
        return Err(Error::invalid(source, vec![Diagnostic::general("empty file")]));
    };
    let header_line = *header_line;
    if header.first().map(String::as_str) != Some("period") {
        diags.push(Diagnostic::at(
            Location::cell(header_line, 1),
            "header must start with 'period'",
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
    let width = header.len();

    let mut rows = Vec::new();
    let mut first_period = None;
    let mut expected_period: Option<i64> = None;
    let mut seen_periods = HashSet::new();
    for (line, record) in records.iter().skip(1) {
        let line = *line;
        if record.len() != width {
            diags.push(Diagnostic::at(
                Location::line(line),
                format!("ragged row: expected {width} fields, found {}", record.len()),
            ));
            continue;
        }
        let period = match record[0].parse::<i64>() {
            Ok(p) => p,
            Err(_) => {
                diags.push(Diagnostic::at(
                    Location::cell(line, 1),
                    format!("non-numeric period '{}'", record[0]),
                ));
                continue;
            }
        };
        if !seen_periods.insert(period) {
            diags.push(Diagnostic::at(
                Location::cell(line, 1),
                format!("duplicate period index {period}"),
            ));
            continue;
        }
        match expected_period {
            None => {
                if period > 1 {
                    diags.push(Diagnostic::at(
                        Location::cell(line, 1),
                        format!("periods must start at 1 (or earlier for pre-history), found {period}"),
                    ));
                }
                first_period = Some(period);
            }
            Some(expected) if period != expected => {
                diags.push(Diagnostic::at(
                    Location::cell(line, 1),
                    format!("period gap: expected {expected}, found {period}"),
                ));
            }
            _ => {}
        }
        expected_period = Some(period + 1);

        let mut row = Vec::with_capacity(width - 1);
        for (c, cell) in record.iter().enumerate().skip(1) {
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => row.push(v),
                Ok(_) => diags.push(Diagnostic::at(
                    Location::cell(line, c + 1),
                    format!("non-finite value '{cell}'"),
                )),
                Err(_) => diags.push(Diagnostic::at(
                    Location::cell(line, c + 1),
                    format!("non-numeric cell '{cell}'"),
                )),
            }
        }
        rows.push(row);
    }
    if records.len() == 1 {
        diags.push(Diagnostic::general("no data rows"));
    } else if let Some(last) = expected_period {
        if last - 1 < 1 {
            diags.push(Diagnostic::general("no period >= 1 present"));
        }
    }
    if !diags.is_empty() {
        return Err(Error::invalid(source, diags));
    }
    EnterpriseModel::with_prehistory(label, process_ids, first_period.unwrap_or(1), rows)
}

pub(crate) fn check_ids(ids: &[String], line: usize, what: &str, diags: &mut Vec<Diagnostic>) {
    let mut seen = HashSet::new();
    for (j, id) in ids.iter().enumerate() {
        let loc = Location::cell(line, j + 2);
        if id.is_empty() {
            diags.push(Diagnostic::at(loc, format!("empty {what}")));
        } else if !seen.insert(id.as_str()) {
            diags.push(Diagnostic::at(loc, format!("duplicate {what} '{id}'")));
        }
    }
}

/// Writes the canonical CSV form: shortest round-trip decimal for every value.
pub fn write_enterprise_model<W: Write>(model: &EnterpriseModel, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let to_io = |e: csv::Error| Error::io("<csv output>", e.into());
    let mut header = Vec::with_capacity(model.n() + 1);
    header.push("period".to_string());
    header.extend(model.process_ids().iter().cloned());
    w.write_record(&header).map_err(to_io)?;
    for (period, row) in model.rows() {
        let mut rec = Vec::with_capacity(row.len() + 1);
        rec.push(period.to_string());
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(to_io)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

pub fn enterprise_model_to_csv(model: &EnterpriseModel) -> String {
    let mut buf = Vec::new();
    write_enterprise_model(model, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<EnterpriseModel> {
        parse_enterprise_model(text, "test.csv", "base")
    }

    fn messages(err: Error) -> Vec<String> {
        err.diagnostics().iter().map(|d| d.message.clone()).collect()
    }

    #[test]
    fn three_rows_two_processes() {
        let m = parse("period,a,b\n1,10,20\n2,11,21\n3,12,22\n").unwrap();
        assert_eq!(m.periods(), 3);
        assert_eq!(m.n(), 2);
        assert_eq!(m.row(2), &[11.0, 21.0]);
        assert_eq!(m.process_ids(), &["a".to_string(), "b".to_string()]);
        assert_eq!(m.label(), "base");
    }

    #[test]
    fn duplicate_process_id() {
        let err = parse("period,a,a\n1,1,2\n").unwrap_err();
        let msgs = messages(err);
        assert!(msgs.iter().any(|m| m.contains("duplicate process id")), "{msgs:?}");
        assert_eq!(
            parse("period,a,a\n1,1,2\n").unwrap_err().diagnostics()[0].location,
            Some(Location::cell(1, 3))
        );
    }

    #[test]
    fn located_errors() {
        let err = parse("period,a,b\n1,1,2\n2,x,3\n3,4\n3,1,1\n").unwrap_err();
        let d = err.diagnostics();
        assert_eq!(d[0].location, Some(Location::cell(3, 2)));
        assert!(d[0].message.contains("non-numeric cell"));
        assert_eq!(d[1].location, Some(Location::line(4)));
        assert!(d[1].message.contains("ragged row"));
        assert_eq!(d.len(), 2);

        let err = parse("period,a\n1,1\n1,2\n").unwrap_err();
        assert!(messages(err)[0].contains("duplicate period index 1"));

        let err = parse("period,a\n1,1\n3,2\n").unwrap_err();
        assert!(messages(err)[0].contains("period gap"));
    }

    #[test]
    fn empty_inputs() {
        assert!(messages(parse("").unwrap_err())[0].contains("empty file"));
        assert!(messages(parse("period,a\n").unwrap_err())[0].contains("no data rows"));
        assert!(messages(parse("period\n1\n").unwrap_err())[0].contains("no process columns"));
    }

    #[test]
    fn rejects_non_finite() {
        for bad in ["NaN", "inf", "-infinity"] {
            let err = parse(&format!("period,a\n1,1\n2,{bad}\n")).unwrap_err();
            let d = &err.diagnostics()[0];
            assert_eq!(d.location, Some(Location::cell(3, 2)));
            assert!(d.message.contains("non-finite"), "{}", d.message);
        }
    }

    #[test]
    fn prehistory_rows() {
        let m = parse("period,a\n-1,5\n0,6\n1,7\n2,8\n").unwrap();
        assert_eq!(m.prehistory(), 2);
        assert_eq!(m.periods(), 2);
        assert_eq!(m.value(0, 0), 6.0);
        // pre-history is outside the reporting horizon
        assert_eq!(total_expense(&m), 15.0);
        assert!(parse("period,a\n-1,5\n0,6\n").is_err());
    }

    #[test]
    fn total_expense_examples() {
        let m = EnterpriseModel::new(
            "m",
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
        )
        .unwrap();
        assert_eq!(total_expense(&m), 10.0);
        let z = EnterpriseModel::new("z", vec!["a".into()], vec![vec![0.0]; 4]).unwrap();
        assert_eq!(total_expense(&z), 0.0);
    }

    #[test]
    fn canonical_round_trip() {
        let text = "period,a,b\n0,-1.5,2\n1,0.1,1e-3\n2,12345.678,-0\n";
        let m = parse(text).unwrap();
        let out = enterprise_model_to_csv(&m);
        assert_eq!(out, "period,a,b\n0,-1.5,2\n1,0.1,0.001\n2,12345.678,-0\n");
        assert_eq!(enterprise_model_to_csv(&parse(&out).unwrap()), out);
    }

    #[test]
    fn constructor_validation() {
        assert!(EnterpriseModel::new("m", vec![], vec![vec![]]).is_err());
        assert!(EnterpriseModel::new("m", vec!["a".into()], vec![]).is_err());
        assert!(EnterpriseModel::new("m", vec!["a".into()], vec![vec![f64::NAN]]).is_err());
        assert!(EnterpriseModel::new("m", vec!["a".into()], vec![vec![1.0, 2.0]]).is_err());
    }
}
