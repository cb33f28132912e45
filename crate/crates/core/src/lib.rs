//! Enterprise digital-twin analytics.
//!
//! An enterprise is modelled as `n` process indicator series (expenses and
//! income, thousand rubles per period). Each operating mode is scored by a
//! sliding-window correlation integral indicator: for every period `t` the
//! trailing window of the series is z-scored, its correlation matrix is
//! formed, and process `i` receives `V_i(t) = sum_j |r_ij(t)|`. Summing over
//! processes and periods gives the grand total `V`.
//!
//! Competency interventions are expressed as a binary competency-to-process
//! mapping plus a scenario of additive and multiplicative effects applied from
//! an activation period onward under a resource budget. Comparing the
//! intervention mode against the baseline yields `delta_v`.

use std::path::Path;

pub mod competency;
pub mod config;
pub mod error;
pub mod format;
pub mod indicator;
pub mod model;
pub mod report;
pub mod scenario;
pub mod synth;

pub use competency::{load_competency_matrix, parse_competency_matrix, CompetencyMatrix};
pub use error::{Diagnostic, Error, Location, Report, Result};
pub use indicator::{
    correlation_matrix, indicator_dynamics, integral_index, run_indicator,
    run_indicator_parallel, standardize_columns, window_matrix, CorrelationSnapshot,
    IndicatorResult, WarmupPolicy, WindowConfig,
};
pub use model::{
    load_enterprise_model, parse_enterprise_model, total_expense, write_enterprise_model,
    EnterpriseModel,
};
pub use scenario::{
    apply_scenario, check_budget, compare_modes, load_scenario, parse_scenario,
    scenario_cost_projection, BudgetStatus, ControlledSeries, Effect, InterventionScenario,
    ModeComparison,
};
pub use synth::{generate, SplitMix64, SynthSpec};

pub(crate) fn read_text(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|e| {
        Error::invalid(
            path.display().to_string(),
            vec![Diagnostic::general(format!("not valid UTF-8: {e}"))],
        )
    })
}

/// Splits CSV text into `(line, fields)` records with trimmed fields.
/// Blank lines are skipped.
pub(crate) fn csv_records(text: &str) -> std::result::Result<Vec<(usize, Vec<String>)>, Diagnostic> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let loc = e.position().map(|p| Location::line(p.line() as usize));
            Diagnostic {
                location: loc,
                message: format!("malformed csv: {e}"),
            }
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        out.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(out)
}
