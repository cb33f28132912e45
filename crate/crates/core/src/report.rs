//! Report rendering. CSV numbers use [`sig6`]; JSON carries full precision.

use serde::Serialize;

use crate::format::sig6;
use crate::indicator::{indicator_dynamics, IndicatorResult};
use crate::scenario::{BudgetStatus, ModeComparison};

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

/// `mode,t,process,V_i`, one line per period and process.
pub fn indicator_csv(result: &IndicatorResult) -> String {
    let rows = (1..=result.periods() as i64).flat_map(|t| {
        result.process_ids.iter().enumerate().map(move |(i, pid)| {
            vec![
                result.mode_label.clone(),
                t.to_string(),
                pid.clone(),
                sig6(result.value(t, i)),
            ]
        })
    });
    csv_string(&["mode", "t", "process", "V_i"], rows)
}

/// `mode,t,total`, one line per period, closed by a `Total` line carrying
/// the grand total.
pub fn totals_csv(result: &IndicatorResult) -> String {
    let rows = (1..=result.periods() as i64)
        .map(|t| {
            vec![
                result.mode_label.clone(),
                t.to_string(),
                sig6(result.total(t)),
            ]
        })
        .chain(std::iter::once(vec![
            result.mode_label.clone(),
            "Total".to_string(),
            sig6(result.grand_total),
        ]));
    csv_string(&["mode", "t", "total"], rows)
}

/// Long-format plot data `t,series,value`: every process trace, then the
/// period total under the series name `total`.
pub fn dynamics_csv(result: &IndicatorResult) -> String {
    let d = indicator_dynamics(result);
    let n = result.n();
    let rows = d.totals.iter().enumerate().flat_map(|(idx, tot)| {
        d.traces[idx * n..(idx + 1) * n]
            .iter()
            .map(|tr| vec![tr.t.to_string(), tr.process.clone(), sig6(tr.value)])
            .chain(std::iter::once(vec![
                tot.t.to_string(),
                "total".to_string(),
                sig6(tot.total),
            ]))
            .collect::<Vec<_>>()
    });
    csv_string(&["t", "series", "value"], rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub mode: String,
    pub grand_total: f64,
    pub degenerate_count: usize,
    pub k: Option<usize>,
    pub policy: String,
}

impl Summary {
    pub fn of(result: &IndicatorResult) -> Self {
        Self {
            mode: result.mode_label.clone(),
            grand_total: result.grand_total,
            degenerate_count: result.degenerate_count(),
            k: result.window.map(|w| w.k),
            policy: result
                .window
                .map_or_else(|| "replay".to_string(), |w| w.warmup.to_string()),
        }
    }
}

/// One-line JSON `{mode, grand_total, degenerate_count, k, policy}`.
pub fn summary_json(result: &IndicatorResult) -> String {
    let mut s = serde_json::to_string(&Summary::of(result)).expect("serializable");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonSummary {
    pub baseline_mode: String,
    pub intervention_mode: String,
    pub baseline_total: f64,
    pub intervention_total: f64,
    pub delta_v: f64,
    pub cost_delta: Option<f64>,
    /// `pass`, `violation`, or `none` when no scenario was involved.
    pub budget_status: String,
}

impl ComparisonSummary {
    pub fn of(cmp: &ModeComparison, budget: Option<BudgetStatus>) -> Self {
        Self {
            baseline_mode: cmp.baseline.mode_label.clone(),
            intervention_mode: cmp.intervention.mode_label.clone(),
            baseline_total: cmp.baseline.grand_total,
            intervention_total: cmp.intervention.grand_total,
            delta_v: cmp.delta_v,
            cost_delta: cmp.cost_delta,
            budget_status: budget.map_or("none", |b| b.as_str()).to_string(),
        }
    }
}

pub fn comparison_json(cmp: &ModeComparison, budget: Option<BudgetStatus>) -> String {
    let mut s = serde_json::to_string(&ComparisonSummary::of(cmp, budget)).expect("serializable");
    s.push('\n');
    s
}

/// `t,baseline,intervention,delta` per period.
pub fn delta_csv(cmp: &ModeComparison) -> String {
    let rows = cmp.per_period_delta.iter().enumerate().map(|(idx, d)| {
        let t = idx as i64 + 1;
        vec![
            t.to_string(),
            sig6(cmp.baseline.total(t)),
            sig6(cmp.intervention.total(t)),
            sig6(*d),
        ]
    });
    csv_string(&["t", "baseline", "intervention", "delta"], rows)
}
