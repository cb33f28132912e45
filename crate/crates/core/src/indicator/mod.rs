//! Sliding-window correlation integral indicator.
//!
//! For each reported period `t` the trailing window of up to `k` lags is
//! z-scored column by column (sample standard deviation), the correlation
//! matrix `R(t)` is formed from the z-scores, and each process scores the
//! absolute row sum `V_i(t) = sum_j |r_ij(t)|`. Per-period totals sum over
//! processes in ascending order; the grand total sums the per-period totals
//! in ascending period order. The fixed order makes results bit-identical
//! between sequential and parallel evaluation.

mod correlation;
mod window;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{total_expense, EnterpriseModel};

pub use correlation::{correlation_matrix, integral_index, CorrelationSnapshot};
pub use window::{standardize_columns, window_matrix, LagWindow, StandardizedWindow};

/// How periods without a full `k`-lag history are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum WarmupPolicy {
    /// Use `min(k, history)` lags; fewer than `min_lags` yields a flagged zero.
    #[serde(rename = "growing")]
    GrowingWindow,
    /// Require all `k` lags; shorter histories are flagged zeros.
    #[serde(rename = "skip")]
    Skip,
}

impl WarmupPolicy {
    pub fn as_str(&self) -> &'static str {
        match self {
            WarmupPolicy::GrowingWindow => "growing",
            WarmupPolicy::Skip => "skip",
        }
    }
}

impl fmt::Display for WarmupPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WarmupPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "growing" | "growing_window" => Ok(WarmupPolicy::GrowingWindow),
            "skip" => Ok(WarmupPolicy::Skip),
            other => Err(Error::config(
                "warmup policy",
                format!("'{other}' (expected growing or skip)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WindowConfig {
    pub k: usize,
    pub min_lags: usize,
    pub warmup: WarmupPolicy,
}

impl WindowConfig {
    pub const DEFAULT_K: usize = 12;

    pub fn new(k: usize, min_lags: usize, warmup: WarmupPolicy) -> Result<Self> {
        if k < 2 {
            return Err(Error::config("window", format!("k = {k}, must be >= 2")));
        }
        if min_lags < 2 || min_lags > k {
            return Err(Error::config(
                "window",
                format!("min_lags = {min_lags}, must lie in 2..={k}"),
            ));
        }
        Ok(Self { k, min_lags, warmup })
    }

    /// Growing window of length `k` with the minimum of 2 lags.
    pub fn growing(k: usize) -> Result<Self> {
        Self::new(k, 2, WarmupPolicy::GrowingWindow)
    }

    /// Lags a period needs before it is scored.
    pub fn required_lags(&self) -> usize {
        match self.warmup {
            WarmupPolicy::GrowingWindow => self.min_lags,
            WarmupPolicy::Skip => self.k,
        }
    }
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            k: Self::DEFAULT_K,
            min_lags: 2,
            warmup: WarmupPolicy::GrowingWindow,
        }
    }
}

/// Indicator values of one operating mode over periods `1..=T_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorResult {
    pub mode_label: String,
    pub process_ids: Vec<String>,
    per_process: Vec<f64>,
    pub per_period_total: Vec<f64>,
    pub grand_total: f64,
    /// `(t, process index)` pairs scored 0 because the window was degenerate,
    /// sorted by period then process.
    pub degenerate_flags: Vec<(i64, usize)>,
    /// `None` for results replayed from precomputed values.
    pub window: Option<WindowConfig>,
    /// Total expense of the scored series, when known.
    pub input_total: Option<f64>,
}

impl IndicatorResult {
    fn assemble(
        mode_label: String,
        process_ids: Vec<String>,
        rows: Vec<Vec<f64>>,
        degenerate_flags: Vec<(i64, usize)>,
        window: Option<WindowConfig>,
        input_total: Option<f64>,
    ) -> Self {
        let per_period_total: Vec<f64> = rows
            .iter()
            .map(|r| r.iter().fold(0.0, |acc, v| acc + v))
            .collect();
        let grand_total = per_period_total.iter().fold(0.0, |acc, v| acc + v);
        Self {
            mode_label,
            process_ids,
            per_process: rows.concat(),
            per_period_total,
            grand_total,
            degenerate_flags,
            window,
            input_total,
        }
    }

    /// Treats the model's values as already-computed `V_i(t)`; per-period
    /// totals are their row sums. A single-column file replays published
    /// per-period totals directly.
    pub fn from_precomputed(model: &EnterpriseModel) -> Result<Self> {
        if model.prehistory() > 0 {
            return Err(Error::config(
                "replay",
                "precomputed indicator files cannot carry pre-history rows",
            ));
        }
        let rows = model.rows().map(|(_, r)| r.to_vec()).collect();
        Ok(Self::assemble(
            model.label().to_string(),
            model.process_ids().to_vec(),
            rows,
            Vec::new(),
            None,
            None,
        ))
    }

    /// Number of reported periods `T_max`.
    pub fn periods(&self) -> usize {
        self.per_period_total.len()
    }

    pub fn n(&self) -> usize {
        self.process_ids.len()
    }

    /// `V_i(t)` for `t` in `1..=T_max`.
    pub fn value(&self, t: i64, i: usize) -> f64 {
        self.period_row(t)[i]
    }

    pub fn period_row(&self, t: i64) -> &[f64] {
        assert!(t >= 1 && t as usize <= self.periods(), "period {t} out of range");
        let n = self.n();
        let idx = (t - 1) as usize;
        &self.per_process[idx * n..(idx + 1) * n]
    }

    pub fn total(&self, t: i64) -> f64 {
        self.per_period_total[(t - 1) as usize]
    }

    pub fn is_degenerate(&self, t: i64, i: usize) -> bool {
        self.degenerate_flags.binary_search(&(t, i)).is_ok()
    }

    pub fn degenerate_count(&self) -> usize {
        self.degenerate_flags.len()
    }

    pub fn is_replay(&self) -> bool {
        self.window.is_none()
    }
}

fn score_period(series: &EnterpriseModel, t: i64, cfg: &WindowConfig) -> Result<(Vec<f64>, Vec<bool>)> {
    let n = series.n();
    if window::available_lags(series, t) < cfg.required_lags() {
        return Ok((vec![0.0; n], vec![true; n]));
    }
    let snapshot = correlation_matrix(series, t, cfg)?;
    Ok((integral_index(&snapshot), snapshot.degenerate_mask().to_vec()))
}

fn collect(
    series: &EnterpriseModel,
    cfg: &WindowConfig,
    scored: Vec<(Vec<f64>, Vec<bool>)>,
) -> IndicatorResult {
    let mut rows = Vec::with_capacity(scored.len());
    let mut flags = Vec::new();
    for (idx, (values, degenerate)) in scored.into_iter().enumerate() {
        let t = idx as i64 + 1;
        flags.extend(
            degenerate
                .iter()
                .enumerate()
                .filter(|(_, &d)| d)
                .map(|(i, _)| (t, i)),
        );
        rows.push(values);
    }
    IndicatorResult::assemble(
        series.label().to_string(),
        series.process_ids().to_vec(),
        rows,
        flags,
        Some(*cfg),
        Some(total_expense(series)),
    )
}

/// Scores every period `1..=T_max` of `series`.
pub fn run_indicator(series: &EnterpriseModel, cfg: &WindowConfig) -> Result<IndicatorResult> {
    let scored = (1..=series.last_period())
        .map(|t| score_period(series, t, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(collect(series, cfg, scored))
}

/// Same as [`run_indicator`], with periods scored on `pool`. Output is
/// bit-identical to the sequential run for any pool size.
pub fn run_indicator_parallel(
    series: &EnterpriseModel,
    cfg: &WindowConfig,
    pool: &rayon::ThreadPool,
) -> Result<IndicatorResult> {
    let periods: Vec<i64> = (1..=series.last_period()).collect();
    let scored = pool.install(|| {
        periods
            .par_iter()
            .map(|&t| score_period(series, t, cfg))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(collect(series, cfg, scored))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TotalRecord {
    pub t: i64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub t: i64,
    pub process: String,
    pub value: f64,
}

/// Plot-ready long-format view of a result.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dynamics {
    pub totals: Vec<TotalRecord>,
    pub traces: Vec<TraceRecord>,
}

/// Per-period totals and per-process traces, by period then process column.
pub fn indicator_dynamics(result: &IndicatorResult) -> Dynamics {
    let mut out = Dynamics::default();
    for t in 1..=result.periods() as i64 {
        out.totals.push(TotalRecord {
            t,
            total: result.total(t),
        });
        for (i, pid) in result.process_ids.iter().enumerate() {
            out.traces.push(TraceRecord {
                t,
                process: pid.clone(),
                value: result.value(t, i),
            });
        }
    }
    out
}
