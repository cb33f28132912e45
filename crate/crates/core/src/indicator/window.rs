use crate::error::{Error, Result};
use crate::model::EnterpriseModel;

use super::{WarmupPolicy, WindowConfig};

/// Trailing observations before period `t`: row `0` is lag 1 (period `t-1`),
/// the last row is lag `L`. Columns follow the model's process order.
#[derive(Debug, Clone, PartialEq)]
pub struct LagWindow {
    pub t: i64,
    periods: Vec<i64>,
    n: usize,
    data: Vec<f64>,
}

impl LagWindow {
    pub fn lags(&self) -> usize {
        self.periods.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Period observed at each lag row.
    pub fn periods(&self) -> &[i64] {
        &self.periods
    }

    pub fn row(&self, lag_row: usize) -> &[f64] {
        &self.data[lag_row * self.n..(lag_row + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(j).step_by(self.n).copied()
    }

    /// Builds a window from explicit rows; used for standalone standardization.
    pub fn from_rows(t: i64, rows: &[Vec<f64>]) -> Self {
        let n = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == n), "ragged window rows");
        Self {
            t,
            periods: (1..=rows.len() as i64).map(|l| t - l).collect(),
            n,
            data: rows.concat(),
        }
    }
}

/// Number of stored rows strictly before `t`.
pub(crate) fn available_lags(series: &EnterpriseModel, t: i64) -> usize {
    (t - series.first_period()).max(0) as usize
}

/// Lag matrix for period `t`. Under `GrowingWindow` it holds `min(k, history)`
/// rows; under `Skip` exactly `k` rows, failing when history is shorter.
pub fn window_matrix(series: &EnterpriseModel, t: i64, cfg: &WindowConfig) -> Result<LagWindow> {
    if t > series.last_period() {
        return Err(Error::config(
            "period",
            format!("{t} is past the last period {}", series.last_period()),
        ));
    }
    let available = available_lags(series, t);
    let lags = match cfg.warmup {
        WarmupPolicy::GrowingWindow => cfg.k.min(available),
        WarmupPolicy::Skip => cfg.k,
    };
    if lags == 0 || available < lags {
        return Err(Error::InsufficientHistory {
            t,
            available,
            required: lags.max(1),
        });
    }
    let mut periods = Vec::with_capacity(lags);
    let mut data = Vec::with_capacity(lags * series.n());
    for l in 1..=lags as i64 {
        let p = t - l;
        periods.push(p);
        data.extend_from_slice(series.row(p));
    }
    Ok(LagWindow {
        t,
        periods,
        n: series.n(),
        data,
    })
}

/// Column z-scores of a window, row-major like the source window.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedWindow {
    rows: usize,
    n: usize,
    z: Vec<f64>,
    degenerate: Vec<bool>,
}

impl StandardizedWindow {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.z[row * self.n + col]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.z.iter().skip(j).step_by(self.n).copied()
    }

    pub fn is_degenerate(&self, j: usize) -> bool {
        self.degenerate[j]
    }

    pub fn degenerate_mask(&self) -> &[bool] {
        &self.degenerate
    }

    pub fn degenerate_columns(&self) -> Vec<usize> {
        (0..self.n).filter(|&j| self.degenerate[j]).collect()
    }
}

/// Relative spread below which a column counts as constant.
const DEGENERATE_REL_SD: f64 = 64.0 * f64::EPSILON;

/// Z-scores each column with its mean and sample standard deviation
/// (divisor `L-1`). Zero-variance columns come back zero-filled and flagged.
pub fn standardize_columns(window: &LagWindow) -> Result<StandardizedWindow> {
    let rows = window.lags();
    if rows < 2 {
        return Err(Error::InsufficientHistory {
            t: window.t,
            available: rows,
            required: 2,
        });
    }
    let n = window.n();
    let mut z = vec![0.0; rows * n];
    let mut degenerate = vec![false; n];
    let denom = (rows - 1) as f64;
    for j in 0..n {
        let mut sum = 0.0;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for x in window.column(j) {
            sum += x;
            lo = lo.min(x);
            hi = hi.max(x);
        }
        if lo == hi {
            degenerate[j] = true;
            continue;
        }
        let mean = sum / rows as f64;
        let ss: f64 = window.column(j).map(|x| (x - mean) * (x - mean)).sum();
        let sd = (ss / denom).sqrt();
        let scale = lo.abs().max(hi.abs());
        if !(sd > DEGENERATE_REL_SD * scale) {
            degenerate[j] = true;
            continue;
        }
        for (l, x) in window.column(j).enumerate() {
            z[l * n + j] = (x - mean) / sd;
        }
    }
    Ok(StandardizedWindow {
        rows,
        n,
        z,
        degenerate,
    })
}
