//! Shared test helpers: a naive indicator oracle and seeded input strategies.
#![allow(dead_code)]

use proptest::prelude::*;
use twinsight_core::{EnterpriseModel, WarmupPolicy, WindowConfig};

/// Direct-formula recomputation of every `V_i(t)` with no shared code path:
/// each window is re-read from the model and every pair gets the textbook
/// Pearson coefficient `sum(dx dy) / sqrt(sum(dx^2) sum(dy^2))`.
pub fn naive_indicator(model: &EnterpriseModel, cfg: &WindowConfig) -> Vec<Vec<f64>> {
    let n = model.n();
    let mut out = Vec::new();
    for t in 1..=model.last_period() {
        let history = (t - model.first_period()) as usize;
        let (lags, needed) = match cfg.warmup {
            WarmupPolicy::GrowingWindow => (history.min(cfg.k), cfg.min_lags),
            WarmupPolicy::Skip => (cfg.k, cfg.k),
        };
        if history < needed || lags < cfg.min_lags {
            out.push(vec![0.0; n]);
            continue;
        }
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|j| (1..=lags as i64).map(|l| model.value(t - l, j)).collect())
            .collect();
        let constant: Vec<bool> = cols
            .iter()
            .map(|c| c.iter().all(|x| *x == c[0]))
            .collect();
        let mut row = Vec::with_capacity(n);
        for i in 0..n {
            if constant[i] {
                row.push(0.0);
                continue;
            }
            let mut v = 0.0;
            for j in 0..n {
                if i == j {
                    v += 1.0;
                } else if !constant[j] {
                    v += pearson(&cols[i], &cols[j]).abs();
                }
            }
            row.push(v);
        }
        out.push(row);
    }
    out
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn ids(n: usize) -> Vec<String> {
    (0..n).map(|j| format!("p{j}")).collect()
}

pub fn model_from_rows(rows: Vec<Vec<f64>>) -> EnterpriseModel {
    let n = rows[0].len();
    EnterpriseModel::new("m", ids(n), rows).unwrap()
}

/// Random models with `1..=max_n` processes and `3..=max_t` periods.
pub fn arb_model(max_n: usize, max_t: usize) -> impl Strategy<Value = EnterpriseModel> {
    (1..=max_n, 3..=max_t).prop_flat_map(|(n, t)| {
        prop::collection::vec(prop::collection::vec(-1000.0f64..1000.0, n), t)
            .prop_map(model_from_rows)
    })
}

pub fn arb_window() -> impl Strategy<Value = WindowConfig> {
    (2usize..=16, any::<bool>()).prop_flat_map(|(k, skip)| {
        (2..=k).prop_map(move |min_lags| {
            let policy = if skip {
                WarmupPolicy::Skip
            } else {
                WarmupPolicy::GrowingWindow
            };
            WindowConfig::new(k, min_lags, policy).unwrap()
        })
    })
}
