use crate::error::{Error, Result};
use crate::model::EnterpriseModel;

use super::window::{available_lags, standardize_columns, window_matrix};
use super::{WarmupPolicy, WindowConfig};

/// Correlation matrix of the window ending before period `t`.
///
/// When fewer than `min_lags` rows were available the snapshot is marked
/// insufficient: every column is flagged degenerate and the matrix is the
/// identity.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSnapshot {
    pub t: i64,
    n: usize,
    matrix: Vec<f64>,
    pub window_rows_used: usize,
    degenerate: Vec<bool>,
    sufficient: bool,
}

impl CorrelationSnapshot {
    fn insufficient(t: i64, n: usize, rows: usize) -> Self {
        Self {
            t,
            n,
            matrix: identity(n),
            window_rows_used: rows,
            degenerate: vec![true; n],
            sufficient: false,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.n..(i + 1) * self.n]
    }

    pub fn is_sufficient(&self) -> bool {
        self.sufficient
    }

    pub fn is_degenerate(&self, i: usize) -> bool {
        self.degenerate[i]
    }

    pub fn degenerate_mask(&self) -> &[bool] {
        &self.degenerate
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// `r_ij = 1/(L-1) * sum_l z_i(l) z_j(l)` over the z-scored window, with
/// `L-1` taken as the computed `sqrt(sum z_i^2 * sum z_j^2)`.
///
/// Each unordered pair is computed once, so the matrix is exactly symmetric.
/// Pairs involving a degenerate column are 0; the diagonal is 1.
pub fn correlation_matrix(
    series: &EnterpriseModel,
    t: i64,
    cfg: &WindowConfig,
) -> Result<CorrelationSnapshot> {
    let n = series.n();
    if cfg.warmup == WarmupPolicy::GrowingWindow {
        let rows = cfg.k.min(available_lags(series, t));
        if rows < cfg.min_lags {
            if t > series.last_period() {
                // let window_matrix report the range error
                window_matrix(series, t, cfg)?;
            }
            return Ok(CorrelationSnapshot::insufficient(t, n, rows));
        }
    }
    let window = window_matrix(series, t, cfg)?;
    let rows = window.lags();
    if rows < cfg.min_lags {
        return Err(Error::InsufficientHistory {
            t,
            available: rows,
            required: cfg.min_lags,
        });
    }
    let z = standardize_columns(&window)?;
    // sum of squared z-scores is L-1 up to rounding; dividing by the exact
    // per-pair norm keeps identical columns at exactly 1
    let norms: Vec<f64> = (0..n).map(|j| z.column(j).map(|x| x * x).sum()).collect();
    let mut matrix = identity(n);
    for i in 0..n {
        if z.is_degenerate(i) {
            continue;
        }
        for j in (i + 1)..n {
            if z.is_degenerate(j) {
                continue;
            }
            let mut acc = 0.0;
            for l in 0..rows {
                acc += z.get(l, i) * z.get(l, j);
            }
            let r = (acc / (norms[i] * norms[j]).sqrt()).clamp(-1.0, 1.0);
            matrix[i * n + j] = r;
            matrix[j * n + i] = r;
        }
    }
    Ok(CorrelationSnapshot {
        t,
        n,
        matrix,
        window_rows_used: rows,
        degenerate: z.degenerate_mask().to_vec(),
        sufficient: true,
    })
}

/// `V_i(t) = sum_j |r_ij(t)|`, diagonal included, summed in ascending `j`.
/// Degenerate processes score 0.
pub fn integral_index(snapshot: &CorrelationSnapshot) -> Vec<f64> {
    (0..snapshot.n())
        .map(|i| {
            if snapshot.is_degenerate(i) {
                0.0
            } else {
                snapshot.row(i).iter().fold(0.0, |acc, r| acc + r.abs())
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(cols: &[&[f64]]) -> EnterpriseModel {
        let rows = cols[0].len();
        let data = (0..rows).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
        let ids = (0..cols.len()).map(|j| format!("p{j}")).collect();
        EnterpriseModel::new("m", ids, data).unwrap()
    }

    /// Snapshot at the period right after the data, window covering all rows.
    fn snap(cols: &[&[f64]]) -> CorrelationSnapshot {
        let mut padded: Vec<Vec<f64>> = cols.iter().map(|c| c.to_vec()).collect();
        for c in &mut padded {
            c.push(0.0);
        }
        let refs: Vec<&[f64]> = padded.iter().map(Vec::as_slice).collect();
        let m = model(&refs);
        let k = cols[0].len();
        let cfg = WindowConfig::new(k, 2, WarmupPolicy::Skip).unwrap();
        correlation_matrix(&m, k as i64 + 1, &cfg).unwrap()
    }

    #[test]
    fn identical_and_negated_columns() {
        let a = [1.0, 3.0, 2.0, 5.0];
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        let s = snap(&[&a, &a]);
        assert_eq!(s.r(0, 1), 1.0);
        let s = snap(&[&a, &neg]);
        assert_eq!(s.r(0, 1), -1.0);
    }

    #[test]
    fn textbook_pearson() {
        // centered dot 3, norms sqrt(5) * sqrt(5)
        let s = snap(&[&[4.0, 3.0, 2.0, 1.0], &[3.0, 4.0, 1.0, 2.0]]);
        assert!((s.r(0, 1) - 0.6).abs() < 1e-12);
        assert_eq!(s.r(0, 1).to_bits(), s.r(1, 0).to_bits());
        assert_eq!(s.r(0, 0), 1.0);
        let v = integral_index(&s);
        assert!((v[0] - 1.6).abs() < 1e-12 && (v[1] - 1.6).abs() < 1e-12);
    }

    #[test]
    fn single_process_scores_one() {
        let s = snap(&[&[1.0, 4.0, 2.0]]);
        assert_eq!(integral_index(&s), vec![1.0]);
    }

    #[test]
    fn three_identical_columns_score_n() {
        let a = [2.0, 7.0, 1.0, 8.0, 2.5];
        let v = integral_index(&snap(&[&a, &a, &a]));
        assert_eq!(v, vec![3.0, 3.0, 3.0]);
    }

    #[test]
    fn degenerate_columns() {
        let s = snap(&[&[1.0, 2.0, 4.0], &[5.0, 5.0, 5.0]]);
        assert_eq!(s.r(0, 1), 0.0);
        assert_eq!(s.r(1, 1), 1.0);
        assert!(s.is_degenerate(1));
        assert_eq!(integral_index(&s), vec![1.0, 0.0]);
    }

    #[test]
    fn insufficient_growing_window_is_a_marker() {
        let m = model(&[&[1.0, 2.0, 3.0, 1.0], &[2.0, 1.0, 0.0, 4.0]]);
        let cfg = WindowConfig::new(12, 3, WarmupPolicy::GrowingWindow).unwrap();
        let s = correlation_matrix(&m, 3, &cfg).unwrap();
        assert!(!s.is_sufficient());
        assert_eq!(s.window_rows_used, 2);
        assert_eq!(integral_index(&s), vec![0.0, 0.0]);
        let s = correlation_matrix(&m, 1, &cfg).unwrap();
        assert_eq!(s.window_rows_used, 0);
        assert!(correlation_matrix(&m, 9, &cfg).is_err());

        let skip = WindowConfig::new(3, 2, WarmupPolicy::Skip).unwrap();
        assert!(matches!(
            correlation_matrix(&m, 3, &skip),
            Err(Error::InsufficientHistory { .. })
        ));
        assert!(correlation_matrix(&m, 4, &skip).unwrap().is_sufficient());
    }
}
