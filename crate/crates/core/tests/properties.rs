mod support;

use proptest::prelude::*;
use twinsight_core::model::enterprise_model_to_csv;
use twinsight_core::{
    apply_scenario, compare_modes, correlation_matrix, parse_enterprise_model, run_indicator,
    run_indicator_parallel, total_expense, CompetencyMatrix, Effect, EnterpriseModel,
    InterventionScenario, WindowConfig,
};

fn transform_column(m: &EnterpriseModel, j: usize, f: impl Fn(f64) -> f64) -> EnterpriseModel {
    let rows = m
        .rows()
        .map(|(_, r)| {
            let mut r = r.to_vec();
            r[j] = f(r[j]);
            r
        })
        .collect();
    EnterpriseModel::new("m", m.process_ids().to_vec(), rows).unwrap()
}

fn arb_matrix_and_scenario(
    n: usize,
    periods: usize,
) -> impl Strategy<Value = (CompetencyMatrix, InterventionScenario)> {
    (1usize..=4).prop_flat_map(move |m| {
        (
            prop::collection::vec(prop::collection::vec(0u8..=1, n), m),
            prop::collection::vec((any::<bool>(), -50.0f64..50.0, 0.0f64..3.0), m),
            1..=periods as i64,
        )
            .prop_map(move |(entries, effects, activation)| {
                let cids: Vec<String> = (0..entries.len()).map(|i| format!("c{i}")).collect();
                let cm = CompetencyMatrix::new(cids.clone(), support::ids(n), entries).unwrap();
                let effects = effects
                    .into_iter()
                    .enumerate()
                    .filter(|(_, (on, _, _))| *on)
                    .map(|(i, (_, add, mul))| Effect::new(cids[i].clone(), add, mul))
                    .collect();
                let sc = InterventionScenario::new(activation, effects, 0.0, 0.0).unwrap();
                (cm, sc)
            })
    })
}

fn arb_model_with_scenario(
) -> impl Strategy<Value = (EnterpriseModel, CompetencyMatrix, InterventionScenario)> {
    support::arb_model(5, 30).prop_flat_map(|m| {
        let (n, t) = (m.n(), m.periods());
        arb_matrix_and_scenario(n, t).prop_map(move |(cm, sc)| (m.clone(), cm, sc))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn snapshots_are_symmetric_and_bounded(m in support::arb_model(6, 30), cfg in support::arb_window()) {
        for t in 1..=m.last_period() {
            let Ok(s) = correlation_matrix(&m, t, &cfg) else { continue };
            for i in 0..m.n() {
                if !s.is_degenerate(i) {
                    prop_assert_eq!(s.r(i, i), 1.0);
                }
                for j in 0..m.n() {
                    prop_assert_eq!(s.r(i, j).to_bits(), s.r(j, i).to_bits());
                    prop_assert!(s.r(i, j).abs() <= 1.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn index_lies_between_one_and_n(m in support::arb_model(6, 30), cfg in support::arb_window()) {
        let r = run_indicator(&m, &cfg).unwrap();
        let n = m.n() as f64;
        for t in 1..=r.periods() as i64 {
            for i in 0..m.n() {
                let v = r.value(t, i);
                if r.is_degenerate(t, i) {
                    prop_assert_eq!(v, 0.0);
                } else {
                    prop_assert!((1.0..=n).contains(&v), "V={} n={}", v, n);
                }
            }
            let row_sum = r.period_row(t).iter().fold(0.0, |a, v| a + v);
            prop_assert_eq!(row_sum.to_bits(), r.total(t).to_bits());
        }
        let grand = r.per_period_total.iter().fold(0.0, |a, v| a + v);
        prop_assert_eq!(grand.to_bits(), r.grand_total.to_bits());
    }

    #[test]
    fn affine_and_sign_invariance(
        m in support::arb_model(5, 30),
        cfg in support::arb_window(),
        j in 0usize..5,
        a in 0.01f64..100.0,
        b in -1e4f64..1e4,
    ) {
        let j = j % m.n();
        let base = run_indicator(&m, &cfg).unwrap();
        let scaled = run_indicator(&transform_column(&m, j, |x| a * x + b), &cfg).unwrap();
        let negated = run_indicator(&transform_column(&m, j, |x| -x), &cfg).unwrap();
        for t in 1..=base.periods() as i64 {
            for i in 0..m.n() {
                prop_assert!((base.value(t, i) - scaled.value(t, i)).abs() < 1e-9);
                prop_assert!((base.value(t, i) - negated.value(t, i)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn permutation_equivariance(m in support::arb_model(6, 30), cfg in support::arb_window(), seed in any::<u64>()) {
        let n = m.n();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let rows = m.rows().map(|(_, r)| perm.iter().map(|&p| r[p]).collect()).collect();
        let ids = perm.iter().map(|&p| m.process_ids()[p].clone()).collect();
        let pm = EnterpriseModel::new("m", ids, rows).unwrap();
        let a = run_indicator(&m, &cfg).unwrap();
        let b = run_indicator(&pm, &cfg).unwrap();
        for t in 1..=a.periods() as i64 {
            for (new, &old) in perm.iter().enumerate() {
                prop_assert!((a.value(t, old) - b.value(t, new)).abs() < 1e-12);
            }
            prop_assert!((a.total(t) - b.total(t)).abs() < 1e-9);
        }
        prop_assert!((total_expense(&m) - total_expense(&pm)).abs() <= 1e-9 * total_expense(&m).abs().max(1.0));
    }

    #[test]
    fn null_scenario_is_bit_identical((m, cm, mut sc) in arb_model_with_scenario(), cfg in support::arb_window()) {
        sc.effects.clear();
        let controlled = apply_scenario(&m, &cm, &sc).unwrap();
        prop_assert_eq!(controlled.model(), &m);
        let a = run_indicator(&m, &cfg).unwrap();
        let b = run_indicator(controlled.model(), &cfg).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn pre_activation_rows_untouched_and_accounting_holds((m, cm, sc) in arb_model_with_scenario()) {
        let out = apply_scenario(&m, &cm, &sc).unwrap();
        for t in 1..sc.activation_period {
            prop_assert_eq!(out.row(t), m.row(t));
        }
        let mut direct = 0.0;
        for t in 1..=m.last_period() {
            for j in 0..m.n() {
                direct += out.value(t, j) - m.value(t, j);
            }
        }
        let tol = 1e-9 * total_expense(&m).abs().max(1e3);
        prop_assert!((total_expense(&out) - (total_expense(&m) + out.applied_delta)).abs() <= tol);
        prop_assert!((direct - out.applied_delta).abs() <= tol);
    }

    #[test]
    fn comparison_is_antisymmetric((m, cm, sc) in arb_model_with_scenario(), cfg in support::arb_window()) {
        let out = apply_scenario(&m, &cm, &sc).unwrap();
        let a = run_indicator(&m, &cfg).unwrap();
        let b = run_indicator(out.model(), &cfg).unwrap();
        let ab = compare_modes(&a, &b).unwrap();
        let ba = compare_modes(&b, &a).unwrap();
        prop_assert!(ab.delta_v == -ba.delta_v);
        prop_assert_eq!(ab.delta_v, b.grand_total - a.grand_total);
    }

    #[test]
    fn parallel_matches_sequential(m in support::arb_model(6, 40), cfg in support::arb_window()) {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        prop_assert_eq!(run_indicator(&m, &cfg).unwrap(), run_indicator_parallel(&m, &cfg, &pool).unwrap());
    }

    #[test]
    fn csv_round_trip(m in support::arb_model(5, 20)) {
        let text = enterprise_model_to_csv(&m);
        let back = parse_enterprise_model(&text, "rt", "m").unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(enterprise_model_to_csv(&back), text);
    }

    #[test]
    fn total_expense_ignores_row_order(m in support::arb_model(5, 20)) {
        let mut rows: Vec<Vec<f64>> = m.rows().map(|(_, r)| r.to_vec()).collect();
        rows.reverse();
        let rev = EnterpriseModel::new("m", m.process_ids().to_vec(), rows).unwrap();
        prop_assert!((total_expense(&m) - total_expense(&rev)).abs() <= 1e-9 * 1e3 * m.row_count() as f64);
    }
}

#[test]
fn saturated_identical_columns_reach_n() {
    let rows: Vec<Vec<f64>> = (0..20).map(|t| vec![((t * 37) % 11) as f64; 4]).collect();
    let m = support::model_from_rows(rows);
    let r = run_indicator(&m, &WindowConfig::growing(6).unwrap()).unwrap();
    for t in 3..=20 {
        for i in 0..4 {
            assert_eq!(r.value(t, i), 4.0);
        }
    }
}
