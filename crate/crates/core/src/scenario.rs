//! Competency intervention scenarios: effect application, budget checks and
//! mode comparison.
//!
//! From the activation period onward, every process covered by at least one
//! effect competency becomes `value * prod(mul) + sum(add)`, with the product
//! and sum taken over covering competencies in matrix row order. Uncovered
//! processes and all earlier periods are copied unchanged.

use std::path::Path;

use crate::competency::CompetencyMatrix;
use crate::config::KeyValues;
use crate::error::{Diagnostic, Error, Location, Result};
use crate::indicator::IndicatorResult;
use crate::model::EnterpriseModel;

/// Per-competency effect on each mapped process, applied per period.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    pub competency_id: String,
    /// Thousand rubles added per period per mapped process.
    pub add: f64,
    pub mul: f64,
    /// Line of the first key defining this effect, when read from a file.
    pub line: Option<usize>,
}

impl Effect {
    pub fn new(competency_id: impl Into<String>, add: f64, mul: f64) -> Self {
        Self {
            competency_id: competency_id.into(),
            add,
            mul,
            line: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterventionScenario {
    /// First period (1-based) the effects apply to.
    pub activation_period: i64,
    pub effects: Vec<Effect>,
    /// Declared lump-sum cost, thousand rubles.
    pub intervention_cost: f64,
    /// Resource limit `C`, thousand rubles.
    pub budget: f64,
    /// Allowed gap between the declared cost and the additive deltas actually
    /// applied before a warning is raised. `None` disables the check.
    pub cost_tolerance: Option<f64>,
}

impl InterventionScenario {
    pub fn new(
        activation_period: i64,
        effects: Vec<Effect>,
        intervention_cost: f64,
        budget: f64,
    ) -> Result<Self> {
        let sc = Self {
            activation_period,
            effects,
            intervention_cost,
            budget,
            cost_tolerance: None,
        };
        let diags = sc.self_check();
        if diags.is_empty() {
            Ok(sc)
        } else {
            Err(Error::invalid("scenario", diags))
        }
    }

    fn self_check(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        if self.activation_period < 1 {
            diags.push(Diagnostic::general(format!(
                "activation_period is {}, must be >= 1",
                self.activation_period
            )));
        }
        if !(self.intervention_cost >= 0.0 && self.intervention_cost.is_finite()) {
            diags.push(Diagnostic::general(format!(
                "intervention_cost is {}, must be finite and >= 0",
                self.intervention_cost
            )));
        }
        if !(self.budget >= 0.0 && self.budget.is_finite()) {
            diags.push(Diagnostic::general(format!(
                "budget is {}, must be finite and >= 0",
                self.budget
            )));
        }
        if let Some(tol) = self.cost_tolerance {
            if !(tol >= 0.0) {
                diags.push(Diagnostic::general(format!("cost_tolerance is {tol}, must be >= 0")));
            }
        }
        for e in &self.effects {
            let at = |msg: String| match e.line {
                Some(l) => Diagnostic::at(Location::line(l), msg),
                None => Diagnostic::general(msg),
            };
            if !e.add.is_finite() {
                diags.push(at(format!("effect '{}': add must be finite", e.competency_id)));
            }
            if !(e.mul >= 0.0 && e.mul.is_finite()) {
                diags.push(at(format!(
                    "effect '{}': mul is {}, must be finite and >= 0",
                    e.competency_id, e.mul
                )));
            }
        }
        diags
    }

    /// Cross-checks effect references and the activation period against a
    /// competency matrix and the model the scenario will run on.
    pub fn check_against(&self, cm: &CompetencyMatrix, model: Option<&EnterpriseModel>) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        for e in &self.effects {
            if cm.competency_index(&e.competency_id).is_none() {
                let msg = format!("unknown competency id '{}'", e.competency_id);
                diags.push(match e.line {
                    Some(l) => Diagnostic::at(Location::line(l), msg),
                    None => Diagnostic::general(msg),
                });
            }
        }
        if let Some(m) = model {
            if self.activation_period > m.last_period() {
                diags.push(Diagnostic::general(format!(
                    "activation_period {} is past the last period {}",
                    self.activation_period,
                    m.last_period()
                )));
            }
        }
        diags
    }
}

const SCENARIO_KEYS: &[&str] = &[
    "activation_period",
    "budget",
    "intervention_cost",
    "cost_tolerance",
];

pub fn load_scenario(path: impl AsRef<Path>) -> Result<InterventionScenario> {
    let path = path.as_ref();
    let text = crate::read_text(path)?;
    parse_scenario(&text, &path.display().to_string())
}

/// Reads `activation_period`, `budget`, `intervention_cost`, optional
/// `cost_tolerance`, and any number of `effect.<competency_id>.add` /
/// `effect.<competency_id>.mul` keys. A missing half of an effect defaults to
/// neutral (`add = 0`, `mul = 1`).
pub fn parse_scenario(text: &str, source: &str) -> Result<InterventionScenario> {
    let kv = KeyValues::parse(text, source)?;
    let mut diags = Vec::new();
    kv.reject_unknown(SCENARIO_KEYS, &["effect."], &mut diags);
    let activation_period = kv.required::<i64>("activation_period", &mut diags);
    let budget = kv.required::<f64>("budget", &mut diags);
    let intervention_cost = kv.optional::<f64>("intervention_cost", &mut diags).unwrap_or(0.0);
    let cost_tolerance = kv.optional::<f64>("cost_tolerance", &mut diags);

    let mut effects: Vec<Effect> = Vec::new();
    for entry in kv.entries() {
        let Some(rest) = entry.key.strip_prefix("effect.") else {
            continue;
        };
        let Some((cid, field)) = rest.rsplit_once('.') else {
            diags.push(Diagnostic::at(
                Location::line(entry.line),
                format!("effect key '{}' must be effect.<competency>.add or .mul", entry.key),
            ));
            continue;
        };
        if cid.is_empty() || !matches!(field, "add" | "mul") {
            diags.push(Diagnostic::at(
                Location::line(entry.line),
                format!("effect key '{}' must be effect.<competency>.add or .mul", entry.key),
            ));
            continue;
        }
        let Ok(value) = entry.value.parse::<f64>() else {
            diags.push(Diagnostic::at(
                Location::line(entry.line),
                format!("invalid value '{}' for '{}'", entry.value, entry.key),
            ));
            continue;
        };
        let idx = match effects.iter().position(|e| e.competency_id == cid) {
            Some(i) => i,
            None => {
                effects.push(Effect {
                    competency_id: cid.to_string(),
                    add: 0.0,
                    mul: 1.0,
                    line: Some(entry.line),
                });
                effects.len() - 1
            }
        };
        if field == "add" {
            effects[idx].add = value;
        } else {
            effects[idx].mul = value;
        }
    }
    if !diags.is_empty() {
        return Err(Error::invalid(source, diags));
    }
    let sc = InterventionScenario {
        activation_period: activation_period.unwrap_or(1),
        effects,
        intervention_cost,
        budget: budget.unwrap_or(0.0),
        cost_tolerance,
    };
    let diags = sc.self_check();
    if !diags.is_empty() {
        return Err(Error::invalid(source, diags));
    }
    Ok(sc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetStatus {
    Pass,
    Violation { cost: f64, budget: f64, excess: f64 },
}

impl BudgetStatus {
    pub fn passed(&self) -> bool {
        matches!(self, BudgetStatus::Pass)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            BudgetStatus::Pass => "pass",
            BudgetStatus::Violation { .. } => "violation",
        }
    }
}

/// `C(V) <= C`: passes iff the declared cost fits the budget.
pub fn check_budget(sc: &InterventionScenario) -> BudgetStatus {
    if sc.intervention_cost <= sc.budget {
        BudgetStatus::Pass
    } else {
        BudgetStatus::Violation {
            cost: sc.intervention_cost,
            budget: sc.budget,
            excess: sc.intervention_cost - sc.budget,
        }
    }
}

/// Total enterprise cost once the intervention is paid for.
pub fn scenario_cost_projection(base_total: f64, sc: &InterventionScenario) -> f64 {
    base_total + sc.intervention_cost
}

/// Process series under a scenario. Identical to the base model before
/// `activation_period`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlledSeries {
    model: EnterpriseModel,
    pub activation_period: i64,
    /// Sum of combined additive deltas over every affected cell.
    pub additive_applied: f64,
    /// Sum of `value' - value` over every affected cell.
    pub applied_delta: f64,
}

impl ControlledSeries {
    pub fn model(&self) -> &EnterpriseModel {
        &self.model
    }

    pub fn into_model(self) -> EnterpriseModel {
        self.model
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.model = self.model.with_label(label);
        self
    }

    /// Warning text when the declared cost and the additive deltas applied
    /// disagree by more than the scenario's tolerance.
    pub fn cost_warning(&self, sc: &InterventionScenario) -> Option<String> {
        let tol = sc.cost_tolerance?;
        let gap = (sc.intervention_cost - self.additive_applied).abs();
        (gap > tol).then(|| {
            format!(
                "declared intervention_cost {} differs from applied additive deltas {} by {} (tolerance {})",
                sc.intervention_cost, self.additive_applied, gap, tol
            )
        })
    }
}

impl std::ops::Deref for ControlledSeries {
    type Target = EnterpriseModel;

    fn deref(&self) -> &EnterpriseModel {
        &self.model
    }
}

pub fn apply_scenario(
    base: &EnterpriseModel,
    cm: &CompetencyMatrix,
    sc: &InterventionScenario,
) -> Result<ControlledSeries> {
    cm.check_against(base)?;
    let diags = sc.check_against(cm, Some(base));
    if !diags.is_empty() {
        return Err(Error::invalid("scenario", diags));
    }

    // combine in competency row order so the result does not depend on the
    // order effects were listed
    let mut active: Vec<(usize, &Effect)> = sc
        .effects
        .iter()
        .map(|e| (cm.competency_index(&e.competency_id).expect("checked above"), e))
        .collect();
    active.sort_by_key(|(i, _)| *i);

    let n = base.n();
    let mut covered = vec![false; n];
    let mut mul = vec![1.0; n];
    let mut add = vec![0.0; n];
    for (i, e) in &active {
        for j in cm.covered_processes(*i) {
            covered[j] = true;
            mul[j] *= e.mul;
            add[j] += e.add;
        }
    }

    let mut additive_applied = 0.0;
    let mut applied_delta = 0.0;
    let model = base.map_from(sc.activation_period, |_, j, v| {
        if !covered[j] {
            return v;
        }
        let out = v * mul[j] + add[j];
        additive_applied += add[j];
        applied_delta += out - v;
        out
    });
    let controlled = ControlledSeries {
        model,
        activation_period: sc.activation_period,
        additive_applied,
        applied_delta,
    };
    if let Some(w) = controlled.cost_warning(sc) {
        log::warn!("{w}");
    }
    Ok(controlled)
}

/// Paired baseline and intervention results.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeComparison {
    pub baseline: IndicatorResult,
    pub intervention: IndicatorResult,
    pub delta_v: f64,
    /// Intervention total expense minus baseline, when both are known.
    pub cost_delta: Option<f64>,
    pub per_period_delta: Vec<f64>,
}

pub fn compare_modes(baseline: &IndicatorResult, intervention: &IndicatorResult) -> Result<ModeComparison> {
    if baseline.periods() != intervention.periods() {
        return Err(Error::ModeMismatch(format!(
            "'{}' has {} periods, '{}' has {}",
            baseline.mode_label,
            baseline.periods(),
            intervention.mode_label,
            intervention.periods()
        )));
    }
    if baseline.n() != intervention.n() {
        return Err(Error::ModeMismatch(format!(
            "'{}' has {} processes, '{}' has {}",
            baseline.mode_label,
            baseline.n(),
            intervention.mode_label,
            intervention.n()
        )));
    }
    if baseline.window != intervention.window {
        return Err(Error::ModeMismatch(format!(
            "window configurations differ ({:?} vs {:?})",
            baseline.window, intervention.window
        )));
    }
    let per_period_delta = baseline
        .per_period_total
        .iter()
        .zip(&intervention.per_period_total)
        .map(|(b, i)| i - b)
        .collect();
    let cost_delta = match (baseline.input_total, intervention.input_total) {
        (Some(b), Some(i)) => Some(i - b),
        _ => None,
    };
    Ok(ModeComparison {
        baseline: baseline.clone(),
        intervention: intervention.clone(),
        delta_v: intervention.grand_total - baseline.grand_total,
        cost_delta,
        per_period_delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::competency::parse_competency_matrix;
    use crate::indicator::{run_indicator, WindowConfig};
    use crate::model::total_expense;

    fn constant_model(value: f64, periods: usize) -> EnterpriseModel {
        EnterpriseModel::new("base", vec!["a".into(), "b".into()], vec![vec![value, value]; periods])
            .unwrap()
    }

    fn matrix() -> CompetencyMatrix {
        parse_competency_matrix("competency,a,b\nc1,1,0\nc2,1,1\n", "cm").unwrap()
    }

    #[test]
    fn parses_scenario_file() {
        let text = "activation_period = 7\nbudget = 1000\nintervention_cost = 697\n\
                    effect.c1.add = 10\neffect.c2.mul = 1.05\neffect.c1.mul = 2\n";
        let sc = parse_scenario(text, "s").unwrap();
        assert_eq!(sc.activation_period, 7);
        assert_eq!(sc.effects.len(), 2);
        assert_eq!(sc.effects[0], Effect { competency_id: "c1".into(), add: 10.0, mul: 2.0, line: Some(4) });
        assert_eq!(sc.effects[1].add, 0.0);
        assert_eq!(sc.effects[1].mul, 1.05);
    }

    #[test]
    fn rejects_bad_scenario_files() {
        assert!(parse_scenario("budget = 1\n", "s").is_err());
        let err = parse_scenario("activation_period = 0\nbudget = -1\n", "s").unwrap_err();
        assert_eq!(err.diagnostics().len(), 2);
        let err = parse_scenario("activation_period = 1\nbudget = 1\neffect.c1.pow = 2\n", "s").unwrap_err();
        assert_eq!(err.diagnostics()[0].location, Some(Location::line(3)));
        let err = parse_scenario("activation_period = 1\nbudget = 1\neffect.c1.mul = -2\n", "s").unwrap_err();
        assert!(err.diagnostics()[0].message.contains("mul"));
        let err = parse_scenario("activation_period = 1\nbudget = 1\nbogus = 2\n", "s").unwrap_err();
        assert!(err.diagnostics()[0].message.contains("unknown key"));
    }

    #[test]
    fn unknown_competency_is_located() {
        let sc = parse_scenario("activation_period = 1\nbudget = 1\n\neffect.c9.add = 2\n", "s").unwrap();
        let diags = sc.check_against(&matrix(), None);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].location, Some(Location::line(4)));
        assert!(apply_scenario(&constant_model(1.0, 3), &matrix(), &sc).is_err());
    }

    #[test]
    fn empty_effects_is_identity() {
        let base = constant_model(3.5, 6);
        let sc = InterventionScenario::new(2, vec![], 0.0, 0.0).unwrap();
        let out = apply_scenario(&base, &matrix(), &sc).unwrap();
        assert_eq!(out.model(), &base);
    }

    #[test]
    fn hand_applied_rule() {
        let base = constant_model(100.0, 5);
        let sc = InterventionScenario::new(3, vec![Effect::new("c1", 10.0, 1.0)], 0.0, 0.0).unwrap();
        let out = apply_scenario(&base, &matrix(), &sc).unwrap();
        let a: Vec<f64> = (1..=5).map(|t| out.value(t, 0)).collect();
        let b: Vec<f64> = (1..=5).map(|t| out.value(t, 1)).collect();
        assert_eq!(a, vec![100.0, 100.0, 110.0, 110.0, 110.0]);
        assert_eq!(b, vec![100.0; 5]);
        assert_eq!(out.additive_applied, 30.0);
    }

    #[test]
    fn covering_effects_compose() {
        let base = constant_model(100.0, 2);
        let sc = InterventionScenario::new(
            1,
            vec![Effect::new("c2", 5.0, 1.5), Effect::new("c1", 1.0, 2.0)],
            0.0,
            0.0,
        )
        .unwrap();
        let out = apply_scenario(&base, &matrix(), &sc).unwrap();
        // a: 100 * 2 * 1.5 + 6; b: 100 * 1.5 + 5
        assert_eq!(out.row(1), &[306.0, 155.0]);
        assert_eq!(total_expense(&out), total_expense(&base) + out.applied_delta);
    }

    #[test]
    fn budget_checks() {
        let sc = |cost, budget| InterventionScenario::new(1, vec![], cost, budget).unwrap();
        assert!(check_budget(&sc(697.0, 1000.0)).passed());
        assert!(check_budget(&sc(0.0, 0.0)).passed());
        assert_eq!(
            check_budget(&sc(1001.0, 1000.0)),
            BudgetStatus::Violation { cost: 1001.0, budget: 1000.0, excess: 1.0 }
        );
    }

    #[test]
    fn cost_projection() {
        let sc = |cost| InterventionScenario::new(1, vec![], cost, 1e9).unwrap();
        assert_eq!(scenario_cost_projection(5_641_442.0, &sc(697.0)), 5_642_139.0);
        assert_eq!(scenario_cost_projection(0.0, &sc(0.0)), 0.0);
        assert_eq!(scenario_cost_projection(100.0, &sc(50.0)), 150.0);
    }

    #[test]
    fn cost_warning_respects_tolerance() {
        let base = constant_model(100.0, 4);
        let mut sc = InterventionScenario::new(3, vec![Effect::new("c1", 10.0, 1.0)], 25.0, 100.0).unwrap();
        let out = apply_scenario(&base, &matrix(), &sc).unwrap();
        assert!(out.cost_warning(&sc).is_none());
        sc.cost_tolerance = Some(10.0);
        assert!(out.cost_warning(&sc).is_none());
        sc.cost_tolerance = Some(1.0);
        assert!(out.cost_warning(&sc).unwrap().contains("differs"));
    }

    #[test]
    fn compare_identity_and_mismatch() {
        let data: Vec<Vec<f64>> = (0..8).map(|t| vec![(t * 7 % 5) as f64, (t * t) as f64]).collect();
        let m = EnterpriseModel::new("m", vec!["a".into(), "b".into()], data).unwrap();
        let r = run_indicator(&m, &WindowConfig::growing(4).unwrap()).unwrap();
        let c = compare_modes(&r, &r).unwrap();
        assert_eq!(c.delta_v, 0.0);
        assert!(c.per_period_delta.iter().all(|d| *d == 0.0));
        assert_eq!(c.cost_delta, Some(0.0));

        let other = run_indicator(&m, &WindowConfig::growing(5).unwrap()).unwrap();
        assert!(matches!(compare_modes(&r, &other), Err(Error::ModeMismatch(_))));
    }

    #[test]
    fn compare_published_grand_totals() {
        let one = |label: &str, v: f64| {
            let m = EnterpriseModel::new(label, vec!["V".into()], vec![vec![v]]).unwrap();
            IndicatorResult::from_precomputed(&m).unwrap()
        };
        let c = compare_modes(&one("basic", 5069.93), &one("sfu", 5491.33)).unwrap();
        assert!((c.delta_v - 421.40).abs() < 1e-9);
        assert_eq!(c.cost_delta, None);
    }
}
