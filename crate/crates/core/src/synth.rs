//! Deterministic synthetic enterprise generator.
//!
//! `value(t, j) = base_level + noise_scale * (w * g(t, group(j)) + (1 - w) * e(t, j))`
//! where `w` is `driver_weight`, `g` is a standard-normal driver shared by a
//! correlation group and `e` is per-process standard-normal noise.
//!
//! Draw order: rows in ascending period (pre-history first); within a row,
//! one driver per group in order of first appearance in `groups`, then one
//! noise deviate per process in column order. Each deviate consumes two
//! SplitMix64 outputs `a, b`:
//! `u1 = ((a >> 11) + 1) * 2^-53`, `u2 = (b >> 11) * 2^-53`,
//! `z = sqrt(-2 ln u1) * cos(2 pi u2)`. The `libm` routines keep the
//! transcendental results identical across platforms.

use std::path::Path;

use crate::config::KeyValues;
use crate::error::{Diagnostic, Error, Result};
use crate::model::EnterpriseModel;

/// SplitMix64 stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `(0, 1]`.
    fn open_unit(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[0, 1)`.
    fn half_open_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Box-Muller, cosine branch only.
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.open_unit();
        let u2 = self.half_open_unit();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * std::f64::consts::PI * u2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub seed: u64,
    pub n: usize,
    /// `T_max`.
    pub periods: usize,
    /// Extra rows generated before period 1.
    pub prehistory: usize,
    pub base_level: f64,
    pub noise_scale: f64,
    /// Group label of each process; processes sharing a label share a driver.
    pub groups: Vec<String>,
    pub driver_weight: f64,
    pub label: String,
}

impl SynthSpec {
    /// One group holding every process.
    pub fn new(seed: u64, n: usize, periods: usize) -> Self {
        Self {
            seed,
            n,
            periods,
            prehistory: 0,
            base_level: 1000.0,
            noise_scale: 100.0,
            groups: vec!["0".to_string(); n],
            driver_weight: 0.5,
            label: "synthetic".to_string(),
        }
    }

    /// Builder helper: contiguous groups of the given sizes.
    pub fn with_group_sizes(mut self, sizes: &[usize]) -> Self {
        self.groups = sizes
            .iter()
            .enumerate()
            .flat_map(|(g, &s)| std::iter::repeat(g.to_string()).take(s))
            .collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut diags = Vec::new();
        if self.n == 0 {
            diags.push(Diagnostic::general("n must be >= 1"));
        }
        if self.periods == 0 {
            diags.push(Diagnostic::general("periods must be >= 1"));
        }
        if !self.base_level.is_finite() {
            diags.push(Diagnostic::general("base_level must be finite"));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            diags.push(Diagnostic::general("noise_scale must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.driver_weight) {
            diags.push(Diagnostic::general("driver_weight must lie in [0, 1]"));
        }
        if self.groups.len() != self.n {
            diags.push(Diagnostic::general(format!(
                "groups assigns {} processes, n is {}",
                self.groups.len(),
                self.n
            )));
        }
        if diags.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid("synth spec", diags))
        }
    }

    pub fn process_ids(&self) -> Vec<String> {
        let width = self.n.to_string().len();
        (1..=self.n).map(|j| format!("p{j:0width$}")).collect()
    }

    /// Distinct group labels in first-appearance order, and each process's
    /// index into that list.
    fn group_layout(&self) -> (usize, Vec<usize>) {
        let mut labels: Vec<&str> = Vec::new();
        let mut index = Vec::with_capacity(self.n);
        for g in &self.groups {
            let pos = match labels.iter().position(|l| *l == g) {
                Some(p) => p,
                None => {
                    labels.push(g);
                    labels.len() - 1
                }
            };
            index.push(pos);
        }
        (labels.len(), index)
    }
}

const SPEC_KEYS: &[&str] = &[
    "seed",
    "n",
    "periods",
    "prehistory",
    "base_level",
    "noise_scale",
    "driver_weight",
    "groups",
    "label",
];

pub fn load_synth_spec(path: impl AsRef<Path>) -> Result<SynthSpec> {
    let path = path.as_ref();
    let text = crate::read_text(path)?;
    parse_synth_spec(&text, &path.display().to_string())
}

/// Keys: `seed`, `n`, `periods` (required); `prehistory`, `base_level`,
/// `noise_scale`, `driver_weight`, `label`, and `groups` as a comma-separated
/// label per process (all one group when absent).
pub fn parse_synth_spec(text: &str, source: &str) -> Result<SynthSpec> {
    let kv = KeyValues::parse(text, source)?;
    let mut diags = Vec::new();
    kv.reject_unknown(SPEC_KEYS, &[], &mut diags);
    let seed = kv.required::<u64>("seed", &mut diags);
    let n = kv.required::<usize>("n", &mut diags);
    let periods = kv.required::<usize>("periods", &mut diags);
    if !diags.is_empty() {
        return Err(Error::invalid(source, diags));
    }
    let mut spec = SynthSpec::new(seed.unwrap_or(0), n.unwrap_or(0), periods.unwrap_or(0));
    if let Some(v) = kv.optional("prehistory", &mut diags) {
        spec.prehistory = v;
    }
    if let Some(v) = kv.optional("base_level", &mut diags) {
        spec.base_level = v;
    }
    if let Some(v) = kv.optional("noise_scale", &mut diags) {
        spec.noise_scale = v;
    }
    if let Some(v) = kv.optional("driver_weight", &mut diags) {
        spec.driver_weight = v;
    }
    if let Some(e) = kv.get("label") {
        spec.label = e.value.clone();
    }
    if let Some(e) = kv.get("groups") {
        spec.groups = e.value.split(',').map(|g| g.trim().to_string()).collect();
    }
    if !diags.is_empty() {
        return Err(Error::invalid(source, diags));
    }
    spec.validate().map_err(|e| match e {
        Error::Invalid(r) => Error::invalid(source, r.diagnostics),
        other => other,
    })?;
    Ok(spec)
}

pub fn generate(spec: &SynthSpec) -> Result<EnterpriseModel> {
    spec.validate()?;
    let (group_count, group_of) = spec.group_layout();
    let mut rng = SplitMix64::new(spec.seed);
    let w = spec.driver_weight;
    let rows_total = spec.prehistory + spec.periods;
    let mut rows = Vec::with_capacity(rows_total);
    let mut drivers = vec![0.0; group_count];
    for _ in 0..rows_total {
        for d in drivers.iter_mut() {
            *d = rng.standard_normal();
        }
        let row = (0..spec.n)
            .map(|j| {
                let e = rng.standard_normal();
                spec.base_level + spec.noise_scale * (w * drivers[group_of[j]] + (1.0 - w) * e)
            })
            .collect();
        rows.push(row);
    }
    EnterpriseModel::with_prehistory(
        spec.label.clone(),
        spec.process_ids(),
        1 - spec.prehistory as i64,
        rows,
    )
}
