use std::path::{Path, PathBuf};

use twinsight_core::config::KeyValues;
use twinsight_core::{Diagnostic, Error, WarmupPolicy, WindowConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "both" => Ok(OutputFormat::Both),
            other => Err(format!("unknown format '{other}' (expected csv, json or both)")),
        }
    }
}

/// Where the scored series comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Model(PathBuf),
    /// Precomputed per-period indicator values, replayed through aggregation.
    ReplayTotals(PathBuf),
}

/// Everything one indicator run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub input: Input,
    pub competencies: Option<PathBuf>,
    pub scenario: Option<PathBuf>,
    pub window: WindowConfig,
    pub out_dir: Option<PathBuf>,
    pub format: OutputFormat,
    pub label: String,
    /// Label of the controlled mode when a scenario is applied.
    pub intervention_label: String,
}

impl RunManifest {
    /// Referenced input files, in a fixed order.
    pub fn paths(&self) -> Vec<&Path> {
        let mut out = vec![match &self.input {
            Input::Model(p) | Input::ReplayTotals(p) => p.as_path(),
        }];
        out.extend(self.competencies.as_deref());
        out.extend(self.scenario.as_deref());
        out
    }

    pub fn is_replay(&self) -> bool {
        matches!(self.input, Input::ReplayTotals(_))
    }
}

const MANIFEST_KEYS: &[&str] = &[
    "model",
    "replay_totals",
    "competencies",
    "scenario",
    "window",
    "min_lags",
    "warmup",
    "out_dir",
    "format",
    "label",
    "intervention_label",
];

/// Reads a manifest in the key-value dialect. Relative paths resolve against
/// the manifest's directory.
pub fn parse_manifest(text: &str, source: &str, base_dir: &Path) -> Result<RunManifest, Error> {
    let kv = KeyValues::parse(text, source)?;
    let mut diags = Vec::new();
    kv.reject_unknown(MANIFEST_KEYS, &[], &mut diags);
    let path = |key: &str| kv.get(key).map(|e| base_dir.join(&e.value));
    let input = match (path("model"), path("replay_totals")) {
        (Some(m), None) => Some(Input::Model(m)),
        (None, Some(r)) => Some(Input::ReplayTotals(r)),
        (Some(_), Some(_)) => {
            diags.push(Diagnostic::general("set either 'model' or 'replay_totals', not both"));
            None
        }
        (None, None) => {
            diags.push(Diagnostic::general("missing 'model' or 'replay_totals'"));
            None
        }
    };
    let k = kv.optional::<usize>("window", &mut diags).unwrap_or(WindowConfig::DEFAULT_K);
    let min_lags = kv.optional::<usize>("min_lags", &mut diags).unwrap_or(2);
    let warmup = kv
        .optional::<WarmupPolicy>("warmup", &mut diags)
        .unwrap_or(WarmupPolicy::GrowingWindow);
    let format = kv.optional::<OutputFormat>("format", &mut diags).unwrap_or(OutputFormat::Both);
    let label = kv
        .get("label")
        .map_or_else(|| "baseline".to_string(), |e| e.value.clone());
    let intervention_label = kv
        .get("intervention_label")
        .map_or_else(|| "intervention".to_string(), |e| e.value.clone());
    let window = match WindowConfig::new(k, min_lags, warmup) {
        Ok(w) => Some(w),
        Err(e) => {
            diags.push(Diagnostic::general(e.to_string()));
            None
        }
    };
    if !diags.is_empty() {
        return Err(Error::invalid(source, diags));
    }
    Ok(RunManifest {
        input: input.expect("checked"),
        competencies: path("competencies"),
        scenario: path("scenario"),
        window: window.expect("checked"),
        out_dir: path("out_dir"),
        format,
        label,
        intervention_label,
    })
}
