//! `twinsight` command-line frontend.
//!
//! Exit codes: 0 success, 1 validation error, 2 budget violation, 3 I/O
//! error, 4 mode shape mismatch in `compare`.

pub mod manifest;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use twinsight_core::report::{
    comparison_json, delta_csv, dynamics_csv, indicator_csv, summary_json, totals_csv,
};
use twinsight_core::synth::load_synth_spec;
use twinsight_core::{
    apply_scenario, check_budget, compare_modes, generate, load_competency_matrix,
    load_enterprise_model, load_scenario, parse_competency_matrix, parse_enterprise_model,
    parse_scenario, run_indicator, run_indicator_parallel, write_enterprise_model, BudgetStatus,
    CompetencyMatrix, Diagnostic, EnterpriseModel, Error, IndicatorResult, InterventionScenario,
    WarmupPolicy, WindowConfig,
};

use manifest::{parse_manifest, Input, OutputFormat, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "twinsight", version, about = "Enterprise digital-twin indicator runs")]
pub struct Cli {
    /// Also print a machine-readable error object on stdout when failing.
    #[arg(long, global = true)]
    pub error_json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score one operating mode (and the intervention mode when a scenario is given).
    Run(RunArgs),
    /// Compare two modes described by manifest files.
    Compare(CompareArgs),
    /// Generate a synthetic enterprise model.
    Synth(SynthArgs),
    /// Validate input files without computing anything.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Run manifest; explicit flags override its values.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, conflicts_with = "replay_totals")]
    pub model: Option<PathBuf>,
    /// Precomputed per-period indicator values to replay instead of a model.
    #[arg(long)]
    pub replay_totals: Option<PathBuf>,
    #[arg(long)]
    pub competencies: Option<PathBuf>,
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(short = 'k', long = "window")]
    pub window: Option<usize>,
    #[arg(long)]
    pub min_lags: Option<usize>,
    #[arg(long, value_parser = ["growing", "skip"])]
    pub warmup: Option<String>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub label: Option<String>,
    /// Label of the intervention mode when a scenario is applied.
    #[arg(long)]
    pub intervention_label: Option<String>,
    /// Worker threads for per-period scoring.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub baseline: PathBuf,
    #[arg(long)]
    pub intervention: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    pub format: OutputFormat,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExitCode {
    Validation = 1,
    Budget = 2,
    Io = 3,
    Mismatch = 4,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub exit_code: u8,
    pub error: String,
    pub diagnostics: Vec<String>,
}

impl CliError {
    fn new(code: ExitCode, error: impl Into<String>) -> Self {
        Self {
            exit_code: code as u8,
            error: error.into(),
            diagnostics: Vec::new(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io { .. } => ExitCode::Io,
            Error::ModeMismatch(_) => ExitCode::Mismatch,
            _ => ExitCode::Validation,
        };
        let diagnostics = match &e {
            Error::Invalid(r) => r.to_string().lines().map(str::to_string).collect(),
            _ => Vec::new(),
        };
        let error = match &e {
            Error::Invalid(r) => format!("invalid input: {}", r.source),
            other => other.to_string(),
        };
        Self {
            exit_code: code as u8,
            error,
            diagnostics,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `args` and runs the command. Returns the process exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let error_json = cli.error_json;
    let outcome = match cli.command {
        Command::Run(a) => cmd_run_args(a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Synth(a) => cmd_synth(&a.spec, &a.out),
        Command::Validate(a) => cmd_validate(&a.paths),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.error);
            for d in &e.diagnostics {
                eprintln!("  {d}");
            }
            if error_json {
                println!("{}", serde_json::to_string(&e).expect("serializable"));
            }
            e.exit_code as i32
        }
    }
}

fn read_manifest(path: &Path) -> CliResult<RunManifest> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::new(ExitCode::Io, format!("{}: {e}", path.display()))
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(parse_manifest(&text, &path.display().to_string(), base)?)
}

fn manifest_from_args(a: &RunArgs) -> CliResult<RunManifest> {
    let base = a.manifest.as_deref().map(read_manifest).transpose()?;
    let base = base.as_ref();
    let input = match (&a.model, &a.replay_totals, base) {
        (Some(p), _, _) => Input::Model(p.clone()),
        (None, Some(p), _) => Input::ReplayTotals(p.clone()),
        (None, None, Some(m)) => m.input.clone(),
        (None, None, None) => {
            return Err(CliError::new(
                ExitCode::Validation,
                "one of --model, --replay-totals or --manifest is required",
            ))
        }
    };
    let base_window = base.map_or_else(WindowConfig::default, |m| m.window);
    let warmup = match &a.warmup {
        Some(w) => w.parse::<WarmupPolicy>()?,
        None => base_window.warmup,
    };
    let window = WindowConfig::new(
        a.window.unwrap_or(base_window.k),
        a.min_lags.unwrap_or(base_window.min_lags),
        warmup,
    )?;
    let out_dir = a
        .out_dir
        .clone()
        .or_else(|| base.and_then(|m| m.out_dir.clone()))
        .ok_or_else(|| CliError::new(ExitCode::Validation, "--out-dir is required"))?;
    Ok(RunManifest {
        input,
        competencies: a.competencies.clone().or_else(|| base.and_then(|m| m.competencies.clone())),
        scenario: a.scenario.clone().or_else(|| base.and_then(|m| m.scenario.clone())),
        window,
        out_dir: Some(out_dir),
        format: a.format.or(base.map(|m| m.format)).unwrap_or(OutputFormat::Both),
        label: a
            .label
            .clone()
            .or_else(|| base.map(|m| m.label.clone()))
            .unwrap_or_else(|| "baseline".to_string()),
        intervention_label: a
            .intervention_label
            .clone()
            .or_else(|| base.map(|m| m.intervention_label.clone()))
            .unwrap_or_else(|| "intervention".to_string()),
    })
}

fn cmd_run_args(a: RunArgs) -> CliResult<()> {
    let manifest = manifest_from_args(&a)?;
    cmd_run(&manifest, a.workers)
}

struct Pool(Option<rayon::ThreadPool>);

impl Pool {
    fn new(workers: usize) -> CliResult<Self> {
        if workers == 0 {
            return Err(CliError::new(ExitCode::Validation, "--workers must be >= 1"));
        }
        if workers == 1 {
            return Ok(Pool(None));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::new(ExitCode::Validation, e.to_string()))?;
        Ok(Pool(Some(pool)))
    }

    fn run(&self, model: &EnterpriseModel, cfg: &WindowConfig) -> CliResult<IndicatorResult> {
        Ok(match &self.0 {
            None => run_indicator(model, cfg)?,
            Some(p) => run_indicator_parallel(model, cfg, p)?,
        })
    }
}

/// A scored mode plus the scenario that produced it, if any.
struct Mode {
    result: IndicatorResult,
    intervention: Option<(IndicatorResult, BudgetStatus)>,
}

fn ensure_exists(m: &RunManifest) -> CliResult<()> {
    for p in m.paths() {
        if !p.is_file() {
            return Err(CliError::new(
                ExitCode::Io,
                format!("{}: no such file", p.display()),
            ));
        }
    }
    Ok(())
}

fn score_manifest(m: &RunManifest, pool: &Pool) -> CliResult<Mode> {
    ensure_exists(m)?;
    match &m.input {
        Input::ReplayTotals(path) => {
            if m.scenario.is_some() || m.competencies.is_some() {
                return Err(CliError::new(
                    ExitCode::Validation,
                    "replayed totals cannot be combined with competencies or a scenario",
                ));
            }
            let model = load_enterprise_model(path, &m.label)?;
            Ok(Mode {
                result: IndicatorResult::from_precomputed(&model)?,
                intervention: None,
            })
        }
        Input::Model(path) => {
            let model = load_enterprise_model(path, &m.label)?;
            log::info!(
                "model {}: n = {}, T_max = {}, pre-history {}",
                path.display(),
                model.n(),
                model.periods(),
                model.prehistory()
            );
            let base = pool.run(&model, &m.window)?;
            let intervention = match &m.scenario {
                None => None,
                Some(sp) => {
                    let cp = m.competencies.as_ref().ok_or_else(|| {
                        CliError::new(ExitCode::Validation, "--scenario requires --competencies")
                    })?;
                    let cm = load_competency_matrix(cp)?;
                    let sc = load_scenario(sp)?;
                    let status = check_budget(&sc);
                    if let BudgetStatus::Violation {
                        cost,
                        budget,
                        excess,
                    } = status
                    {
                        return Err(CliError::new(
                            ExitCode::Budget,
                            format!(
                                "budget violation: intervention_cost {cost} exceeds budget {budget} by {excess}"
                            ),
                        ));
                    }
                    let controlled = apply_scenario(&model, &cm, &sc)?.with_label(&m.intervention_label);
                    Some((pool.run(controlled.model(), &m.window)?, status))
                }
            };
            Ok(Mode {
                result: base,
                intervention,
            })
        }
    }
}

fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents)
        .map_err(|e| CliError::new(ExitCode::Io, format!("{}: {e}", path.display())))
}

fn prepare_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::new(ExitCode::Io, format!("{}: {e}", dir.display())))
}

fn write_mode_reports(dir: &Path, r: &IndicatorResult, format: OutputFormat) -> CliResult<()> {
    let stem = file_stem(&r.mode_label);
    if format.csv() {
        write_file(&dir.join(format!("{stem}.indicator.csv")), &indicator_csv(r))?;
        write_file(&dir.join(format!("{stem}.totals.csv")), &totals_csv(r))?;
        write_file(&dir.join(format!("{stem}.dynamics.csv")), &dynamics_csv(r))?;
    }
    if format.json() {
        write_file(&dir.join(format!("{stem}.summary.json")), &summary_json(r))?;
    }
    Ok(())
}

fn write_comparison(
    dir: &Path,
    baseline: &IndicatorResult,
    intervention: &IndicatorResult,
    budget: Option<BudgetStatus>,
    format: OutputFormat,
) -> CliResult<f64> {
    let cmp = compare_modes(baseline, intervention)?;
    if format.json() {
        write_file(&dir.join("comparison.json"), &comparison_json(&cmp, budget))?;
    }
    if format.csv() {
        write_file(&dir.join("delta.csv"), &delta_csv(&cmp))?;
    }
    Ok(cmp.delta_v)
}

fn describe(r: &IndicatorResult) -> String {
    match r.window {
        Some(w) => format!(
            "{}: V = {} (k = {}, {}, {} degenerate)",
            r.mode_label,
            twinsight_core::format::sig6(r.grand_total),
            w.k,
            w.warmup,
            r.degenerate_count()
        ),
        None => format!(
            "{}: V = {} (replayed)",
            r.mode_label,
            twinsight_core::format::sig6(r.grand_total)
        ),
    }
}

pub fn cmd_run(m: &RunManifest, workers: usize) -> CliResult<()> {
    let pool = Pool::new(workers)?;
    let out_dir = m
        .out_dir
        .as_deref()
        .ok_or_else(|| CliError::new(ExitCode::Validation, "output directory not set"))?;
    let mode = score_manifest(m, &pool)?;
    prepare_dir(out_dir)?;
    write_mode_reports(out_dir, &mode.result, m.format)?;
    println!("{}", describe(&mode.result));
    if let Some((controlled, status)) = &mode.intervention {
        if file_stem(&controlled.mode_label) == file_stem(&mode.result.mode_label) {
            return Err(CliError::new(
                ExitCode::Validation,
                "baseline and intervention labels map to the same report files",
            ));
        }
        write_mode_reports(out_dir, controlled, m.format)?;
        let dv = write_comparison(out_dir, &mode.result, controlled, Some(*status), m.format)?;
        println!("{}", describe(controlled));
        println!("delta_v = {}", twinsight_core::format::sig6(dv));
    }
    Ok(())
}

pub fn cmd_compare(a: &CompareArgs) -> CliResult<()> {
    let pool = Pool::new(a.workers)?;
    let base_m = read_manifest(&a.baseline)?;
    let int_m = read_manifest(&a.intervention)?;
    let base = score_manifest(&base_m, &pool)?;
    let int = score_manifest(&int_m, &pool)?;
    // a manifest with a scenario contributes its controlled mode
    let (base_r, _) = pick(base);
    let (int_r, budget) = pick(int);
    prepare_dir(&a.out_dir)?;
    let dv = write_comparison(&a.out_dir, &base_r, &int_r, budget, a.format)?;
    println!("{}", describe(&base_r));
    println!("{}", describe(&int_r));
    println!("delta_v = {}", twinsight_core::format::sig6(dv));
    Ok(())
}

fn pick(mode: Mode) -> (IndicatorResult, Option<BudgetStatus>) {
    match mode.intervention {
        Some((r, status)) => (r, Some(status)),
        None => (mode.result, None),
    }
}

pub fn cmd_synth(spec_path: &Path, out: &Path) -> CliResult<()> {
    let spec = load_synth_spec(spec_path)?;
    let model = generate(&spec)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        prepare_dir(parent)?;
    }
    let file = fs::File::create(out)
        .map_err(|e| CliError::new(ExitCode::Io, format!("{}: {e}", out.display())))?;
    write_enterprise_model(&model, std::io::BufWriter::new(file))?;
    println!(
        "wrote {} ({} periods, {} processes)",
        out.display(),
        model.periods(),
        model.n()
    );
    Ok(())
}

enum Parsed {
    Model(EnterpriseModel),
    Competency(CompetencyMatrix),
    Scenario(InterventionScenario),
    Other,
}

fn classify(text: &str, source: &str) -> Result<Parsed, Error> {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let head = first.split(',').next().unwrap_or("").trim();
    match head {
        "period" => parse_enterprise_model(text, source, source).map(Parsed::Model),
        "competency" => parse_competency_matrix(text, source).map(Parsed::Competency),
        _ => {
            let kv = twinsight_core::config::KeyValues::parse(text, source)?;
            if kv.get("activation_period").is_some() {
                parse_scenario(text, source).map(Parsed::Scenario)
            } else if kv.get("seed").is_some() {
                twinsight_core::synth::parse_synth_spec(text, source).map(|_| Parsed::Other)
            } else if kv.get("model").is_some() || kv.get("replay_totals").is_some() {
                parse_manifest(text, source, Path::new(".")).map(|_| Parsed::Other)
            } else if text.trim().is_empty() {
                Err(Error::invalid(source, vec![Diagnostic::general("empty file")]))
            } else {
                Err(Error::invalid(
                    source,
                    vec![Diagnostic::general("unrecognised file kind")],
                ))
            }
        }
    }
}

/// Checks every file and the references between them, printing `ok` or each
/// located violation.
pub fn cmd_validate(paths: &[PathBuf]) -> CliResult<()> {
    let mut failed = 0usize;
    let mut parsed = Vec::new();
    for path in paths {
        let source = path.display().to_string();
        let text = match fs::read(path) {
            Ok(b) => match String::from_utf8(b) {
                Ok(t) => t,
                Err(_) => {
                    eprintln!("{source}: not valid UTF-8");
                    failed += 1;
                    parsed.push((source, Parsed::Other, false));
                    continue;
                }
            },
            Err(e) => {
                eprintln!("{source}: {e}");
                failed += 1;
                parsed.push((source, Parsed::Other, false));
                continue;
            }
        };
        match classify(&text, &source) {
            Ok(p) => parsed.push((source, p, true)),
            Err(e) => {
                failed += 1;
                eprintln!("{e}");
                parsed.push((source, Parsed::Other, false));
            }
        }
    }

    // cross-file references
    let models: Vec<&EnterpriseModel> = parsed
        .iter()
        .filter_map(|(_, p, _)| match p {
            Parsed::Model(m) => Some(m),
            _ => None,
        })
        .collect();
    let matrices: Vec<&CompetencyMatrix> = parsed
        .iter()
        .filter_map(|(_, p, _)| match p {
            Parsed::Competency(c) => Some(c),
            _ => None,
        })
        .collect();
    let mut cross: Vec<Vec<Diagnostic>> = vec![Vec::new(); parsed.len()];
    for (idx, (_, p, _)) in parsed.iter().enumerate() {
        match p {
            Parsed::Competency(cm) => {
                for m in &models {
                    if let Err(e) = cm.check_against(m) {
                        cross[idx].extend(e.diagnostics().iter().cloned());
                    }
                }
            }
            Parsed::Scenario(sc) => {
                for cm in &matrices {
                    cross[idx].extend(sc.check_against(cm, models.first().copied()));
                }
                if matrices.is_empty() {
                    if let Some(m) = models.first() {
                        cross[idx].extend(
                            sc.check_against(&empty_matrix(m), Some(m))
                                .into_iter()
                                .filter(|d| !d.message.starts_with("unknown competency")),
                        );
                    }
                }
            }
            _ => {}
        }
    }
    for (idx, (source, _, ok)) in parsed.iter().enumerate() {
        if !ok {
            continue;
        }
        if cross[idx].is_empty() {
            println!("{source}: ok");
        } else {
            failed += 1;
            let report = twinsight_core::Report {
                source: source.clone(),
                diagnostics: cross[idx].clone(),
            };
            eprintln!("{report}");
        }
    }
    if failed > 0 {
        return Err(CliError::new(
            ExitCode::Validation,
            format!("{failed} of {} file(s) invalid", paths.len()),
        ));
    }
    Ok(())
}

fn empty_matrix(m: &EnterpriseModel) -> CompetencyMatrix {
    CompetencyMatrix::new(Vec::new(), m.process_ids().to_vec(), Vec::new()).expect("empty matrix")
}
