//! Command implementations: argument surface, error-to-exit-code mapping,
//! and the simulate/estimate/replicate/validate flows.

use crate::config::{HarnessConfig, Method, PropensityMode, Utility};
use crate::csvio;
use crate::metrics::error_metrics;
use crate::report::{
    to_canonical_json, ConfigEchoJson, EstimateJson, MethodResultJson, ReplicationJson,
};
use clap::{Args, Parser, Subcommand};
use latre::{
    bootstrap_single, fit_instrument_models, fit_treatment_models, generate, latre_contrast,
    naive_contrast, noiv_contrast, oracle_propensities, percentile_interval, true_latre,
    validate_dataset, EstimateError, EstimatorOptions, FitOptions, PanelDataset,
    PropensityModel, Regime, UtilityFunctional, Violation,
};
use rayon::prelude::*;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

/// Failure classes, each with a fixed process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, config, or data. Exit 2.
    Input(String),
    /// The estimate exists but is numerically meaningless. Exit 3, with a
    /// structured JSON error object on stdout.
    Degenerate { kind: &'static str, value: Option<f64>, message: String },
    /// A bug or resource failure. Exit 4.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Degenerate { .. } => 3,
            CliError::Internal(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Internal(m) => m,
            CliError::Degenerate { message, .. } => message,
        }
    }
}

fn from_estimate_error(e: EstimateError) -> CliError {
    let message = e.to_string();
    match e {
        EstimateError::DegenerateDenominator { value } => CliError::Degenerate {
            kind: "degenerate_denominator",
            value: Some(value),
            message,
        },
        EstimateError::EmptyRegimeCell { .. } => {
            CliError::Degenerate { kind: "empty_regime_cell", value: None, message }
        }
        EstimateError::Fit(_) => {
            CliError::Degenerate { kind: "fit_failure", value: None, message }
        }
        EstimateError::RegimesEqual | EstimateError::InvalidInput(_) => CliError::Input(message),
    }
}

#[derive(Parser)]
#[command(
    name = "latre",
    version,
    about = "Panel instrumental-variable regime effects: simulate, estimate, replicate, validate"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a synthetic panel CSV from a config.
    Simulate(SimulateArgs),
    /// Estimate a regime contrast from a panel CSV and print a JSON report.
    Estimate(EstimateArgs),
    /// Run the full replication study and report error metrics per method.
    Replicate(ReplicateArgs),
    /// Check a panel CSV against the data rules.
    Validate(ValidateArgs),
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Key=value config file; omitted keys use the study defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV path. Latents, if enabled, go to a .latents.csv sibling.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct EstimateArgs {
    /// Panel CSV to estimate from.
    #[arg(long)]
    pub data: PathBuf,
    /// Key=value config file; omitted keys use the study defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Estimator: latre, naive, or noiv.
    #[arg(long)]
    pub method: Option<String>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Bootstrap resample count for a percentile interval (0 disables).
    #[arg(long, value_name = "B")]
    pub bootstrap: Option<usize>,
    /// Bootstrap confidence level.
    #[arg(long)]
    pub level: Option<f64>,
    /// Override the config's seed (drives bootstrap resampling).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = library default).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Args)]
pub struct ReplicateArgs {
    /// Key=value config file; omitted keys use the study defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = library default).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Args)]
pub struct ValidateArgs {
    /// Panel CSV to check.
    #[arg(long)]
    pub data: PathBuf,
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Replicate(a) => cmd_replicate(a),
        Command::Validate(a) => cmd_validate(a),
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<HarnessConfig, CliError> {
    match path {
        None => Ok(HarnessConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                CliError::Input(format!("cannot read config {}: {e}", p.display()))
            })?;
            HarnessConfig::parse(&text).map_err(CliError::Input)
        }
    }
}

fn read_panel(path: &PathBuf) -> Result<PanelDataset, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read data {}: {e}", path.display())))?;
    csvio::panel_from_csv(&text).map_err(CliError::Input)
}

fn emit(out: &Option<PathBuf>, json: &str) -> Result<(), CliError> {
    match out {
        None => {
            println!("{json}");
            Ok(())
        }
        Some(p) => std::fs::write(p, format!("{json}\n"))
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
    }
}

/// Runs `f` on a dedicated pool of `workers` threads, or the default pool
/// when workers is 0.
fn with_pool<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    if workers == 0 {
        Ok(f())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::Internal(format!("worker pool: {e}")))?;
        Ok(pool.install(f))
    }
}

fn utility(cfg: &HarnessConfig) -> UtilityFunctional {
    match cfg.utility {
        Utility::FinalOutcome => UtilityFunctional::FinalOutcome,
        Utility::SumOfOutcomes => UtilityFunctional::SumOfOutcomes,
    }
}

fn estimator_options(cfg: &HarnessConfig) -> EstimatorOptions {
    EstimatorOptions {
        p_min: cfg.p_min,
        normalize_weights: cfg.normalize_weights,
        ..EstimatorOptions::default()
    }
}

fn regimes(cfg: &HarnessConfig) -> Result<(Regime, Regime), EstimateError> {
    let a = Regime::new(&cfg.regime_a)
        .map_err(|_| EstimateError::InvalidInput("regime_a entries must be 0 or 1"))?;
    let b = Regime::new(&cfg.regime_b)
        .map_err(|_| EstimateError::InvalidInput("regime_b entries must be 0 or 1"))?;
    Ok((a, b))
}

/// Instrument propensities for the latre estimator: either the generator's
/// closed-form scores or logistic fits on the panel itself.
fn instrument_model(
    cfg: &HarnessConfig,
    data: &PanelDataset,
) -> Result<PropensityModel, EstimateError> {
    match cfg.propensity {
        PropensityMode::Oracle => {
            if data.horizon() != 1 {
                return Err(EstimateError::InvalidInput(
                    "closed-form propensities cover only the two-period generator; use propensity=fitted",
                ));
            }
            if data.dims()[0] != cfg.sim.xi.len() {
                return Err(EstimateError::InvalidInput(
                    "xi length does not match the baseline covariate block",
                ));
            }
            Ok(oracle_propensities(&cfg.sim))
        }
        PropensityMode::Fitted => {
            fit_instrument_models(data, &FitOptions::default()).map_err(Into::into)
        }
    }
}

/// Point estimate for one method; shared by estimate, replicate, and the
/// bootstrap resampler.
fn effect_for(
    cfg: &HarnessConfig,
    method: Method,
    data: &PanelDataset,
) -> Result<f64, EstimateError> {
    let u = utility(cfg);
    let (ra, rb) = regimes(cfg)?;
    match method {
        Method::Latre => {
            let model = instrument_model(cfg, data)?;
            latre_contrast(data, &model, &u, &ra, &rb, &estimator_options(cfg)).map(|r| r.effect)
        }
        Method::Naive => naive_contrast(data, &u, &ra, &rb),
        Method::Noiv => {
            let tm = fit_treatment_models(data, &FitOptions::default())?;
            noiv_contrast(data, &tm, &u, &ra, &rb)
        }
    }
}

fn bootstrap_ci(
    cfg: &HarnessConfig,
    method: Method,
    data: &PanelDataset,
) -> Result<(f64, f64), CliError> {
    let b = cfg.bootstrap;
    if b < 100 {
        return Err(CliError::Input(String::from("bootstrap needs at least 100 resamples")));
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(CliError::Input(String::from("level must lie strictly between 0 and 1")));
    }
    let est = |d: &PanelDataset| effect_for(cfg, method, d);
    let collected: Result<Vec<f64>, EstimateError> = (0..b as u64)
        .into_par_iter()
        .map(|i| bootstrap_single(&est, data, cfg.sim.seed, i))
        .collect();
    let mut estimates = collected.map_err(from_estimate_error)?;
    Ok(percentile_interval(&mut estimates, cfg.level))
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let mut cfg = load_config(&args.config)?;
    if let Some(s) = args.seed {
        cfg.sim.seed = s;
    }
    let (panel, latents) =
        generate(&cfg.sim).map_err(|e| CliError::Input(format!("config: {e}")))?;
    let csv = csvio::panel_to_csv(&panel).map_err(CliError::Internal)?;
    std::fs::write(&args.out, csv)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", args.out.display())))?;
    eprintln!("wrote {} paths to {}", panel.n(), args.out.display());
    if let Some(l) = latents {
        let sibling = args.out.with_extension("latents.csv");
        std::fs::write(&sibling, csvio::latents_to_csv(&l))
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", sibling.display())))?;
        eprintln!("wrote latent draws to {}", sibling.display());
    }
    Ok(())
}

/// Maps a path-indexed violation to the CSV row that holds it (header is
/// row 1, path i is row i + 2).
fn violation_line(v: &Violation) -> String {
    match v.path {
        Some(i) => format!("row {}: {v}", i + 2),
        None => format!("dataset: {v}"),
    }
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), CliError> {
    let panel = read_panel(&args.data)?;
    let violations = validate_dataset(&panel);
    if violations.is_empty() {
        println!("ok");
        return Ok(());
    }
    for v in &violations {
        println!("{}", violation_line(v));
    }
    Err(CliError::Input(format!("{} data rule violations", violations.len())))
}

fn checked_panel(path: &PathBuf) -> Result<PanelDataset, CliError> {
    let panel = read_panel(path)?;
    let violations = validate_dataset(&panel);
    if violations.is_empty() {
        return Ok(panel);
    }
    let mut msg = format!("{} data rule violations:\n", violations.len());
    for v in violations.iter().take(20) {
        msg.push_str(&violation_line(v));
        msg.push('\n');
    }
    if violations.len() > 20 {
        msg.push_str(&format!("... and {} more\n", violations.len() - 20));
    }
    Err(CliError::Input(msg))
}

fn cmd_estimate(args: &EstimateArgs) -> Result<(), CliError> {
    let mut cfg = load_config(&args.config)?;
    if let Some(m) = &args.method {
        cfg.method = Method::parse(m).ok_or_else(|| {
            CliError::Input(format!("--method: expected latre, naive, or noiv, got \"{m}\""))
        })?;
    }
    if let Some(b) = args.bootstrap {
        cfg.bootstrap = b;
    }
    if let Some(l) = args.level {
        cfg.level = l;
    }
    if let Some(s) = args.seed {
        cfg.sim.seed = s;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }

    let panel = checked_panel(&args.data)?;
    let report = with_pool(cfg.workers, || run_estimate(&cfg, &panel))??;
    emit(&args.out, &to_canonical_json(&report))
}

fn run_estimate(cfg: &HarnessConfig, panel: &PanelDataset) -> Result<EstimateJson, CliError> {
    let method = cfg.method;
    let mut json = match method {
        Method::Latre => {
            let u = utility(cfg);
            let (ra, rb) = regimes(cfg).map_err(from_estimate_error)?;
            let model = instrument_model(cfg, panel).map_err(from_estimate_error)?;
            let rep = latre_contrast(panel, &model, &u, &ra, &rb, &estimator_options(cfg))
                .map_err(from_estimate_error)?;
            EstimateJson::from_report(method, &rep)
        }
        Method::Naive | Method::Noiv => {
            let effect = effect_for(cfg, method, panel).map_err(from_estimate_error)?;
            EstimateJson::bare(method, effect, cfg, panel.n())
        }
    };
    if cfg.bootstrap > 0 {
        let (lower, upper) = bootstrap_ci(cfg, method, panel)?;
        json.bootstrap = Some(crate::report::IntervalJson {
            level: cfg.level,
            lower,
            upper,
            b: cfg.bootstrap,
        });
    }
    Ok(json)
}

fn replicate_once(cfg: &HarnessConfig, seed: u64) -> Result<Vec<f64>, EstimateError> {
    let mut sim = cfg.sim.clone();
    sim.seed = seed;
    sim.emit_latents = false;
    let (panel, _) = generate(&sim)
        .map_err(|_| EstimateError::InvalidInput("generator rejected the config"))?;
    cfg.methods.iter().map(|&m| effect_for(cfg, m, &panel)).collect()
}

fn cmd_replicate(args: &ReplicateArgs) -> Result<(), CliError> {
    let mut cfg = load_config(&args.config)?;
    if let Some(s) = args.seed {
        cfg.sim.seed = s;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    // Reject a bad generator config up front rather than inside worker r=0.
    let probe = latre::SimConfig { n: 1, ..cfg.sim.clone() };
    generate(&probe).map_err(|e| CliError::Input(format!("config: {e}")))?;

    let master_seed = cfg.sim.seed;
    let truth = true_latre(&cfg.sim);
    let total = cfg.replications;
    let done = AtomicUsize::new(0);
    let step = (total / 10).max(1);
    let start = Instant::now();

    let per_rep: Vec<Vec<f64>> = with_pool(cfg.workers, || {
        (0..total as u64)
            .into_par_iter()
            .map(|r| {
                let out = replicate_once(&cfg, master_seed ^ r).map_err(|e| {
                    let inner = from_estimate_error(e);
                    match inner {
                        CliError::Degenerate { kind, value, message } => CliError::Degenerate {
                            kind,
                            value,
                            message: format!("replication {r}: {message}"),
                        },
                        CliError::Input(m) => CliError::Input(format!("replication {r}: {m}")),
                        CliError::Internal(m) => {
                            CliError::Internal(format!("replication {r}: {m}"))
                        }
                    }
                })?;
                let finished = done.fetch_add(1, Ordering::Relaxed) + 1;
                if finished % step == 0 || finished == total {
                    eprintln!("progress: {finished}/{total} replications");
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>, CliError>>()
    })??;

    let mut by_method: Vec<Vec<f64>> = vec![Vec::with_capacity(total); cfg.methods.len()];
    for rep in per_rep {
        for (k, v) in rep.into_iter().enumerate() {
            by_method[k].push(v);
        }
    }
    let methods: Vec<MethodResultJson> = cfg
        .methods
        .iter()
        .zip(by_method)
        .map(|(m, estimates)| MethodResultJson {
            method: m.name(),
            metrics: error_metrics(&estimates, truth),
            estimates,
        })
        .collect();

    let result = ReplicationJson {
        replications: total,
        master_seed,
        true_effect: truth,
        config: ConfigEchoJson::from_config(&cfg),
        methods,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    print_metrics_table(&result);
    eprintln!("{} replications in {:.1}s", total, result.wall_seconds);
    emit(&args.out, &to_canonical_json(&result))
}

/// Human-readable metrics table on stderr; stdout stays canonical JSON.
fn print_metrics_table(result: &ReplicationJson) {
    eprintln!(
        "{:<8} {:>12} {:>12} {:>14} {:>14}",
        "method", "|mean err|", "mean |err|", "|median err|", "median |err|"
    );
    for m in &result.methods {
        eprintln!(
            "{:<8} {:>12.4} {:>12.4} {:>14.4} {:>14.4}",
            m.method,
            m.metrics.abs_mean_error,
            m.metrics.mean_abs_error,
            m.metrics.abs_median_error,
            m.metrics.median_abs_error
        );
    }
}
