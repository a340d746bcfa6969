//! JSON output types and the canonical serializer. Reports are compact JSON
//! with every float written to 17 significant digits (enough to round-trip
//! f64 bit-exactly), so a byte comparison of two reports is a value
//! comparison.

use crate::config::{HarnessConfig, Method, PropensityMode, Utility};
use crate::metrics::ErrorMetrics;
use latre::EstimateReport;
use serde::Serialize;
use std::io;

struct SigDigitFormatter;

impl serde_json::ser::Formatter for SigDigitFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes any report type to the canonical JSON form.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigitFormatter);
    value
        .serialize(&mut ser)
        .expect("report types serialize without io");
    String::from_utf8(out).expect("serde_json writes utf-8")
}

#[derive(Serialize)]
pub struct KappaJson {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub clipped: u64,
}

#[derive(Serialize)]
pub struct IntervalJson {
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
    pub b: usize,
}

/// One estimation run. Baseline methods have no ratio decomposition or
/// weight diagnostics, so those fields are null for them.
#[derive(Serialize)]
pub struct EstimateJson {
    pub method: &'static str,
    pub effect: f64,
    pub numerator: Option<f64>,
    pub complier_prob: Option<f64>,
    pub regime_a: Vec<u8>,
    pub regime_b: Vec<u8>,
    pub n_used: usize,
    pub kappa: Option<KappaJson>,
    pub bootstrap: Option<IntervalJson>,
    pub warnings: Vec<String>,
}

impl EstimateJson {
    pub fn from_report(method: Method, rep: &EstimateReport) -> Self {
        EstimateJson {
            method: method.name(),
            effect: rep.effect,
            numerator: Some(rep.numerator),
            complier_prob: Some(rep.complier_prob),
            regime_a: rep.regime_pair.0.assignments().to_vec(),
            regime_b: rep.regime_pair.1.assignments().to_vec(),
            n_used: rep.n_used,
            kappa: Some(KappaJson {
                mean: rep.kappa_diag.mean,
                min: rep.kappa_diag.min,
                max: rep.kappa_diag.max,
                clipped: rep.kappa_diag.clipped,
            }),
            bootstrap: rep.bootstrap.as_ref().map(|b| IntervalJson {
                level: b.level,
                lower: b.lower,
                upper: b.upper,
                b: b.b,
            }),
            warnings: rep.warnings.clone(),
        }
    }

    pub fn bare(method: Method, effect: f64, cfg: &HarnessConfig, n_used: usize) -> Self {
        EstimateJson {
            method: method.name(),
            effect,
            numerator: None,
            complier_prob: None,
            regime_a: cfg.regime_a.clone(),
            regime_b: cfg.regime_b.clone(),
            n_used,
            kappa: None,
            bootstrap: None,
            warnings: Vec::new(),
        }
    }
}

/// Echo of every input that shaped a replication run, embedded in the result
/// so a report is self-describing.
#[derive(Serialize)]
pub struct ConfigEchoJson {
    pub n: usize,
    pub xi: Vec<f64>,
    pub e1: f64,
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
    pub beta1: f64,
    pub beta2: f64,
    pub delta: f64,
    pub gamma: f64,
    pub regime_a: Vec<u8>,
    pub regime_b: Vec<u8>,
    pub utility: &'static str,
    pub propensity: &'static str,
    pub p_min: f64,
    pub normalize_weights: bool,
}

impl ConfigEchoJson {
    pub fn from_config(cfg: &HarnessConfig) -> Self {
        ConfigEchoJson {
            n: cfg.sim.n,
            xi: cfg.sim.xi.clone(),
            e1: cfg.sim.e1,
            alpha1: cfg.sim.alpha1.clone(),
            alpha2: cfg.sim.alpha2.clone(),
            beta1: cfg.sim.beta1,
            beta2: cfg.sim.beta2,
            delta: cfg.sim.delta,
            gamma: cfg.sim.gamma,
            regime_a: cfg.regime_a.clone(),
            regime_b: cfg.regime_b.clone(),
            utility: match cfg.utility {
                Utility::FinalOutcome => "final",
                Utility::SumOfOutcomes => "sum",
            },
            propensity: match cfg.propensity {
                PropensityMode::Oracle => "oracle",
                PropensityMode::Fitted => "fitted",
            },
            p_min: cfg.p_min,
            normalize_weights: cfg.normalize_weights,
        }
    }
}

#[derive(Serialize)]
pub struct MethodResultJson {
    pub method: &'static str,
    pub estimates: Vec<f64>,
    pub metrics: ErrorMetrics,
}

/// Full replication-study result. Wall-clock time is kept out of the
/// serialized form so identical studies produce identical bytes; the runner
/// reports it on stderr instead.
#[derive(Serialize)]
pub struct ReplicationJson {
    pub replications: usize,
    pub master_seed: u64,
    pub true_effect: f64,
    pub config: ConfigEchoJson,
    pub methods: Vec<MethodResultJson>,
    #[serde(skip)]
    pub wall_seconds: f64,
}

/// Structured failure object for degenerate estimates; printed to stdout so
/// callers parsing JSON always get JSON.
#[derive(Serialize)]
pub struct ErrorJson<'a> {
    pub error: ErrorBodyJson<'a>,
}

#[derive(Serialize)]
pub struct ErrorBodyJson<'a> {
    pub kind: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub message: &'a str,
}
