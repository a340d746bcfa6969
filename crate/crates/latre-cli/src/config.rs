//! Flat key=value configuration files. Every generator parameter has the
//! replication-study default, so an empty file is a valid full-scale config.

use latre::SimConfig;

/// Which estimator a single-estimate run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Latre,
    Naive,
    Noiv,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Latre => "latre",
            Method::Naive => "naive",
            Method::Noiv => "noiv",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "latre" => Some(Method::Latre),
            "naive" => Some(Method::Naive),
            "noiv" => Some(Method::Noiv),
            _ => None,
        }
    }
}

/// How instrument propensities are obtained for the latre estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropensityMode {
    /// Closed-form scores built from the config's xi and e1.
    Oracle,
    /// Logistic fits on the observed panel.
    Fitted,
}

/// Which utility the estimators evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Utility {
    FinalOutcome,
    SumOfOutcomes,
}

/// Full harness configuration: the generator parameters plus estimation,
/// replication, and bootstrap settings.
#[derive(Clone, Debug)]
pub struct HarnessConfig {
    pub sim: SimConfig,
    pub replications: usize,
    pub regime_a: Vec<u8>,
    pub regime_b: Vec<u8>,
    pub method: Method,
    pub methods: Vec<Method>,
    pub utility: Utility,
    pub propensity: PropensityMode,
    pub bootstrap: usize,
    pub level: f64,
    pub workers: usize,
    pub p_min: f64,
    pub normalize_weights: bool,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            sim: SimConfig::default(),
            replications: 500,
            regime_a: vec![1, 0],
            regime_b: vec![0, 1],
            method: Method::Latre,
            methods: vec![Method::Latre, Method::Naive, Method::Noiv],
            utility: Utility::FinalOutcome,
            propensity: PropensityMode::Oracle,
            bootstrap: 0,
            level: 0.95,
            workers: 0,
            p_min: 0.01,
            normalize_weights: false,
        }
    }
}

fn bad(key: &str, detail: &str) -> String {
    format!("config key \"{key}\": {detail}")
}

fn parse_f64(key: &str, value: &str) -> Result<f64, String> {
    value.parse().map_err(|_| bad(key, &format!("expected a number, got \"{value}\"")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize, String> {
    value.parse().map_err(|_| bad(key, &format!("expected a nonnegative integer, got \"{value}\"")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64, String> {
    value.parse().map_err(|_| bad(key, &format!("expected a nonnegative integer, got \"{value}\"")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(bad(key, &format!("expected true or false, got \"{value}\""))),
    }
}

fn parse_vec_f64(key: &str, value: &str) -> Result<Vec<f64>, String> {
    value
        .split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse().map_err(|_| bad(key, &format!("expected comma-separated numbers, got \"{tok}\"")))
        })
        .collect()
}

fn parse_regime(key: &str, value: &str) -> Result<Vec<u8>, String> {
    value
        .split(',')
        .map(|tok| match tok.trim() {
            "0" => Ok(0),
            "1" => Ok(1),
            other => Err(bad(key, &format!("regime entries must be 0 or 1, got \"{other}\""))),
        })
        .collect()
}

impl HarnessConfig {
    /// Parse config text, starting from defaults. Lines are `key = value`;
    /// blank lines and `#` comments are skipped; later keys override earlier
    /// ones.
    pub fn parse(text: &str) -> Result<HarnessConfig, String> {
        let mut cfg = HarnessConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("config line {}: expected key=value, got \"{line}\"", lineno + 1));
            };
            let key = key.trim();
            let value = value.trim();
            match key {
                "n" => cfg.sim.n = parse_usize(key, value)?,
                "xi" => cfg.sim.xi = parse_vec_f64(key, value)?,
                "e1" => cfg.sim.e1 = parse_f64(key, value)?,
                "alpha1" => cfg.sim.alpha1 = parse_vec_f64(key, value)?,
                "alpha2" => cfg.sim.alpha2 = parse_vec_f64(key, value)?,
                "beta1" => cfg.sim.beta1 = parse_f64(key, value)?,
                "beta2" => cfg.sim.beta2 = parse_f64(key, value)?,
                "delta" => cfg.sim.delta = parse_f64(key, value)?,
                "gamma" => cfg.sim.gamma = parse_f64(key, value)?,
                "seed" => cfg.sim.seed = parse_u64(key, value)?,
                "emit_latents" => cfg.sim.emit_latents = parse_bool(key, value)?,
                "replications" => {
                    cfg.replications = parse_usize(key, value)?;
                    if cfg.replications == 0 {
                        return Err(bad(key, "must be at least 1"));
                    }
                }
                "regime_a" => cfg.regime_a = parse_regime(key, value)?,
                "regime_b" => cfg.regime_b = parse_regime(key, value)?,
                "method" => {
                    cfg.method = Method::parse(value)
                        .ok_or_else(|| bad(key, "expected latre, naive, or noiv"))?;
                }
                "methods" => {
                    let mut methods = Vec::new();
                    for tok in value.split(',') {
                        let m = Method::parse(tok.trim())
                            .ok_or_else(|| bad(key, "expected a comma-separated subset of latre, naive, noiv"))?;
                        if !methods.contains(&m) {
                            methods.push(m);
                        }
                    }
                    if methods.is_empty() {
                        return Err(bad(key, "must name at least one method"));
                    }
                    cfg.methods = methods;
                }
                "utility" => {
                    cfg.utility = match value {
                        "final" => Utility::FinalOutcome,
                        "sum" => Utility::SumOfOutcomes,
                        _ => return Err(bad(key, "expected final or sum")),
                    };
                }
                "propensity" => {
                    cfg.propensity = match value {
                        "oracle" => PropensityMode::Oracle,
                        "fitted" => PropensityMode::Fitted,
                        _ => return Err(bad(key, "expected oracle or fitted")),
                    };
                }
                "bootstrap" => cfg.bootstrap = parse_usize(key, value)?,
                "level" => cfg.level = parse_f64(key, value)?,
                "workers" => cfg.workers = parse_usize(key, value)?,
                "p_min" => cfg.p_min = parse_f64(key, value)?,
                "normalize_weights" => cfg.normalize_weights = parse_bool(key, value)?,
                _ => return Err(format!("unknown config key \"{key}\"")),
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = HarnessConfig::parse("").unwrap();
        assert_eq!(cfg.sim.n, 500_000);
        assert_eq!(cfg.sim.e1, 0.75);
        assert_eq!(cfg.regime_a, vec![1, 0]);
        assert_eq!(cfg.methods.len(), 3);
    }

    #[test]
    fn overrides_and_comments() {
        let text = "# study\nn = 1000\nxi = 1, 0.5, -0.5\nseed=7\nmethod=naive\nemit_latents=true\n";
        let cfg = HarnessConfig::parse(text).unwrap();
        assert_eq!(cfg.sim.n, 1000);
        assert_eq!(cfg.sim.xi, vec![1.0, 0.5, -0.5]);
        assert_eq!(cfg.sim.seed, 7);
        assert_eq!(cfg.method, Method::Naive);
        assert!(cfg.sim.emit_latents);
    }

    #[test]
    fn unknown_and_malformed_keys_name_the_key() {
        let err = HarnessConfig::parse("frobnicate=1").unwrap_err();
        assert!(err.contains("frobnicate"), "{err}");
        let err = HarnessConfig::parse("e1=sometimes").unwrap_err();
        assert!(err.contains("\"e1\""), "{err}");
        let err = HarnessConfig::parse("regime_a=1,2").unwrap_err();
        assert!(err.contains("regime_a"), "{err}");
        let err = HarnessConfig::parse("just a line").unwrap_err();
        assert!(err.contains("line 1"), "{err}");
    }
}
