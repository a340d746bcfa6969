//! Sample-analog estimators built on the kappa weights: potential-treatment
//! moments, complier and compliance-type probabilities, expected utility by
//! compliance type, regime contrasts, stratified contrasts, and percentile
//! bootstrap intervals.
//!
//! Everything here is a plain mean over paths (Horvitz-Thompson form, no
//! normalization unless requested), accumulated with compensated summation
//! so that algebraically identical estimators agree to near machine
//! precision.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::model::{evaluate_utility, ComplianceType, PanelDataset, Regime, UtilityFunctional};
use crate::numeric::{kahan_mean, quantile_sorted, sort_floats, uniform_index, KahanSum};
use crate::propensity::PropensityModel;
use crate::weights::{kappa_full, kappa_type, KappaDiagnostics, KappaStats};

/// Guards and toggles shared by the ratio estimators.
#[derive(Clone, Debug)]
pub struct EstimatorOptions {
    /// Smallest denominator magnitude a ratio estimate may divide by.
    pub p_min: f64,
    /// Divide each regime cell's weighted mean by the cell's mean weight
    /// instead of the complier probability (self-normalized form).
    pub normalize_weights: bool,
    /// Strata smaller than this yield a degenerate entry instead of an
    /// estimate.
    pub min_stratum_size: usize,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions { p_min: 0.01, normalize_weights: false, min_stratum_size: 10 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EstimateError {
    /// A ratio denominator fell at or below the configured floor.
    DegenerateDenominator { value: f64 },
    /// No path realizes the regime (fatal only where a cell mean is needed).
    EmptyRegimeCell { regime: Regime },
    /// The two regimes of a contrast are identical.
    RegimesEqual,
    /// A propensity fit failed (propagated from the no-instrument baseline
    /// or user-requested fitted models).
    Fit(crate::propensity::FitError),
    /// A structural precondition failed.
    InvalidInput(&'static str),
}

impl fmt::Display for EstimateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimateError::DegenerateDenominator { value } => {
                write!(f, "degenerate denominator {value}")
            }
            EstimateError::EmptyRegimeCell { regime } => {
                write!(f, "no path realizes regime {:?}", regime.assignments())
            }
            EstimateError::RegimesEqual => write!(f, "the two regimes must differ"),
            EstimateError::Fit(e) => write!(f, "{e}"),
            EstimateError::InvalidInput(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<crate::propensity::FitError> for EstimateError {
    fn from(e: crate::propensity::FitError) -> Self {
        EstimateError::Fit(e)
    }
}

/// Percentile bootstrap interval.
#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapInterval {
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
    pub b: usize,
}

/// Point estimate of a regime contrast with its decomposition and
/// diagnostics.
#[derive(Clone, Debug)]
pub struct EstimateReport {
    pub effect: f64,
    /// Weighted-mean numerator of the ratio.
    pub numerator: f64,
    /// Estimated probability of the targeted compliance type (the ratio
    /// denominator in the default, unnormalized form).
    pub complier_prob: f64,
    pub regime_pair: (Regime, Regime),
    pub ctype: ComplianceType,
    pub n_used: usize,
    pub kappa_diag: KappaDiagnostics,
    pub bootstrap: Option<BootstrapInterval>,
    /// Non-fatal conditions: raw probability outside [0, 1], empty regime
    /// cells, and similar.
    pub warnings: Vec<String>,
}

/// Mean over paths of prod_j W_j * prod_j 1{Z_j = i_j} / P(Z_j = i_j | history);
/// estimates the joint potential-treatment moment E[prod_j W_j(i_j)].
pub fn potential_treatment_moment(
    data: &PanelDataset,
    model: &PropensityModel,
    values: &[u8],
) -> f64 {
    let t = data.horizon();
    assert_eq!(values.len(), t + 1, "one instrument value per period");
    assert!(values.iter().all(|&v| v <= 1), "instrument values must be 0 or 1");
    let mut acc = KahanSum::new();
    'paths: for path in data.iter_paths() {
        let mut term = 1.0;
        for j in 0..=t {
            if path.w(j) == 0 || path.z(j) != values[j] {
                continue 'paths;
            }
            term /= model.marginal_prob(path, j, values[j]);
        }
        acc.add(term);
    }
    kahan_mean(&acc, data.n())
}

/// Mean of the compliance-type integrand: treatment indicators for the
/// type, the revealing instrument blocks for the non-compliant periods, and
/// the alternating complier block (which collapses to the realized
/// instrument tuple's signed weight). Estimates P(ctype).
pub fn compliance_type_probability(
    data: &PanelDataset,
    model: &PropensityModel,
    ctype: &ComplianceType,
) -> f64 {
    let mut acc = KahanSum::new();
    'paths: for path in data.iter_paths() {
        for &j in ctype.tc().iter().chain(ctype.tn1()) {
            if path.w(j) == 0 {
                continue 'paths;
            }
        }
        for &j in ctype.tn0() {
            if path.w(j) == 1 {
                continue 'paths;
            }
        }
        let mut term = 1.0;
        for &j in ctype.tc() {
            if path.z(j) == 0 {
                term = -term;
            }
            term /= model.marginal_prob(path, j, path.z(j));
        }
        for &j in ctype.tn0() {
            if path.z(j) != 1 {
                continue 'paths;
            }
            term /= model.marginal_prob(path, j, 1);
        }
        for &j in ctype.tn1() {
            if path.z(j) != 0 {
                continue 'paths;
            }
            term /= model.marginal_prob(path, j, 0);
        }
        acc.add(term);
    }
    kahan_mean(&acc, data.n())
}

/// Estimated probability that a path complies in every period. Identical to
/// [`compliance_type_probability`] at the full-compliance type.
pub fn complier_probability(data: &PanelDataset, model: &PropensityModel) -> f64 {
    compliance_type_probability(data, model, &ComplianceType::full_compliance(data.horizon()))
}

/// Product across periods of the per-period moment difference
/// E[W_j * 1{Z_j=1}/P] - E[W_j * 1{Z_j=0}/P].
///
/// Agrees with [`complier_probability`] when period-level compliance is
/// independent across periods and of the covariates (as in the bundled
/// generator); kept as an independent cross-check, not a primary estimator.
pub fn complier_probability_product(data: &PanelDataset, model: &PropensityModel) -> f64 {
    let mut prob = 1.0;
    for j in 0..=data.horizon() {
        let mut diff = KahanSum::new();
        for path in data.iter_paths() {
            if path.w(j) == 0 {
                continue;
            }
            let z = path.z(j);
            let term = 1.0 / model.marginal_prob(path, j, z);
            diff.add(if z == 1 { term } else { -term });
        }
        prob *= kahan_mean(&diff, data.n());
    }
    prob
}

/// Mean of kappa_type * u divided by the estimated type probability:
/// the expected utility of paths with the given compliance type.
pub fn expected_utility_by_type(
    data: &PanelDataset,
    model: &PropensityModel,
    u: &UtilityFunctional,
    ctype: &ComplianceType,
    opts: &EstimatorOptions,
) -> Result<f64, EstimateError> {
    let prob = compliance_type_probability(data, model, ctype);
    if prob <= opts.p_min {
        return Err(EstimateError::DegenerateDenominator { value: prob });
    }
    let mut acc = KahanSum::new();
    for path in data.iter_paths() {
        let k = kappa_type(path, ctype, model);
        if k != 0.0 {
            acc.add(k * evaluate_utility(u, path));
        }
    }
    Ok(kahan_mean(&acc, data.n()) / prob)
}

/// Unconditional regime contrast for full compliers:
/// mean of kappa * u * (1{W = a}/P(Z = a | .) - 1{W = b}/P(Z = b | .)),
/// divided by the estimated complier probability (or self-normalized per
/// cell when requested).
pub fn latre_contrast(
    data: &PanelDataset,
    model: &PropensityModel,
    u: &UtilityFunctional,
    regime_a: &Regime,
    regime_b: &Regime,
    opts: &EstimatorOptions,
) -> Result<EstimateReport, EstimateError> {
    let t = data.horizon();
    if regime_a.len() != t + 1 || regime_b.len() != t + 1 {
        return Err(EstimateError::InvalidInput("regime length must equal the period count"));
    }
    if regime_a == regime_b {
        return Err(EstimateError::RegimesEqual);
    }

    let mut warnings = Vec::new();
    let complier_prob = complier_probability(data, model);
    if !(0.0..=1.0).contains(&complier_prob) {
        warnings.push(alloc::format!(
            "complier probability estimate {complier_prob} outside [0, 1]"
        ));
    }

    let pairs_a = regime_a.assignment_pairs();
    let pairs_b = regime_b.assignment_pairs();
    let clip_before = model.clip_count();
    let mut stats = KappaStats::new();
    let mut num = KahanSum::new();
    let mut wsum_a = KahanSum::new();
    let mut wsum_b = KahanSum::new();
    let mut usum_a = KahanSum::new();
    let mut usum_b = KahanSum::new();
    let mut count_a = 0usize;
    let mut count_b = 0usize;
    for path in data.iter_paths() {
        let kappa = kappa_full(path, model);
        stats.push(kappa);
        let in_a = regime_a.matches_treatments(path);
        let in_b = regime_b.matches_treatments(path);
        if !(in_a || in_b) {
            continue;
        }
        let uval = evaluate_utility(u, path);
        if in_a {
            count_a += 1;
            let w = kappa / model.joint_prob(path, &pairs_a);
            usum_a.add(w * uval);
            wsum_a.add(w);
        }
        if in_b {
            count_b += 1;
            let w = kappa / model.joint_prob(path, &pairs_b);
            usum_b.add(w * uval);
            wsum_b.add(w);
        }
        // in_a and in_b are exclusive since the regimes differ.
        num.add(if in_a {
            kappa * uval / model.joint_prob(path, &pairs_a)
        } else {
            -kappa * uval / model.joint_prob(path, &pairs_b)
        });
    }
    if count_a == 0 {
        warnings.push(alloc::format!("no path realizes regime {:?}", regime_a.assignments()));
    }
    if count_b == 0 {
        warnings.push(alloc::format!("no path realizes regime {:?}", regime_b.assignments()));
    }

    let numerator = kahan_mean(&num, data.n());
    let effect = if opts.normalize_weights {
        let mean_w_a = kahan_mean(&wsum_a, data.n());
        let mean_w_b = kahan_mean(&wsum_b, data.n());
        if mean_w_a.abs() <= opts.p_min {
            return Err(EstimateError::DegenerateDenominator { value: mean_w_a });
        }
        if mean_w_b.abs() <= opts.p_min {
            return Err(EstimateError::DegenerateDenominator { value: mean_w_b });
        }
        kahan_mean(&usum_a, data.n()) / mean_w_a - kahan_mean(&usum_b, data.n()) / mean_w_b
    } else {
        if complier_prob <= opts.p_min {
            return Err(EstimateError::DegenerateDenominator { value: complier_prob });
        }
        numerator / complier_prob
    };

    Ok(EstimateReport {
        effect,
        numerator,
        complier_prob,
        regime_pair: (regime_a.clone(), regime_b.clone()),
        ctype: ComplianceType::full_compliance(t),
        n_used: data.n(),
        kappa_diag: stats.finish(model.clip_count() - clip_before),
        bootstrap: None,
        warnings,
    })
}

/// Applies [`latre_contrast`] within each exact stratum of one baseline
/// covariate column. Returns (stratum value, result) pairs sorted by value;
/// failures are per-stratum entries, never global.
pub fn conditional_latre_by_stratum(
    data: &PanelDataset,
    model: &PropensityModel,
    u: &UtilityFunctional,
    regime_a: &Regime,
    regime_b: &Regime,
    stratum_column: usize,
    opts: &EstimatorOptions,
) -> Result<Vec<(f64, Result<EstimateReport, EstimateError>)>, EstimateError> {
    if stratum_column >= data.dims()[0] {
        return Err(EstimateError::InvalidInput("stratum column outside the baseline block"));
    }
    let mut levels: Vec<f64> = Vec::new();
    for path in data.iter_paths() {
        let v = path.x0()[stratum_column];
        if !levels.iter().any(|&l| l == v) {
            levels.push(v);
            if levels.len() > 50 {
                return Err(EstimateError::InvalidInput(
                    "stratum column has more than 50 distinct values",
                ));
            }
        }
    }
    levels.sort_unstable_by(|a, b| a.total_cmp(b));

    let mut out = Vec::with_capacity(levels.len());
    for &level in &levels {
        let indices: Vec<usize> = (0..data.n())
            .filter(|&i| data.path(i).x0()[stratum_column] == level)
            .collect();
        if indices.len() < opts.min_stratum_size {
            let sub = data.resample(&indices).ok();
            let value = sub
                .as_ref()
                .map(|d| complier_probability(d, model))
                .unwrap_or(0.0);
            out.push((level, Err(EstimateError::DegenerateDenominator { value })));
            continue;
        }
        let sub = data.resample(&indices).expect("stratum is nonempty");
        out.push((level, latre_contrast(&sub, model, u, regime_a, regime_b, opts)));
    }
    Ok(out)
}

/// Runs the estimator on one seeded resample of the data. Resample `index`
/// draws its row indices from an independent stream of the seeded generator,
/// so any subset of indices can be computed in any order (or in parallel)
/// with identical results.
pub fn bootstrap_single<F>(
    estimator: &F,
    data: &PanelDataset,
    seed: u64,
    index: u64,
) -> Result<f64, EstimateError>
where
    F: Fn(&PanelDataset) -> Result<f64, EstimateError>,
{
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    let n = data.n();
    let mut indices = Vec::with_capacity(n);
    for _ in 0..n {
        indices.push(uniform_index(&mut rng, n));
    }
    let resampled = data.resample(&indices).expect("resample of nonempty data");
    estimator(&resampled)
}

/// Percentile interval of already collected bootstrap estimates.
pub fn percentile_interval(estimates: &mut [f64], level: f64) -> (f64, f64) {
    assert!(!estimates.is_empty());
    assert!(level > 0.0 && level < 1.0, "level must lie in (0, 1)");
    sort_floats(estimates);
    let alpha = 1.0 - level;
    (quantile_sorted(estimates, alpha / 2.0), quantile_sorted(estimates, 1.0 - alpha / 2.0))
}

/// Nonparametric bootstrap percentile interval from B whole-path resamples;
/// deterministic given the seed. The first estimator failure is propagated.
pub fn bootstrap_interval<F>(
    estimator: F,
    data: &PanelDataset,
    b: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64), EstimateError>
where
    F: Fn(&PanelDataset) -> Result<f64, EstimateError>,
{
    if b < 100 {
        return Err(EstimateError::InvalidInput("bootstrap needs at least 100 resamples"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(EstimateError::InvalidInput("bootstrap level must lie in (0, 1)"));
    }
    let mut estimates = Vec::with_capacity(b);
    for k in 0..b as u64 {
        estimates.push(bootstrap_single(&estimator, data, seed, k)?);
    }
    Ok(percentile_interval(&mut estimates, level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ObservationPath, PanelDataset, UtilityFunctional};
    use crate::propensity::PropensityModel;
    use alloc::vec;
    use alloc::vec::Vec;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn path2(z: [u8; 2], w: [u8; 2], y2: f64) -> ObservationPath {
        ObservationPath {
            x0: vec![],
            z: z.to_vec(),
            w: w.to_vec(),
            y: vec![0.0, y2],
            x_post: vec![Vec::new(), Vec::new()],
        }
    }

    /// One-sided full compliance: W = Z everywhere, constant instrument
    /// probabilities.
    fn complier_panel(n: usize, seed: u64) -> PanelDataset {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut paths = Vec::with_capacity(n);
        for _ in 0..n {
            let z0 = u8::from(crate::numeric::unit_f64(&mut rng) < 0.5);
            let z1 = u8::from(crate::numeric::unit_f64(&mut rng) < 0.5);
            let y2 = f64::from(z0) - f64::from(z1) + crate::numeric::unit_f64(&mut rng);
            paths.push(path2([z0, z1], [z0, z1], y2));
        }
        PanelDataset::from_paths(&paths).unwrap()
    }

    #[test]
    fn moment_is_zero_when_never_treated() {
        let d = PanelDataset::from_paths(&[
            path2([1, 0], [0, 0], 1.0),
            path2([0, 1], [0, 0], 2.0),
        ])
        .unwrap();
        let m = PropensityModel::from_constants(&[0.5, 0.5]);
        for values in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            assert_eq!(potential_treatment_moment(&d, &m, &values), 0.0);
        }
    }

    #[test]
    fn moment_recovers_always_treated_under_full_compliance() {
        // Single period, W = Z, p = 0.5: the all-ones moment estimates
        // E[W(1)] = 1.
        let n = 100_000;
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let mut paths = Vec::with_capacity(n);
        for _ in 0..n {
            let z = u8::from(crate::numeric::unit_f64(&mut rng) < 0.5);
            paths.push(ObservationPath {
                x0: vec![],
                z: vec![z],
                w: vec![z],
                y: vec![0.0],
                x_post: vec![Vec::new()],
            });
        }
        let d = PanelDataset::from_paths(&paths).unwrap();
        let m = PropensityModel::from_constants(&[0.5]);
        let est = potential_treatment_moment(&d, &m, &[1]);
        assert!((est - 1.0).abs() <= 0.01, "estimate {est}");
        // And the all-zeros moment estimates E[W(0)] = 0.
        assert_eq!(potential_treatment_moment(&d, &m, &[0]), 0.0);
    }

    #[test]
    fn complier_probability_one_under_full_compliance() {
        let d = complier_panel(50_000, 3);
        let m = PropensityModel::from_constants(&[0.5, 0.5]);
        let est = complier_probability(&d, &m);
        assert!((est - 1.0).abs() < 0.03, "estimate {est}");
        let full = ComplianceType::full_compliance(1);
        assert_eq!(compliance_type_probability(&d, &m, &full), est);
    }

    #[test]
    fn complier_probability_zero_without_first_stage() {
        // W independent of Z: equal counts of every (z, w) combination make
        // the alternating sum cancel exactly.
        let mut paths = Vec::new();
        for z0 in [0u8, 1] {
            for w0 in [0u8, 1] {
                for z1 in [0u8, 1] {
                    for w1 in [0u8, 1] {
                        paths.push(path2([z0, z1], [w0, w1], 1.0));
                    }
                }
            }
        }
        let d = PanelDataset::from_paths(&paths).unwrap();
        let m = PropensityModel::from_constants(&[0.5, 0.5]);
        let est = complier_probability(&d, &m);
        assert!(est.abs() < 1e-12, "estimate {est}");
    }

    #[test]
    fn alternating_sum_identity_holds_tightly() {
        let d = complier_panel(20_000, 17);
        let m = PropensityModel::from_constants(&[0.5, 0.5]);
        let direct = complier_probability(&d, &m);
        let mut signed = 0.0;
        for values in [[0u8, 0], [0, 1], [1, 0], [1, 1]] {
            let zeros = values.iter().filter(|&&v| v == 0).count();
            let sign = if zeros % 2 == 1 { -1.0 } else { 1.0 };
            signed += sign * potential_treatment_moment(&d, &m, &values);
        }
        assert!((direct - signed).abs() <= 1e-12, "{direct} vs {signed}");
    }

    #[test]
    fn product_form_matches_joint_on_independent_compliance() {
        let d = complier_panel(20_000, 23);
        let m = PropensityModel::from_constants(&[0.5, 0.5]);
        let joint = complier_probability(&d, &m);
        let product = complier_probability_product(&d, &m);
        assert!((joint - product).abs() < 0.05, "{joint} vs {product}");
    }

    #[test]
    fn type_probabilities_partition_under_full_compliance() {
        let d = complier_panel(20_000, 5);
        let m = PropensityModel::from_constants(&[0.5, 0.5]);
        let mut total = 0.0;
        for ct in crate::model::enumerate_compliance_types(1) {
            total += compliance_type_probability(&d, &m, &ct);
        }
        assert!((total - 1.0).abs() < 0.03, "sum {total}");
    }

    #[test]
    fn expected_utility_of_constant_outcome_population() {
        let mut paths = Vec::new();
        for z0 in [0u8, 1] {
            for z1 in [0u8, 1] {
                paths.push(path2([z0, z1], [z0, z1], 4.25));
            }
        }
        let d = PanelDataset::from_paths(&paths).unwrap();
        let m = PropensityModel::from_constants(&[0.5, 0.5]);
        let full = ComplianceType::full_compliance(1);
        let got = expected_utility_by_type(
            &d,
            &m,
            &UtilityFunctional::FinalOutcome,
            &full,
            &EstimatorOptions::default(),
        )
        .unwrap();
        assert!((got - 4.25).abs() < 1e-12, "got {got}");

        let zero = UtilityFunctional::Custom(alloc::boxed::Box::new(|_| 0.0));
        let got =
            expected_utility_by_type(&d, &m, &zero, &full, &EstimatorOptions::default()).unwrap();
        assert_eq!(got, 0.0);
    }

    #[test]
    fn degenerate_type_probability_is_an_error() {
        let d = complier_panel(1_000, 2);
        let m = PropensityModel::from_constants(&[0.5, 0.5]);
        // Nobody is an always-taker in both periods under full compliance.
        let at = ComplianceType::new(&[], &[], &[0, 1], 1).unwrap();
        let err = expected_utility_by_type(
            &d,
            &m,
            &UtilityFunctional::FinalOutcome,
            &at,
            &EstimatorOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, EstimateError::DegenerateDenominator { .. }));
    }

    #[test]
    fn contrast_rejects_identical_regimes() {
        let d = complier_panel(100, 1);
        let m = PropensityModel::from_constants(&[0.5, 0.5]);
        let r = Regime::new(&[1, 0]).unwrap();
        let err = latre_contrast(
            &d,
            &m,
            &UtilityFunctional::FinalOutcome,
            &r,
            &r,
            &EstimatorOptions::default(),
        )
        .unwrap_err();
        assert_eq!(err, EstimateError::RegimesEqual);
    }

    #[test]
    fn contrast_recovers_shift_under_full_compliance() {
        // Y2 = Z0 - Z1 + noise and everyone complies, so the (1,0) vs (0,1)
        // contrast among compliers is exactly 2 and kappa = 1 throughout.
        let d = complier_panel(50_000, 8);
        let m = PropensityModel::from_constants(&[0.5, 0.5]);
        let ra = Regime::new(&[1, 0]).unwrap();
        let rb = Regime::new(&[0, 1]).unwrap();
        let rep = latre_contrast(
            &d,
            &m,
            &UtilityFunctional::FinalOutcome,
            &ra,
            &rb,
            &EstimatorOptions::default(),
        )
        .unwrap();
        assert!((rep.effect - 2.0).abs() < 0.1, "effect {}", rep.effect);
        assert_eq!(rep.kappa_diag.min, 1.0);
        assert_eq!(rep.kappa_diag.max, 1.0);
        // The raw complier share may land a hair outside [0,1] by sampling
        // noise and get flagged; no other warning is acceptable here.
        assert!(
            rep.warnings.iter().all(|w| w.contains("outside [0, 1]")),
            "{:?}",
            rep.warnings
        );
        assert_eq!(rep.n_used, d.n());
        assert!((rep.numerator / rep.complier_prob - rep.effect).abs() < 1e-12);

        // The self-normalized variant agrees here (weights are constant).
        let mut opts = EstimatorOptions::default();
        opts.normalize_weights = true;
        let norm =
            latre_contrast(&d, &m, &UtilityFunctional::FinalOutcome, &ra, &rb, &opts).unwrap();
        assert!((norm.effect - rep.effect).abs() < 0.05, "{} vs {}", norm.effect, rep.effect);
    }

    #[test]
    fn outcome_scaling_scales_the_effect_exactly() {
        let d = complier_panel(5_000, 12);
        let m = PropensityModel::from_constants(&[0.5, 0.5]);
        let ra = Regime::new(&[1, 0]).unwrap();
        let rb = Regime::new(&[0, 1]).unwrap();
        let base = latre_contrast(
            &d,
            &m,
            &UtilityFunctional::FinalOutcome,
            &ra,
            &rb,
            &EstimatorOptions::default(),
        )
        .unwrap();
        // Power-of-two factor: scaling commutes with rounding, so the
        // equivariance is bit-exact.
        let c = -4.0;
        let scaled_u = UtilityFunctional::Custom(alloc::boxed::Box::new(move |p| {
            c * p.y(p.horizon() + 1)
        }));
        let scaled =
            latre_contrast(&d, &m, &scaled_u, &ra, &rb, &EstimatorOptions::default()).unwrap();
        assert_eq!(scaled.effect, c * base.effect);

        // General factors agree to relative rounding error.
        let g = 3.7;
        let gu = UtilityFunctional::Custom(alloc::boxed::Box::new(move |p: crate::model::PathView<'_>| {
            g * p.y(p.horizon() + 1)
        }));
        let grep = latre_contrast(&d, &m, &gu, &ra, &rb, &EstimatorOptions::default()).unwrap();
        let rel = (grep.effect - g * base.effect).abs() / (g * base.effect).abs();
        assert!(rel < 1e-12, "relative difference {rel}");
    }

    #[test]
    fn empty_regime_cell_warns_but_estimates() {
        // No path realizes regime (0, 1); fully treated compliers keep the
        // complier share estimate away from zero.
        let d = PanelDataset::from_paths(&[
            path2([1, 1], [1, 1], 3.0),
            path2([1, 1], [1, 1], 2.0),
            path2([1, 1], [1, 1], 2.5),
            path2([1, 1], [1, 1], 3.5),
            path2([1, 0], [1, 0], 2.0),
            path2([1, 0], [1, 0], 2.5),
            path2([0, 0], [0, 0], 0.5),
        ])
        .unwrap();
        let m = PropensityModel::from_constants(&[0.5, 0.5]);
        let ra = Regime::new(&[1, 0]).unwrap();
        let rb = Regime::new(&[0, 1]).unwrap();
        let rep = latre_contrast(
            &d,
            &m,
            &UtilityFunctional::FinalOutcome,
            &ra,
            &rb,
            &EstimatorOptions::default(),
        )
        .unwrap();
        assert!(rep.warnings.iter().any(|w| w.contains("no path realizes")));
        assert!(rep.effect.is_finite());
    }

    #[test]
    fn strata_reduce_to_pooled_estimate() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let mut paths = Vec::new();
        for _ in 0..2_000 {
            let z0 = u8::from(crate::numeric::unit_f64(&mut rng) < 0.5);
            let z1 = u8::from(crate::numeric::unit_f64(&mut rng) < 0.5);
            let y2 = f64::from(z0) + crate::numeric::unit_f64(&mut rng);
            paths.push(ObservationPath {
                x0: vec![1.0],
                z: vec![z0, z1],
                w: vec![z0, z1],
                y: vec![0.0, y2],
                x_post: vec![vec![1.0], Vec::new()],
            });
        }
        let d = PanelDataset::from_paths(&paths).unwrap();
        let m = PropensityModel::from_constants(&[0.5, 0.5]);
        let ra = Regime::new(&[1, 0]).unwrap();
        let rb = Regime::new(&[0, 1]).unwrap();
        let opts = EstimatorOptions::default();
        let pooled =
            latre_contrast(&d, &m, &UtilityFunctional::FinalOutcome, &ra, &rb, &opts).unwrap();
        let by_stratum = conditional_latre_by_stratum(
            &d,
            &m,
            &UtilityFunctional::FinalOutcome,
            &ra,
            &rb,
            0,
            &opts,
        )
        .unwrap();
        assert_eq!(by_stratum.len(), 1);
        let (level, rep) = &by_stratum[0];
        assert_eq!(*level, 1.0);
        assert_eq!(rep.as_ref().unwrap().effect, pooled.effect);
    }

    #[test]
    fn tiny_stratum_yields_degenerate_entry() {
        let mut paths = Vec::new();
        for i in 0..40 {
            let group = if i < 5 { 2.0 } else { 1.0 };
            let z0 = u8::from(i % 2 == 0);
            let z1 = u8::from(i % 4 < 2);
            paths.push(ObservationPath {
                x0: vec![group],
                z: vec![z0, z1],
                w: vec![z0, z1],
                y: vec![0.0, f64::from(z0)],
                x_post: vec![vec![group], Vec::new()],
            });
        }
        let d = PanelDataset::from_paths(&paths).unwrap();
        let m = PropensityModel::from_constants(&[0.5, 0.5]);
        let ra = Regime::new(&[1, 0]).unwrap();
        let rb = Regime::new(&[0, 1]).unwrap();
        let by_stratum = conditional_latre_by_stratum(
            &d,
            &m,
            &UtilityFunctional::FinalOutcome,
            &ra,
            &rb,
            0,
            &EstimatorOptions::default(),
        )
        .unwrap();
        assert_eq!(by_stratum.len(), 2);
        assert!(by_stratum[0].1.is_ok(), "large stratum should estimate");
        assert!(matches!(
            by_stratum[1].1,
            Err(EstimateError::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn bootstrap_constant_estimator_zero_width() {
        let d = complier_panel(500, 4);
        let (lo, hi) = bootstrap_interval(|_: &PanelDataset| Ok(7.0), &d, 100, 0.95, 99).unwrap();
        assert_eq!((lo, hi), (7.0, 7.0));
    }

    #[test]
    fn bootstrap_is_deterministic_and_order_free() {
        let d = complier_panel(400, 6);
        let est = |data: &PanelDataset| {
            let mut s = 0.0;
            for p in data.iter_paths() {
                s += p.y(2);
            }
            Ok(s / data.n() as f64)
        };
        let a = bootstrap_interval(est, &d, 120, 0.9, 42).unwrap();
        let b = bootstrap_interval(est, &d, 120, 0.9, 42).unwrap();
        assert_eq!(a, b);
        // Assembling the same resample indices out of order gives identical
        // estimates per index.
        let one = bootstrap_single(&est, &d, 42, 57).unwrap();
        let again = bootstrap_single(&est, &d, 42, 57).unwrap();
        assert_eq!(one, again);
    }

    #[test]
    fn bootstrap_width_tracks_clt_rate() {
        // Sample mean of roughly standard uniform shifted to mean 0: the
        // 95% percentile interval width should be near 2 * 1.96 * sd/sqrt(n).
        let n = 10_000;
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let mut paths = Vec::with_capacity(n);
        for _ in 0..n {
            let y = crate::numeric::unit_f64(&mut rng) - 0.5;
            paths.push(ObservationPath {
                x0: vec![],
                z: vec![u8::from(crate::numeric::unit_f64(&mut rng) < 0.5)],
                w: vec![0],
                y: vec![y],
                x_post: vec![Vec::new()],
            });
        }
        let d = PanelDataset::from_paths(&paths).unwrap();
        let est = |data: &PanelDataset| {
            let mut s = KahanSum::new();
            for p in data.iter_paths() {
                s.add(p.y(1));
            }
            Ok(kahan_mean(&s, data.n()))
        };
        let (lo, hi) = bootstrap_interval(est, &d, 500, 0.95, 11).unwrap();
        let sd = (1.0f64 / 12.0).sqrt();
        let expected = 2.0 * 1.96 * sd / (n as f64).sqrt();
        let width = hi - lo;
        assert!(
            (width - expected).abs() <= 0.2 * expected,
            "width {width} vs reference {expected}"
        );
    }

    #[test]
    fn bootstrap_validates_inputs() {
        let d = complier_panel(50, 10);
        assert!(matches!(
            bootstrap_interval(|_: &PanelDataset| Ok(0.0), &d, 10, 0.95, 1),
            Err(EstimateError::InvalidInput(_))
        ));
        assert!(matches!(
            bootstrap_interval(|_: &PanelDataset| Ok(0.0), &d, 100, 1.5, 1),
            Err(EstimateError::InvalidInput(_))
        ));
    }
}
