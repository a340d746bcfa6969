//! Comparison estimators: the naive difference of regime-cell means, and a
//! sequential inverse-propensity contrast that ignores the instruments and
//! weights by fitted treatment propensities instead.

use crate::model::{evaluate_utility, PanelDataset, Regime, UtilityFunctional};
use crate::identification::EstimateError;
use crate::numeric::{kahan_mean, KahanSum};
use crate::propensity::PropensityModel;

fn check_regimes(
    data: &PanelDataset,
    regime_a: &Regime,
    regime_b: &Regime,
) -> Result<(), EstimateError> {
    if regime_a.len() != data.horizon() + 1 || regime_b.len() != data.horizon() + 1 {
        return Err(EstimateError::InvalidInput("regime length must equal the period count"));
    }
    if regime_a == regime_b {
        return Err(EstimateError::RegimesEqual);
    }
    Ok(())
}

/// Difference in mean utility between the paths whose realized treatments
/// equal `regime_a` and those equal to `regime_b`.
pub fn naive_contrast(
    data: &PanelDataset,
    u: &UtilityFunctional,
    regime_a: &Regime,
    regime_b: &Regime,
) -> Result<f64, EstimateError> {
    check_regimes(data, regime_a, regime_b)?;
    let mut sum_a = KahanSum::new();
    let mut sum_b = KahanSum::new();
    let mut n_a = 0usize;
    let mut n_b = 0usize;
    for path in data.iter_paths() {
        if regime_a.matches_treatments(path) {
            sum_a.add(evaluate_utility(u, path));
            n_a += 1;
        } else if regime_b.matches_treatments(path) {
            sum_b.add(evaluate_utility(u, path));
            n_b += 1;
        }
    }
    if n_a == 0 {
        return Err(EstimateError::EmptyRegimeCell { regime: regime_a.clone() });
    }
    if n_b == 0 {
        return Err(EstimateError::EmptyRegimeCell { regime: regime_b.clone() });
    }
    Ok(kahan_mean(&sum_a, n_a) - kahan_mean(&sum_b, n_b))
}

/// Inverse-propensity contrast that treats the realized treatments as if
/// they were sequentially randomized given observed history: the mean of
/// u * prod_j 1{W_j = a_j} / P(W_j = a_j | history) minus the same for
/// regime b. `treatment_model` scores P(W_j = 1 | history), typically from
/// [`crate::propensity::fit_treatment_models`]. No compliance weighting and
/// no complier denominator are applied.
pub fn noiv_contrast(
    data: &PanelDataset,
    treatment_model: &PropensityModel,
    u: &UtilityFunctional,
    regime_a: &Regime,
    regime_b: &Regime,
) -> Result<f64, EstimateError> {
    check_regimes(data, regime_a, regime_b)?;
    let pairs_a = regime_a.assignment_pairs();
    let pairs_b = regime_b.assignment_pairs();
    let mut acc = KahanSum::new();
    let mut n_a = 0usize;
    let mut n_b = 0usize;
    for path in data.iter_paths() {
        if regime_a.matches_treatments(path) {
            n_a += 1;
            acc.add(evaluate_utility(u, path) / treatment_model.joint_prob(path, &pairs_a));
        } else if regime_b.matches_treatments(path) {
            n_b += 1;
            acc.add(-evaluate_utility(u, path) / treatment_model.joint_prob(path, &pairs_b));
        }
    }
    if n_a == 0 {
        return Err(EstimateError::EmptyRegimeCell { regime: regime_a.clone() });
    }
    if n_b == 0 {
        return Err(EstimateError::EmptyRegimeCell { regime: regime_b.clone() });
    }
    Ok(kahan_mean(&acc, data.n()))
}
