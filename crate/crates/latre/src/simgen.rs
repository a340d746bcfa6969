//! Synthetic two-period panel generator with one binary instrument per
//! period, one-sided noncompliance, and linear outcome equations. Latent
//! compliance draws can be emitted alongside the observable panel so that
//! estimators can be checked against ground truth.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::model::PanelDataset;
use crate::numeric::{dot, sigmoid, unit_f64};
use crate::propensity::{FeatureComponent, FeatureMap, PeriodScore, PropensityModel};

/// Parameters of the two-period data generating process.
///
/// Period 0: X0 ~ U[-1,1]^d, P(Z0=1|X0) = 1/(1+exp(X0'xi)), W0 = 1 if Z0 = 1,
/// otherwise a Bernoulli(eps0) draw with eps0 ~ U[0,1].
/// Y1 = X0'alpha1 + beta1 W0 + eps0.
/// Period 1: X1 = X0, Z1 ~ Bernoulli(e1) independent of everything else,
/// W1 follows the same one-sided rule with eps1 ~ U[0,1].
/// Y2 = X0'alpha2 + beta2 W0 + delta Y1 + gamma W1 + eps1.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub xi: Vec<f64>,
    pub e1: f64,
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
    pub beta1: f64,
    pub beta2: f64,
    pub delta: f64,
    pub gamma: f64,
    pub seed: u64,
    pub emit_latents: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 500_000,
            xi: vec![1.0, 2.0, 3.0, -1.0, -2.0, -3.0],
            e1: 0.75,
            alpha1: vec![1.0, 1.0, 1.0, 1.0, 1.0, 2.0],
            alpha2: vec![2.0, 2.0, 2.0, 2.0, 2.0, 1.0],
            beta1: 2.0,
            beta2: 2.0,
            delta: 2.0,
            gamma: 1.0,
            seed: 29,
            emit_latents: false,
        }
    }
}

/// Configuration errors for the generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimError {
    /// A vector parameter does not match the covariate dimension set by `xi`.
    DimensionMismatch { field: &'static str },
    /// `xi` is empty, so the covariate dimension would be zero.
    EmptyCovariates,
    /// `e1` must lie strictly inside (0, 1).
    BadRate { field: &'static str },
    /// `n` must be at least 1.
    BadCount,
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::DimensionMismatch { field } => {
                write!(f, "{field} must have the same length as xi")
            }
            SimError::EmptyCovariates => write!(f, "xi must be nonempty"),
            SimError::BadRate { field } => {
                write!(f, "{field} must be strictly between 0 and 1")
            }
            SimError::BadCount => write!(f, "n must be at least 1"),
        }
    }
}

/// Per-path latent compliance draws. `w0_1` and `w1_1` are the treatments
/// that would be taken under instrument value 1 (always 1 here, so the
/// process is monotone by construction); `w0_0` and `w1_0` are the draws
/// under instrument value 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatentRecord {
    pub eps0: f64,
    pub eps1: f64,
    pub w0_0: u8,
    pub w0_1: u8,
    pub w1_0: u8,
    pub w1_1: u8,
}

impl SimConfig {
    fn check(&self) -> Result<(), SimError> {
        if self.xi.is_empty() {
            return Err(SimError::EmptyCovariates);
        }
        if self.alpha1.len() != self.xi.len() {
            return Err(SimError::DimensionMismatch { field: "alpha1" });
        }
        if self.alpha2.len() != self.xi.len() {
            return Err(SimError::DimensionMismatch { field: "alpha2" });
        }
        if !(self.e1 > 0.0 && self.e1 < 1.0) {
            return Err(SimError::BadRate { field: "e1" });
        }
        if self.n == 0 {
            return Err(SimError::BadCount);
        }
        Ok(())
    }
}

/// The effect of treating early, regime (1,0), against treating late,
/// regime (0,1), on the final outcome. Substituting the outcome equations,
/// Y2(w0, w1) - Y2(w0', w1') = (beta2 + delta beta1)(w0 - w0')
/// + gamma (w1 - w1'), so this contrast is (beta2 + delta beta1) - gamma.
pub fn true_latre(cfg: &SimConfig) -> f64 {
    (cfg.beta2 + cfg.delta * cfg.beta1) - cfg.gamma
}

/// Propensity model that matches the generator exactly: a logistic score
/// in X0 with weights -xi for period 0 and the constant `e1` for period 1.
pub fn oracle_propensities(cfg: &SimConfig) -> PropensityModel {
    let neg_xi: Vec<f64> = cfg.xi.iter().map(|v| -v).collect();
    PropensityModel::new(vec![
        PeriodScore::Logistic {
            intercept: 0.0,
            weights: neg_xi,
            features: FeatureMap::new(vec![FeatureComponent::Covariates(0)]),
        },
        PeriodScore::Constant(cfg.e1),
    ])
}

/// Draw a panel of `cfg.n` paths. Each path uses its own counter-mode
/// substream of the seeded generator, so the output is bit-identical for a
/// given config no matter how paths are scheduled, and grows consistently
/// with `n` (path i is the same in a larger run).
pub fn generate(cfg: &SimConfig) -> Result<(PanelDataset, Option<Vec<LatentRecord>>), SimError> {
    cfg.check()?;
    let d0 = cfg.xi.len();
    let n = cfg.n;

    let mut x0_flat = Vec::with_capacity(n * d0);
    let mut z0 = Vec::with_capacity(n);
    let mut z1 = Vec::with_capacity(n);
    let mut w0 = Vec::with_capacity(n);
    let mut w1 = Vec::with_capacity(n);
    let mut y1 = Vec::with_capacity(n);
    let mut y2 = Vec::with_capacity(n);
    let mut latents = if cfg.emit_latents { Vec::with_capacity(n) } else { Vec::new() };

    let mut x0 = vec![0.0f64; d0];
    for i in 0..n {
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);

        // Fixed draw order per path: covariates, eps0, Z0, W0(0), eps1, Z1, W1(0).
        for slot in x0.iter_mut() {
            *slot = 2.0 * unit_f64(&mut rng) - 1.0;
        }
        let eps0 = unit_f64(&mut rng);
        let p_z0 = sigmoid(-dot(&x0, &cfg.xi));
        let z0_i = u8::from(unit_f64(&mut rng) < p_z0);
        let w0_low = u8::from(unit_f64(&mut rng) < eps0);
        let w0_i = if z0_i == 1 { 1 } else { w0_low };
        let eps1 = unit_f64(&mut rng);
        let z1_i = u8::from(unit_f64(&mut rng) < cfg.e1);
        let w1_low = u8::from(unit_f64(&mut rng) < eps1);
        let w1_i = if z1_i == 1 { 1 } else { w1_low };

        let y1_i = dot(&x0, &cfg.alpha1) + cfg.beta1 * f64::from(w0_i) + eps0;
        let y2_i = dot(&x0, &cfg.alpha2)
            + cfg.beta2 * f64::from(w0_i)
            + cfg.delta * y1_i
            + cfg.gamma * f64::from(w1_i)
            + eps1;

        x0_flat.extend_from_slice(&x0);
        z0.push(z0_i);
        z1.push(z1_i);
        w0.push(w0_i);
        w1.push(w1_i);
        y1.push(y1_i);
        y2.push(y2_i);
        if cfg.emit_latents {
            latents.push(LatentRecord {
                eps0,
                eps1,
                w0_0: w0_low,
                w0_1: 1,
                w1_0: w1_low,
                w1_1: 1,
            });
        }
    }

    // X1 repeats X0 and the post-final covariate block is empty.
    let x1_flat = x0_flat.clone();
    let data = PanelDataset::from_columns(
        1,
        vec![d0, d0, 0],
        vec![x0_flat, x1_flat, Vec::new()],
        vec![z0, z1],
        vec![w0, w1],
        vec![y1, y2],
    )
    .expect("generated columns are internally consistent");
    Ok((data, cfg.emit_latents.then_some(latents)))
}
