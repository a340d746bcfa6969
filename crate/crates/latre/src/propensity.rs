//! Instrument propensity models: per-period providers of P(Z_j = 1 | history)
//! that every weight denominator queries, either closed-form (known design)
//! or fitted by logistic regression.
//!
//! Joint probabilities factor as products of sequential per-period
//! conditionals, the factorization consistent with instruments that are
//! randomized given observed history. All returned probabilities are clipped
//! to [eps_clip, 1 - eps_clip]; clip events are counted on the model so
//! estimators can surface them as diagnostics.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::model::{PanelDataset, PathView};
use crate::numeric::{cholesky_solve, sigmoid, softplus};

/// One block of regressors drawn from a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureComponent {
    /// Covariate block x_j (j = 0 gives the baseline covariates).
    Covariates(usize),
    /// Outcome y_j, j >= 1.
    Outcome(usize),
    /// Instrument z_j as 0/1.
    Instrument(usize),
    /// Treatment w_j as 0/1.
    Treatment(usize),
}

/// Ordered list of path components forming a regressor vector (no intercept;
/// fitting and scoring handle the intercept separately).
#[derive(Clone, Debug)]
pub struct FeatureMap {
    components: Vec<FeatureComponent>,
}

impl FeatureMap {
    pub fn new(components: Vec<FeatureComponent>) -> Self {
        FeatureMap { components }
    }

    /// Conditioning history for the period-j instrument: x0, then (y_k, x_k)
    /// for k = 1..=j, then the earlier instruments z_0..z_{j-1}. For j = 0
    /// this is the baseline covariates alone.
    pub fn instrument_history(j: usize) -> Self {
        let mut components = vec![FeatureComponent::Covariates(0)];
        for k in 1..=j {
            components.push(FeatureComponent::Outcome(k));
            components.push(FeatureComponent::Covariates(k));
        }
        for k in 0..j {
            components.push(FeatureComponent::Instrument(k));
        }
        FeatureMap { components }
    }

    /// The same history with realized treatments in place of instruments,
    /// for models of P(W_j = 1 | history).
    pub fn treatment_history(j: usize) -> Self {
        let mut components = vec![FeatureComponent::Covariates(0)];
        for k in 1..=j {
            components.push(FeatureComponent::Outcome(k));
            components.push(FeatureComponent::Covariates(k));
        }
        for k in 0..j {
            components.push(FeatureComponent::Treatment(k));
        }
        FeatureMap { components }
    }

    pub fn components(&self) -> &[FeatureComponent] {
        &self.components
    }

    /// Regressor count given the panel's covariate block widths.
    pub fn width(&self, dims: &[usize]) -> usize {
        self.components
            .iter()
            .map(|c| match c {
                FeatureComponent::Covariates(j) => dims[*j],
                _ => 1,
            })
            .sum()
    }

    /// Appends the regressor vector for one path.
    pub fn evaluate_into(&self, path: PathView<'_>, out: &mut Vec<f64>) {
        for c in &self.components {
            match c {
                FeatureComponent::Covariates(j) => out.extend_from_slice(path.x(*j)),
                FeatureComponent::Outcome(j) => out.push(path.y(*j)),
                FeatureComponent::Instrument(j) => out.push(path.z(*j) as f64),
                FeatureComponent::Treatment(j) => out.push(path.w(*j) as f64),
            }
        }
    }

    /// Dot product of the regressor vector with `weights`, without
    /// materializing the vector. `weights` must have length `width`.
    pub fn dot(&self, path: PathView<'_>, weights: &[f64]) -> f64 {
        let mut acc = 0.0;
        let mut k = 0;
        for c in &self.components {
            match c {
                FeatureComponent::Covariates(j) => {
                    for &v in path.x(*j) {
                        acc += weights[k] * v;
                        k += 1;
                    }
                }
                FeatureComponent::Outcome(j) => {
                    acc += weights[k] * path.y(*j);
                    k += 1;
                }
                FeatureComponent::Instrument(j) => {
                    acc += weights[k] * path.z(*j) as f64;
                    k += 1;
                }
                FeatureComponent::Treatment(j) => {
                    acc += weights[k] * path.w(*j) as f64;
                    k += 1;
                }
            }
        }
        debug_assert_eq!(k, weights.len());
        acc
    }
}

/// Score function for one period, returning P(Z_j = 1 | history) before
/// clipping.
pub enum PeriodScore {
    Constant(f64),
    /// sigmoid(intercept + weights . features(path)).
    Logistic { intercept: f64, weights: Vec<f64>, features: FeatureMap },
    /// Arbitrary user score; must return finite values in (0, 1).
    Custom(Box<dyn for<'a> Fn(PathView<'a>) -> f64 + Send + Sync>),
}

impl PeriodScore {
    /// Wraps a completed logistic fit over the given feature map.
    pub fn from_fit(fit: &LogisticFit, features: FeatureMap) -> Self {
        PeriodScore::Logistic {
            intercept: fit.coefficients[0],
            weights: fit.coefficients[1..].to_vec(),
            features,
        }
    }

    fn score(&self, path: PathView<'_>) -> f64 {
        match self {
            PeriodScore::Constant(p) => *p,
            PeriodScore::Logistic { intercept, weights, features } => {
                sigmoid(intercept + features.dot(path, weights))
            }
            PeriodScore::Custom(f) => f(path),
        }
    }
}

impl fmt::Debug for PeriodScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PeriodScore::Constant(p) => write!(f, "Constant({p})"),
            PeriodScore::Logistic { intercept, weights, .. } => {
                write!(f, "Logistic(intercept={intercept}, weights={weights:?})")
            }
            PeriodScore::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Per-period instrument (or treatment) probability provider with clipping.
pub struct PropensityModel {
    periods: Vec<PeriodScore>,
    eps_clip: f64,
    clip_events: AtomicU64,
}

impl fmt::Debug for PropensityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PropensityModel")
            .field("periods", &self.periods)
            .field("eps_clip", &self.eps_clip)
            .field("clip_events", &self.clip_events.load(Ordering::Relaxed))
            .finish()
    }
}

impl PropensityModel {
    pub fn new(periods: Vec<PeriodScore>) -> Self {
        PropensityModel { periods, eps_clip: 1e-6, clip_events: AtomicU64::new(0) }
    }

    /// One constant probability per period.
    pub fn from_constants(probs: &[f64]) -> Self {
        Self::new(probs.iter().map(|&p| PeriodScore::Constant(p)).collect())
    }

    pub fn with_eps_clip(mut self, eps_clip: f64) -> Self {
        assert!(eps_clip > 0.0 && eps_clip < 0.5, "eps_clip must lie in (0, 0.5)");
        self.eps_clip = eps_clip;
        self
    }

    /// Number of periods covered.
    pub fn period_count(&self) -> usize {
        self.periods.len()
    }

    pub fn eps_clip(&self) -> f64 {
        self.eps_clip
    }

    /// Clip events recorded since construction (or the last snapshot delta
    /// the caller computed).
    pub fn clip_count(&self) -> u64 {
        self.clip_events.load(Ordering::Relaxed)
    }

    fn clip(&self, p: f64) -> f64 {
        if p < self.eps_clip {
            self.clip_events.fetch_add(1, Ordering::Relaxed);
            self.eps_clip
        } else if p > 1.0 - self.eps_clip {
            self.clip_events.fetch_add(1, Ordering::Relaxed);
            1.0 - self.eps_clip
        } else {
            p
        }
    }

    /// P(Z_j = i | history) for this path, clipped. The two sides sum to one
    /// before clipping.
    pub fn marginal_prob(&self, path: PathView<'_>, j: usize, i: u8) -> f64 {
        let p1 = self.periods[j].score(path);
        self.clip(if i == 1 { p1 } else { 1.0 - p1 })
    }

    /// P(Z_{j_1} = i_1, ..., Z_{j_t} = i_t | history), as the product of
    /// sequential clipped marginals. Periods must be strictly increasing.
    /// An empty assignment list yields 1.
    pub fn joint_prob(&self, path: PathView<'_>, assignments: &[(usize, u8)]) -> f64 {
        debug_assert!(assignments.windows(2).all(|w| w[0].0 < w[1].0));
        let mut p = 1.0;
        for &(j, i) in assignments {
            p *= self.marginal_prob(path, j, i);
        }
        p
    }
}

/// Completed logistic regression. `coefficients[0]` is the intercept.
#[derive(Clone, Debug)]
pub struct LogisticFit {
    pub coefficients: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Sup-norm of the per-row average log-likelihood gradient at the final
    /// coefficients. Averaging keeps the scale comparable across sample
    /// sizes; the summed gradient of a large sample cannot reach a fixed
    /// absolute tolerance.
    pub gradient_norm: f64,
}

/// Tuning for the logistic fitter and the downstream estimators' guards.
#[derive(Clone, Debug)]
pub struct FitOptions {
    /// Convergence tolerance on the sup-norm of the per-row average gradient.
    pub tol: f64,
    pub max_iter: usize,
    /// Diagonal jitter keeping the Hessian positive definite.
    pub ridge: f64,
    /// Coefficient L2 bound beyond which the fit is declared separated.
    /// Must sit below the scale where separated fits start to satisfy the
    /// gradient tolerance (margins of ~18 in the linear index); legitimate
    /// coefficient norms in this domain are an order of magnitude smaller.
    pub coef_bound: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { tol: 1e-8, max_iter: 100, ridge: 1e-10, coef_bound: 30.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FitError {
    /// All labels identical; the likelihood has no interior maximum.
    SingleClass,
    /// Coefficients diverged past the configured bound (perfect separation).
    Separation,
    /// Fewer rows than parameters.
    TooFewRows,
}

impl fmt::Display for FitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitError::SingleClass => write!(f, "labels are constant; cannot fit a logistic model"),
            FitError::Separation => {
                write!(f, "logistic fit diverged (perfectly separated data)")
            }
            FitError::TooFewRows => write!(f, "need more rows than logistic parameters"),
        }
    }
}

/// Binomial log-likelihood of `theta` (intercept first, then `p` slopes) on a
/// row-major n-by-p design with 0/1 labels.
pub fn log_likelihood(x: &[f64], labels: &[u8], p: usize, theta: &[f64]) -> f64 {
    debug_assert_eq!(theta.len(), p + 1);
    let n = labels.len();
    debug_assert_eq!(x.len(), n * p);
    let mut ll = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        let row = &x[i * p..(i + 1) * p];
        let mut eta = theta[0];
        for (k, &v) in row.iter().enumerate() {
            eta += theta[k + 1] * v;
        }
        ll += f64::from(y) * eta - softplus(eta);
    }
    ll
}

/// Gradient of [`log_likelihood`] with respect to theta, written into `grad`
/// (length p + 1).
pub fn log_likelihood_gradient(x: &[f64], labels: &[u8], p: usize, theta: &[f64], grad: &mut [f64]) {
    debug_assert_eq!(grad.len(), p + 1);
    grad.fill(0.0);
    for (i, &y) in labels.iter().enumerate() {
        let row = &x[i * p..(i + 1) * p];
        let mut eta = theta[0];
        for (k, &v) in row.iter().enumerate() {
            eta += theta[k + 1] * v;
        }
        let r = f64::from(y) - sigmoid(eta);
        grad[0] += r;
        for (k, &v) in row.iter().enumerate() {
            grad[k + 1] += r * v;
        }
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &a| m.max(a.abs()))
}

/// Maximizes the binomial log-likelihood by damped Newton iteration with
/// step-halving. The design is row-major n-by-p; an intercept column is
/// implicit.
pub fn fit_logistic(
    x: &[f64],
    labels: &[u8],
    p: usize,
    opts: &FitOptions,
) -> Result<LogisticFit, FitError> {
    let n = labels.len();
    assert_eq!(x.len(), n * p, "design size must equal rows * columns");
    if n < p + 1 {
        return Err(FitError::TooFewRows);
    }
    let ones = labels.iter().filter(|&&y| y == 1).count();
    if ones == 0 || ones == n {
        return Err(FitError::SingleClass);
    }

    let dim = p + 1;
    let mut theta = vec![0.0f64; dim];
    let mut grad = vec![0.0f64; dim];
    let mut hess = vec![0.0f64; dim * dim];
    let mut step_dir = vec![0.0f64; dim];
    let mut candidate = vec![0.0f64; dim];
    let mut ll = log_likelihood(x, labels, p, &theta);
    let mut iterations = 0;

    let scale = n as f64;
    for _ in 0..opts.max_iter {
        log_likelihood_gradient(x, labels, p, &theta, &mut grad);
        if sup_norm(&grad) <= opts.tol * scale {
            return Ok(LogisticFit {
                gradient_norm: sup_norm(&grad) / scale,
                coefficients: theta,
                converged: true,
                iterations,
            });
        }
        iterations += 1;

        hess.fill(0.0);
        for i in 0..n {
            let row = &x[i * p..(i + 1) * p];
            let mut eta = theta[0];
            for (k, &v) in row.iter().enumerate() {
                eta += theta[k + 1] * v;
            }
            let mu = sigmoid(eta);
            let s = mu * (1.0 - mu);
            // Upper triangle of s * phi phi^T with phi = (1, row).
            hess[0] += s;
            for a in 0..p {
                hess[a + 1] += s * row[a];
            }
            for a in 0..p {
                let sa = s * row[a];
                let base = (a + 1) * dim;
                for b in a..p {
                    hess[base + b + 1] += sa * row[b];
                }
            }
        }
        for a in 0..dim {
            for b in (a + 1)..dim {
                hess[b * dim + a] = hess[a * dim + b];
            }
            hess[a * dim + a] += opts.ridge;
        }

        step_dir.copy_from_slice(&grad);
        if !cholesky_solve(&mut hess, &mut step_dir, dim) {
            return Err(FitError::Separation);
        }

        // Step-halve until the likelihood stops decreasing. Near the optimum
        // a full Newton step may change the likelihood by less than its
        // rounding error, so accept anything within that noise floor.
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            for k in 0..dim {
                candidate[k] = theta[k] + step * step_dir[k];
            }
            let cll = log_likelihood(x, labels, p, &candidate);
            if cll >= ll - 1e-9 * (1.0 + ll.abs()) {
                theta.copy_from_slice(&candidate);
                ll = cll;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }

        let norm_sq: f64 = theta.iter().map(|&t| t * t).sum();
        if norm_sq > opts.coef_bound * opts.coef_bound {
            return Err(FitError::Separation);
        }
    }

    log_likelihood_gradient(x, labels, p, &theta, &mut grad);
    let gradient_norm = sup_norm(&grad) / scale;
    Ok(LogisticFit { converged: gradient_norm <= opts.tol, coefficients: theta, iterations, gradient_norm })
}

fn fit_history_models(
    data: &PanelDataset,
    opts: &FitOptions,
    map_for: fn(usize) -> FeatureMap,
    label_for: fn(PathView<'_>, usize) -> u8,
) -> Result<PropensityModel, FitError> {
    let mut periods = Vec::with_capacity(data.horizon() + 1);
    for j in 0..=data.horizon() {
        let map = map_for(j);
        let p = map.width(data.dims());
        let mut x = Vec::with_capacity(data.n() * p);
        let mut labels = Vec::with_capacity(data.n());
        for path in data.iter_paths() {
            map.evaluate_into(path, &mut x);
            labels.push(label_for(path, j));
        }
        let fit = fit_logistic(&x, &labels, p, opts)?;
        periods.push(PeriodScore::from_fit(&fit, map));
    }
    Ok(PropensityModel::new(periods))
}

/// Fits one logistic model of P(Z_j = 1 | history) per period over the
/// default instrument history.
pub fn fit_instrument_models(
    data: &PanelDataset,
    opts: &FitOptions,
) -> Result<PropensityModel, FitError> {
    fit_history_models(data, opts, FeatureMap::instrument_history, |path, j| path.z(j))
}

/// Fits one logistic model of P(W_j = 1 | history) per period, for
/// estimators that treat the realized treatments as sequentially randomized.
pub fn fit_treatment_models(
    data: &PanelDataset,
    opts: &FitOptions,
) -> Result<PropensityModel, FitError> {
    fit_history_models(data, opts, FeatureMap::treatment_history, |path, j| path.w(j))
}
