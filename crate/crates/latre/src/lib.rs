//! Estimation of local average treatment regime effects from multi-period
//! panel data, using one binary instrument per binary treatment period.
//!
//! The crate provides the data model for observation paths, instrument
//! propensity models (closed-form or logistic fits), the signed
//! inverse-propensity kappa weights, the moment and probability estimators
//! built from them, two comparison estimators, and a seeded generator for
//! the synthetic panels used by the replication harness.
//!
//! The core is `no_std` (with `alloc`); file formats, configuration, and the
//! command-line front end live in the companion `latre-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod numeric;

pub mod baselines;
pub mod identification;
pub mod model;
pub mod propensity;
pub mod simgen;
pub mod weights;

pub use model::{
    enumerate_compliance_types, evaluate_utility, render_violations, validate_dataset,
    ComplianceType, DataError, ObservationPath, PanelDataset, PathView, Regime,
    UtilityFunctional, Violation, ViolationRule,
};
pub use propensity::{
    fit_instrument_models, fit_logistic, fit_treatment_models, log_likelihood,
    log_likelihood_gradient, FeatureComponent, FeatureMap, FitError, FitOptions, LogisticFit,
    PeriodScore, PropensityModel,
};
pub use weights::{k_term, kappa_full, kappa_term_count, kappa_type, KappaDiagnostics};

pub use identification::{
    bootstrap_interval, bootstrap_single, compliance_type_probability, complier_probability,
    complier_probability_product, conditional_latre_by_stratum, expected_utility_by_type,
    latre_contrast, percentile_interval, potential_treatment_moment, BootstrapInterval,
    EstimateError, EstimateReport, EstimatorOptions,
};

pub use baselines::{naive_contrast, noiv_contrast};

pub use simgen::{generate, oracle_propensities, true_latre, LatentRecord, SimConfig, SimError};
