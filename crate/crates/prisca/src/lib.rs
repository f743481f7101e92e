//! Bayesian detection of variance change points in Gaussian sequences.
//!
//! A sequence with a single change at an unknown instant has a closed-form
//! posterior: a categorical distribution over change locations paired with a
//! conjugate Gamma law for the precision scaling to the right of the change.
//! Multiple changes are modeled as a product of L such single-change effects,
//! fitted by coordinate ascent on the evidence lower bound: each sweep
//! refits every effect against the data rescaled by all other effects'
//! expected scalings, which is again an exact single-change update.
//!
//! Reported summaries are per-effect point estimates and level-p credible
//! sets of minimal cardinality. Effects whose posterior stays diffuse are
//! discarded, overlapping sets are deduplicated, and the surviving count is
//! the detected number of changes. [`auto_fit`] grows L until that count
//! stabilizes.
//!
//! ```
//! use prisca::{detect, fit, ModelConfig, TimeSeries};
//!
//! // Variance jumps fourfold at instant 11.
//! let values: Vec<f64> = (1..=20)
//!     .map(|t| if t <= 10 { 0.5 } else { 2.0 } * if t % 2 == 0 { 1.0 } else { -1.0 })
//!     .collect();
//! let y = TimeSeries::new(values)?;
//! let config = ModelConfig { l: 1, ..ModelConfig::default() };
//! let fitted = fit(&y, &config)?;
//! let report = detect(&fitted, config.p);
//! assert_eq!(report.k_hat, 1);
//! assert!(report.detections[0].credible_set.contains(11));
//! # Ok::<(), prisca::Error>(())
//! ```

pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod ingest;
mod math;
pub mod preprocess;
pub mod report;
pub mod series;
pub mod simbench;
pub mod single_effect;
pub mod summaries;

pub use config::ModelConfig;
pub use engine::{auto_fit, elbo, fit, residuals, AutoFit, PriscaFit};
pub use error::{Error, Result};
pub use preprocess::{ar_residualize, difference_detrend, ArFit, ArSpec};
pub use series::TimeSeries;
pub use simbench::{
    generate_dataset, hausdorff_like, run_benchmark, BenchmarkMethod, BenchmarkMetrics,
    GeneratedDataset, SimulationSpec,
};
pub use single_effect::{
    expected_tau2, log_marginal_likelihood, multi_obs_posterior, single_effect_posterior,
    SingleEffectPosterior,
};
pub use summaries::{
    credible_set, detect, detect_with_threshold, map_estimate, ChangePointReport, CredibleSet,
    Detection,
};
