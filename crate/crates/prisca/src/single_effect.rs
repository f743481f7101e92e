//! Exact conjugate posterior of the single variance-change model.
//!
//! The model: observations are independent zero-mean Gaussians with variance
//! `sigma2` before an unknown change instant and `sigma2 / s²` from the change
//! on, where the squared precision scale `s²` carries a Gamma(a0, a0) prior
//! and the change location a categorical prior. Conjugacy makes the joint
//! posterior available in closed form: a categorical `alpha` over locations
//! and, per location t, a Gamma(a_t, b_t) over `s²`.
//!
//! Everything here is computed in log space; `b_t` uses right-to-left suffix
//! sums so one call costs O(T).

use statrs::function::gamma::ln_gamma;

use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::math::{log_sum_exp, LN_2PI};
use crate::series::TimeSeries;

/// Closed-form posterior of the single-change model.
///
/// Entry `t0` (0-based) corresponds to a change at time `t0 + 1` (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct SingleEffectPosterior {
    /// Posterior change-location probabilities; sums to one.
    pub alpha: Vec<f64>,
    /// Gamma shape per location: a_t = a0 + (samples from t on)/2.
    pub a: Vec<f64>,
    /// Gamma rate per location: b_t = a0 + (squared energy from t on)/(2 sigma2).
    pub b: Vec<f64>,
    /// log P(y | change at t), retained for diagnostics.
    pub log_marginals: Vec<f64>,
}

impl SingleEffectPosterior {
    /// Posterior mean of `s²` given a change at `t0` (0-based).
    pub fn scale_mean(&self, t0: usize) -> f64 {
        self.a[t0] / self.b[t0]
    }
}

/// Shared closed form over per-instant sufficient statistics.
///
/// `sq[t]` is the sum of squared samples at instant t and `counts[t]` how many
/// samples it pools; the plain model is the all-ones case. The PRISCA engine
/// reuses this path with residual-scaled energies in place of `sq`.
pub(crate) fn posterior_from_stats(
    sq: &[f64],
    counts: &[usize],
    config: &ModelConfig,
) -> SingleEffectPosterior {
    let t_len = sq.len();
    debug_assert_eq!(counts.len(), t_len);
    let total_samples: usize = counts.iter().sum();
    let total_sq: f64 = sq.iter().sum();
    let ln_noise = (LN_2PI + config.sigma2.ln()) * total_samples as f64 / 2.0;
    let prior_norm = config.a0 * config.a0.ln() - ln_gamma(config.a0);

    let mut a = vec![0.0; t_len];
    let mut b = vec![0.0; t_len];
    let mut log_marginals = vec![0.0; t_len];
    let mut suffix_sq = 0.0;
    let mut suffix_n = 0usize;
    for t0 in (0..t_len).rev() {
        suffix_sq += sq[t0];
        suffix_n += counts[t0];
        let prefix_sq = total_sq - suffix_sq;
        a[t0] = config.a0 + suffix_n as f64 / 2.0;
        b[t0] = config.a0 + suffix_sq / (2.0 * config.sigma2);
        log_marginals[t0] = -ln_noise - prefix_sq / (2.0 * config.sigma2) + prior_norm
            + ln_gamma(a[t0])
            - a[t0] * b[t0].ln();
    }

    let weighted: Vec<f64> = (0..t_len)
        .map(|t0| log_marginals[t0] + config.log_prior(t0, t_len))
        .collect();
    let norm = log_sum_exp(&weighted);
    let alpha: Vec<f64> = weighted.iter().map(|w| (w - norm).exp()).collect();

    SingleEffectPosterior { alpha, a, b, log_marginals }
}

/// Log of the Gamma-integrated likelihood given a change at time `t` (1-based).
///
/// The segment before `t` contributes its exact Gaussian log density at
/// variance `sigma2`; the segment from `t` on is integrated against the
/// Gamma(a0, a0) prior on the squared precision scale.
pub fn log_marginal_likelihood(y: &TimeSeries, t: usize, config: &ModelConfig) -> Result<f64> {
    let t_len = y.len();
    config.validate(t_len)?;
    if t < 1 || t > t_len {
        return Err(Error::InvalidInput(format!(
            "change index {t} out of range 1..={t_len}"
        )));
    }
    let sq = y.instant_sq_sums();
    let counts = y.instant_counts();
    let total_samples: usize = counts.iter().sum();
    let suffix_sq: f64 = sq[t - 1..].iter().sum();
    let suffix_n: usize = counts[t - 1..].iter().sum();
    let prefix_sq: f64 = sq[..t - 1].iter().sum();
    let a_t = config.a0 + suffix_n as f64 / 2.0;
    let b_t = config.a0 + suffix_sq / (2.0 * config.sigma2);
    Ok(
        -(LN_2PI + config.sigma2.ln()) * total_samples as f64 / 2.0
            - prefix_sq / (2.0 * config.sigma2)
            + config.a0 * config.a0.ln()
            - ln_gamma(config.a0)
            + ln_gamma(a_t)
            - a_t * b_t.ln(),
    )
}

/// Full single-change posterior: `alpha_t ∝ exp(log_marginal(t)) · prior_t`,
/// normalized by log-sum-exp. O(T).
pub fn single_effect_posterior(y: &TimeSeries, config: &ModelConfig) -> Result<SingleEffectPosterior> {
    config.validate(y.len())?;
    Ok(posterior_from_stats(&y.instant_sq_sums(), &y.instant_counts(), config))
}

/// Single-change posterior for series with replicated observations.
///
/// Pools each instant's samples: a_t adds half the suffix sample count and
/// b_t half the suffix squared energy over sigma2.
pub fn multi_obs_posterior(y: &TimeSeries, config: &ModelConfig) -> Result<SingleEffectPosterior> {
    if !y.has_replicates() {
        return Err(Error::InvalidInput(
            "multi_obs_posterior needs per-instant counts; use single_effect_posterior".into(),
        ));
    }
    single_effect_posterior(y, config)
}

/// Posterior expectation of the squared precision scaling at every instant:
/// entry t mixes the per-location scale means over locations at or before t
/// and the prior value 1 over locations after t. One prefix pass, O(T).
pub fn expected_tau2(post: &SingleEffectPosterior) -> Vec<f64> {
    let t_len = post.alpha.len();
    // Trailing probability mass, accumulated right-to-left so every entry is
    // a sum of nonnegative terms (keeps the output strictly positive).
    let mut tail = vec![0.0; t_len];
    let mut acc = 0.0;
    for t0 in (0..t_len).rev() {
        tail[t0] = acc;
        acc += post.alpha[t0];
    }
    let mut out = Vec::with_capacity(t_len);
    let mut weighted = 0.0;
    for (t0, &tail_mass) in tail.iter().enumerate() {
        weighted += post.alpha[t0] * post.scale_mean(t0);
        out.push(weighted + tail_mass);
    }
    out
}
