use crate::error::{Error, Result};

/// Hyperparameters shared by the single-effect posterior and the product
/// model.
///
/// `a0` is both shape and rate of the Gamma prior on the squared precision
/// scale, so the prior scale has mean one. `sigma2` is the baseline noise
/// variance, taken as known; an unknown baseline is absorbed by an extra
/// effect detecting a change at the start of the sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub a0: f64,
    pub sigma2: f64,
    /// Change-location prior weights; `None` means uniform 1/T.
    pub prior: Option<Vec<f64>>,
    /// Number of effects L.
    pub l: usize,
    /// Credible level p.
    pub p: f64,
    /// Absolute ELBO change between consecutive readings below which the fit
    /// stops; the objective is read after every effect update.
    pub epsilon: f64,
    pub max_iter: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            a0: 1e-3,
            sigma2: 1.0,
            prior: None,
            l: 1,
            p: 0.9,
            epsilon: 1e-3,
            max_iter: 1000,
        }
    }
}

impl ModelConfig {
    /// Validate against a series of length `t_len`.
    pub fn validate(&self, t_len: usize) -> Result<()> {
        if !(self.a0.is_finite() && self.a0 > 0.0) {
            return Err(Error::InvalidConfig(format!("a0 must be positive, got {}", self.a0)));
        }
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sigma2 must be positive, got {}",
                self.sigma2
            )));
        }
        if self.l == 0 {
            return Err(Error::InvalidConfig("L must be at least 1".into()));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidConfig(format!("p must lie in (0,1), got {}", self.p)));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if let Some(prior) = &self.prior {
            if prior.len() != t_len {
                return Err(Error::InvalidConfig(format!(
                    "prior has length {} but the series has {} instants",
                    prior.len(),
                    t_len
                )));
            }
            if prior.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
                return Err(Error::InvalidConfig("prior entries must be strictly positive".into()));
            }
            let sum: f64 = prior.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidConfig(format!(
                    "prior must sum to 1 within 1e-12, got {sum}"
                )));
            }
        }
        Ok(())
    }

    /// Log prior weight for instant `t0` (0-based) on a series of length `t_len`.
    pub(crate) fn log_prior(&self, t0: usize, t_len: usize) -> f64 {
        match &self.prior {
            Some(prior) => prior[t0].ln(),
            None => -(t_len as f64).ln(),
        }
    }
}
