//! Product-of-effects model fitted by coordinate ascent.
//!
//! L independent single-change effects each contribute a squared precision
//! scaling; the data variance at instant t is `sigma2` divided by the product
//! of all effect scalings active at t. Each backfitting sweep updates every
//! effect in turn against residual-scaled energies (the other effects'
//! expected scalings folded into y²), which by conjugacy is again an exact
//! single-change posterior. The ELBO is re-read after every effect update and
//! the loop stops, possibly mid-sweep, once the change between consecutive
//! readings falls below `epsilon`; effects never updated by then stay at
//! their prior state.

use statrs::function::gamma::digamma;

use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::math::{gamma_kl, LN_2PI};
use crate::series::TimeSeries;
use crate::single_effect::{expected_tau2, posterior_from_stats, SingleEffectPosterior};
use crate::summaries::{detect, CredibleSet};

/// Row entries below this bound make the division shortcut for residual
/// products unsafe; the exclusion product is used instead.
pub(crate) const RESIDUAL_FLOOR: f64 = 1e-12;

/// Result of a coordinate-ascent fit.
#[derive(Debug, Clone, PartialEq)]
pub struct PriscaFit {
    pub effects: Vec<SingleEffectPosterior>,
    /// Cached expected squared scalings, one row of length T per effect.
    pub tau2_bar: Vec<Vec<f64>>,
    /// ELBO after each completed sweep, plus the reading at a mid-sweep stop;
    /// nondecreasing up to float noise.
    pub elbo_trace: Vec<f64>,
    pub converged: bool,
    /// Number of sweeps started.
    pub iterations: usize,
}

/// Result of the automatic effect-count search.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoFit {
    /// Fit at the chosen L (`fit.effects.len()`).
    pub fit: PriscaFit,
    /// Detection count for each tried L = 1, 2, ….
    pub k_hat_trace: Vec<usize>,
    /// True when the search hit the spacing-based cap without stabilizing.
    pub capped: bool,
}

/// Residual-scaled squared energies for effect `l`: per-instant y² times the
/// product of all other rows. Uses the full product divided by row `l` when
/// the row is bounded away from zero, otherwise the explicit exclusion
/// product.
pub fn residuals(y: &TimeSeries, tau2_bar: &[Vec<f64>], l: usize) -> Result<Vec<f64>> {
    let t_len = y.len();
    if l >= tau2_bar.len() {
        return Err(Error::InvalidInput(format!(
            "effect index {l} out of range for {} rows",
            tau2_bar.len()
        )));
    }
    for (i, row) in tau2_bar.iter().enumerate() {
        if row.len() != t_len {
            return Err(Error::InvalidInput(format!(
                "row {i} has length {} but the series has {t_len} instants",
                row.len()
            )));
        }
        if row.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(Error::InvalidInput(format!("row {i} has a nonpositive entry")));
        }
    }
    let sq = y.instant_sq_sums();
    if tau2_bar.len() == 1 {
        // Empty exclusion product.
        return Ok(sq);
    }
    let row = &tau2_bar[l];
    if row.iter().all(|&v| v >= RESIDUAL_FLOOR) {
        let mut product = vec![1.0; t_len];
        for r in tau2_bar {
            for (p, v) in product.iter_mut().zip(r) {
                *p *= v;
            }
        }
        Ok((0..t_len).map(|t0| sq[t0] * product[t0] / row[t0]).collect())
    } else {
        Ok((0..t_len)
            .map(|t0| {
                let mut r = sq[t0];
                for (i, other) in tau2_bar.iter().enumerate() {
                    if i != l {
                        r *= other[t0];
                    }
                }
                r
            })
            .collect())
    }
}

/// Greedy overlap removal over candidate credible sets.
///
/// Candidates are visited in descending `max_alphas` order (ties by input
/// position); one is kept iff it shares no index with any already-kept set.
/// Returns the kept input positions, sorted ascending.
pub fn dedup_overlaps(sets: &[&CredibleSet], max_alphas: &[f64]) -> Vec<usize> {
    assert_eq!(sets.len(), max_alphas.len());
    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.sort_by(|&i, &j| max_alphas[j].partial_cmp(&max_alphas[i]).unwrap());
    let mut taken: std::collections::HashSet<usize> = std::collections::HashSet::new();
    let mut kept = Vec::new();
    for pos in order {
        if sets[pos].indices.iter().any(|i| taken.contains(i)) {
            continue;
        }
        taken.extend(sets[pos].indices.iter().copied());
        kept.push(pos);
    }
    kept.sort_unstable();
    kept
}

struct FitState<'c> {
    config: &'c ModelConfig,
    sq: Vec<f64>,
    counts: Vec<usize>,
    /// Samples from instant t on; the per-location Gaussian dimension.
    suffix_counts: Vec<usize>,
    /// One slot per effect, filled on its first update.
    effects: Vec<Option<SingleEffectPosterior>>,
    rows: Vec<Vec<f64>>,
    product: Vec<f64>,
    /// Per-effect ELBO contribution (half expected log determinant minus the
    /// KL from the prior); lets the per-update reading stay O(T).
    contrib: Vec<f64>,
    /// Gaussian normalization constant of the ELBO.
    constant: f64,
}

impl<'c> FitState<'c> {
    fn new(y: &TimeSeries, config: &'c ModelConfig) -> Self {
        let sq = y.instant_sq_sums();
        let counts = y.instant_counts();
        let t_len = sq.len();
        let mut suffix_counts = vec![0usize; t_len];
        let mut acc = 0;
        for t0 in (0..t_len).rev() {
            acc += counts[t0];
            suffix_counts[t0] = acc;
        }
        let total_samples = suffix_counts.first().copied().unwrap_or(0);
        let constant = -(total_samples as f64) / 2.0 * (LN_2PI + config.sigma2.ln());
        // A not-yet-updated effect sits at its prior: the KL term vanishes
        // and the expected log determinant uses the prior Gamma(a0, a0).
        let prior_contrib = 0.5
            * (digamma(config.a0) - config.a0.ln())
            * (0..t_len)
                .map(|t0| config.log_prior(t0, t_len).exp() * suffix_counts[t0] as f64)
                .sum::<f64>();
        FitState {
            config,
            sq,
            counts,
            suffix_counts,
            effects: vec![None; config.l],
            rows: vec![vec![1.0; t_len]; config.l],
            product: vec![1.0; t_len],
            contrib: vec![prior_contrib; config.l],
            constant,
        }
    }

    fn t_len(&self) -> usize {
        self.sq.len()
    }

    fn residual_for(&self, l: usize) -> Vec<f64> {
        if self.rows.len() == 1 {
            return self.sq.clone();
        }
        let row = &self.rows[l];
        if row.iter().all(|&v| v >= RESIDUAL_FLOOR) {
            (0..self.t_len())
                .map(|t0| self.sq[t0] * self.product[t0] / row[t0])
                .collect()
        } else {
            (0..self.t_len())
                .map(|t0| {
                    let mut r = self.sq[t0];
                    for (i, other) in self.rows.iter().enumerate() {
                        if i != l {
                            r *= other[t0];
                        }
                    }
                    r
                })
                .collect()
        }
    }

    fn refresh_product(&mut self) {
        for t0 in 0..self.t_len() {
            self.product[t0] = self.rows.iter().map(|r| r[t0]).product();
        }
    }

    fn update_effect(&mut self, l: usize) {
        let resid = self.residual_for(l);
        let post = posterior_from_stats(&resid, &self.counts, self.config);
        let new_row = expected_tau2(&post);
        let safe = self.rows[l].iter().all(|&v| v >= RESIDUAL_FLOOR);
        if safe {
            for (p, (&old, &new)) in
                self.product.iter_mut().zip(self.rows[l].iter().zip(&new_row))
            {
                *p = *p / old * new;
            }
            self.rows[l] = new_row;
        } else {
            self.rows[l] = new_row;
            self.refresh_product();
        }
        self.contrib[l] = effect_terms(&post, &self.suffix_counts, self.config);
        self.effects[l] = Some(post);
    }

    /// ELBO from the maintained per-effect contributions and scaling product;
    /// O(T + L), cheap enough to read after every effect update.
    fn elbo(&self) -> f64 {
        let energy = (0..self.t_len()).map(|t0| self.sq[t0] * self.product[t0]).sum::<f64>()
            / (2.0 * self.config.sigma2);
        self.constant + self.contrib.iter().sum::<f64>() - energy
    }
}

/// One effect's ELBO contribution: half its expected log determinant minus
/// its KL (categorical plus conditional Gamma terms) from the prior.
fn effect_terms(effect: &SingleEffectPosterior, suffix_counts: &[usize], config: &ModelConfig) -> f64 {
    let t_len = suffix_counts.len();
    let mut log_det = 0.0;
    let mut kl = 0.0;
    for (t0, &alpha) in effect.alpha.iter().enumerate() {
        if alpha == 0.0 {
            continue;
        }
        log_det +=
            alpha * suffix_counts[t0] as f64 * (digamma(effect.a[t0]) - effect.b[t0].ln());
        kl += alpha
            * ((alpha.ln() - config.log_prior(t0, t_len))
                + gamma_kl(effect.a[t0], effect.b[t0], config.a0, config.a0));
    }
    0.5 * log_det - kl
}

fn elbo_terms<'a>(
    effects: impl Iterator<Item = &'a SingleEffectPosterior>,
    product: &[f64],
    sq: &[f64],
    suffix_counts: &[usize],
    config: &ModelConfig,
) -> f64 {
    let total_samples: usize = suffix_counts.first().copied().unwrap_or(0);

    // E_q[log p(y | scalings)]: Gaussian constant, expected log determinant
    // of the precision scaling, expected weighted energy; minus the KL of
    // each effect from its prior.
    let constant = -(total_samples as f64) / 2.0 * (LN_2PI + config.sigma2.ln());
    let terms: f64 = effects.map(|e| effect_terms(e, suffix_counts, config)).sum();
    let energy: f64 = (0..sq.len()).map(|t0| sq[t0] * product[t0]).sum::<f64>()
        / (2.0 * config.sigma2);

    constant + terms - energy
}

/// Evidence lower bound of a fit state against data `y`: the exact
/// E_q[log p(y, effects) − log q(effects)] under the mean-field factorization.
pub fn elbo(effects: &[SingleEffectPosterior], y: &TimeSeries, config: &ModelConfig) -> f64 {
    let t_len = y.len();
    assert!(!effects.is_empty(), "at least one effect required");
    for e in effects {
        assert_eq!(e.alpha.len(), t_len, "effect length must match the series");
    }
    let sq = y.instant_sq_sums();
    let counts = y.instant_counts();
    let mut suffix_counts = vec![0usize; t_len];
    let mut acc = 0;
    for t0 in (0..t_len).rev() {
        acc += counts[t0];
        suffix_counts[t0] = acc;
    }
    let rows: Vec<Vec<f64>> = effects.iter().map(expected_tau2).collect();
    let mut product = vec![1.0; t_len];
    for row in &rows {
        for (p, v) in product.iter_mut().zip(row) {
            *p *= v;
        }
    }
    elbo_terms(effects.iter(), &product, &sq, &suffix_counts, config)
}

fn fit_with_order(y: &TimeSeries, config: &ModelConfig, reversed: bool) -> Result<PriscaFit> {
    config.validate(y.len())?;
    let order: Vec<usize> = if reversed {
        (0..config.l).rev().collect()
    } else {
        (0..config.l).collect()
    };
    let t_len = y.len();
    let mut state = FitState::new(y, config);
    let mut elbo_trace: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut prev = state.elbo();
    'sweeps: for _ in 0..config.max_iter {
        for &l in &order {
            state.update_effect(l);
            let e = state.elbo();
            let settled = (e - prev).abs() < config.epsilon;
            prev = e;
            if settled {
                converged = true;
                break 'sweeps;
            }
        }
        // One exact rebuild per sweep keeps division drift from accumulating.
        state.refresh_product();
        prev = state.elbo();
        elbo_trace.push(prev);
    }
    if converged {
        state.refresh_product();
        elbo_trace.push(state.elbo());
    }
    let iterations = elbo_trace.len();
    let effects = state
        .effects
        .into_iter()
        .map(|e| {
            // Reachable only when the stop fires before a first update.
            e.unwrap_or_else(|| SingleEffectPosterior {
                alpha: (0..t_len).map(|t0| config.log_prior(t0, t_len).exp()).collect(),
                a: vec![config.a0; t_len],
                b: vec![config.a0; t_len],
                log_marginals: vec![0.0; t_len],
            })
        })
        .collect();
    Ok(PriscaFit { effects, tau2_bar: state.rows, elbo_trace, converged, iterations })
}

/// Coordinate-ascent fit with `config.l` effects.
///
/// All scaling rows start at one; sweeps run l = 1..L in order, re-reading
/// the ELBO after every effect update, until the change between consecutive
/// readings drops below `epsilon` (possibly mid-sweep) or `max_iter` sweeps
/// complete. Effects never updated before a stop keep their prior state with
/// zeroed log-marginals. Non-convergence is reported through the `converged`
/// flag, not an error.
pub fn fit(y: &TimeSeries, config: &ModelConfig) -> Result<PriscaFit> {
    fit_with_order(y, config, false)
}

/// Largest effect count the automatic search will try: ⌈T / ⌊√(T log T)⌋⌉,
/// the spacing-based bound on how many well-separated changes fit in T.
pub fn effect_cap(t_len: usize) -> usize {
    let t = t_len as f64;
    let denom = (t * t.ln()).sqrt().floor().max(1.0);
    ((t / denom).ceil() as usize).max(1)
}

/// Automatic effect-count search: fit L = 1, 2, … and stop at the first L
/// whose detection count matches the previous one; `config.l` is ignored.
/// Every L starts cold. Hitting the cap returns that fit flagged `capped`.
pub fn auto_fit(y: &TimeSeries, config: &ModelConfig) -> Result<AutoFit> {
    config.validate(y.len())?;
    let cap = effect_cap(y.len());
    let mut k_hat_trace: Vec<usize> = Vec::new();
    let mut previous: Option<(PriscaFit, usize)> = None;
    for l in 1..=cap {
        let mut per_l = config.clone();
        per_l.l = l;
        let candidate = fit(y, &per_l)?;
        let k = detect(&candidate, config.p).k_hat;
        k_hat_trace.push(k);
        if let Some((_, prev_k)) = &previous {
            if k == *prev_k {
                return Ok(AutoFit { fit: candidate, k_hat_trace, capped: false });
            }
        }
        previous = Some((candidate, k));
    }
    let (fit, _) = previous.expect("cap is at least 1");
    Ok(AutoFit { fit, k_hat_trace, capped: true })
}
