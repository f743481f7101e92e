//! Shared helpers for integration tests: seeded data generators, a
//! quadrature oracle for the single-change marginal likelihood, and a Monte
//! Carlo estimator of the variational objective. The oracles deliberately
//! avoid the library's closed forms so agreement is evidence, not tautology.
#![allow(dead_code)]

use prisca::{ModelConfig, SingleEffectPosterior, TimeSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};
use statrs::function::gamma::ln_gamma;

pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Gaussian series whose standard deviation at 1-based instant t is `sd(t)`.
pub fn gaussian_series(t_len: usize, seed: u64, sd: impl Fn(usize) -> f64) -> TimeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (1..=t_len)
        .map(|t| Normal::new(0.0, sd(t)).unwrap().sample(&mut rng))
        .collect();
    TimeSeries::new(values).unwrap()
}

/// Variance `var_left` before 1-based instant `t0`, `var_right` from it on.
pub fn single_change(t_len: usize, t0: usize, var_left: f64, var_right: f64, seed: u64) -> TimeSeries {
    gaussian_series(t_len, seed, |t| if t >= t0 { var_right.sqrt() } else { var_left.sqrt() })
}

pub fn white_noise(t_len: usize, var: f64, seed: u64) -> TimeSeries {
    gaussian_series(t_len, seed, |_| var.sqrt())
}

/// Per-instant squared sums and sample counts through the public API.
pub fn instant_stats(y: &TimeSeries) -> (Vec<f64>, Vec<usize>) {
    (0..y.len())
        .map(|t0| {
            let s = y.samples_at(t0);
            (s.iter().map(|v| v * v).sum::<f64>(), s.len())
        })
        .unzip()
}

// The classic recursive signature: the panel's endpoint evaluations ride
// along so nothing is computed twice.
#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        left + right + delta / 15.0
    } else {
        adaptive_simpson(f, a, lm, m, fa, flm, fm, left, eps / 2.0, depth - 1)
            + adaptive_simpson(f, m, rm, b, fm, frm, fb, right, eps / 2.0, depth - 1)
    }
}

fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adaptive_simpson(&f, a, m, b, fa, fm, fb, whole, eps, 60)
}

/// Brute-force log marginal likelihood of a change at 1-based instant `t`:
/// numerically integrates the scaled-precision likelihood against the Gamma
/// prior on the log-scale axis, where the integrand is concave and
/// well-behaved for any shape. Peak-normalized so the quadrature works in
/// ordinary precision.
pub fn oracle_log_marginal(y: &TimeSeries, t: usize, config: &ModelConfig) -> f64 {
    let (sq, counts) = instant_stats(y);
    let t0 = t - 1;
    let prefix_sq: f64 = sq[..t0].iter().sum();
    let suffix_sq: f64 = sq[t0..].iter().sum();
    let m: usize = counts[t0..].iter().sum();
    let n_left: usize = counts[..t0].iter().sum();
    let a0 = config.a0;
    let s2 = config.sigma2;

    let half_m = m as f64 / 2.0;
    let rate = suffix_sq / (2.0 * s2) + a0;
    let g = |w: f64| (half_m + a0) * w - rate * w.exp();
    let w_star = ((half_m + a0) / rate).ln();
    let g_peak = g(w_star);

    let mut lo = w_star - 2.0;
    while g(lo) > g_peak - 46.0 {
        lo = w_star - 2.0 * (w_star - lo);
    }
    let mut hi = w_star + 2.0;
    while g(hi) > g_peak - 46.0 {
        hi = w_star + 2.0 * (hi - w_star);
    }
    let integral = integrate(|w| (g(w) - g_peak).exp(), lo, hi, 1e-13);

    let left = -(n_left as f64) / 2.0 * (LN_2PI + s2.ln()) - prefix_sq / (2.0 * s2);
    let right_const = -half_m * (LN_2PI + s2.ln()) + a0 * a0.ln() - ln_gamma(a0);
    left + right_const + g_peak + integral.ln()
}

/// Change-location posterior from the quadrature marginals under the uniform
/// location prior.
pub fn oracle_alpha(y: &TimeSeries, config: &ModelConfig) -> Vec<f64> {
    let t_len = y.len();
    let lms: Vec<f64> = (1..=t_len).map(|t| oracle_log_marginal(y, t, config)).collect();
    let peak = lms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = lms.iter().map(|lm| (lm - peak).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

fn gamma_logpdf(x: f64, shape: f64, rate: f64) -> f64 {
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

/// Monte Carlo estimate of E_q[log p(y, θ) − log q(θ)] for a fitted state,
/// sampling change locations and precision scalings from q itself. Returns
/// (mean, standard error).
pub fn mc_elbo(
    effects: &[SingleEffectPosterior],
    y: &TimeSeries,
    config: &ModelConfig,
    draws: usize,
    seed: u64,
) -> (f64, f64) {
    let (sq, counts) = instant_stats(y);
    let t_len = sq.len();
    let ln_loc_prior = -(t_len as f64).ln();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut locations = vec![0usize; effects.len()];
    let mut scalings = vec![0f64; effects.len()];
    for draw in 0..draws {
        let mut log_q = 0.0;
        let mut log_prior = 0.0;
        for (l, effect) in effects.iter().enumerate() {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut idx = t_len - 1;
            for (i, &a) in effect.alpha.iter().enumerate() {
                acc += a;
                if u < acc {
                    idx = i;
                    break;
                }
            }
            let shape = effect.a[idx];
            let rate = effect.b[idx];
            let s2 = Gamma::new(shape, 1.0 / rate).unwrap().sample(&mut rng);
            locations[l] = idx;
            scalings[l] = s2;
            log_q += effect.alpha[idx].ln() + gamma_logpdf(s2, shape, rate);
            log_prior += ln_loc_prior + gamma_logpdf(s2, config.a0, config.a0);
        }
        let mut loglik = 0.0;
        for t0 in 0..t_len {
            let mut precision_scale = 1.0;
            for (l, &loc) in locations.iter().enumerate() {
                if t0 >= loc {
                    precision_scale *= scalings[l];
                }
            }
            loglik += 0.5 * counts[t0] as f64
                * (precision_scale.ln() - LN_2PI - config.sigma2.ln())
                - sq[t0] * precision_scale / (2.0 * config.sigma2);
        }
        let value = loglik + log_prior - log_q;
        let delta = value - mean;
        mean += delta / (draw + 1) as f64;
        m2 += delta * (value - mean);
    }
    let variance = m2 / (draws - 1) as f64;
    (mean, (variance / draws as f64).sqrt())
}

/// Fixed scenario used in several localization tests: one change from
/// variance 1 to 3 at instant 16 in a 40-point series.
pub fn small_single_change(seed: u64) -> TimeSeries {
    single_change(40, 16, 1.0, 3.0, seed)
}
