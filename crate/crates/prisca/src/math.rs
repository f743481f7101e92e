//! Small numeric helpers shared across modules.

/// ln(2π)
pub(crate) const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Stable log(Σ exp(x_i)). Returns -inf for an empty slice.
pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = xs.iter().map(|x| (x - max).exp()).sum();
    max + sum.ln()
}

/// KL(Gamma(a, b) || Gamma(c, d)) in the shape/rate parameterization.
pub(crate) fn gamma_kl(a: f64, b: f64, c: f64, d: f64) -> f64 {
    use statrs::function::gamma::{digamma, ln_gamma};
    (a - c) * digamma(a) - ln_gamma(a) + ln_gamma(c) + c * (b.ln() - d.ln()) + a * (d - b) / b
}
