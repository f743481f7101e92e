//! Preprocessing for series that violate the zero-mean model: first-order
//! differencing for slowly varying levels, and autoregressive residualization
//! for serially correlated noise.

use nalgebra::{DMatrix, DVector};

use crate::config::ModelConfig;
use crate::engine::{fit, PriscaFit};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// First-order differences x_t = y_{t+1} − y_t, length T−1.
///
/// Removes a constant or slowly varying level so variance changes can be read
/// from the differences. A change first affecting y at instant c shows up in
/// x at c−1 (where the difference mixes both regimes) or c, so locations
/// detected on the differenced axis carry a one-step ambiguity. Replicated
/// series have no single difference path and are rejected.
pub fn difference_detrend(y: &TimeSeries) -> Result<TimeSeries> {
    if y.has_replicates() {
        return Err(Error::InvalidInput(
            "differencing requires one observation per instant".into(),
        ));
    }
    if y.len() < 2 {
        return Err(Error::InvalidInput("differencing needs at least two instants".into()));
    }
    let v = y.values();
    TimeSeries::new(v.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Autoregression order and fitted coefficients, index k holding the lag-k+1
/// coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct ArSpec {
    pub order: usize,
    pub coefficients: Vec<f64>,
}

/// Joint autoregression-plus-changes fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ArFit {
    pub spec: ArSpec,
    /// Innovations y_t − Σ_k φ_k y_{t−k}, length T − order.
    pub residuals: TimeSeries,
    /// Change point fit on the residual series; its indices refer to the
    /// residual axis, offset by `spec.order` from the original.
    pub fit: PriscaFit,
    pub coef_std_errors: Vec<f64>,
    pub outer_iterations: usize,
}

const MAX_OUTER_ITER: usize = 10;
const COEF_TOL: f64 = 1e-6;

/// Alternates weighted least squares for the AR coefficients with a change
/// point fit on the innovations, reweighting each regression row by the
/// fitted precision scaling at its instant. Stops when the coefficients move
/// less than 1e-6 or after 10 rounds, returning that round's artifacts.
/// Order 0 skips the regression and fits `y` directly.
pub fn ar_residualize(y: &TimeSeries, order: usize, config: &ModelConfig) -> Result<ArFit> {
    if y.has_replicates() {
        return Err(Error::InvalidInput(
            "autoregression requires one observation per instant".into(),
        ));
    }
    if order == 0 {
        return Ok(ArFit {
            spec: ArSpec { order: 0, coefficients: vec![] },
            residuals: y.clone(),
            fit: fit(y, config)?,
            coef_std_errors: vec![],
            outer_iterations: 1,
        });
    }
    let t_len = y.len();
    if 4 * order >= t_len {
        return Err(Error::InvalidInput(format!(
            "order {order} too large for {t_len} instants; need order < T/4"
        )));
    }

    let v = y.values();
    let n = t_len - order;
    let rows: Vec<Vec<f64>> =
        (order..t_len).map(|j| (1..=order).map(|k| v[j - k]).collect()).collect();
    let response: Vec<f64> = v[order..].to_vec();

    let mut weights = vec![1.0; n];
    let mut previous: Option<Vec<f64>> = None;
    for iteration in 1..=MAX_OUTER_ITER {
        let (phi, std_errors) = weighted_least_squares(&rows, &response, &weights)?;
        let innovations: Vec<f64> = (0..n)
            .map(|j| response[j] - rows[j].iter().zip(&phi).map(|(x, p)| x * p).sum::<f64>())
            .collect();
        let residuals = TimeSeries::new(innovations)?;
        let fitted = fit(&residuals, config)?;

        let settled = previous
            .as_ref()
            .map(|prev| phi.iter().zip(prev).all(|(a, b)| (a - b).abs() < COEF_TOL))
            .unwrap_or(false);
        if settled || iteration == MAX_OUTER_ITER {
            return Ok(ArFit {
                spec: ArSpec { order, coefficients: phi },
                residuals,
                fit: fitted,
                coef_std_errors: std_errors,
                outer_iterations: iteration,
            });
        }

        for (j, w) in weights.iter_mut().enumerate() {
            let scaling: f64 = fitted.tau2_bar.iter().map(|row| row[j]).product();
            *w = scaling / config.sigma2;
        }
        previous = Some(phi);
    }
    unreachable!("loop returns at or before the iteration cap");
}

/// Weighted least squares via column-pivoted QR of W^{1/2}X.
///
/// Returns the coefficients and their standard errors from
/// s²(XᵀWX)^{-1} with s² the weighted residual sum of squares over n − r.
/// A rank-deficient design (pivoted R diagonal collapsing below 1e-12 of its
/// leading entry) is an error.
fn weighted_least_squares(
    rows: &[Vec<f64>],
    response: &[f64],
    weights: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = rows.len();
    let r = rows[0].len();
    debug_assert!(n > r);
    let mut b = DMatrix::zeros(n, r);
    let mut d = DVector::zeros(n);
    for j in 0..n {
        let s = weights[j].sqrt();
        for k in 0..r {
            b[(j, k)] = s * rows[j][k];
        }
        d[j] = s * response[j];
    }

    let qr = b.clone().col_piv_qr();
    let rm = qr.r();
    let lead = rm[(0, 0)].abs();
    if lead == 0.0 || (0..r).any(|i| rm[(i, i)].abs() <= 1e-12 * lead) {
        return Err(Error::SingularDesign(
            "regression design is rank deficient under the given weights".into(),
        ));
    }

    let qtd = qr.q().transpose() * &d;
    let mut phi = rm
        .solve_upper_triangular(&qtd)
        .ok_or_else(|| Error::SingularDesign("triangular solve failed".into()))?;
    qr.p().inv_permute_rows(&mut phi);

    // (XᵀWX)^{-1} = P (RᵀR)^{-1} Pᵀ with the same permutation as the solve.
    let u = rm
        .solve_upper_triangular(&DMatrix::identity(r, r))
        .ok_or_else(|| Error::SingularDesign("triangular solve failed".into()))?;
    let unpermuted = &u * u.transpose();
    let mut pmat: DMatrix<f64> = DMatrix::identity(r, r);
    qr.p().inv_permute_rows(&mut pmat);
    let cov_shape: DMatrix<f64> = &pmat * unpermuted * pmat.transpose();

    let rss = (&d - &b * &phi).norm_squared();
    let s2 = rss / (n - r) as f64;
    let std_errors = (0..r).map(|k| (s2 * cov_shape[(k, k)]).sqrt()).collect();
    Ok((phi.iter().copied().collect(), std_errors))
}
