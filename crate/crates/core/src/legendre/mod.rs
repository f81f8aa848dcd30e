//! Orthonormal Legendre polynomials on `[-1, 1]`.
//!
//! The basis is normalized so that `∫ p_k p_l = δ_kl`, i.e. `p_k` is the
//! classical Legendre polynomial scaled by `sqrt((2k+1)/2)`. Everything in
//! this crate works in that basis.

pub(crate) mod dd;
mod fit;
mod gauss;
mod series;

pub use fit::{fit_series, fit_series_with, FitOptions, DEFAULT_FIT_TOL, DEFAULT_MAX_DEGREE};
pub use gauss::{gauss_nodes, gauss_rule, GaussRule};
pub use series::LegendreSeries;

use thiserror::Error;

/// Errors raised by the Legendre layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LegendreError {
    #[error("evaluation point {x} lies outside [-1, 1]")]
    Domain { x: f64 },
    #[error("series fit did not converge within degree {max_degree} (tail {tail:.3e} above threshold {threshold:.3e})")]
    NonConvergence {
        max_degree: usize,
        tail: f64,
        threshold: f64,
    },
    #[error("function value at t = {t} is not finite")]
    NonFinite { t: f64 },
    #[error("invalid fit tolerance {0}; must be positive and finite")]
    InvalidTolerance(f64),
}

pub(crate) fn check_domain(x: f64) -> Result<(), LegendreError> {
    if (-1.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(LegendreError::Domain { x })
    }
}

/// `sqrt((2k+1)/2)`: the value of `p_k(1)` and the uniform bound of `|p_k|`.
#[inline]
pub fn norm_factor(k: usize) -> f64 {
    ((2 * k + 1) as f64 * 0.5).sqrt()
}

/// Coefficients of the normalized recurrence
/// `p_{k+1}(x) = a_k x p_k(x) - b_k p_{k-1}(x)` for `k >= 1`.
#[inline]
pub(crate) fn recurrence(k: usize) -> (f64, f64) {
    let kf = k as f64;
    let a = (((2 * k + 1) * (2 * k + 3)) as f64).sqrt() / (kf + 1.0);
    let b = kf / (kf + 1.0) * ((2 * k + 3) as f64 / (2 * k - 1) as f64).sqrt();
    (a, b)
}

const P0: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `p_k(x)` with the domain check.
pub fn eval_poly(k: usize, x: f64) -> Result<f64, LegendreError> {
    check_domain(x)?;
    Ok(eval_poly_unchecked(k, x))
}

pub(crate) fn eval_poly_unchecked(k: usize, x: f64) -> f64 {
    let mut prev = P0;
    if k == 0 {
        return prev;
    }
    let mut cur = 3.0f64.sqrt() * x * P0;
    for j in 1..k {
        let (a, b) = recurrence(j);
        let next = a * x * cur - b * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Fills `out[k] = p_k(x)` for `k < out.len()`.
pub fn eval_basis(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = P0;
    if out.len() > 1 {
        out[1] = 3.0f64.sqrt() * x * P0;
    }
    for k in 1..out.len().saturating_sub(1) {
        let (a, b) = recurrence(k);
        out[k + 1] = a * x * out[k] - b * out[k - 1];
    }
}

/// Fills `vals[k] = p_k(x)` and `ders[k] = p_k'(x)`.
pub(crate) fn eval_basis_with_derivative(x: f64, vals: &mut [f64], ders: &mut [f64]) {
    debug_assert_eq!(vals.len(), ders.len());
    let n = vals.len();
    if n == 0 {
        return;
    }
    vals[0] = P0;
    ders[0] = 0.0;
    if n > 1 {
        let s3 = 3.0f64.sqrt() * P0;
        vals[1] = s3 * x;
        ders[1] = s3;
    }
    for k in 1..n.saturating_sub(1) {
        let (a, b) = recurrence(k);
        vals[k + 1] = a * x * vals[k] - b * vals[k - 1];
        ders[k + 1] = a * (vals[k] + x * ders[k]) - b * ders[k - 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn low_degree_values() {
        assert_abs_diff_eq!(eval_poly(0, 0.3).unwrap(), 0.707_106_781_186_547_5, epsilon = 1e-15);
        assert_abs_diff_eq!(eval_poly(1, 0.5).unwrap(), 1.5f64.sqrt() * 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(eval_poly(3, 1.0).unwrap(), 3.5f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn matches_explicit_classical_forms() {
        // P_2 = (3x^2 - 1)/2, P_3 = (5x^3 - 3x)/2
        for &x in &[-0.9, -0.2, 0.0, 0.41, 0.77] {
            let p2 = 0.5 * (3.0 * x * x - 1.0) * norm_factor(2);
            let p3 = 0.5 * (5.0 * x * x * x - 3.0 * x) * norm_factor(3);
            assert_abs_diff_eq!(eval_poly(2, x).unwrap(), p2, epsilon = 1e-14);
            assert_abs_diff_eq!(eval_poly(3, x).unwrap(), p3, epsilon = 1e-14);
        }
    }

    #[test]
    fn endpoint_values_follow_parity() {
        for k in 0..60 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(eval_poly(k, 1.0).unwrap(), norm_factor(k), epsilon = 1e-12);
            assert_abs_diff_eq!(eval_poly(k, -1.0).unwrap(), sign * norm_factor(k), epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_points_outside_interval() {
        assert_eq!(eval_poly(2, 1.5), Err(LegendreError::Domain { x: 1.5 }));
        assert!(eval_poly(0, -1.000_000_1).is_err());
        assert!(eval_poly(0, f64::NAN).is_err());
    }

    #[test]
    fn basis_fill_agrees_with_pointwise() {
        let mut buf = [0.0; 20];
        eval_basis(0.37, &mut buf);
        for (k, v) in buf.iter().enumerate() {
            assert_abs_diff_eq!(*v, eval_poly(k, 0.37).unwrap(), epsilon = 1e-15);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let (mut v, mut d) = ([0.0; 12], [0.0; 12]);
        let (mut vp, mut vm) = ([0.0; 12], [0.0; 12]);
        let (x, h) = (0.3, 1e-6);
        eval_basis_with_derivative(x, &mut v, &mut d);
        eval_basis(x + h, &mut vp);
        eval_basis(x - h, &mut vm);
        for k in 0..12 {
            let fd = (vp[k] - vm[k]) / (2.0 * h);
            assert_abs_diff_eq!(d[k], fd, epsilon = 1e-6);
        }
    }
}
