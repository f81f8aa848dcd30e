//! Reference values for the scalar problem: `u(t) = exp(∫_{-1}^{t} f)`.
//!
//! The antiderivative is taken termwise on the fitted series of `f`, so the
//! oracle never touches the matrix pipeline it is used to check.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::legendre::{
    eval_basis, fit_series_with, FitOptions, LegendreError, LegendreSeries,
};
use crate::solver::SolveReport;

pub const DEFAULT_GRID: usize = 1000;

/// `t ↦ exp(A(t))` with `A` the antiderivative series of `f`.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    exponent: LegendreSeries,
}

impl ExactSolution {
    pub fn new(f: &LegendreSeries) -> Self {
        ExactSolution {
            exponent: f.antiderivative(),
        }
    }

    pub fn eval(&self, t: f64) -> Result<Complex64, LegendreError> {
        Ok(self.exponent.eval(t)?.exp())
    }
}

/// `exp(∫_{-1}^{t} f)`.
pub fn exact_solution(f: &LegendreSeries, t: f64) -> Result<Complex64, LegendreError> {
    ExactSolution::new(f).eval(t)
}

/// First `count` Legendre coefficients of the exact solution, zero-padded
/// when the fit is shorter.
pub fn oracle_coeffs(f: &LegendreSeries, count: usize) -> Result<LegendreSeries, LegendreError> {
    oracle_coeffs_with(f, count, FitOptions::default())
}

pub fn oracle_coeffs_with(
    f: &LegendreSeries,
    count: usize,
    opts: FitOptions,
) -> Result<LegendreSeries, LegendreError> {
    let exact = ExactSolution::new(f);
    let fitted = fit_series_with(|t| exact.exponent.eval_unchecked(t).exp(), opts)?;
    let mut c = fitted.into_coeffs();
    c.resize(count, Complex64::new(0.0, 0.0));
    Ok(LegendreSeries::with_tolerance(c, opts.tol))
}

#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub grid_size: usize,
    /// `max_t |û_n(t) - u(t)|` for `n = 0..=L`.
    pub inf_norm_error: Vec<f64>,
    /// `|u_k - u_k^oracle|` for `k < M`.
    pub coeff_errors: Vec<f64>,
    pub oracle: LegendreSeries,
}

impl ErrorReport {
    /// Largest coefficient error over `k < n`.
    pub fn max_coeff_error(&self, n: usize) -> f64 {
        self.coeff_errors[..n.min(self.coeff_errors.len())]
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }
}

/// `grid_size` equispaced points on `[-1, 1]`, both ends included.
pub fn equispaced_grid(grid_size: usize) -> Vec<f64> {
    assert!(grid_size >= 2, "a grid needs at least two points");
    let h = 2.0 / (grid_size - 1) as f64;
    (0..grid_size)
        .map(|i| if i + 1 == grid_size { 1.0 } else { -1.0 + i as f64 * h })
        .collect()
}

/// Grid error of every truncation `û_n`, `n ≤ L`, and coefficient errors
/// against the oracle.
///
/// # Panics
/// If `grid_size < 2`.
pub fn error_report(
    r: &SolveReport,
    f: &LegendreSeries,
    grid_size: usize,
) -> Result<ErrorReport, LegendreError> {
    let grid = equispaced_grid(grid_size);
    let exact = ExactSolution::new(f);
    let u = r.u.coeffs();
    let top = r.l.min(u.len() - 1);

    // max is exact, so the parallel reduction is order-independent
    let inf_norm_error = grid
        .par_iter()
        .map(|&t| {
            let want = exact.eval(t)?;
            let mut basis = vec![0.0; top + 1];
            eval_basis(t, &mut basis);
            let mut acc = Complex64::new(0.0, 0.0);
            Ok(basis
                .iter()
                .zip(u)
                .map(|(p, c)| {
                    acc += c * p;
                    (acc - want).norm()
                })
                .collect::<Vec<f64>>())
        })
        .try_reduce(
            || vec![0.0; top + 1],
            |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect()),
        )?;

    let oracle = oracle_coeffs(f, u.len())?;
    let coeff_errors = u
        .iter()
        .zip(oracle.coeffs())
        .map(|(a, b)| (a - b).norm())
        .collect();
    Ok(ErrorReport {
        grid_size,
        inf_norm_error,
        coeff_errors,
        oracle,
    })
}
