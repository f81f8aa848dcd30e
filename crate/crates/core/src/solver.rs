//! End-to-end solve of `u'(t) = f(t) u(t)`, `u(-1) = 1` on `[-1, 1]`.
//!
//! With `F` the coefficient matrix of `f(t) Θ(t - s)` and `H` that of
//! `Θ(t - s)`, the solution coefficients are `u = H y` where
//! `(I - F) y = [p_0(-1), …, p_{M-1}(-1)]`.
//!
//! Truncating the infinite system to `M × M` corrupts the trailing
//! coefficients. The trusted count is `L = M - K - 1`, where `K` is the
//! numerical band of the solution operator `U = H (I - F)^{-1}` measured on
//! its trailing rows and columns, the part of the matrix that the
//! truncation reaches. Coefficients `u_0 ..= u_L` are kept.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::expr::{EvalError, FunctionExpr};
use crate::legendre::{
    fit_series_with, norm_factor, FitOptions, LegendreError, LegendreSeries, DEFAULT_FIT_TOL,
    DEFAULT_MAX_DEGREE,
};
use crate::linalg::{
    numerical_bandwidth, trailing_bandwidth, trailing_column_bandwidth, LinalgError, Resolvent,
};
use crate::star::{coeff_matrix, heaviside_matrix, StarCoeffMatrix};

/// Largest `M` for which the full inverse is formed in [`InverseMode::Auto`].
pub const DENSE_INVERSE_LIMIT: usize = 2048;
const RESIDUAL_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InverseMode {
    /// Full inverse up to [`DENSE_INVERSE_LIMIT`], trailing columns above.
    #[default]
    Auto,
    Full,
    TrailingColumns,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub basis_size: usize,
    pub fit_tol: f64,
    pub band_eps: f64,
    pub max_degree: usize,
    pub inverse: InverseMode,
}

impl SolveConfig {
    pub fn new(basis_size: usize) -> Self {
        SolveConfig {
            basis_size,
            fit_tol: DEFAULT_FIT_TOL,
            band_eps: f64::EPSILON,
            max_degree: DEFAULT_MAX_DEGREE,
            inverse: InverseMode::Auto,
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |msg: String| Err(SolveError::InvalidConfig(msg));
        if self.basis_size < 2 {
            return bad(format!("basis size must be at least 2, got {}", self.basis_size));
        }
        if !(self.fit_tol > 0.0 && self.fit_tol.is_finite()) {
            return bad(format!("fit tolerance must be positive, got {}", self.fit_tol));
        }
        if !(self.band_eps > 0.0 && self.band_eps.is_finite()) {
            return bad(format!("band threshold must be positive, got {}", self.band_eps));
        }
        if self.max_degree == 0 {
            return bad("max degree must be positive".into());
        }
        Ok(())
    }
}

/// Heuristic basis size for a generator of `n` terms: `max(8n, n + 64)`.
/// Carries no accuracy guarantee.
pub fn suggested_basis_size(n: usize) -> usize {
    (8 * n).max(n + 64)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Fit(#[from] LegendreError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("residual {residual:.3e} exceeds {limit:.3e}; the system is ill-conditioned")]
    Residual { residual: f64, limit: f64 },
}

/// The function `f`, in any of the accepted forms.
#[derive(Clone, Copy)]
pub enum Generator<'a> {
    Expr(&'a FunctionExpr),
    Series(&'a LegendreSeries),
    Function(&'a dyn Fn(f64) -> Complex64),
}

impl<'a> From<&'a FunctionExpr> for Generator<'a> {
    fn from(e: &'a FunctionExpr) -> Self {
        Generator::Expr(e)
    }
}

impl<'a> From<&'a LegendreSeries> for Generator<'a> {
    fn from(s: &'a LegendreSeries) -> Self {
        Generator::Series(s)
    }
}

impl<'a, F: Fn(f64) -> Complex64> From<&'a F> for Generator<'a> {
    fn from(f: &'a F) -> Self {
        Generator::Function(f)
    }
}

impl Generator<'_> {
    /// Legendre series of `f`; a series input is used as given.
    pub fn to_series(self, opts: FitOptions) -> Result<LegendreSeries, SolveError> {
        match self {
            Generator::Series(s) => Ok(s.clone()),
            Generator::Function(f) => Ok(fit_series_with(f, opts)?),
            Generator::Expr(e) => {
                let f = |t: f64| e.eval(t).unwrap_or(Complex64::new(f64::NAN, 0.0));
                match fit_series_with(f, opts) {
                    Ok(s) => Ok(s),
                    Err(LegendreError::NonFinite { t }) => match e.eval(t) {
                        Err(err) => Err(err.into()),
                        Ok(_) => Err(LegendreError::NonFinite { t }.into()),
                    },
                    Err(err) => Err(err.into()),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveWarning {
    /// `M` is smaller than the generator length, so `F` is cut inside its band.
    BasisBelowGenerator { basis_size: usize, n_terms: usize },
    /// `K >= M - 1`: no coefficient can be trusted.
    NoTrustedCoefficients,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Timings {
    pub fit: f64,
    pub assemble: f64,
    pub solve: f64,
    pub bandwidth: f64,
}

impl Timings {
    pub fn total(&self) -> f64 {
        self.fit + self.assemble + self.solve + self.bandwidth
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Solution coefficients `u_k`, `k < M`.
    pub u: LegendreSeries,
    pub y: Vec<Complex64>,
    /// Fitted series of `f`.
    pub generator: LegendreSeries,
    pub basis_size: usize,
    /// Generator length `N`.
    pub n_terms: usize,
    /// Numerical bandwidth used for the trusted count; equals
    /// `solution_band`.
    pub k: usize,
    /// Trusted count `M - K - 1`.
    pub l: usize,
    /// `‖(I - F) y - rhs‖_∞`.
    pub residual: f64,
    pub rhs_norm: f64,
    pub f_bandwidth: usize,
    /// Numerical band of `H (I - F)^{-1}` on its trailing rows and columns.
    pub solution_band: usize,
    /// Numerical band of the whole of `(I - F)^{-1}`, when it was formed.
    pub resolvent_bandwidth: Option<usize>,
    pub warnings: Vec<SolveWarning>,
    pub timings: Timings,
}

impl SolveReport {
    /// `û_n(t) = ∑_{k ≤ n} u_k p_k(t)`; `n` defaults to `L`.
    pub fn evaluate(&self, t: f64, n: Option<usize>) -> Result<Complex64, LegendreError> {
        evaluate_solution(self, t, n)
    }
}

/// `[p_0(-1), …, p_{M-1}(-1)]`, i.e. `(-1)^k √((2k+1)/2)`.
pub fn rhs_vector(m: usize) -> Vec<f64> {
    (0..m)
        .map(|k| if k % 2 == 0 { norm_factor(k) } else { -norm_factor(k) })
        .collect()
}

/// Rows and columns inspected at the end of `U` when measuring its band.
pub fn trailing_window(m: usize) -> usize {
    m.div_ceil(100).max(1)
}

/// `U = H (I - F)^{-1}`, densely.
pub fn solution_matrix(f: &StarCoeffMatrix) -> Result<DMatrix<Complex64>, SolveError> {
    let r = Resolvent::new(f)?.dense();
    Ok(heaviside_matrix(f.dim()).as_banded().mul_dense(&r)?)
}

pub fn solve_ode<'a>(
    f: impl Into<Generator<'a>>,
    cfg: &SolveConfig,
) -> Result<SolveReport, SolveError> {
    cfg.validate()?;
    let m = cfg.basis_size;
    let mut timings = Timings::default();

    let clock = Instant::now();
    let opts = FitOptions {
        tol: cfg.fit_tol,
        max_degree: cfg.max_degree,
    };
    let generator = f.into().to_series(opts)?;
    timings.fit = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let n = generator.len();
    let fm = coeff_matrix(&generator, m);
    let h = heaviside_matrix(m);
    timings.assemble = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let resolvent = Resolvent::new(&fm)?;
    let rhs: Vec<Complex64> = rhs_vector(m).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    let y = resolvent.factorization().solve(&rhs)?;
    let applied = fm.as_banded().matvec(&y)?;
    let residual = (0..m)
        .map(|i| (y[i] - applied[i] - rhs[i]).norm())
        .fold(0.0, f64::max);
    let rhs_norm = rhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(residual <= RESIDUAL_LIMIT * rhs_norm) {
        return Err(SolveError::Residual {
            residual,
            limit: RESIDUAL_LIMIT * rhs_norm,
        });
    }
    let u = h.as_banded().matvec(&y)?;
    timings.solve = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let window = trailing_window(m);
    let full = match cfg.inverse {
        InverseMode::Full => true,
        InverseMode::TrailingColumns => false,
        InverseMode::Auto => m <= DENSE_INVERSE_LIMIT,
    };
    let (solution_band, resolvent_bandwidth) = if full {
        let r = resolvent.dense();
        let um = h.as_banded().mul_dense(&r)?;
        (
            trailing_bandwidth(&um, cfg.band_eps, window),
            Some(numerical_bandwidth(&r, cfg.band_eps)),
        )
    } else {
        let cols: Vec<usize> = (m - window.min(m)..m).collect();
        let rc = resolvent.columns(&cols)?;
        let r = DMatrix::from_fn(m, cols.len(), |i, j| rc[j][i]);
        let part = h.as_banded().mul_dense(&r)?;
        // place the columns at their true positions for the band measure
        let um = DMatrix::from_fn(m, m, |i, j| {
            if j >= m - cols.len() {
                part[(i, j + cols.len() - m)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        (trailing_column_bandwidth(&um, cfg.band_eps, window), None)
    };
    timings.bandwidth = clock.elapsed().as_secs_f64();

    let k = solution_band;
    let l = m.saturating_sub(k + 1);
    let mut warnings = Vec::new();
    if m < n {
        warnings.push(SolveWarning::BasisBelowGenerator {
            basis_size: m,
            n_terms: n,
        });
    }
    if l == 0 {
        warnings.push(SolveWarning::NoTrustedCoefficients);
    }

    Ok(SolveReport {
        u: LegendreSeries::new(u),
        y,
        f_bandwidth: fm.bandwidth(),
        generator,
        basis_size: m,
        n_terms: n,
        k,
        l,
        residual,
        rhs_norm,
        solution_band,
        resolvent_bandwidth,
        warnings,
        timings,
    })
}

/// `û_n(t) = ∑_{k ≤ n} u_k p_k(t)`; `n` defaults to `L`.
///
/// # Panics
/// If `n >= M`.
pub fn evaluate_solution(
    r: &SolveReport,
    t: f64,
    n: Option<usize>,
) -> Result<Complex64, LegendreError> {
    let n = n.unwrap_or(r.l);
    assert!(n < r.basis_size, "truncation {n} beyond basis size {}", r.basis_size);
    r.u.truncated(n).eval(t)
}
