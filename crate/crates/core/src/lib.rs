//! Spectral solver for the scalar linear ODE `u'(t) = f(t) u(t)`,
//! `u(-1) = 1` on `[-1, 1]`.
//!
//! The kernel `f(t) Θ(t - s)` is expanded in a double orthonormal Legendre
//! basis. Under that expansion the star-product becomes a matrix product, and
//! the solution follows from one banded linear solve with `I - F`.
//!
//! ```
//! use starode::{parse, solve_ode, SolveConfig};
//!
//! let f = parse("cos(4*t)").unwrap();
//! let report = solve_ode(&f, &SolveConfig::new(101)).unwrap();
//! let u = report.evaluate(0.5, Some(70)).unwrap();
//! let exact = ((2f64.sin() + 4f64.sin()) / 4.0).exp();
//! assert!((u.re - exact).abs() < 1e-9);
//! ```

pub mod expr;
pub mod legendre;
pub mod linalg;
pub mod oracle;
pub mod solver;
pub mod star;

pub use expr::{parse, EvalError, FunctionExpr, ParseError};
pub use legendre::{fit_series, LegendreError, LegendreSeries};
pub use linalg::{banded_lu, numerical_bandwidth, BandedFactorization, BandedMatrix, LinalgError};
pub use oracle::{error_report, exact_solution, oracle_coeffs, ErrorReport};
pub use solver::{evaluate_solution, solve_ode, SolveConfig, SolveError, SolveReport};
pub use star::{basis_matrix, coeff_matrix, heaviside_matrix, star_product, StarCoeffMatrix};
