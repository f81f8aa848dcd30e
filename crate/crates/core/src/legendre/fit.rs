//! Adaptive projection of a function onto the orthonormal Legendre basis.
//!
//! Coefficients `c_k = ∫ f p_k` are computed with Gauss–Legendre rules of
//! doubling size. A level is accepted once the upper half of its coefficients
//! sits at or below the drop threshold (the function is resolved) and the
//! retained prefix agrees with the previous level. Trailing coefficients are
//! then dropped by their uniform-norm weight `|c_k| √((2k+1)/2)`.
//!
//! The drop threshold is `tol · max(1, ‖f‖)`, raised to the measured
//! rounding floor of the projection when that floor is higher. The floor is
//! the largest weighted coefficient in the upper half of a resolved level.

use num_complex::Complex64;
use rayon::prelude::*;

use super::gauss::{gauss_rule, GaussRule};
use super::{eval_basis_with_derivative, norm_factor, LegendreError, LegendreSeries};

pub const DEFAULT_FIT_TOL: f64 = 1e-15;
pub const DEFAULT_MAX_DEGREE: usize = 4096;

const INITIAL_NODES: usize = 32;
/// Largest relative tail still attributed to rounding, in units of epsilon.
const NOISE_CAP: f64 = 1024.0;
const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub tol: f64,
    pub max_degree: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tol: DEFAULT_FIT_TOL,
            max_degree: DEFAULT_MAX_DEGREE,
        }
    }
}

/// Fits `f` on `[-1, 1]` with drop tolerance `tol` and degree budget
/// `max_degree`.
pub fn fit_series<F>(f: F, tol: f64, max_degree: usize) -> Result<LegendreSeries, LegendreError>
where
    F: Fn(f64) -> Complex64,
{
    fit_series_with(f, FitOptions { tol, max_degree })
}

pub fn fit_series_with<F>(f: F, opts: FitOptions) -> Result<LegendreSeries, LegendreError>
where
    F: Fn(f64) -> Complex64,
{
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(LegendreError::InvalidTolerance(opts.tol));
    }
    let budget = opts.max_degree + 1;
    let mut prev: Option<Vec<Complex64>> = None;
    let mut n = INITIAL_NODES;
    loop {
        let rule = gauss_rule(n);
        let values = sample(&f, &rule)?;
        let vscale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let scale = vscale.max(1.0);
        let coeffs = project(&rule, &values);
        let weighted: Vec<f64> = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.norm() * norm_factor(k))
            .collect();

        let tail = weighted[n / 2..].iter().copied().fold(0.0, f64::max);
        let floor = opts.tol * scale;
        let resolved = tail <= floor.max(NOISE_CAP * f64::EPSILON * scale);
        let threshold = floor.max(tail);

        if resolved {
            let len = weighted
                .iter()
                .rposition(|&e| e > threshold)
                .map_or(0, |k| k + 1);
            if len > budget {
                return Err(LegendreError::NonConvergence {
                    max_degree: opts.max_degree,
                    tail: weighted[budget..len].iter().copied().fold(0.0, f64::max),
                    threshold,
                });
            }
            let agrees = prev.as_ref().is_some_and(|p| {
                (0..len).all(|k| (coeffs[k] - p[k]).norm() * norm_factor(k) <= 4.0 * threshold)
            });
            if agrees {
                let mut kept = coeffs;
                kept.truncate(len);
                return Ok(LegendreSeries::with_tolerance(kept, opts.tol));
            }
        }

        if n > budget {
            return Err(LegendreError::NonConvergence {
                max_degree: opts.max_degree,
                tail,
                threshold,
            });
        }
        prev = Some(coeffs);
        n *= 2;
    }
}

fn sample<F>(f: &F, rule: &GaussRule) -> Result<Vec<Complex64>, LegendreError>
where
    F: Fn(f64) -> Complex64,
{
    rule.nodes()
        .iter()
        .map(|&t| {
            let v = f(t);
            if v.re.is_finite() && v.im.is_finite() {
                Ok(v)
            } else {
                Err(LegendreError::NonFinite { t })
            }
        })
        .collect()
}

/// `c_k = ∑_j w_j f_j p_k(x_j)` for `k < n`, with `p_k` evaluated at the
/// true root (stored node plus its sub-ulp offset). Chunks are summed in a
/// fixed order so the result does not depend on the thread count.
pub(crate) fn project(rule: &GaussRule, values: &[Complex64]) -> Vec<Complex64> {
    let n = rule.len();
    let nodes = rule.nodes();
    let offsets = rule.offsets();
    let weights = rule.weights();

    let chunk_sum = |range: std::ops::Range<usize>| {
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        let mut vals = vec![0.0; n];
        let mut ders = vec![0.0; n];
        for j in range {
            eval_basis_with_derivative(nodes[j], &mut vals, &mut ders);
            let fw = values[j] * weights[j];
            let dx = offsets[j];
            for k in 0..n {
                acc[k] += fw * (vals[k] + ders[k] * dx);
            }
        }
        acc
    };

    let ranges: Vec<_> = (0..n)
        .step_by(CHUNK)
        .map(|s| s..(s + CHUNK).min(n))
        .collect();
    let partials: Vec<Vec<Complex64>> = if n >= 4 * CHUNK {
        ranges.into_par_iter().map(chunk_sum).collect()
    } else {
        ranges.into_iter().map(chunk_sum).collect()
    };
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for part in partials {
        for (o, p) in out.iter_mut().zip(part) {
            *o += p;
        }
    }
    out
}
