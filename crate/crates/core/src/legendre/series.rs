use num_complex::Complex64;

use super::{check_domain, norm_factor, recurrence, LegendreError, P0};

/// A finite orthonormal Legendre expansion `∑ c_k p_k(x)` with complex
/// coefficients. `coeffs[k]` multiplies the degree-`k` polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreSeries {
    coeffs: Vec<Complex64>,
    drop_tol: f64,
}

impl LegendreSeries {
    /// Wraps a coefficient vector; an empty vector becomes the zero series.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self::with_tolerance(coeffs, 0.0)
    }

    pub fn with_tolerance(mut coeffs: Vec<Complex64>, drop_tol: f64) -> Self {
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        LegendreSeries { coeffs, drop_tol }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Number of stored coefficients (degrees `0..len`).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    /// Always false: the zero function is one zero coefficient.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Tolerance the series was fitted with, zero when built directly.
    pub fn drop_tol(&self) -> f64 {
        self.drop_tol
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    /// Value at `x` via the Clenshaw recurrence on the normalized basis.
    pub fn eval(&self, x: f64) -> Result<Complex64, LegendreError> {
        check_domain(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> Complex64 {
        clenshaw(&self.coeffs, x)
    }

    /// Series of `A(τ) = ∫_{-1}^{τ} s(ρ) dρ`, one degree longer than `self`.
    ///
    /// Uses `∫_{-1}^{τ} p_0 = p_1/√3 + p_0` and, for `l > 0`,
    /// `∫_{-1}^{τ} p_l = (p_{l+1}/√(2l+3) - p_{l-1}/√(2l-1)) / √(2l+1)`.
    pub fn antiderivative(&self) -> LegendreSeries {
        let n = self.coeffs.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
        let c0 = self.coeffs[0];
        out[0] += c0;
        out[1] += c0 / 3.0f64.sqrt();
        for l in 1..n {
            let c = self.coeffs[l];
            let s = ((2 * l + 1) as f64).sqrt();
            out[l + 1] += c / (s * ((2 * l + 3) as f64).sqrt());
            out[l - 1] -= c / (s * ((2 * l - 1) as f64).sqrt());
        }
        LegendreSeries {
            coeffs: out,
            drop_tol: self.drop_tol,
        }
    }

    /// `∑_{k=n+1}^{len-1} |c_k| √((2k+1)/2)`: a bound on the uniform error of
    /// truncating after degree `n`, relative to the stored series. Zero when
    /// nothing lies beyond `n`.
    pub fn tail_bound(&self, n: usize) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(n + 1)
            .map(|(k, c)| c.norm() * norm_factor(k))
            .sum()
    }

    /// Series holding only degrees `0..=n`.
    pub fn truncated(&self, n: usize) -> LegendreSeries {
        let end = (n + 1).min(self.coeffs.len());
        LegendreSeries {
            coeffs: self.coeffs[..end].to_vec(),
            drop_tol: self.drop_tol,
        }
    }

    /// `alpha * self + beta * other`, padded to the longer length.
    pub fn linear_combination(
        &self,
        alpha: Complex64,
        other: &LegendreSeries,
        beta: Complex64,
    ) -> LegendreSeries {
        let n = self.len().max(other.len());
        let zero = Complex64::new(0.0, 0.0);
        let coeffs = (0..n)
            .map(|k| {
                alpha * self.coeffs.get(k).copied().unwrap_or(zero)
                    + beta * other.coeffs.get(k).copied().unwrap_or(zero)
            })
            .collect();
        LegendreSeries::new(coeffs)
    }
}

pub(crate) fn clenshaw(coeffs: &[Complex64], x: f64) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    let n = coeffs.len();
    match n {
        0 => return zero,
        1 => return coeffs[0] * P0,
        _ => {}
    }
    // b_k = c_k + a_k x b_{k+1} - b_{k+1}' b_{k+2}, with the recurrence
    // p_{k+1} = a_k x p_k - b_k p_{k-1}; p_1 = √3 x p_0 closes it at k = 0.
    let mut b1 = zero;
    let mut b2 = zero;
    for k in (1..n).rev() {
        let (a, _) = recurrence(k);
        let beta_next = if k + 1 < n { recurrence(k + 1).1 } else { 0.0 };
        let bk = coeffs[k] + b1 * (a * x) - b2 * beta_next;
        b2 = b1;
        b1 = bk;
    }
    let beta1 = recurrence(1).1;
    let b0 = coeffs[0] + b1 * (3.0f64.sqrt() * x) - b2 * beta1;
    b0 * P0
}
