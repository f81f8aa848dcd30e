//! Discretized star-product algebra.
//!
//! A kernel `f(t) Θ(t - s)` is represented by the matrix of its coefficients
//! in the double orthonormal Legendre basis. Multiplying kernels under the
//! star-product becomes a plain matrix product, and the identity element
//! becomes the identity matrix. Each kernel matrix is a combination of the
//! problem-independent basis matrices `B^(d)` (the coefficients of
//! `p_d(t) Θ(t - s)`), which are built from triple-product integrals.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::legendre::dd::Dd;
use crate::legendre::LegendreSeries;
use crate::linalg::BandedMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StarError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

/// Table of `g(n) = ∏_{j=1}^{n} (2j-1)/(2j)` in double-double, enough to
/// evaluate every triple product whose half-sum is at most `max_half_sum`.
#[derive(Debug, Clone)]
pub struct TripleProducts {
    g: Vec<Dd>,
}

impl TripleProducts {
    pub fn new(max_half_sum: usize) -> Self {
        let mut g = Vec::with_capacity(max_half_sum + 1);
        let mut acc = Dd::new(1.0);
        g.push(acc);
        for j in 1..=max_half_sum {
            acc = acc.mul_f64((2 * j - 1) as f64).div_f64((2 * j) as f64);
            g.push(acc);
        }
        TripleProducts { g }
    }

    pub fn max_half_sum(&self) -> usize {
        self.g.len() - 1
    }

    /// `∫_{-1}^{1} p_a p_b p_c`.
    ///
    /// # Panics
    /// If `(a + b + c) / 2` exceeds the table.
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        let sum = a + b + c;
        if sum % 2 == 1 {
            return 0.0;
        }
        let s = sum / 2;
        if a > s || b > s || c > s {
            return 0.0;
        }
        assert!(s < self.g.len(), "triple product table too small for s = {s}");
        let ratio = self.g[s - a]
            .mul(self.g[s - b])
            .mul(self.g[s - c])
            .div(self.g[s])
            .to_f64();
        let pre = (((2 * a + 1) * (2 * b + 1) * (2 * c + 1)) as f64 * 0.5).sqrt();
        pre * ratio / (2 * s + 1) as f64
    }
}

/// `∫_{-1}^{1} p_a p_b p_c`; exactly zero for odd `a + b + c` or when the
/// triangle condition fails.
pub fn triple_product(a: usize, b: usize, c: usize) -> f64 {
    TripleProducts::new((a + b + c) / 2).get(a, b, c)
}

/// Coefficients of `p_d(t) Θ(t - s)`, truncated to `M × M`. Entry `(k, l)`
/// multiplies `p_k(t) p_l(s)`; nonzero only for `|k - l| <= d + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix {
    degree: usize,
    dim: usize,
    bw: usize,
    /// Row `k` holds columns `k - bw ..= k + bw`.
    data: Vec<f64>,
}

impl BasisMatrix {
    fn build(d: usize, m: usize) -> Self {
        assert!(m >= 1, "basis matrices need M >= 1");
        let bw = (d + 1).min(m - 1);
        let width = 2 * bw + 1;
        let table = TripleProducts::new((d + 2 * m + 1) / 2 + 1);
        let mut data = vec![0.0; m * width];
        data.par_chunks_mut(width).enumerate().for_each(|(k, row)| {
            for l in k.saturating_sub(bw)..(k + bw + 1).min(m) {
                row[l + bw - k] = entry(&table, d, k, l);
            }
        });
        BasisMatrix {
            degree: d,
            dim: m,
            bw,
            data,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `min(d + 1, M - 1)`.
    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        if k >= self.dim || l >= self.dim || k.abs_diff(l) > self.bw {
            return 0.0;
        }
        self.data[k * (2 * self.bw + 1) + (l + self.bw - k)]
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |k, l| self.get(k, l))
    }
}

fn entry(table: &TripleProducts, d: usize, k: usize, l: usize) -> f64 {
    if l == 0 {
        return table.get(d, k, 1) / 3f64.sqrt() + table.get(d, k, 0);
    }
    let up = table.get(d, k, l + 1) / ((2 * l + 3) as f64).sqrt();
    let down = table.get(d, k, l - 1) / ((2 * l - 1) as f64).sqrt();
    (up - down) / ((2 * l + 1) as f64).sqrt()
}

type BasisCache = Mutex<HashMap<(usize, usize), Arc<BasisMatrix>>>;

fn basis_cache() -> &'static BasisCache {
    static CACHE: OnceLock<BasisCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Memoized `B^(d)` of size `M × M`.
///
/// # Panics
/// If `m == 0`.
pub fn basis_matrix(d: usize, m: usize) -> Arc<BasisMatrix> {
    if let Some(b) = basis_cache().lock().expect("basis cache poisoned").get(&(d, m)) {
        return Arc::clone(b);
    }
    let built = Arc::new(BasisMatrix::build(d, m));
    let mut guard = basis_cache().lock().expect("basis cache poisoned");
    Arc::clone(guard.entry((d, m)).or_insert(built))
}

/// An `M × M` coefficient matrix of a bivariate kernel, in band storage.
#[derive(Debug, Clone, PartialEq)]
pub struct StarCoeffMatrix {
    band: BandedMatrix,
    /// Length of the generating series, when the matrix came from one.
    n_terms: Option<usize>,
}

impl StarCoeffMatrix {
    pub fn from_banded(band: BandedMatrix, n_terms: Option<usize>) -> Self {
        StarCoeffMatrix { band, n_terms }
    }

    /// The discretized identity element (the Dirac delta kernel).
    pub fn identity(m: usize) -> Self {
        Self::from_banded(BandedMatrix::identity(m), None)
    }

    pub fn zeros(m: usize) -> Self {
        Self::from_banded(BandedMatrix::zeros(m, 0, 0), None)
    }

    pub fn as_banded(&self) -> &BandedMatrix {
        &self.band
    }

    pub fn into_banded(self) -> BandedMatrix {
        self.band
    }

    pub fn dim(&self) -> usize {
        self.band.dim()
    }

    /// Declared bandwidth `max(kl, ku)`.
    pub fn bandwidth(&self) -> usize {
        self.band.kl().max(self.band.ku())
    }

    pub fn n_terms(&self) -> Option<usize> {
        self.n_terms
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.band.get(i, j)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        self.band.to_dense()
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        let mut out = self.band.clone();
        for i in 0..out.dim() {
            for j in out.row_range(i) {
                *out.slot_mut(i, j) *= alpha;
            }
        }
        Self::from_banded(out, self.n_terms)
    }

    /// `alpha * self + beta * other`.
    pub fn combine(
        &self,
        alpha: Complex64,
        other: &StarCoeffMatrix,
        beta: Complex64,
    ) -> Result<Self, StarError> {
        check_dims(self, other)?;
        let kl = self.band.kl().max(other.band.kl());
        let ku = self.band.ku().max(other.band.ku());
        let mut out = BandedMatrix::zeros(self.dim(), kl, ku);
        for i in 0..out.dim() {
            for j in out.row_range(i) {
                *out.slot_mut(i, j) = alpha * self.get(i, j) + beta * other.get(i, j);
            }
        }
        let n_terms = match (self.n_terms, other.n_terms) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        Ok(Self::from_banded(out, n_terms))
    }

    pub fn add(&self, other: &StarCoeffMatrix) -> Result<Self, StarError> {
        let one = Complex64::new(1.0, 0.0);
        self.combine(one, other, one)
    }

    pub fn sub(&self, other: &StarCoeffMatrix) -> Result<Self, StarError> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }
}

fn check_dims(a: &StarCoeffMatrix, b: &StarCoeffMatrix) -> Result<(), StarError> {
    if a.dim() != b.dim() {
        return Err(StarError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

/// `H_M = √2 B^(0)`, the coefficients of `Θ(t - s)`. Tridiagonal.
pub fn heaviside_matrix(m: usize) -> StarCoeffMatrix {
    let b = basis_matrix(0, m);
    let bw = b.bandwidth();
    let mut band = BandedMatrix::zeros(m, bw, bw);
    for k in 0..m {
        for l in band.row_range(k) {
            *band.slot_mut(k, l) = Complex64::new(2f64.sqrt() * b.get(k, l), 0.0);
        }
    }
    StarCoeffMatrix::from_banded(band, Some(1))
}

/// `F = ∑_d s_d B^(d)`, the coefficients of `f(t) Θ(t - s)` for the series
/// `f = ∑_d s_d p_d`, truncated to `M × M`. Declared bandwidth is the
/// series length `N` (capped at `M - 1`).
///
/// # Panics
/// If `m == 0`.
pub fn coeff_matrix(s: &LegendreSeries, m: usize) -> StarCoeffMatrix {
    assert!(m >= 1, "coefficient matrices need M >= 1");
    let n = s.len();
    let bw = n.min(m - 1);
    let mut band = BandedMatrix::zeros(m, bw, bw);
    for (d, &sd) in s.coeffs().iter().enumerate() {
        if sd == Complex64::new(0.0, 0.0) {
            continue;
        }
        let b = basis_matrix(d, m);
        for k in 0..m {
            for l in k.saturating_sub(b.bandwidth())..(k + b.bandwidth() + 1).min(m) {
                *band.slot_mut(k, l) += sd * b.get(k, l);
            }
        }
    }
    StarCoeffMatrix::from_banded(band, Some(n))
}

/// The star-product `F ★ G`, discretized as the matrix product `F · G`.
/// The result's band is the sum of the operand bands, capped at `M - 1`.
pub fn star_product(
    f: &StarCoeffMatrix,
    g: &StarCoeffMatrix,
) -> Result<StarCoeffMatrix, StarError> {
    check_dims(f, g)?;
    let (a, b) = (f.as_banded(), g.as_banded());
    let m = a.dim();
    let mut out = BandedMatrix::zeros(m, a.kl() + b.kl(), a.ku() + b.ku());
    for i in 0..m {
        for k in a.row_range(i) {
            let aik = a.get(i, k);
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in b.row_range(k) {
                *out.slot_mut(i, j) += aik * b.get(k, j);
            }
        }
    }
    Ok(StarCoeffMatrix::from_banded(out, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::legendre::{eval_poly, gauss_rule};
    use approx::assert_abs_diff_eq;

    fn quad_triple(a: usize, b: usize, c: usize) -> f64 {
        let rule = gauss_rule((a + b + c + 2).div_ceil(2));
        rule.integrate(|x| {
            eval_poly(a, x).unwrap() * eval_poly(b, x).unwrap() * eval_poly(c, x).unwrap()
        })
    }

    /// `∫∫ p_d(τ) Θ(τ - ρ) p_k(τ) p_l(ρ) dρ dτ` by nested Gauss rules.
    fn quad_basis(d: usize, k: usize, l: usize) -> f64 {
        let outer = gauss_rule((d + k + l + 4) / 2 + 1);
        let inner = gauss_rule(l / 2 + 2);
        outer.integrate(|tau| {
            let ant: f64 = inner.integrate_on(-1.0, tau, |rho| eval_poly(l, rho).unwrap());
            eval_poly(d, tau).unwrap() * eval_poly(k, tau).unwrap() * ant
        })
    }

    #[test]
    fn triple_product_examples() {
        assert_eq!(triple_product(1, 1, 1), 0.0);
        assert_abs_diff_eq!(triple_product(0, 7, 7), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(triple_product(1, 1, 2), 2.0 / 10f64.sqrt(), epsilon = 1e-15);
        assert_eq!(triple_product(0, 2, 5), 0.0);
        assert_eq!(triple_product(1, 2, 5), 0.0);
    }

    #[test]
    fn triple_product_matches_quadrature() {
        for a in 0..=8 {
            for b in 0..=8 {
                for c in 0..=8 {
                    let q = quad_triple(a, b, c);
                    assert_abs_diff_eq!(triple_product(a, b, c), q, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn triple_product_large_indices_stay_finite() {
        let v = triple_product(300, 400, 500);
        assert!(v.is_finite() && v > 0.0);
        assert_abs_diff_eq!(v, quad_triple(300, 400, 500), epsilon = 1e-12);
    }

    #[test]
    fn basis_matrix_examples() {
        let b0 = basis_matrix(0, 4);
        assert_abs_diff_eq!(b0.get(1, 0), 1.0 / 6f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(b0.get(0, 1), -1.0 / 6f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(b0.get(0, 0), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_eq!(b0.get(2, 0), 0.0);

        let b2 = basis_matrix(2, 10).to_dense();
        for k in 0usize..10 {
            for l in 0..10 {
                if k.abs_diff(l) > 3 {
                    assert_eq!(b2[(k, l)], 0.0);
                }
            }
        }
    }

    #[test]
    fn basis_matrix_matches_double_quadrature() {
        for d in 0..=4 {
            let b = basis_matrix(d, 8);
            for k in 0..8 {
                for l in 0..8 {
                    assert_abs_diff_eq!(b.get(k, l), quad_basis(d, k, l), epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn basis_matrix_is_cached() {
        assert!(Arc::ptr_eq(&basis_matrix(3, 12), &basis_matrix(3, 12)));
        assert_eq!(basis_matrix(3, 1).bandwidth(), 0);
    }

    #[test]
    fn heaviside_entries() {
        let h = heaviside_matrix(10);
        assert_eq!(h.bandwidth(), 1);
        assert_abs_diff_eq!(h.get(0, 0).re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h.get(0, 1).re, -1.0 / 3f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn constant_generator_gives_heaviside() {
        let s = LegendreSeries::from_real(&[2f64.sqrt()]);
        assert_eq!(coeff_matrix(&s, 12), heaviside_matrix(12));
    }

    #[test]
    fn coeff_matrix_of_t_squared_matches_quadrature() {
        // t^2 = (√2/3) p_0 + (2√2/(3√5)) p_2
        let s = LegendreSeries::from_real(&[2f64.sqrt() / 3.0, 0.0, 2.0 * 2f64.sqrt() / (3.0 * 5f64.sqrt())]);
        let f = coeff_matrix(&s, 9);
        assert_eq!(f.bandwidth(), 3);
        let outer = gauss_rule(12);
        for k in 0..9 {
            for l in 0..9 {
                let inner = gauss_rule(l / 2 + 2);
                let q: f64 = outer.integrate(|tau| {
                    let ant: f64 = inner.integrate_on(-1.0, tau, |rho| eval_poly(l, rho).unwrap());
                    tau * tau * eval_poly(k, tau).unwrap() * ant
                });
                assert_abs_diff_eq!(f.get(k, l).re, q, epsilon = 1e-13);
                assert_eq!(f.get(k, l).im, 0.0);
            }
        }
    }

    #[test]
    fn product_with_identity_and_dimension_check() {
        let s = LegendreSeries::new(vec![Complex64::new(0.3, 1.0), Complex64::new(-0.2, 0.1)]);
        let f = coeff_matrix(&s, 7);
        let p = star_product(&f, &StarCoeffMatrix::identity(7)).unwrap();
        assert_eq!(p.to_dense(), f.to_dense());
        assert_eq!(
            star_product(&f, &StarCoeffMatrix::identity(6)).unwrap_err(),
            StarError::DimensionMismatch { left: 7, right: 6 }
        );
    }

    #[test]
    fn banded_product_matches_dense_product() {
        let f = coeff_matrix(&LegendreSeries::from_real(&[0.5, -1.0, 0.25]), 15);
        let g = heaviside_matrix(15);
        let p = star_product(&f, &g).unwrap();
        assert_eq!(p.bandwidth(), 4);
        let dense = f.to_dense() * g.to_dense();
        assert!((p.to_dense() - dense).camax() < 1e-15);
    }

    #[test]
    fn combine_is_entrywise() {
        let f = heaviside_matrix(5);
        let g = StarCoeffMatrix::identity(5);
        let two = Complex64::new(2.0, 0.0);
        let c = f.combine(two, &g, Complex64::new(0.0, 1.0)).unwrap();
        assert_eq!(c.get(0, 0), two * f.get(0, 0) + Complex64::new(0.0, 1.0));
        assert_eq!(f.sub(&f).unwrap().to_dense(), DMatrix::from_element(5, 5, Complex64::new(0.0, 0.0)));
        assert_eq!(f.scale(two).get(1, 0), two * f.get(1, 0));
    }
}
