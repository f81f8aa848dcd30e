//! Band-storage matrices and LU factorization with partial pivoting.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::star::StarCoeffMatrix;

/// Pivots smaller than this in magnitude are treated as exact zeros.
pub const PIVOT_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is numerically singular (pivot {index} below {PIVOT_THRESHOLD:e})")]
    Singular { index: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("column index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
}

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Square matrix with `kl` sub- and `ku` superdiagonals. Row `i` stores the
/// columns `i - kl ..= i + ku` contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    dim: usize,
    kl: usize,
    ku: usize,
    data: Vec<Complex64>,
}

impl BandedMatrix {
    pub fn zeros(dim: usize, kl: usize, ku: usize) -> Self {
        let kl = kl.min(dim.saturating_sub(1));
        let ku = ku.min(dim.saturating_sub(1));
        BandedMatrix {
            dim,
            kl,
            ku,
            data: vec![ZERO; dim * (kl + ku + 1)],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, 0, 0);
        m.data.fill(Complex64::new(1.0, 0.0));
        m
    }

    /// Keeps the in-band part of `a`.
    pub fn from_dense(a: &DMatrix<Complex64>, kl: usize, ku: usize) -> Self {
        assert_eq!(a.nrows(), a.ncols(), "banded matrices are square");
        let mut m = Self::zeros(a.nrows(), kl, ku);
        for i in 0..m.dim {
            for j in m.row_range(i) {
                *m.slot_mut(i, j) = a[(i, j)];
            }
        }
        m
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut a = DMatrix::from_element(self.dim, self.dim, ZERO);
        for i in 0..self.dim {
            for j in self.row_range(i) {
                a[(i, j)] = self.data[self.index(i, j)];
            }
        }
        a
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kl(&self) -> usize {
        self.kl
    }

    pub fn ku(&self) -> usize {
        self.ku
    }

    #[inline]
    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        i * self.width() + (j + self.kl - i)
    }

    /// Columns stored for row `i`.
    #[inline]
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.dim)
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.dim && j < self.dim && j + self.kl >= i && j <= i + self.ku
    }

    /// Entry `(i, j)`; zero outside the band.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if self.in_band(i, j) {
            self.data[self.index(i, j)]
        } else {
            ZERO
        }
    }

    /// # Panics
    /// If `(i, j)` lies outside the stored band.
    #[inline]
    pub fn slot_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        assert!(self.in_band(i, j), "({i}, {j}) outside band kl={} ku={}", self.kl, self.ku);
        let idx = self.index(i, j);
        &mut self.data[idx]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        *self.slot_mut(i, j) = v;
    }

    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
        if x.len() != self.dim {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok((0..self.dim)
            .map(|i| self.row_range(i).map(|j| self.data[self.index(i, j)] * x[j]).sum())
            .collect())
    }

    /// `self · b` for a dense right factor.
    pub fn mul_dense(&self, b: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>, LinalgError> {
        if b.nrows() != self.dim {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim,
                found: b.nrows(),
            });
        }
        let mut out = DMatrix::from_element(self.dim, b.ncols(), ZERO);
        for c in 0..b.ncols() {
            for i in 0..self.dim {
                out[(i, c)] = self.row_range(i).map(|j| self.data[self.index(i, j)] * b[(j, c)]).sum();
            }
        }
        Ok(out)
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row_range(i).map(|j| self.data[self.index(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Copy with the band widened to at least `(kl, ku)`.
    pub fn widened(&self, kl: usize, ku: usize) -> Self {
        let mut out = Self::zeros(self.dim, kl.max(self.kl), ku.max(self.ku));
        for i in 0..self.dim {
            for j in self.row_range(i) {
                *out.slot_mut(i, j) = self.data[self.index(i, j)];
            }
        }
        out
    }

    /// `I - self`.
    pub fn identity_minus(&self) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v = -*v);
        for i in 0..self.dim {
            *out.slot_mut(i, i) += Complex64::new(1.0, 0.0);
        }
        out
    }
}

/// Largest `|i - j|` over entries with magnitude above a threshold.
pub trait BandProfile {
    fn numerical_bandwidth(&self, eps: f64) -> usize;
}

impl BandProfile for BandedMatrix {
    fn numerical_bandwidth(&self, eps: f64) -> usize {
        let mut k = 0;
        for i in 0..self.dim {
            for j in self.row_range(i) {
                if self.data[self.index(i, j)].norm() > eps {
                    k = k.max(i.abs_diff(j));
                }
            }
        }
        k
    }
}

impl BandProfile for DMatrix<Complex64> {
    fn numerical_bandwidth(&self, eps: f64) -> usize {
        let mut k = 0;
        for j in 0..self.ncols() {
            for i in 0..self.nrows() {
                if self[(i, j)].norm() > eps {
                    k = k.max(i.abs_diff(j));
                }
            }
        }
        k
    }
}

/// `K = max{|i - j| : |a_ij| > eps}`; zero for a diagonal matrix.
pub fn numerical_bandwidth<A: BandProfile + ?Sized>(a: &A, eps: f64) -> usize {
    a.numerical_bandwidth(eps)
}

/// Numerical bandwidth restricted to the trailing part of a square matrix:
/// the last `window` rows and the last `window` columns.
pub fn trailing_bandwidth(a: &DMatrix<Complex64>, eps: f64, window: usize) -> usize {
    let n = a.nrows();
    let start = n.saturating_sub(window.max(1));
    let mut k = 0;
    for i in start..n {
        for j in 0..a.ncols() {
            if a[(i, j)].norm() > eps {
                k = k.max(i.abs_diff(j));
            }
        }
    }
    trailing_column_bandwidth(a, eps, window).max(k)
}

/// Bandwidth seen from the last `window` columns only.
pub fn trailing_column_bandwidth(a: &DMatrix<Complex64>, eps: f64, window: usize) -> usize {
    let m = a.ncols();
    let start = m.saturating_sub(window.max(1));
    let mut k = 0;
    for j in start..m {
        for i in 0..a.nrows() {
            if a[(i, j)].norm() > eps {
                k = k.max(i.abs_diff(j));
            }
        }
    }
    k
}

/// LU factors of a banded matrix in band storage. `U` occupies
/// `kl + ku` superdiagonals after fill-in; `L` multipliers sit below the
/// diagonal in LAPACK `gbtrf` order.
#[derive(Debug, Clone)]
pub struct BandedFactorization {
    dim: usize,
    kl: usize,
    ku: usize,
    /// Row `i` holds columns `i - kl ..= i + kl + ku`.
    data: Vec<Complex64>,
    pivots: Vec<usize>,
}

impl BandedFactorization {
    #[inline]
    fn width(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        i * self.width() + (j + self.kl - i)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [Complex64]) -> Result<(), LinalgError> {
        let n = self.dim;
        if x.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: x.len(),
            });
        }
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != ZERO {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    x[i] -= self.data[self.index(i, k)] * xk;
                }
            }
        }
        let upper = self.kl + self.ku;
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..=(i + upper).min(n - 1) {
                s -= self.data[self.index(i, j)] * x[j];
            }
            x[i] = s / self.data[self.index(i, i)];
        }
        Ok(())
    }
}

/// LU factorization with partial (row) pivoting in band storage.
pub fn banded_lu(a: &BandedMatrix) -> Result<BandedFactorization, LinalgError> {
    let (n, kl, ku) = (a.dim, a.kl, a.ku);
    let mut f = BandedFactorization {
        dim: n,
        kl,
        ku,
        data: vec![ZERO; n * (2 * kl + ku + 1)],
        pivots: vec![0; n],
    };
    for i in 0..n {
        for j in a.row_range(i) {
            let idx = f.index(i, j);
            f.data[idx] = a.get(i, j);
        }
    }
    for k in 0..n {
        let last = (k + kl).min(n - 1);
        let mut p = k;
        let mut best = f.data[f.index(k, k)].norm();
        for i in k + 1..=last {
            let v = f.data[f.index(i, k)].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        f.pivots[k] = p;
        if !(best >= PIVOT_THRESHOLD) {
            return Err(LinalgError::Singular { index: k });
        }
        let right = (k + kl + ku).min(n - 1);
        if p != k {
            for j in k..=right {
                let (a_idx, b_idx) = (f.index(k, j), f.index(p, j));
                f.data.swap(a_idx, b_idx);
            }
        }
        let pivot = f.data[f.index(k, k)];
        for i in k + 1..=last {
            let idx = f.index(i, k);
            let l = f.data[idx] / pivot;
            f.data[idx] = l;
            if l != ZERO {
                for j in k + 1..=right {
                    let u = f.data[f.index(k, j)];
                    let t = f.index(i, j);
                    f.data[t] -= l * u;
                }
            }
        }
    }
    Ok(f)
}

/// Factorized `I - F`, from which columns of the discrete resolvent
/// `(I - F)^{-1}` are obtained by solves against unit vectors.
#[derive(Debug, Clone)]
pub struct Resolvent {
    lu: BandedFactorization,
}

impl Resolvent {
    pub fn new(f: &StarCoeffMatrix) -> Result<Self, LinalgError> {
        Ok(Resolvent {
            lu: banded_lu(&f.as_banded().identity_minus())?,
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.dim
    }

    pub fn factorization(&self) -> &BandedFactorization {
        &self.lu
    }

    pub fn column(&self, j: usize) -> Result<Vec<Complex64>, LinalgError> {
        let n = self.lu.dim;
        if j >= n {
            return Err(LinalgError::IndexOutOfRange { index: j, dim: n });
        }
        let mut e = vec![ZERO; n];
        e[j] = Complex64::new(1.0, 0.0);
        self.lu.solve_in_place(&mut e)?;
        Ok(e)
    }

    /// Requested columns, solved in parallel; output order follows `cols`.
    pub fn columns(&self, cols: &[usize]) -> Result<Vec<Vec<Complex64>>, LinalgError> {
        cols.par_iter().map(|&j| self.column(j)).collect()
    }

    /// The full inverse, one banded solve per column.
    pub fn dense(&self) -> DMatrix<Complex64> {
        let n = self.lu.dim;
        let all: Vec<usize> = (0..n).collect();
        let cols = self.columns(&all).expect("indices are in range");
        DMatrix::from_fn(n, n, |i, j| cols[j][i])
    }
}

/// Columns `cols` of `(I - F)^{-1}`.
pub fn resolvent_columns(
    f: &StarCoeffMatrix,
    cols: &[usize],
) -> Result<Vec<Vec<Complex64>>, LinalgError> {
    Resolvent::new(f)?.columns(cols)
}
