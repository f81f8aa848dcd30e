//! Gauss–Legendre quadrature.
//!
//! Nodes come from Newton iteration on the three-term recurrence, followed by
//! one polishing pass in double-double arithmetic. The polish yields weights
//! accurate to a few ulps and, for every node, the sub-ulp offset between the
//! stored `f64` node and the true root. Projection code uses that offset to
//! evaluate basis polynomials at the true root, which removes the dominant
//! rounding noise from high-degree coefficients.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::dd::Dd;

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    nodes: Vec<f64>,
    /// `true root - nodes[i]`, below one ulp of the node.
    offsets: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    /// Builds the rule from scratch (no caching).
    ///
    /// # Panics
    /// If `n == 0`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a Gauss rule needs at least one node");
        let half = n / 2;
        let roots: Vec<(f64, f64, f64)> = if n >= 64 {
            (1..=half).into_par_iter().map(|k| positive_root(n, k)).collect()
        } else {
            (1..=half).map(|k| positive_root(n, k)).collect()
        };

        let mut nodes = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        // roots[0] is the largest; mirror them onto the negative half first.
        for &(x, dx, w) in &roots {
            nodes.push(-x);
            offsets.push(-dx);
            weights.push(w);
        }
        if n % 2 == 1 {
            let (_, _, w) = polish(n, 0.0);
            nodes.push(0.0);
            offsets.push(0.0);
            weights.push(w);
        }
        for &(x, dx, w) in roots.iter().rev() {
            nodes.push(x);
            offsets.push(dx);
            weights.push(w);
        }
        GaussRule {
            nodes,
            offsets,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// `∑ w_i f(x_i)`, approximating `∫_{-1}^{1} f`.
    pub fn integrate<T, F>(&self, mut f: F) -> T
    where
        F: FnMut(f64) -> T,
        T: std::iter::Sum<T> + std::ops::Mul<f64, Output = T>,
    {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }

    /// Integral over `[a, b]` by the affine change of variables.
    pub fn integrate_on<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        F: FnMut(f64) -> T,
        T: std::iter::Sum<T> + std::ops::Mul<f64, Output = T>,
    {
        let (half, mid) = (0.5 * (b - a), 0.5 * (b + a));
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(mid + half * x) * (w * half))
            .sum()
    }
}

/// Newton on `P_n` in `f64` for the `k`-th largest root, then polish.
fn positive_root(n: usize, k: usize) -> (f64, f64, f64) {
    let nf = n as f64;
    let theta = PI * (4.0 * k as f64 - 1.0) / (4.0 * nf + 2.0);
    let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
    for _ in 0..100 {
        let (p, q) = classical_pair(n, x);
        let dp = nf * (q - x * p) / ((1.0 - x) * (1.0 + x));
        let dx = p / dp;
        x -= dx;
        if dx.abs() <= 4.0 * f64::EPSILON * x.abs() {
            break;
        }
    }
    polish(n, x)
}

/// `(P_n(x), P_{n-1}(x))` for the classical (unnormalized) polynomials.
fn classical_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * x * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// `(P_n, P_{n-1}, P_{n-2})` in double-double at an `f64` point.
fn classical_triple_dd(n: usize, x: f64) -> (Dd, Dd, Dd) {
    let mut older = Dd::ZERO;
    let mut prev = Dd::new(1.0);
    if n == 0 {
        return (prev, Dd::ZERO, Dd::ZERO);
    }
    let mut cur = Dd::new(x);
    for j in 1..n {
        let jf = j as f64;
        let next = cur
            .mul_f64(x)
            .mul_f64(2.0 * jf + 1.0)
            .sub(prev.mul_f64(jf))
            .div_f64(jf + 1.0);
        older = prev;
        prev = cur;
        cur = next;
    }
    (cur, prev, older)
}

/// Refines a converged `f64` root of `P_n`, returning
/// `(node, sub-ulp offset, weight)`.
fn polish(n: usize, mut x: f64) -> (f64, f64, f64) {
    let nf = n as f64;
    let mut offset = 0.0;
    let mut pair = classical_triple_dd(n, x);
    for _ in 0..4 {
        let (p, q, _) = pair;
        let one_minus_sq = (1.0 - x) * (1.0 + x);
        let dp = nf * (q.to_f64() - x * p.to_f64()) / one_minus_sq;
        let dx = -p.to_f64() / dp;
        let moved = x + dx;
        if moved == x {
            offset = dx;
            break;
        }
        x = moved;
        pair = classical_triple_dd(n, x);
    }
    let (_, q, r) = pair;
    // At a root (1 - x^2) P_n'(x) = n P_{n-1}(x), so w = 2(1 - x^2) / (n P_{n-1})^2.
    // P_{n-1} is shifted to the true root with its derivative.
    let one_minus_sq = Dd::new(1.0)
        .sub(Dd::new(x))
        .mul(Dd::new(1.0).add(Dd::new(x)));
    let dq = if n >= 2 {
        (nf - 1.0) * (r.to_f64() - x * q.to_f64()) / one_minus_sq.to_f64()
    } else {
        0.0
    };
    let q_true = q.add(Dd::new(dq * offset));
    let one_minus_sq_true = one_minus_sq.sub(Dd::new(2.0 * x * offset));
    let denom = q_true.mul(q_true).mul_f64(nf * nf);
    let w = one_minus_sq_true.mul_f64(2.0).div(denom).to_f64();
    (x, offset, w)
}

fn cache() -> &'static Mutex<HashMap<usize, Arc<GaussRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Memoized `n`-point rule.
///
/// # Panics
/// If `n == 0`.
pub fn gauss_rule(n: usize) -> Arc<GaussRule> {
    if let Some(rule) = cache().lock().expect("gauss cache poisoned").get(&n) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(GaussRule::new(n));
    let mut guard = cache().lock().expect("gauss cache poisoned");
    Arc::clone(guard.entry(n).or_insert(rule))
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule.
pub fn gauss_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = gauss_rule(n);
    (rule.nodes.clone(), rule.weights.clone())
}
