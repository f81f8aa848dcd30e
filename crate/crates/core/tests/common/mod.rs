#![allow(dead_code)]

use starode::legendre::{eval_poly, gauss_rule};

pub fn p(k: usize, x: f64) -> f64 {
    eval_poly(k, x).unwrap()
}

/// `∫_{-1}^{1} ∫_{-1}^{τ} g(τ, ρ) dρ dτ` with rules exact for polynomial
/// integrands of degree `deg_tau` in τ (after the inner integral) and
/// `deg_rho` in ρ.
pub fn triangle_integral<G: Fn(f64, f64) -> f64>(deg_tau: usize, deg_rho: usize, g: G) -> f64 {
    let outer = gauss_rule(deg_tau / 2 + 1);
    let inner = gauss_rule(deg_rho / 2 + 1);
    outer.integrate(|tau| inner.integrate_on(-1.0, tau, |rho| g(tau, rho)))
}

/// Coefficient `(k, l)` of `w(τ, ρ) Θ(τ - ρ)` for a polynomial weight of
/// total degree at most `deg_w`.
pub fn kernel_coeff<W: Fn(f64, f64) -> f64>(k: usize, l: usize, deg_w: usize, w: W) -> f64 {
    triangle_integral(k + l + deg_w + 1, l + deg_w, |tau, rho| {
        w(tau, rho) * p(k, tau) * p(l, rho)
    })
}
