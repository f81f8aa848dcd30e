mod common;

use common::{kernel_coeff, p};
use num_complex::Complex64;
use proptest::prelude::*;
use starode::legendre::{fit_series, gauss_rule, LegendreSeries};
use starode::star::{
    basis_matrix, coeff_matrix, heaviside_matrix, star_product, triple_product, StarCoeffMatrix,
};

#[test]
fn triple_products_match_quadrature_up_to_twenty() {
    for a in 0..=20usize {
        for b in 0..=20usize {
            for c in 0..=20usize {
                let v = triple_product(a, b, c);
                let s2 = a + b + c;
                let violates = s2 % 2 == 1 || a > s2 / 2 || b > s2 / 2 || c > s2 / 2;
                if violates {
                    assert_eq!(v, 0.0, "({a},{b},{c})");
                    continue;
                }
                let rule = gauss_rule((s2 + 2).div_ceil(2));
                let q = rule.integrate(|x| p(a, x) * p(b, x) * p(c, x));
                assert!((v - q).abs() <= 1e-12, "({a},{b},{c}): {v} vs {q}");
            }
        }
    }
}

#[test]
fn triple_product_is_symmetric() {
    for (a, b, c) in [(3, 5, 6), (10, 4, 8), (0, 9, 9), (7, 7, 2)] {
        let v = triple_product(a, b, c);
        for w in [
            triple_product(a, c, b),
            triple_product(b, a, c),
            triple_product(b, c, a),
            triple_product(c, a, b),
            triple_product(c, b, a),
        ] {
            assert_eq!(v, w);
        }
    }
}

#[test]
fn basis_entries_match_double_quadrature() {
    for d in 0..=10 {
        let b = basis_matrix(d, 11);
        for k in 0..=10 {
            for l in 0..=10 {
                let q = kernel_coeff(k, l, d, |tau, _| p(d, tau));
                assert!((b.get(k, l) - q).abs() <= 1e-10, "d={d} ({k},{l})");
            }
        }
    }
}

#[test]
fn basis_sparsity_is_exact() {
    for d in 0..=10 {
        let b = basis_matrix(d, 32).to_dense();
        for k in 0..32usize {
            for l in 0..32usize {
                if k.abs_diff(l) > d + 1 {
                    assert_eq!(b[(k, l)], 0.0);
                }
            }
        }
    }
}

#[test]
fn basis_matrices_are_leading_blocks_of_each_other() {
    let small = basis_matrix(4, 10);
    let big = basis_matrix(4, 25);
    for k in 0..10 {
        for l in 0..10 {
            assert_eq!(small.get(k, l), big.get(k, l));
        }
    }
}

#[test]
fn heaviside_squared_is_ramp_kernel() {
    let h = heaviside_matrix(12);
    let hh = star_product(&h, &h).unwrap();
    for k in 0..8 {
        for l in 0..8 {
            let q = kernel_coeff(k, l, 1, |tau, rho| tau - rho);
            assert!((hh.get(k, l).re - q).abs() <= 1e-10, "({k},{l})");
        }
    }
}

#[test]
fn star_product_of_one_and_t() {
    let m = 12;
    let f = coeff_matrix(&LegendreSeries::from_real(&[2f64.sqrt()]), m);
    let g = coeff_matrix(&LegendreSeries::from_real(&[0.0, (2.0f64 / 3.0).sqrt()]), m);
    let fg = star_product(&f, &g).unwrap();
    // ∫_ρ^τ σ dσ = (τ² - ρ²)/2
    for k in 0..6 {
        for l in 0..6 {
            let q = kernel_coeff(k, l, 2, |tau, rho| 0.5 * (tau * tau - rho * rho));
            assert!((fg.get(k, l).re - q).abs() <= 1e-10, "({k},{l})");
        }
    }
}

#[test]
fn cos4t_generator_band() {
    let s = fit_series(|t| Complex64::new((4.0 * t).cos(), 0.0), 1e-15, 4096).unwrap();
    let f = coeff_matrix(&s, 101);
    assert_eq!(f.bandwidth(), s.len());
    let dense = f.to_dense();
    for i in 0..101usize {
        for j in 0..101usize {
            if i.abs_diff(j) > s.len() {
                assert_eq!(dense[(i, j)], Complex64::new(0.0, 0.0));
            }
        }
    }
}

fn series_strategy(max_len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..max_len)
}

fn to_series(v: &[(f64, f64)]) -> LegendreSeries {
    LegendreSeries::new(v.iter().map(|&(a, b)| Complex64::new(a, b)).collect())
}

fn max_diff(a: &StarCoeffMatrix, b: &StarCoeffMatrix) -> f64 {
    (a.to_dense() - b.to_dense()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coeff_matrix_is_linear(
        s in series_strategy(8),
        r in series_strategy(8),
        alpha in (-2.0f64..2.0, -2.0f64..2.0),
        beta in (-2.0f64..2.0, -2.0f64..2.0),
    ) {
        let m = 14;
        let (alpha, beta) = (Complex64::new(alpha.0, alpha.1), Complex64::new(beta.0, beta.1));
        let (s, r) = (to_series(&s), to_series(&r));
        let lhs = coeff_matrix(&s.linear_combination(alpha, &r, beta), m);
        let rhs = coeff_matrix(&s, m).combine(alpha, &coeff_matrix(&r, m), beta).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-13);
    }

    #[test]
    fn star_product_is_associative(
        a in series_strategy(5),
        b in series_strategy(5),
        c in series_strategy(5),
    ) {
        let m = 16;
        let (fa, fb, fc) = (
            coeff_matrix(&to_series(&a), m),
            coeff_matrix(&to_series(&b), m),
            coeff_matrix(&to_series(&c), m),
        );
        let left = star_product(&star_product(&fa, &fb).unwrap(), &fc).unwrap();
        let right = star_product(&fa, &star_product(&fb, &fc).unwrap()).unwrap();
        prop_assert!(max_diff(&left, &right) <= 1e-12);
        prop_assert!(left.bandwidth() <= (fa.bandwidth() + fb.bandwidth() + fc.bandwidth()).min(m - 1));
    }

    #[test]
    fn real_generators_give_real_matrices(s in prop::collection::vec(-3.0f64..3.0, 1..10)) {
        let f = coeff_matrix(&LegendreSeries::from_real(&s), 20);
        prop_assert!(f.to_dense().iter().all(|z| z.im == 0.0));
    }
}
