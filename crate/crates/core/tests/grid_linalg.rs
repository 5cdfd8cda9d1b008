mod common;

use std::f64::consts::PI;

use common::{adaptive_simpson, random_matrix, rk4_linear, rng};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use netlump::grid::{integrate_edge, norm_l1, norm_sup, project_average, GridFunction};
use netlump::linalg::{expm, matrix_exponential_apply, matrix_power_apply, SquareMatrix};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn sine_integral_matches_adaptive_quadrature() {
    let u = GridFunction::from_fn(1, 128, |_, x| (PI * x).sin()).unwrap();
    let oracle = adaptive_simpson(&|x| (PI * x).sin(), 0.0, 1.0, 1e-14);
    assert!((oracle - 2.0 / PI).abs() < 1e-13);
    assert!((integrate_edge(&u, 0).unwrap() - oracle).abs() < 1e-8);
}

#[test]
fn random_cubics_integrate_exactly() {
    let mut r = rng(11);
    let coeffs: Vec<[f64; 4]> = (0..3).map(|_| [r.gen(), r.gen(), r.gen(), r.gen()]).collect();
    let cubic = |c: &[f64; 4], x: f64| c[0] + x * (c[1] + x * (c[2] + x * c[3]));
    let u = GridFunction::from_fn(3, 10, |j, x| cubic(&coeffs[j], x)).unwrap();
    let p = project_average(&u).unwrap();
    for (j, c) in coeffs.iter().enumerate() {
        let oracle = adaptive_simpson(&|x| cubic(c, x), 0.0, 1.0, 1e-15);
        assert!((p.as_slice()[j] - oracle).abs() < 1e-12);
    }
}

#[test]
fn centred_ramp_norms() {
    let u = GridFunction::from_fn(1, 64, |_, x| x - 0.5).unwrap();
    assert!((norm_l1(&u) - 0.25).abs() < 1e-15);
    assert_eq!(norm_sup(&u), 0.5);
}

#[test]
fn exponential_matches_rk4() {
    let mut r = rng(3);
    let k = random_matrix(&mut r, 4, 1.0);
    let v0 = DVector::from_fn(4, |i, _| 1.0 + i as f64);
    let fast = matrix_exponential_apply(&k, 0.7, &v0).unwrap();
    let oracle = rk4_linear(k.inner(), &v0, 0.7, 1e-4);
    assert!((fast - oracle).amax() < 1e-7);
}

#[test]
fn exponential_large_norm_against_eigendecomposition() {
    // symmetric K with spectrum in [-1000, 2]: e^{K} = Q e^{Λ} Qᵀ
    let mut r = rng(5);
    let q = SymmetricEigen::new({
        let a = DMatrix::from_fn(5, 5, |_, _| r.gen_range(-1.0..1.0));
        &a + a.transpose()
    })
    .eigenvectors;
    let lambda = DVector::from_vec(vec![-1000.0, -250.0, -3.0, 0.5, 2.0]);
    let k = &q * DMatrix::from_diagonal(&lambda) * q.transpose();
    let oracle = &q * DMatrix::from_diagonal(&lambda.map(f64::exp)) * q.transpose();
    let e = expm(&SquareMatrix::new(k).unwrap()).unwrap();
    let rel = (e.inner() - &oracle).norm() / oracle.norm();
    assert!(rel < 1e-10, "relative error {rel}");
}

#[test]
fn power_matches_naive_product() {
    let mut r = rng(9);
    let t = random_matrix(&mut r, 4, 0.5);
    let v = DVector::from_fn(4, |i, _| (i as f64 + 1.0).sqrt());
    let mut naive = v.clone();
    for _ in 0..13 {
        naive = t.inner() * naive;
    }
    let fast = matrix_power_apply(&t, 13, &v);
    assert!((fast - naive).amax() < 1e-12);
}

fn grid_strategy(m: usize, n: usize) -> impl Strategy<Value = GridFunction> {
    prop::collection::vec(-10.0f64..10.0, m * (n + 1)).prop_map(move |v| GridFunction::new(m, n, v).unwrap())
}

fn matrix_strategy(m: usize, scale: f64) -> impl Strategy<Value = SquareMatrix> {
    prop::collection::vec(-scale..scale, m * m).prop_map(move |v| SquareMatrix::from_row_slice(m, &v).unwrap())
}

proptest! {
    #[test]
    fn projection_is_linear(u in grid_strategy(3, 16), w in grid_strategy(3, 16), a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let combo = u.axpby(a, &w, b).unwrap();
        let lhs = project_average(&combo).unwrap();
        let pu = project_average(&u).unwrap();
        let pw = project_average(&w).unwrap();
        for j in 0..3 {
            let rhs = a * pu.as_slice()[j] + b * pw.as_slice()[j];
            prop_assert!((lhs.as_slice()[j] - rhs).abs() <= 1e-11 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn l1_bounded_by_sup(u in grid_strategy(4, 8)) {
        prop_assert!(norm_l1(&u) <= norm_sup(&u) * 4.0 + 1e-12);
    }

    #[test]
    fn exponential_semigroup(k in matrix_strategy(3, 2.0), s in 0.0f64..1.5, t in 0.0f64..1.5) {
        let v = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let once = matrix_exponential_apply(&k, s + t, &v).unwrap();
        let twice = matrix_exponential_apply(&k, s, &matrix_exponential_apply(&k, t, &v).unwrap()).unwrap();
        prop_assert!((&once - &twice).amax() <= 1e-9 * (1.0 + once.amax()));
    }

    #[test]
    fn power_additivity(t in matrix_strategy(3, 0.7), a in 0u64..20, b in 0u64..20) {
        let v = DVector::from_vec(vec![0.3, 1.0, -1.0]);
        let once = matrix_power_apply(&t, a + b, &v);
        let twice = matrix_power_apply(&t, a, &matrix_power_apply(&t, b, &v));
        prop_assert!((&once - &twice).amax() <= 1e-12 * (1.0 + once.amax()));
    }
}
