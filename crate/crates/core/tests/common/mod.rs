#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use netlump::coupling::{coupling_from_rates, DiffusionCoupling, EdgeExchangeRates, Endpoint};
use netlump::linalg::SquareMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, m: usize, scale: f64) -> SquareMatrix {
    let data: Vec<f64> = (0..m * m).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
    SquareMatrix::from_row_slice(m, &data).unwrap()
}

pub fn random_coupling(rng: &mut ChaCha8Rng, m: usize) -> DiffusionCoupling {
    DiffusionCoupling::new(
        random_matrix(rng, m, 1.0),
        random_matrix(rng, m, 1.0),
        random_matrix(rng, m, 1.0),
        random_matrix(rng, m, 1.0),
    )
    .unwrap()
}

/// Two edges, the tail of edge 0 joined to the head of edge 1, unit rates.
pub fn chain_rates() -> EdgeExchangeRates {
    let mut r = EdgeExchangeRates::zeros(2);
    r.l_pairs.insert((0, 1), (Endpoint::Head, 1.0));
    r.r_pairs.insert((1, 0), (Endpoint::Tail, 1.0));
    r.balance_exit_rates();
    r
}

pub fn chain() -> DiffusionCoupling {
    coupling_from_rates(&chain_rates()).unwrap()
}

/// Path v0 -e0- v1 -e1- v2 -e2- v3 with distinct rates, exit rates balanced.
pub fn path_rates() -> EdgeExchangeRates {
    let mut r = EdgeExchangeRates::zeros(3);
    r.r_pairs.insert((0, 1), (Endpoint::Tail, 1.0));
    r.l_pairs.insert((1, 0), (Endpoint::Head, 0.5));
    r.r_pairs.insert((1, 2), (Endpoint::Tail, 2.0));
    r.l_pairs.insert((2, 1), (Endpoint::Head, 0.8));
    r.balance_exit_rates();
    r
}

pub fn path() -> DiffusionCoupling {
    coupling_from_rates(&path_rates()).unwrap()
}

/// Classical RK4 for `v' = K v`.
pub fn rk4_linear(k: &DMatrix<f64>, v0: &DVector<f64>, t: f64, dt: f64) -> DVector<f64> {
    let n = (t / dt).round() as usize;
    let h = t / n as f64;
    let mut v = v0.clone();
    for _ in 0..n {
        let k1 = k * &v;
        let k2 = k * (&v + &k1 * (h / 2.0));
        let k3 = k * (&v + &k2 * (h / 2.0));
        let k4 = k * (&v + &k3 * h);
        v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    v
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) + rec(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// `Σ_j ∫|u_j|` by the trapezoid rule, written out cell by cell.
pub fn trapezoid_abs(rows: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for row in rows {
        let h = 1.0 / (row.len() - 1) as f64;
        for w in row.windows(2) {
            total += 0.5 * h * (w[0].abs() + w[1].abs());
        }
    }
    total
}
