//! Initial layers: the fast transient in `τ = t/ε` carried by the zero-mean
//! part `w0 = u0 − 𝒫u0` of the initial data.

use std::f64::consts::PI;

use crate::error::{NetlumpError, Result};
use crate::grid::{interpolate_row, project_average, GridFunction};

pub const DEFAULT_FOURIER_TERMS: usize = 200;

/// Largest edge mean tolerated in data passed as zero-mean.
pub const ZERO_MEAN_TOL: f64 = 1e-8;

fn require_zero_mean(w0: &GridFunction) -> Result<()> {
    let mean = project_average(w0)?;
    let worst = mean.0.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
    if worst.abs() > ZERO_MEAN_TOL {
        return Err(NetlumpError::NonZeroMean { mean: worst });
    }
    Ok(())
}

/// `∫₀¹ f(x) cos(kx) dx` for grid samples `f`, integrating the piecewise
/// quadratic interpolant on each pair of cells exactly (Filon–Simpson).
pub fn filon_cosine_integral(row: &[f64], k: f64) -> f64 {
    let n = row.len() - 1;
    debug_assert!(n >= 2 && n % 2 == 0);
    let h = 1.0 / n as f64;
    let th = k * h;
    let (c0, s1, c2) = if th.abs() < 1e-2 {
        let t2 = th * th;
        (
            2.0 * h * (1.0 - t2 / 6.0 + t2 * t2 / 120.0),
            2.0 * h * h * th * (1.0 / 3.0 - t2 / 30.0 + t2 * t2 / 840.0),
            2.0 * h * h * h * (1.0 / 3.0 - t2 / 10.0 + t2 * t2 / 168.0),
        )
    } else {
        let (s, c) = th.sin_cos();
        (
            2.0 * h * s / th,
            2.0 * h * h * (s - th * c) / (th * th),
            2.0 * h * h * h * (th * th * s + 2.0 * th * c - 2.0 * s) / (th * th * th),
        )
    };
    let mut sum = 0.0;
    for p in 0..n / 2 {
        let (f0, f1, f2) = (row[2 * p], row[2 * p + 1], row[2 * p + 2]);
        let q0 = f1;
        let q1 = (f2 - f0) / (2.0 * h);
        let q2 = (f0 - 2.0 * f1 + f2) / (2.0 * h * h);
        let (sx, cx) = (k * (2 * p + 1) as f64 * h).sin_cos();
        sum += cx * (q0 * c0 + q2 * c2) - sx * q1 * s1;
    }
    sum
}

/// Cosine-series solution of the Neumann heat equation `∂τw = ∂ₓₓw` on each edge.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierLayer {
    n_cells: usize,
    /// `coeffs[j][n-1] = a_n` for edge `j`.
    coeffs: Vec<Vec<f64>>,
    /// `Σ |a_n|` over `n_terms < n ≤ n_cells`, per edge.
    tail: Vec<f64>,
}

impl FourierLayer {
    /// `a_n = 2∫₀¹ w0(x) cos(nπx) dx` for `n = 1..=n_terms`.
    pub fn new(w0: &GridFunction, n_terms: usize) -> Result<Self> {
        if n_terms == 0 {
            return Err(NetlumpError::invalid("n_terms", "must be at least 1"));
        }
        require_zero_mean(w0)?;
        let n_cells = w0.n_cells();
        let mut coeffs = Vec::with_capacity(w0.m());
        let mut tail = Vec::with_capacity(w0.m());
        for row in w0.rows() {
            coeffs.push(
                (1..=n_terms)
                    .map(|n| 2.0 * filon_cosine_integral(row, n as f64 * PI))
                    .collect(),
            );
            tail.push(
                (n_terms + 1..=n_cells)
                    .map(|n| (2.0 * filon_cosine_integral(row, n as f64 * PI)).abs())
                    .sum(),
            );
        }
        Ok(FourierLayer { n_cells, coeffs, tail })
    }

    pub fn coefficients(&self, edge: usize) -> &[f64] {
        &self.coeffs[edge]
    }

    pub fn n_terms(&self) -> usize {
        self.coeffs[0].len()
    }

    /// Truncation bound `max_j Σ_{n > n_terms} |a_n|` (resolved up to `n_cells`).
    pub fn tail_bound(&self) -> f64 {
        self.tail.iter().copied().fold(0.0, f64::max)
    }

    /// `Σ e^{−(nπ)²τ} a_n cos(nπx)` on the grid of the initial data.
    pub fn evaluate(&self, tau: f64) -> Result<GridFunction> {
        self.evaluate_on(tau, self.n_cells)
    }

    pub fn evaluate_on(&self, tau: f64, n_cells: usize) -> Result<GridFunction> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(NetlumpError::invalid("tau", format!("must be >= 0, got {tau}")));
        }
        let damp: Vec<f64> = (1..=self.n_terms())
            .map(|n| (-(n as f64 * PI).powi(2) * tau).exp())
            .collect();
        let active = damp.iter().rposition(|&d| d > 0.0).map_or(0, |i| i + 1);
        GridFunction::from_fn(self.coeffs.len(), n_cells, |j, x| {
            (0..active)
                .map(|k| damp[k] * self.coeffs[j][k] * ((k + 1) as f64 * PI * x).cos())
                .sum()
        })
    }
}

/// The diffusion layer `w̃0(τ)` and its truncation bound.
pub fn initial_layer_diffusion(w0: &GridFunction, tau: f64, n_terms: usize) -> Result<(GridFunction, f64)> {
    let layer = FourierLayer::new(w0, n_terms)?;
    Ok((layer.evaluate(tau)?, layer.tail_bound()))
}

/// The transport layer: `w0((x − τ) mod 1)` by linear interpolation.
pub fn initial_layer_transport(w0: &GridFunction, tau: f64) -> Result<GridFunction> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(NetlumpError::invalid("tau", format!("must be >= 0, got {tau}")));
    }
    require_zero_mean(w0)?;
    let n = w0.n_cells();
    let shift = tau.rem_euclid(1.0);
    let mut out = w0.clone();
    for j in 0..w0.m() {
        let row = w0.row(j);
        let dst = out.row_mut(j);
        for (i, d) in dst.iter_mut().enumerate() {
            // right-continuous on [0, 1), left limit at x = 1
            let y = if i == n { 1.0 - shift } else { (i as f64 / n as f64 - shift).rem_euclid(1.0) };
            *d = interpolate_row(row, y);
        }
    }
    Ok(out)
}
