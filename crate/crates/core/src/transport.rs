//! Transport at speed `1/ε` along every edge, `∂ₜu = −(1/ε)∂ₓu`, with the
//! vertex condition `u(0) = (I + εB) u(1)`.
//!
//! Along characteristics the solution is `(I + εB)ⁿ u0(n + x − t/ε)` where
//! `n` counts the vertex crossings, so it can be evaluated exactly.

use std::collections::HashMap;

use nalgebra::DVector;

use crate::coupling::{perron_vector, TransportCoupling};
use crate::error::{NetlumpError, Result};
use crate::grid::{interpolant_antiderivative, interpolate_row, project_average, AggregatedState, GridFunction};
use crate::linalg::{matrix_power, SquareMatrix};
use crate::profile::EdgeProfiles;

/// Initial data that can be evaluated and integrated anywhere on `[0, 1]`.
pub trait InitialData {
    fn m(&self) -> usize;
    fn eval(&self, edge: usize, x: f64) -> f64;
    /// `∫_a^b u_edge(x) dx` for `0 ≤ a ≤ b ≤ 1`.
    fn integral(&self, edge: usize, a: f64, b: f64) -> f64;

    fn eval_all(&self, x: f64) -> DVector<f64> {
        DVector::from_fn(self.m(), |j, _| self.eval(j, x))
    }

    fn integral_all(&self, a: f64, b: f64) -> DVector<f64> {
        DVector::from_fn(self.m(), |j, _| self.integral(j, a, b))
    }
}

/// Grid samples are read through their piecewise-linear interpolant.
impl InitialData for GridFunction {
    fn m(&self) -> usize {
        GridFunction::m(self)
    }

    fn eval(&self, edge: usize, x: f64) -> f64 {
        interpolate_row(self.row(edge), x)
    }

    fn integral(&self, edge: usize, a: f64, b: f64) -> f64 {
        let row = self.row(edge);
        interpolant_antiderivative(row, b) - interpolant_antiderivative(row, a)
    }
}

impl InitialData for EdgeProfiles {
    fn m(&self) -> usize {
        EdgeProfiles::m(self)
    }

    fn eval(&self, edge: usize, x: f64) -> f64 {
        self.0[edge].eval(x)
    }

    fn integral(&self, edge: usize, a: f64, b: f64) -> f64 {
        self.0[edge].integral(a, b)
    }
}

#[derive(Debug, Clone)]
pub struct TransportProblem {
    pub coupling: TransportCoupling,
    pub eps: f64,
    pub u0: GridFunction,
    pub t_final: f64,
}

impl TransportProblem {
    pub fn new(coupling: TransportCoupling, eps: f64, u0: GridFunction, t_final: f64) -> Self {
        TransportProblem {
            coupling,
            eps,
            u0,
            t_final,
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_common(&self.coupling, self.eps, self.u0.m())?;
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(NetlumpError::invalid("t_final", format!("must be >= 0, got {}", self.t_final)));
        }
        Ok(())
    }
}

fn validate_common(c: &TransportCoupling, eps: f64, m: usize) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(NetlumpError::invalid("eps", format!("must be positive, got {eps}")));
    }
    if m != c.dim() {
        return Err(NetlumpError::mismatch("initial data edges", c.dim(), m));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(NetlumpError::invalid("t", format!("must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// Number of vertex crossings `n` behind the point `x` after `θ = t/ε` periods.
///
/// On `[0, 1)` the solution is taken right-continuous in `x`; at `x = 1` the
/// left limit is used. Either way `n + x − θ` lies in `[0, 1]`.
pub fn crossing_count(x: f64, theta: f64) -> u64 {
    let s = x - theta;
    let n = if x < 1.0 { (-s).ceil() } else { (-s).floor() + 1.0 };
    n.max(0.0) as u64
}

/// `t/ε`, snapped to the nearest integer when it is within rounding of one,
/// so that `t = kε` lands exactly on a whole number of periods.
pub fn periods(t: f64, eps: f64) -> f64 {
    let theta = t / eps;
    let k = theta.round();
    if (theta - k).abs() <= 8.0 * f64::EPSILON * theta.max(1.0) {
        k
    } else {
        theta
    }
}

struct PowerCache<'a> {
    t: &'a SquareMatrix,
    cache: HashMap<u64, SquareMatrix>,
}

impl<'a> PowerCache<'a> {
    fn new(t: &'a SquareMatrix) -> Self {
        PowerCache {
            t,
            cache: HashMap::new(),
        }
    }

    fn get(&mut self, n: u64) -> &SquareMatrix {
        let t = self.t;
        self.cache.entry(n).or_insert_with(|| matrix_power(t, n))
    }
}

/// The exact solution at time `t`, sampled on the grid of `p.u0`.
pub fn transport_exact(p: &TransportProblem, t: f64) -> Result<GridFunction> {
    p.validate()?;
    transport_exact_from(&p.coupling, p.eps, &p.u0, t, p.u0.n_cells())
}

/// The exact solution at time `t` for arbitrary initial data, sampled on `n_cells` cells.
pub fn transport_exact_from(
    c: &TransportCoupling,
    eps: f64,
    u0: &dyn InitialData,
    t: f64,
    n_cells: usize,
) -> Result<GridFunction> {
    validate_common(c, eps, u0.m())?;
    check_time(t)?;
    if n_cells == 0 {
        return Err(NetlumpError::invalid("n_cells", "must be positive"));
    }
    let m = c.dim();
    let theta = periods(t, eps);
    let tm = c.boundary_matrix(eps);
    let mut powers = PowerCache::new(&tm);
    let mut values = vec![0.0; m * (n_cells + 1)];
    for i in 0..=n_cells {
        let x = i as f64 / n_cells as f64;
        let n = crossing_count(x, theta);
        let y = (n as f64 + x - theta).clamp(0.0, 1.0);
        let u = powers.get(n).apply(&u0.eval_all(y));
        for j in 0..m {
            values[j * (n_cells + 1) + i] = u[j];
        }
    }
    GridFunction::new(m, n_cells, values)
}

/// Edge totals of the exact solution,
/// `T^{n−1}[∫₀¹u0 + εB∫_{n−θ}^1 u0]` for `n − 1 ≤ θ = t/ε ≤ n`.
pub fn transport_projection_exact(
    c: &TransportCoupling,
    eps: f64,
    u0: &dyn InitialData,
    t: f64,
) -> Result<AggregatedState> {
    validate_common(c, eps, u0.m())?;
    check_time(t)?;
    let theta = periods(t, eps);
    let total = u0.integral_all(0.0, 1.0);
    if theta == 0.0 {
        return Ok(AggregatedState(total));
    }
    let n = theta.ceil().max(1.0);
    let a = (n - theta).clamp(0.0, 1.0);
    let inner = total + c.b.apply(&u0.integral_all(a, 1.0)) * eps;
    let tm = c.boundary_matrix(eps);
    Ok(AggregatedState(matrix_power(&tm, n as u64 - 1).apply(&inner)))
}

pub const DEFAULT_MAX_UPWIND_STEPS: u64 = 20_000_000;

/// First-order upwind solution at time `t` on `n_cells` cells with Courant
/// number at most `cfl`. `p.u0` is resampled by linear interpolation.
pub fn transport_upwind(p: &TransportProblem, t: f64, n_cells: usize, cfl: f64) -> Result<GridFunction> {
    p.validate()?;
    transport_upwind_from(&p.coupling, p.eps, &p.u0, t, n_cells, cfl, DEFAULT_MAX_UPWIND_STEPS)
}

pub fn transport_upwind_from(
    c: &TransportCoupling,
    eps: f64,
    u0: &dyn InitialData,
    t: f64,
    n_cells: usize,
    cfl: f64,
    max_steps: u64,
) -> Result<GridFunction> {
    validate_common(c, eps, u0.m())?;
    check_time(t)?;
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(NetlumpError::invalid("cfl", format!("must lie in (0, 1], got {cfl}")));
    }
    if n_cells == 0 {
        return Err(NetlumpError::invalid("n_cells", "must be positive"));
    }
    let m = c.dim();
    let dx = 1.0 / n_cells as f64;
    let mut u = GridFunction::from_fn(m, n_cells, |j, x| u0.eval(j, x))?;
    if t == 0.0 {
        return Ok(u);
    }
    let required = (t / (cfl * eps * dx) - 1e-9).ceil().max(1.0);
    if required > max_steps as f64 {
        return Err(NetlumpError::StepOverflow {
            required: required.min(u64::MAX as f64) as u64,
            limit: max_steps,
        });
    }
    let steps = required as u64;
    let courant = t / steps as f64 / (eps * dx);
    let tm = c.boundary_matrix(eps);
    for _ in 0..steps {
        for j in 0..m {
            let row = u.row_mut(j);
            for i in (1..=n_cells).rev() {
                row[i] -= courant * (row[i] - row[i - 1]);
            }
        }
        let inflow = tm.apply(&u.right_values());
        for j in 0..m {
            u.row_mut(j)[0] = inflow[j];
        }
    }
    Ok(u)
}

/// Splitting `u0 = ρN + layer0` for a column-stochastic boundary matrix `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticDecomposition {
    /// Total mass `𝟏·𝒫u0`.
    pub rho: f64,
    /// Perron vector of `T`.
    pub n: DVector<f64>,
    /// `u0 − ρN`; its edge totals sum to zero.
    pub layer0: GridFunction,
}

pub fn stochastic_decomposition(t: &SquareMatrix, u0: &GridFunction) -> Result<StochasticDecomposition> {
    if u0.m() != t.dim() {
        return Err(NetlumpError::mismatch("initial data edges", t.dim(), u0.m()));
    }
    let n = perron_vector(t)?;
    let rho = project_average(u0)?.total();
    let shift: Vec<f64> = n.iter().map(|nj| -rho * nj).collect();
    let layer0 = u0.add_edge_constants(&shift)?;
    Ok(StochasticDecomposition { rho, n, layer0 })
}
