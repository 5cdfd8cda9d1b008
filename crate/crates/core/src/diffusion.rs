//! The ε-scaled diffusion system on `m` edges
//!
//! ```text
//! ∂ₜu = (1/ε) ∂ₓₓu,   ∂ₓu(0) = ε(K00 u(0) + K01 u(1)),   ∂ₓu(1) = ε(K10 u(0) + K11 u(1))
//! ```
//!
//! solved by Crank–Nicolson in time and central differences in space. The
//! boundary rows use one-sided three-point derivatives. Interior values
//! depend linearly on the (unknown) endpoint values, so each step reduces to
//! one tridiagonal solve per edge plus a dense `2m × 2m` system for the
//! endpoints.

use nalgebra::{DMatrix, DVector, LU};

use crate::coupling::DiffusionCoupling;
use crate::error::{NetlumpError, Result};
use crate::grid::{project_average, GridFunction};

#[derive(Debug, Clone)]
pub struct DiffusionProblem {
    pub coupling: DiffusionCoupling,
    pub eps: f64,
    pub u0: GridFunction,
    pub t_final: f64,
    /// Target time step; `None` picks `min(1e-3·t_final, ε/200)`.
    pub dt: Option<f64>,
    /// Times at which the solution is recorded; empty means 21 uniform times on `[0, t_final]`.
    pub output_times: Vec<f64>,
}

impl DiffusionProblem {
    pub fn new(coupling: DiffusionCoupling, eps: f64, u0: GridFunction, t_final: f64) -> Self {
        DiffusionProblem {
            coupling,
            eps,
            u0,
            t_final,
            dt: None,
            output_times: Vec::new(),
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_output_times(mut self, times: Vec<f64>) -> Self {
        self.output_times = times;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(NetlumpError::invalid("eps", format!("must be positive, got {}", self.eps)));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(NetlumpError::invalid("t_final", format!("must be >= 0, got {}", self.t_final)));
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(NetlumpError::invalid("dt", format!("must be positive, got {dt}")));
            }
        }
        if self.u0.m() != self.coupling.dim() {
            return Err(NetlumpError::mismatch("initial data edges", self.coupling.dim(), self.u0.m()));
        }
        if self.u0.n_cells() < 4 {
            return Err(NetlumpError::invalid("n_cells", "diffusion solver needs at least 4 cells"));
        }
        let mut prev = 0.0;
        for &t in &self.output_times {
            if !(t.is_finite() && t >= prev && t <= self.t_final) {
                return Err(NetlumpError::invalid(
                    "output_times",
                    format!("must be nondecreasing within [0, t_final], got {t}"),
                ));
            }
            prev = t;
        }
        Ok(())
    }

    pub fn time_step(&self) -> f64 {
        self.dt.unwrap_or_else(|| {
            let by_t = if self.t_final > 0.0 { 1e-3 * self.t_final } else { f64::INFINITY };
            by_t.min(self.eps / 200.0)
        })
    }

    pub fn resolved_output_times(&self) -> Vec<f64> {
        if self.output_times.is_empty() {
            uniform_times(self.t_final, 20)
        } else {
            self.output_times.clone()
        }
    }
}

/// `count + 1` equally spaced times on `[0, t_final]`.
pub fn uniform_times(t_final: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|k| t_final * k as f64 / count as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<GridFunction>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&GridFunction> {
        self.states.last()
    }
}

/// LU factors of the constant-coefficient interior matrix `tridiag(−c, 1 + 2c, −c)`.
struct Tridiagonal {
    c: f64,
    c_prime: Vec<f64>,
    denom: Vec<f64>,
}

impl Tridiagonal {
    fn new(n: usize, c: f64) -> Self {
        let mut c_prime = vec![0.0; n];
        let mut denom = vec![0.0; n];
        let d = 1.0 + 2.0 * c;
        for i in 0..n {
            let prev = if i == 0 { 0.0 } else { c_prime[i - 1] };
            denom[i] = d + c * prev;
            c_prime[i] = -c / denom[i];
        }
        Tridiagonal { c, c_prime, denom }
    }

    fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        rhs[0] /= self.denom[0];
        for i in 1..n {
            rhs[i] = (rhs[i] + self.c * rhs[i - 1]) / self.denom[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.c_prime[i] * rhs[i + 1];
        }
    }
}

/// Everything that depends only on the step size and θ.
struct StepOperator {
    theta: f64,
    r: f64,
    interior: Tridiagonal,
    phi_left: Vec<f64>,
    phi_right: Vec<f64>,
    boundary: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl StepOperator {
    fn new(c: &DiffusionCoupling, eps: f64, n_cells: usize, dt: f64, theta: f64) -> Result<Self> {
        let n_int = n_cells - 1;
        let h = 1.0 / n_cells as f64;
        let r = dt / (eps * h * h);
        let interior = Tridiagonal::new(n_int, theta * r);
        let mut phi_left = vec![0.0; n_int];
        phi_left[0] = theta * r;
        interior.solve(&mut phi_left);
        let mut phi_right = vec![0.0; n_int];
        phi_right[n_int - 1] = theta * r;
        interior.solve(&mut phi_right);

        let m = c.dim();
        let n = n_int - 1;
        let inv2h = 1.0 / (2.0 * h);
        let mut a = DMatrix::zeros(2 * m, 2 * m);
        for j in 0..m {
            a[(j, j)] += (-3.0 + 4.0 * phi_left[0] - phi_left[1]) * inv2h;
            a[(j, m + j)] += (4.0 * phi_right[0] - phi_right[1]) * inv2h;
            a[(m + j, j)] += (-4.0 * phi_left[n] + phi_left[n - 1]) * inv2h;
            a[(m + j, m + j)] += (3.0 - 4.0 * phi_right[n] + phi_right[n - 1]) * inv2h;
            for k in 0..m {
                a[(j, k)] -= eps * c.k00.get(j, k);
                a[(j, m + k)] -= eps * c.k01.get(j, k);
                a[(m + j, k)] -= eps * c.k10.get(j, k);
                a[(m + j, m + k)] -= eps * c.k11.get(j, k);
            }
        }
        Ok(StepOperator {
            theta,
            r,
            interior,
            phi_left,
            phi_right,
            boundary: a.lu(),
        })
    }

    fn step(&self, u: &mut GridFunction, step: usize, time: f64) -> Result<()> {
        let m = u.m();
        let n_cells = u.n_cells();
        let n_int = n_cells - 1;
        let explicit = (1.0 - self.theta) * self.r;
        let mut particular: Vec<Vec<f64>> = Vec::with_capacity(m);
        for row in u.rows() {
            let mut rhs: Vec<f64> = (1..n_cells)
                .map(|i| row[i] + explicit * (row[i - 1] - 2.0 * row[i] + row[i + 1]))
                .collect();
            self.interior.solve(&mut rhs);
            particular.push(rhs);
        }
        let h = 1.0 / n_cells as f64;
        let inv2h = 1.0 / (2.0 * h);
        let n = n_int - 1;
        let mut rhs = DVector::zeros(2 * m);
        for (j, p) in particular.iter().enumerate() {
            rhs[j] = -(4.0 * p[0] - p[1]) * inv2h;
            rhs[m + j] = -(-4.0 * p[n] + p[n - 1]) * inv2h;
        }
        let ends = self
            .boundary
            .solve(&rhs)
            .filter(|x| x.iter().all(|v| v.is_finite()))
            .ok_or(NetlumpError::SingularSystem { step, time })?;
        for (j, p) in particular.iter().enumerate() {
            let (a, b) = (ends[j], ends[m + j]);
            let row = u.row_mut(j);
            row[0] = a;
            row[n_cells] = b;
            for i in 0..n_int {
                row[i + 1] = p[i] + a * self.phi_left[i] + b * self.phi_right[i];
            }
        }
        Ok(())
    }
}

/// Number of implicit-Euler substeps replacing the first Crank–Nicolson step.
const STARTUP_SUBSTEPS: usize = 4;

/// Solves the problem and records the solution at the output times.
pub fn solve_diffusion(p: &DiffusionProblem) -> Result<Trajectory> {
    p.validate()?;
    let dt = p.time_step();
    let times = p.resolved_output_times();
    let mut u = p.u0.clone();
    let mut t = 0.0;
    let mut step_count = 0usize;
    let mut started = false;
    let mut op: Option<(f64, StepOperator)> = None;
    let mut states = Vec::with_capacity(times.len());

    for &target in &times {
        let span = target - t;
        if span > 0.0 {
            let n_steps = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
            let k = span / n_steps as f64;
            for s in 0..n_steps {
                if !started {
                    let sub = k / STARTUP_SUBSTEPS as f64;
                    let ie = StepOperator::new(&p.coupling, p.eps, u.n_cells(), sub, 1.0)?;
                    for _ in 0..STARTUP_SUBSTEPS {
                        ie.step(&mut u, step_count, t + k)?;
                    }
                    started = true;
                } else {
                    let fresh = !matches!(&op, Some((kk, _)) if *kk == k);
                    if fresh {
                        op = Some((k, StepOperator::new(&p.coupling, p.eps, u.n_cells(), k, 0.5)?));
                    }
                    op.as_ref().unwrap().1.step(&mut u, step_count, t + (s + 1) as f64 * k)?;
                }
                step_count += 1;
            }
            t = target;
        }
        states.push(u.clone());
    }
    Ok(Trajectory { times, states })
}

/// Pointwise residual of `d/dt 𝒫u = 𝕂v + K⁰₋w(0) + K¹₋w(1)` along a trajectory,
/// with `v = 𝒫u` and `w = u − v`. The time derivative uses three-point
/// Lagrange differences on the (possibly nonuniform) output times.
pub fn mass_balance_residual(traj: &Trajectory, p: &DiffusionProblem) -> Result<Vec<f64>> {
    let n = traj.len();
    if n < 3 {
        return Err(NetlumpError::invalid("trajectory", "mass balance needs at least 3 output times"));
    }
    let aux = p.coupling.auxiliary_sums();
    let k = p.coupling.aggregated_matrix();
    let v: Vec<DVector<f64>> = traj
        .states
        .iter()
        .map(|u| project_average(u).map(|a| a.0))
        .collect::<Result<_>>()?;
    let t = &traj.times;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let c = i.clamp(1, n - 2);
        let (t0, t1, t2) = (t[c - 1], t[c], t[c + 1]);
        if !(t0 < t1 && t1 < t2) {
            return Err(NetlumpError::invalid("trajectory", "output times must be strictly increasing"));
        }
        let x = t[i];
        // derivatives of the Lagrange basis polynomials at x
        let l0 = ((x - t1) + (x - t2)) / ((t0 - t1) * (t0 - t2));
        let l1 = ((x - t0) + (x - t2)) / ((t1 - t0) * (t1 - t2));
        let l2 = ((x - t0) + (x - t1)) / ((t2 - t0) * (t2 - t1));
        let dv = &v[c - 1] * l0 + &v[c] * l1 + &v[c + 1] * l2;
        let u = &traj.states[i];
        let w0 = u.left_values() - &v[i];
        let w1 = u.right_values() - &v[i];
        let rhs = k.apply(&v[i]) + aux.minus0.apply(&w0) + aux.minus1.apply(&w1);
        out.push((dv - rhs).amax());
    }
    Ok(out)
}

/// Samples of `v(x) = −x(1−x)((α+β)x − α)` per edge, the lifting with
/// `v(0) = v(1) = 0`, `v'(0) = α`, `v'(1) = β`.
pub fn boundary_lift(alpha: &[f64], beta: &[f64], n_cells: usize) -> Result<GridFunction> {
    if alpha.len() != beta.len() {
        return Err(NetlumpError::mismatch("lift slopes", alpha.len(), beta.len()));
    }
    GridFunction::from_fn(alpha.len(), n_cells, |j, x| {
        let (a, b) = (alpha[j], beta[j]);
        -x * (1.0 - x) * ((a + b) * x - a)
    })
}
