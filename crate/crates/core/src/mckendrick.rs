//! Age-structured population on `m` patches with fast migration,
//!
//! ```text
//! ∂ₜn = −∂ₐn − diag(μ_j) n + (1/ε) K n,    n(0, t) = ∫ diag(β_j) n(a, t) da,
//! ```
//!
//! and its aggregated scalar limit with rates `μ* = Σ μ_j N_j`,
//! `β* = Σ β_j N_j`, `N` the stable patch distribution of `K`.
//!
//! The scheme steps along characteristics with `Δt = Δa`: each step shifts
//! every density one age cell (with the exact survival factor of the cell),
//! fills the newborn class by the trapezoid rule, and migrates with
//! `e^{(Δt/ε)K}`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::coupling::{is_strongly_connected, kolmogorov_check, perron_vector};
use crate::error::{NetlumpError, Result};
use crate::grid::GridFunction;
use crate::linalg::{expm, SquareMatrix};
use crate::profile::Profile;

/// An age-dependent rate that can be evaluated and integrated.
pub trait RateFunction {
    fn eval(&self, a: f64) -> f64;
    fn integral(&self, a: f64, b: f64) -> f64;
}

impl RateFunction for Profile {
    fn eval(&self, a: f64) -> f64 {
        Profile::eval(self, a)
    }

    fn integral(&self, a: f64, b: f64) -> f64 {
        Profile::integral(self, a, b)
    }
}

/// `Σ w_k f_k(a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedRate {
    pub terms: Vec<(f64, Profile)>,
}

impl RateFunction for MixedRate {
    fn eval(&self, a: f64) -> f64 {
        self.terms.iter().map(|(w, p)| w * p.eval(a)).sum()
    }

    fn integral(&self, a: f64, b: f64) -> f64 {
        self.terms.iter().map(|(w, p)| w * p.integral(a, b)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    /// Transport and mortality, then migration.
    #[default]
    Lie,
    /// Half migration, transport and mortality, half migration.
    Strang,
}

#[derive(Debug, Clone)]
pub struct StructuredPopulation {
    pub a_max: f64,
    pub n_age: usize,
    pub beta: Vec<Profile>,
    pub mu: Vec<Profile>,
    /// Kolmogorov migration matrix.
    pub k: SquareMatrix,
    pub eps: f64,
    /// Initial densities, row `j` sampled at ages `i·a_max/n_age`.
    pub n0: GridFunction,
    pub splitting: Splitting,
}

impl StructuredPopulation {
    pub fn m(&self) -> usize {
        self.k.dim()
    }

    pub fn age_step(&self) -> f64 {
        self.a_max / self.n_age as f64
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.m();
        if !(self.a_max.is_finite() && self.a_max > 0.0) {
            return Err(NetlumpError::invalid("a_max", format!("must be positive, got {}", self.a_max)));
        }
        if self.n_age < 2 {
            return Err(NetlumpError::invalid("n_age", "need at least 2 age cells"));
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(NetlumpError::invalid("eps", format!("must be positive, got {}", self.eps)));
        }
        if self.beta.len() != m {
            return Err(NetlumpError::mismatch("fertility profiles", m, self.beta.len()));
        }
        if self.mu.len() != m {
            return Err(NetlumpError::mismatch("mortality profiles", m, self.mu.len()));
        }
        if self.n0.m() != m {
            return Err(NetlumpError::mismatch("initial density patches", m, self.n0.m()));
        }
        if self.n0.n_cells() != self.n_age {
            return Err(NetlumpError::mismatch("initial density age cells", self.n_age, self.n0.n_cells()));
        }
        for (name, rates) in [("beta", &self.beta), ("mu", &self.mu)] {
            for (j, r) in rates.iter().enumerate() {
                r.validate()?;
                if !r.is_nonnegative_on(0.0, self.a_max) {
                    return Err(NetlumpError::invalid(format!("{name}[{j}]"), "rate must be nonnegative"));
                }
            }
        }
        if !kolmogorov_check(&self.k) {
            return Err(NetlumpError::invalid(
                "K",
                "migration matrix must have nonnegative off-diagonal entries and zero column sums",
            ));
        }
        if !is_strongly_connected(&self.k) {
            return Err(NetlumpError::Reducible);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationTrajectory {
    pub times: Vec<f64>,
    /// Densities per patch at each recorded time, ages on the `n_age` grid.
    pub densities: Vec<GridFunction>,
    pub a_max: f64,
    /// Approximate mass carried past `a_max` and dropped.
    pub truncated_mass: f64,
}

impl PopulationTrajectory {
    /// `Σ_j n_j(a)` at record `k`.
    pub fn total_density(&self, k: usize) -> Vec<f64> {
        let d = &self.densities[k];
        (0..=d.n_cells()).map(|i| d.rows().map(|r| r[i]).sum()).collect()
    }

    /// `∫ Σ_j n_j(a) da` at record `k`, trapezoid rule.
    pub fn total_population(&self, k: usize) -> f64 {
        trapezoid(&self.total_density(k), self.a_max)
    }
}

fn trapezoid(samples: &[f64], a_max: f64) -> f64 {
    let n = samples.len() - 1;
    let h = a_max / n as f64;
    h * (0.5 * (samples[0] + samples[n]) + samples[1..n].iter().sum::<f64>())
}

/// Number of `Δa`-steps to reach `t`, if `t` is a multiple of `Δa`.
fn steps_for(t: f64, da: f64) -> Result<usize> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(NetlumpError::invalid("t", format!("must be >= 0, got {t}")));
    }
    let k = (t / da).round();
    if (k * da - t).abs() > 1e-9 * t.max(1.0) {
        return Err(NetlumpError::invalid(
            "t",
            format!("{t} is not a multiple of the age step {da}; the scheme requires Δt = Δa"),
        ));
    }
    Ok(k as usize)
}

/// 21 record steps spread over `n_steps` (fewer if `n_steps < 20`).
fn default_records(n_steps: usize) -> Vec<usize> {
    let mut r: Vec<usize> = (0..=20).map(|i| (i * n_steps + 10) / 20).collect();
    r.dedup();
    r
}

struct Scheme {
    da: f64,
    a_max: f64,
    /// `exp(−∫ μ_j)` over each age cell.
    survival: Vec<Vec<f64>>,
    /// `β_j` at the age nodes.
    fertility: Vec<Vec<f64>>,
    migrate_full: Option<SquareMatrix>,
    migrate_half: Option<SquareMatrix>,
    splitting: Splitting,
}

impl Scheme {
    fn new<R: RateFunction>(
        a_max: f64,
        n_age: usize,
        mu: &[R],
        beta: &[R],
        k: Option<(&SquareMatrix, f64)>,
        splitting: Splitting,
    ) -> Result<Self> {
        let da = a_max / n_age as f64;
        let survival = mu
            .iter()
            .map(|r| (0..n_age).map(|i| (-r.integral(i as f64 * da, (i + 1) as f64 * da)).exp()).collect())
            .collect();
        let fertility: Vec<Vec<f64>> = beta
            .iter()
            .map(|r| (0..=n_age).map(|i| r.eval(i as f64 * da)).collect())
            .collect();
        for (j, f) in fertility.iter().enumerate() {
            if 0.5 * da * f[0] >= 1.0 {
                return Err(NetlumpError::invalid(
                    format!("beta[{j}]"),
                    "fertility at age 0 too large for the age step (renewal is not solvable)",
                ));
            }
        }
        let (migrate_full, migrate_half) = match k {
            Some((k, eps)) => (Some(expm(&k.scale(da / eps))?), Some(expm(&k.scale(0.5 * da / eps))?)),
            None => (None, None),
        };
        Ok(Scheme {
            da,
            a_max,
            survival,
            fertility,
            migrate_full,
            migrate_half,
            splitting,
        })
    }

    fn migrate(&self, n: &mut GridFunction, e: &Option<SquareMatrix>) {
        let Some(e) = e else { return };
        let m = n.m();
        let mut col = DVector::zeros(m);
        for i in 0..=n.n_cells() {
            for j in 0..m {
                col[j] = n.row(j)[i];
            }
            let out = e.apply(&col);
            for j in 0..m {
                n.row_mut(j)[i] = out[j];
            }
        }
    }

    /// Returns the mass dropped past `a_max`.
    fn age(&self, n: &mut GridFunction) -> f64 {
        let n_age = n.n_cells();
        let mut lost = 0.0;
        for j in 0..n.m() {
            let surv = &self.survival[j];
            let beta = &self.fertility[j];
            let row = n.row_mut(j);
            lost += self.da * row[n_age];
            for i in (1..=n_age).rev() {
                row[i] = row[i - 1] * surv[i - 1];
            }
            let births: f64 = (1..n_age).map(|i| beta[i] * row[i]).sum::<f64>() + 0.5 * beta[n_age] * row[n_age];
            row[0] = self.da * births / (1.0 - 0.5 * self.da * beta[0]);
        }
        lost
    }

    fn run(&self, n0: &GridFunction, records: &[usize]) -> Result<PopulationTrajectory> {
        let mut n = n0.clone();
        let mut times = Vec::with_capacity(records.len());
        let mut densities = Vec::with_capacity(records.len());
        let mut lost = 0.0;
        let mut step = 0usize;
        for &r in records {
            while step < r {
                match self.splitting {
                    Splitting::Lie => {
                        lost += self.age(&mut n);
                        self.migrate(&mut n, &self.migrate_full);
                    }
                    Splitting::Strang => {
                        self.migrate(&mut n, &self.migrate_half);
                        lost += self.age(&mut n);
                        self.migrate(&mut n, &self.migrate_half);
                    }
                }
                step += 1;
            }
            if n.values().iter().any(|v| !v.is_finite()) {
                return Err(NetlumpError::NonFinite(format!("population density at step {step}")));
            }
            times.push(step as f64 * self.da);
            densities.push(n.clone());
        }
        Ok(PopulationTrajectory {
            times,
            densities,
            a_max: self.a_max,
            truncated_mass: lost,
        })
    }
}

fn record_steps(t_final: f64, output_times: &[f64], da: f64) -> Result<Vec<usize>> {
    let n_steps = steps_for(t_final, da)?;
    if output_times.is_empty() {
        return Ok(default_records(n_steps));
    }
    let mut out = Vec::with_capacity(output_times.len());
    for &t in output_times {
        let k = steps_for(t, da)?;
        if k > n_steps || out.last().is_some_and(|&p| k < p) {
            return Err(NetlumpError::invalid(
                "output_times",
                "must be nondecreasing and within [0, t_final]",
            ));
        }
        out.push(k);
    }
    Ok(out)
}

/// Solves the patch system. `t_final` and each output time must be a
/// multiple of `Δa`; empty `output_times` records 21 roughly uniform times.
pub fn solve_structured(p: &StructuredPopulation, t_final: f64, output_times: &[f64]) -> Result<PopulationTrajectory> {
    p.validate()?;
    let records = record_steps(t_final, output_times, p.age_step())?;
    let scheme = Scheme::new(p.a_max, p.n_age, &p.mu, &p.beta, Some((&p.k, p.eps)), p.splitting)?;
    scheme.run(&p.n0, &records)
}

/// Stable patch distribution: the null vector of `K` with `Σ N = 1`.
pub fn stable_patch_distribution(k: &SquareMatrix) -> Result<DVector<f64>> {
    let m = k.dim();
    let diag_max = (0..m).map(|i| k.get(i, i).abs()).fold(0.0, f64::max);
    let sigma = if diag_max > 0.0 { 1.0 / diag_max } else { 1.0 };
    perron_vector(&SquareMatrix::identity(m).add(&k.scale(sigma)))
}

/// `μ* = Σ μ_j N_j`, `β* = Σ β_j N_j`.
pub fn aggregate_vital_rates(n: &[f64], mu: &[Profile], beta: &[Profile]) -> Result<(MixedRate, MixedRate)> {
    if mu.len() != n.len() {
        return Err(NetlumpError::mismatch("mortality profiles", n.len(), mu.len()));
    }
    if beta.len() != n.len() {
        return Err(NetlumpError::mismatch("fertility profiles", n.len(), beta.len()));
    }
    if n.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(NetlumpError::invalid("N", "entries must be nonnegative"));
    }
    let total: f64 = n.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(NetlumpError::invalid("N", format!("must sum to 1, sums to {total}")));
    }
    let mix = |ps: &[Profile]| MixedRate {
        terms: n.iter().copied().zip(ps.iter().cloned()).collect(),
    };
    Ok((mix(mu), mix(beta)))
}

/// Scalar McKendrick equation with the same scheme (`m = 1`, no migration).
pub fn solve_aggregated_mckendrick<R: RateFunction>(
    mu_star: &R,
    beta_star: &R,
    n0_total: &[f64],
    a_max: f64,
    t_final: f64,
    output_times: &[f64],
) -> Result<PopulationTrajectory> {
    if n0_total.len() < 3 {
        return Err(NetlumpError::invalid("n0_total", "need at least 2 age cells"));
    }
    if !(a_max.is_finite() && a_max > 0.0) {
        return Err(NetlumpError::invalid("a_max", format!("must be positive, got {a_max}")));
    }
    let n_age = n0_total.len() - 1;
    let n0 = GridFunction::new(1, n_age, n0_total.to_vec())?;
    let da = a_max / n_age as f64;
    let records = record_steps(t_final, output_times, da)?;
    let scheme = Scheme::new(
        a_max,
        n_age,
        std::slice::from_ref(mu_star),
        std::slice::from_ref(beta_star),
        None,
        Splitting::Lie,
    )?;
    scheme.run(&n0, &records)
}

/// Largest L1-in-age distance, over the recorded times, between the total
/// patch population and the aggregated scalar solution.
pub fn aggregation_gap(p: &StructuredPopulation, t_final: f64) -> Result<f64> {
    let full = solve_structured(p, t_final, &[])?;
    let n = stable_patch_distribution(&p.k)?;
    let (mu_star, beta_star) = aggregate_vital_rates(n.as_slice(), &p.mu, &p.beta)?;
    let n0_total: Vec<f64> = (0..=p.n_age).map(|i| p.n0.rows().map(|r| r[i]).sum()).collect();
    let agg = solve_aggregated_mckendrick(&mu_star, &beta_star, &n0_total, p.a_max, t_final, &full.times)?;
    let mut gap = 0.0f64;
    for k in 0..full.times.len() {
        let total = full.total_density(k);
        let diff: Vec<f64> = total.iter().zip(agg.densities[k].row(0)).map(|(a, b)| (a - b).abs()).collect();
        gap = gap.max(trapezoid(&diff, p.a_max));
    }
    Ok(gap)
}

/// Root `λ` of `∫₀^{a_max} β e^{−(λ+μ)a} da = 1` for constant `β > 0`, `μ ≥ 0`.
pub fn lotka_growth_rate(beta: f64, mu: f64, a_max: f64) -> Result<f64> {
    if !(beta > 0.0 && mu >= 0.0 && a_max > 0.0) {
        return Err(NetlumpError::invalid("rates", "need beta > 0, mu >= 0, a_max > 0"));
    }
    let f = |lam: f64| {
        let r = lam + mu;
        let integral = if r.abs() < 1e-12 { a_max } else { (1.0 - (-r * a_max).exp()) / r };
        beta * integral - 1.0
    };
    // f is decreasing in λ
    let (mut lo, mut hi) = (-mu - 1.0, beta);
    while f(lo) < 0.0 {
        lo -= 2.0 * (hi - lo);
    }
    while f(hi) > 0.0 {
        hi += 2.0 * (hi - lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
