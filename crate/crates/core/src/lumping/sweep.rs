//! Per-ε error measurements for convergence sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{comparison_times, estimate_order, ConvergenceReport, LayerExpansion};
use crate::coupling::{DiffusionCoupling, TransportCoupling};
use crate::diffusion::{solve_diffusion, DiffusionProblem};
use crate::error::{NetlumpError, Result};
use crate::grid::{project_average, GridFunction};
use crate::linalg::matrix_exponential_apply;
use crate::profile::EdgeProfiles;
use crate::transport::{periods, transport_exact_from, transport_projection_exact, InitialData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionMetric {
    /// `‖𝒫u_ε − v̄‖`.
    Projected,
    /// `‖u_ε − v̄ − w̃0(t/ε)‖`.
    Full,
    /// `‖u_ε − v̄ − εw̄1 − w̃0(t/ε)‖`.
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportMetric {
    /// `‖v_ε − v̄‖` with `v_ε = 𝒫u_ε`.
    Projected,
    /// `‖w_ε − w̃0(t/ε)‖` with `w_ε = u_ε − 𝒫u_ε`.
    Kinetic,
    /// `‖u_ε − v̄ − w̃0(t/ε)‖`.
    Full,
}

/// Which error column the order is fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitNorm {
    #[default]
    L1,
    Sup,
}

/// Errors at one ε, each the maximum over the comparison times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub eps: f64,
    pub error_l1: f64,
    pub error_sup: f64,
}

fn vec_norms(d: &nalgebra::DVector<f64>) -> (f64, f64) {
    (d.iter().map(|x| x.abs()).sum(), d.amax())
}

#[derive(Debug, Clone)]
pub struct DiffusionSweep {
    pub coupling: DiffusionCoupling,
    pub u0: EdgeProfiles,
    pub t_final: f64,
    pub n_cells: usize,
    pub dt: Option<f64>,
    pub n_terms: usize,
    pub metric: DiffusionMetric,
    pub time_points: usize,
}

impl DiffusionSweep {
    pub fn point(&self, eps: f64) -> Result<SweepPoint> {
        let u0 = self.u0.sample(self.n_cells)?;
        let mut p = DiffusionProblem::new(self.coupling.clone(), eps, u0.clone(), self.t_final)
            .with_output_times(comparison_times(self.t_final, eps, self.time_points));
        p.dt = self.dt;
        let traj = solve_diffusion(&p)?;
        let exp = LayerExpansion::diffusion(&self.coupling, eps, &u0, self.n_terms)?;
        let (mut l1, mut sup) = (0.0f64, 0.0f64);
        for (t, u) in traj.times.iter().zip(&traj.states) {
            let (a, b) = match self.metric {
                DiffusionMetric::Projected => vec_norms(&(project_average(u)?.0 - exp.vbar(*t)?.0)),
                DiffusionMetric::Full => {
                    let approx = exp.layer(*t)?.add_edge_constants(exp.vbar(*t)?.as_slice())?;
                    super::error_norms(u, &approx)?
                }
                DiffusionMetric::Corrected => super::error_norms(u, &exp.assemble(*t)?)?,
            };
            l1 = l1.max(a);
            sup = sup.max(b);
        }
        Ok(SweepPoint { eps, error_l1: l1, error_sup: sup })
    }
}

#[derive(Debug, Clone)]
pub struct TransportSweep {
    pub coupling: TransportCoupling,
    pub u0: EdgeProfiles,
    pub t_final: f64,
    pub n_cells: usize,
    pub metric: TransportMetric,
    pub time_points: usize,
}

impl TransportSweep {
    /// The zero-mean part of the data, shifted periodically by `τ`.
    fn layer(&self, tau: f64, means: &[f64]) -> Result<GridFunction> {
        let shift = tau.rem_euclid(1.0);
        GridFunction::from_fn(self.u0.m(), self.n_cells, |j, x| {
            let y = if x == 1.0 { 1.0 - shift } else { (x - shift).rem_euclid(1.0) };
            self.u0.eval(j, y) - means[j]
        })
    }

    pub fn point(&self, eps: f64) -> Result<SweepPoint> {
        self.u0.validate()?;
        if self.u0.m() != self.coupling.dim() {
            return Err(NetlumpError::mismatch("initial profiles", self.coupling.dim(), self.u0.m()));
        }
        let v0 = self.u0.integral_all(0.0, 1.0);
        let (mut l1, mut sup) = (0.0f64, 0.0f64);
        for t in comparison_times(self.t_final, eps, self.time_points) {
            let vbar = matrix_exponential_apply(&self.coupling.b, t, &v0)?;
            let (a, b) = match self.metric {
                TransportMetric::Projected => {
                    let v = transport_projection_exact(&self.coupling, eps, &self.u0, t)?;
                    vec_norms(&(v.0 - vbar))
                }
                TransportMetric::Kinetic => {
                    let u = transport_exact_from(&self.coupling, eps, &self.u0, t, self.n_cells)?;
                    let v = transport_projection_exact(&self.coupling, eps, &self.u0, t)?;
                    let neg: Vec<f64> = v.0.iter().map(|x| -x).collect();
                    let w = u.add_edge_constants(&neg)?;
                    let layer = self.layer(periods(t, eps), v0.as_slice())?;
                    super::error_norms(&w, &layer)?
                }
                TransportMetric::Full => {
                    let u = transport_exact_from(&self.coupling, eps, &self.u0, t, self.n_cells)?;
                    let approx = self.layer(periods(t, eps), v0.as_slice())?.add_edge_constants(vbar.as_slice())?;
                    super::error_norms(&u, &approx)?
                }
            };
            l1 = l1.max(a);
            sup = sup.max(b);
        }
        Ok(SweepPoint { eps, error_l1: l1, error_sup: sup })
    }
}

/// Evaluates `f` at every ε on a pool of `jobs` threads; results sorted by
/// decreasing ε regardless of completion order.
pub fn run_sweep<F>(eps_list: &[f64], jobs: usize, f: F) -> Result<Vec<SweepPoint>>
where
    F: Fn(f64) -> Result<SweepPoint> + Sync,
{
    if eps_list.is_empty() {
        return Err(NetlumpError::invalid("eps_list", "must not be empty"));
    }
    if let Some(e) = eps_list.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(NetlumpError::invalid("eps_list", format!("entries must be positive, got {e}")));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| NetlumpError::Config(format!("thread pool: {e}")))?;
    let mut points = pool.install(|| eps_list.par_iter().map(|&e| f(e)).collect::<Result<Vec<_>>>())?;
    points.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    if points.windows(2).any(|w| w[0].eps == w[1].eps) {
        return Err(NetlumpError::invalid("eps_list", "duplicate eps values"));
    }
    Ok(points)
}

pub fn report_from_points(points: &[SweepPoint], band: (f64, f64), fit: FitNorm) -> Result<ConvergenceReport> {
    let eps: Vec<f64> = points.iter().map(|p| p.eps).collect();
    let l1: Vec<f64> = points.iter().map(|p| p.error_l1).collect();
    let sup: Vec<f64> = points.iter().map(|p| p.error_sup).collect();
    match fit {
        FitNorm::L1 => estimate_order(&eps, &l1, &sup, band),
        FitNorm::Sup => {
            let mut r = estimate_order(&eps, &sup, &sup, band)?;
            r.errors = l1;
            r.errors_sup = sup;
            Ok(r)
        }
    }
}
