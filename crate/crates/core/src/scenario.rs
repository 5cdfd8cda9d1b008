//! Runs a [`ScenarioConfig`]: single solves, ε-sweeps and structural checks.

use std::fmt::Write as _;

use crate::config::{ScenarioConfig, ScenarioKind};
use crate::coupling::{
    check_diffusion_positivity, check_markov_conditions, is_strongly_connected, kolmogorov_check, perron_vector,
    PositivityReport,
};
use crate::diffusion::{solve_diffusion, DiffusionProblem, Trajectory};
use crate::error::{NetlumpError, Result};
use crate::grid::GridFunction;
use crate::linalg::SquareMatrix;
use crate::lumping::sweep::{
    report_from_points, run_sweep, DiffusionMetric, DiffusionSweep, SweepPoint, TransportMetric, TransportSweep,
};
use crate::lumping::{estimate_order, ConvergenceReport, ExpansionComponents, LayerExpansion};
use crate::mckendrick::{aggregation_gap, solve_structured, PopulationTrajectory};
use crate::transport::{transport_exact_from, transport_upwind_from, DEFAULT_MAX_UPWIND_STEPS};

/// Default band for the aggregation-gap decay order of population sweeps.
pub const POPULATION_BAND: (f64, f64) = (0.5, 2.0);

fn require_kind(cfg: &ScenarioConfig, kinds: &[ScenarioKind]) -> Result<()> {
    if kinds.contains(&cfg.kind) {
        Ok(())
    } else {
        Err(NetlumpError::invalid("kind", format!("{:?} scenario cannot be run here", cfg.kind)))
    }
}

pub fn diffusion_problem(cfg: &ScenarioConfig) -> Result<DiffusionProblem> {
    let coupling = cfg.coupling.diffusion()?;
    let u0 = cfg.initial_profiles(coupling.dim())?.sample(cfg.cells())?;
    let mut p = DiffusionProblem::new(coupling, cfg.eps(), u0, cfg.t_final());
    p.dt = cfg.discretization.dt;
    if !cfg.output_times.is_empty() {
        p = p.with_output_times(cfg.output_times.clone());
    }
    p.validate()?;
    Ok(p)
}

pub fn run_diffusion(cfg: &ScenarioConfig) -> Result<Trajectory> {
    require_kind(cfg, &[ScenarioKind::Diffusion])?;
    cfg.validate()?;
    solve_diffusion(&diffusion_problem(cfg)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransportSolver {
    #[default]
    Exact,
    Upwind,
}

/// Transport solution at `t_final` on the configured grid.
pub fn run_transport(cfg: &ScenarioConfig, solver: TransportSolver) -> Result<GridFunction> {
    require_kind(cfg, &[ScenarioKind::Transport])?;
    cfg.validate()?;
    let eps = cfg.eps();
    let coupling = cfg.coupling.transport(eps, cfg.seed())?;
    let u0 = cfg.initial_profiles(coupling.dim())?;
    match solver {
        TransportSolver::Exact => transport_exact_from(&coupling, eps, &u0, cfg.t_final(), cfg.cells()),
        TransportSolver::Upwind => transport_upwind_from(
            &coupling,
            eps,
            &u0,
            cfg.t_final(),
            cfg.cells(),
            cfg.cfl(),
            DEFAULT_MAX_UPWIND_STEPS,
        ),
    }
}

/// `v̄`, `w̄1` and `w̃0` at time `t` for a diffusion or transport scenario.
pub fn run_expand(cfg: &ScenarioConfig, t: f64) -> Result<(ExpansionComponents, usize)> {
    require_kind(cfg, &[ScenarioKind::Diffusion, ScenarioKind::Transport])?;
    cfg.validate()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(NetlumpError::invalid("t", format!("must be >= 0, got {t}")));
    }
    let eps = cfg.eps();
    let n = cfg.cells();
    let exp = match cfg.kind {
        ScenarioKind::Diffusion => {
            let c = cfg.coupling.diffusion()?;
            let u0 = cfg.initial_profiles(c.dim())?.sample(n)?;
            LayerExpansion::diffusion(&c, eps, &u0, cfg.terms())?
        }
        _ => {
            let c = cfg.coupling.transport(eps, cfg.seed())?;
            let u0 = cfg.initial_profiles(c.dim())?.sample(n)?;
            LayerExpansion::transport(&c, eps, &u0)?
        }
    };
    Ok((exp.components(t)?, n))
}

pub fn run_mckendrick(cfg: &ScenarioConfig) -> Result<PopulationTrajectory> {
    require_kind(cfg, &[ScenarioKind::Mckendrick])?;
    cfg.validate()?;
    solve_structured(&cfg.population(cfg.eps())?, cfg.t_final(), &cfg.output_times)
}

/// Sweeps the scenario's ε ladder and fits the convergence order.
pub fn run_sweep_scenario(cfg: &ScenarioConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let eps = cfg.eps_values();
    let jobs = cfg.jobs();
    let fit = cfg.sweep.fit_norm.unwrap_or_default();
    match cfg.kind {
        ScenarioKind::Diffusion => {
            let coupling = cfg.coupling.diffusion()?;
            let sweep = DiffusionSweep {
                u0: cfg.initial_profiles(coupling.dim())?,
                coupling,
                t_final: cfg.t_final(),
                n_cells: cfg.cells(),
                dt: cfg.discretization.dt,
                n_terms: cfg.terms(),
                metric: cfg.sweep.diffusion_metric.unwrap_or(DiffusionMetric::Projected),
                time_points: cfg.time_points(),
            };
            let points = run_sweep(&eps, jobs, |e| sweep.point(e))?;
            report_from_points(&points, cfg.band(), fit)
        }
        ScenarioKind::Transport => {
            if cfg.coupling.boundary.is_some() {
                return Err(NetlumpError::invalid(
                    "coupling.boundary",
                    "a fixed boundary matrix does not define an ε-family; give b or random",
                ));
            }
            let coupling = cfg.coupling.transport(1.0, cfg.seed())?;
            let sweep = TransportSweep {
                u0: cfg.initial_profiles(coupling.dim())?,
                coupling,
                t_final: cfg.t_final(),
                n_cells: cfg.cells(),
                metric: cfg.sweep.transport_metric.unwrap_or(TransportMetric::Projected),
                time_points: cfg.time_points(),
            };
            let points = run_sweep(&eps, jobs, |e| sweep.point(e))?;
            report_from_points(&points, cfg.band(), fit)
        }
        ScenarioKind::Mckendrick => {
            let points = run_sweep(&eps, jobs, |e| {
                let gap = aggregation_gap(&cfg.population(e)?, cfg.t_final())?;
                Ok(SweepPoint {
                    eps: e,
                    error_l1: gap,
                    error_sup: gap,
                })
            })?;
            let e: Vec<f64> = points.iter().map(|p| p.eps).collect();
            let g: Vec<f64> = points.iter().map(|p| p.error_l1).collect();
            estimate_order(&e, &g, &g, cfg.sweep.band.unwrap_or(POPULATION_BAND))
        }
        ScenarioKind::Check => Err(NetlumpError::invalid("kind", "check scenarios have no ε ladder")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionCheck {
    pub positivity: PositivityReport,
    pub markov: bool,
    pub lumped: SquareMatrix,
    /// Kolmogorov property of the transpose-form lumped matrix.
    pub kolmogorov: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexCheck {
    pub matrix: SquareMatrix,
    pub nonnegative: bool,
    pub column_stochastic: bool,
    pub irreducible: bool,
    pub perron: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CheckOutcome {
    pub diffusion: Option<DiffusionCheck>,
    pub vertex: Option<VertexCheck>,
}

/// Structural verdicts for whatever couplings the scenario defines.
pub fn run_check(cfg: &ScenarioConfig) -> Result<CheckOutcome> {
    let spec = &cfg.coupling;
    if !spec.has_diffusion() && !spec.has_transport() {
        return Err(NetlumpError::invalid("coupling", "nothing to check"));
    }
    let mut out = CheckOutcome::default();
    if spec.has_diffusion() {
        let c = spec.diffusion()?;
        out.diffusion = Some(DiffusionCheck {
            positivity: check_diffusion_positivity(&c),
            markov: check_markov_conditions(&c),
            lumped: c.aggregated_matrix(),
            kolmogorov: kolmogorov_check(&c.transpose_lumped_matrix()),
        });
    }
    if spec.has_transport() {
        let eps = cfg.eps();
        let t = spec.transport(eps, cfg.seed())?.boundary_matrix(eps);
        let m = t.dim();
        let tol = crate::tolerance::structural_tolerance();
        let nonnegative = (0..m).all(|i| (0..m).all(|j| t.get(i, j) >= -tol));
        let column_stochastic = t.inner().column_iter().all(|c| (c.sum() - 1.0).abs() <= 1e-10);
        let irreducible = is_strongly_connected(&t);
        let perron = if nonnegative && column_stochastic && irreducible {
            Some(perron_vector(&t)?.iter().copied().collect())
        } else {
            None
        };
        out.vertex = Some(VertexCheck {
            matrix: t,
            nonnegative,
            column_stochastic,
            irreducible,
            perron,
        });
    }
    Ok(out)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "yes"
    } else {
        "no"
    }
}

fn fmt_rows(m: &SquareMatrix) -> String {
    let rows: Vec<String> = m
        .to_rows()
        .iter()
        .map(|r| format!("[{}]", r.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("[{}]", rows.join(", "))
}

impl CheckOutcome {
    pub fn render(&self) -> String {
        let mut s = String::new();
        if let Some(d) = &self.diffusion {
            let _ = writeln!(s, "positivity: {}", verdict(d.positivity.positive));
            for v in &d.positivity.violations {
                let _ = writeln!(s, "  {}[{}][{}] = {} < 0", v.matrix, v.i, v.j, v.value);
            }
            let _ = writeln!(s, "markov: {}", verdict(d.markov));
            let _ = writeln!(s, "lumped matrix: {}", fmt_rows(&d.lumped));
            let _ = writeln!(s, "kolmogorov (transpose form): {}", verdict(d.kolmogorov));
        }
        if let Some(v) = &self.vertex {
            let _ = writeln!(s, "vertex matrix: {}", fmt_rows(&v.matrix));
            let _ = writeln!(s, "nonnegative: {}", verdict(v.nonnegative));
            let _ = writeln!(s, "column stochastic: {}", verdict(v.column_stochastic));
            let _ = writeln!(s, "irreducible: {}", verdict(v.irreducible));
            if let Some(n) = &v.perron {
                let _ = writeln!(s, "perron vector: {n:?}");
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_check_passes() {
        let out = run_check(&ScenarioConfig::builtin(ScenarioKind::Check)).unwrap();
        let d = out.diffusion.unwrap();
        assert!(d.positivity.positive && d.markov && d.kolmogorov);
        assert!(out.vertex.is_none());
    }

    #[test]
    fn stochastic_vertex_check() {
        let cfg = ScenarioConfig::from_toml_str(include_str!("../scenarios/ex52_stochastic.toml")).unwrap();
        let v = run_check(&cfg).unwrap().vertex.unwrap();
        assert!(v.column_stochastic && v.irreducible && v.nonnegative);
        let n = v.perron.unwrap();
        assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_kind_rejected() {
        let cfg = ScenarioConfig::builtin(ScenarioKind::Check);
        assert!(run_diffusion(&cfg).unwrap_err().is_validation());
        assert!(run_sweep_scenario(&cfg).unwrap_err().is_validation());
    }

    #[test]
    fn single_point_sweep_is_degenerate() {
        let mut cfg = ScenarioConfig::builtin(ScenarioKind::Transport);
        cfg.eps_list = Some(vec![0.1]);
        cfg.discretization.cells = Some(64);
        let r = run_sweep_scenario(&cfg).unwrap();
        assert!(r.fitted_order.is_none() && !r.pass);
    }
}
