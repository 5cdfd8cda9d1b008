//! Aggregated ODE limits, correctors, initial layers and the assembled
//! approximation `v̄(t) + ε·w1(t) + w̃0(t/ε)`.

mod layers;
mod order;
pub mod sweep;

pub use layers::{
    filon_cosine_integral, initial_layer_diffusion, initial_layer_transport, FourierLayer, DEFAULT_FOURIER_TERMS,
    ZERO_MEAN_TOL,
};
pub use order::{estimate_order, pairwise_orders, ConvergenceReport, DEFAULT_BAND};

use crate::coupling::{DiffusionCoupling, TransportCoupling};
use crate::diffusion::DiffusionProblem;
use crate::error::{NetlumpError, Result};
use crate::grid::{norm_l1, norm_sup, remove_mean, AggregatedState, GridFunction};
use crate::linalg::{matrix_exponential_apply, SquareMatrix};
use crate::transport::{periods, TransportProblem};

fn check_len(v: &AggregatedState, m: usize) -> Result<()> {
    if v.len() != m {
        return Err(NetlumpError::mismatch("aggregated state", m, v.len()));
    }
    Ok(())
}

/// `v̄(t) = e^{t𝕂} v0`.
pub fn aggregated_solution_diffusion(c: &DiffusionCoupling, v0: &AggregatedState, t: f64) -> Result<AggregatedState> {
    check_len(v0, c.dim())?;
    matrix_exponential_apply(&c.aggregated_matrix(), t, &v0.0).map(AggregatedState)
}

/// `v̄(t) = e^{tB} v0`.
pub fn aggregated_solution_transport(b: &SquareMatrix, v0: &AggregatedState, t: f64) -> Result<AggregatedState> {
    check_len(v0, b.dim())?;
    matrix_exponential_apply(b, t, &v0.0).map(AggregatedState)
}

/// `w̄1 = ½x²𝕂v̄ + xK⁰₊v̄ − (⅓K⁰₊ + ⅙K¹₊)v̄`: zero edge means,
/// `∂ₓw̄1(0) = K⁰₊v̄`, `∂ₓw̄1(1) = K¹₊v̄`.
pub fn corrector_diffusion(c: &DiffusionCoupling, vbar: &AggregatedState, n_cells: usize) -> Result<GridFunction> {
    check_len(vbar, c.dim())?;
    let aux = c.auxiliary_sums();
    let kv = c.aggregated_matrix().apply(&vbar.0);
    let p0 = aux.plus0.apply(&vbar.0);
    let p1 = aux.plus1.apply(&vbar.0);
    let d = -(&p0 / 3.0 + &p1 / 6.0);
    GridFunction::from_fn(c.dim(), n_cells, |j, x| 0.5 * x * x * kv[j] + x * p0[j] + d[j])
}

/// `w1 = (Bv̄)(½ − x)`.
pub fn corrector_transport(b: &SquareMatrix, vbar: &AggregatedState, n_cells: usize) -> Result<GridFunction> {
    check_len(vbar, b.dim())?;
    let bv = b.apply(&vbar.0);
    GridFunction::from_fn(b.dim(), n_cells, |j, x| bv[j] * (0.5 - x))
}

/// The three terms of the approximation at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionComponents {
    pub vbar: AggregatedState,
    /// The corrector `w1(t)`, not yet multiplied by ε.
    pub w1: GridFunction,
    pub layer: GridFunction,
}

/// `(v̄, w1, w̃0)` for one problem at fixed ε.
#[derive(Debug, Clone)]
pub enum LayerExpansion {
    Diffusion {
        coupling: DiffusionCoupling,
        eps: f64,
        n_cells: usize,
        v0: AggregatedState,
        layer: FourierLayer,
    },
    Transport {
        b: SquareMatrix,
        eps: f64,
        v0: AggregatedState,
        w0: GridFunction,
    },
}

impl LayerExpansion {
    pub fn diffusion(c: &DiffusionCoupling, eps: f64, u0: &GridFunction, n_terms: usize) -> Result<Self> {
        let (v0, w0) = remove_mean(u0)?;
        Ok(LayerExpansion::Diffusion {
            coupling: c.clone(),
            eps,
            n_cells: u0.n_cells(),
            v0,
            layer: FourierLayer::new(&w0, n_terms)?,
        })
    }

    pub fn transport(c: &TransportCoupling, eps: f64, u0: &GridFunction) -> Result<Self> {
        let (v0, w0) = remove_mean(u0)?;
        Ok(LayerExpansion::Transport {
            b: c.b.clone(),
            eps,
            v0,
            w0,
        })
    }

    pub fn eps(&self) -> f64 {
        match self {
            LayerExpansion::Diffusion { eps, .. } | LayerExpansion::Transport { eps, .. } => *eps,
        }
    }

    pub fn vbar(&self, t: f64) -> Result<AggregatedState> {
        match self {
            LayerExpansion::Diffusion { coupling, v0, .. } => aggregated_solution_diffusion(coupling, v0, t),
            LayerExpansion::Transport { b, v0, .. } => aggregated_solution_transport(b, v0, t),
        }
    }

    pub fn w1(&self, t: f64) -> Result<GridFunction> {
        let vbar = self.vbar(t)?;
        match self {
            LayerExpansion::Diffusion { coupling, n_cells, .. } => corrector_diffusion(coupling, &vbar, *n_cells),
            LayerExpansion::Transport { b, w0, .. } => corrector_transport(b, &vbar, w0.n_cells()),
        }
    }

    /// `w̃0(t/ε)`.
    pub fn layer(&self, t: f64) -> Result<GridFunction> {
        let tau = periods(t, self.eps());
        match self {
            LayerExpansion::Diffusion { layer, .. } => layer.evaluate(tau),
            LayerExpansion::Transport { w0, .. } => initial_layer_transport(w0, tau),
        }
    }

    pub fn components(&self, t: f64) -> Result<ExpansionComponents> {
        Ok(ExpansionComponents {
            vbar: self.vbar(t)?,
            w1: self.w1(t)?,
            layer: self.layer(t)?,
        })
    }

    /// `v̄(t)·𝟙 + ε·w1(t) + w̃0(t/ε)`.
    pub fn assemble(&self, t: f64) -> Result<GridFunction> {
        let c = self.components(t)?;
        c.layer.axpby(1.0, &c.w1, self.eps())?.add_edge_constants(c.vbar.as_slice())
    }
}

/// A problem whose expansion can be assembled.
pub enum ExpansionProblem<'a> {
    Diffusion(&'a DiffusionProblem),
    Transport(&'a TransportProblem),
}

pub fn assemble_expansion(problem: ExpansionProblem<'_>, t: f64, n_terms: usize) -> Result<GridFunction> {
    let exp = match problem {
        ExpansionProblem::Diffusion(p) => {
            p.validate()?;
            LayerExpansion::diffusion(&p.coupling, p.eps, &p.u0, n_terms)?
        }
        ExpansionProblem::Transport(p) => {
            p.validate()?;
            LayerExpansion::transport(&p.coupling, p.eps, &p.u0)?
        }
    };
    exp.assemble(t)
}

/// `(‖u − e‖_L1, ‖u − e‖_sup)`.
pub fn error_norms(u_eps: &GridFunction, expansion: &GridFunction) -> Result<(f64, f64)> {
    let d = u_eps.axpby(1.0, expansion, -1.0)?;
    Ok((norm_l1(&d), norm_sup(&d)))
}

/// Comparison times: `count + 1` uniform points on `[0, t_final]` plus
/// `t0 = ε·ln(1/ε)` when it falls inside, sorted.
pub fn comparison_times(t_final: f64, eps: f64, count: usize) -> Vec<f64> {
    let mut ts: Vec<f64> = (0..=count).map(|k| t_final * k as f64 / count as f64).collect();
    let t0 = eps * (1.0 / eps).ln();
    if t0 > 0.0 && t0 < t_final {
        ts.push(t0);
    }
    ts.sort_by(|a, b| a.total_cmp(b));
    ts.dedup();
    ts
}
