//! Boundary-coupling matrices and their structural checks.
//!
//! A diffusion coupling is the quadruple `(K00, K01, K10, K11)` in
//!
//! ```text
//! ∂ₓu(0) = ε K00 u(0) + ε K01 u(1)
//! ∂ₓu(1) = ε K10 u(0) + ε K11 u(1)
//! ```
//!
//! and a transport coupling is the perturbation `B` of `u(0) = (I + εB) u(1)`.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::{DMatrix, DVector};

use crate::error::{NetlumpError, Result};
use crate::linalg::SquareMatrix;
use crate::tolerance::structural_tolerance;

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionCoupling {
    pub k00: SquareMatrix,
    pub k01: SquareMatrix,
    pub k10: SquareMatrix,
    pub k11: SquareMatrix,
}

/// `K⁰₊ = K01 + K00`, `K¹₊ = K10 + K11`, `K⁰₋ = K10 − K00`, `K¹₋ = K11 − K01`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliarySums {
    pub plus0: SquareMatrix,
    pub plus1: SquareMatrix,
    pub minus0: SquareMatrix,
    pub minus1: SquareMatrix,
}

impl DiffusionCoupling {
    pub fn new(k00: SquareMatrix, k01: SquareMatrix, k10: SquareMatrix, k11: SquareMatrix) -> Result<Self> {
        let m = k00.dim();
        for (name, k) in [("K01", &k01), ("K10", &k10), ("K11", &k11)] {
            if k.dim() != m {
                return Err(NetlumpError::mismatch(format!("coupling matrix {name}"), m, k.dim()));
            }
        }
        Ok(DiffusionCoupling { k00, k01, k10, k11 })
    }

    pub fn zeros(m: usize) -> Self {
        let z = SquareMatrix::zeros(m);
        DiffusionCoupling {
            k00: z.clone(),
            k01: z.clone(),
            k10: z.clone(),
            k11: z,
        }
    }

    pub fn dim(&self) -> usize {
        self.k00.dim()
    }

    /// The generator of the limit ODE: `K10 − K00 + K11 − K01`.
    pub fn aggregated_matrix(&self) -> SquareMatrix {
        self.k10.sub(&self.k00).add(&self.k11).sub(&self.k01)
    }

    pub fn auxiliary_sums(&self) -> AuxiliarySums {
        AuxiliarySums {
            plus0: self.k01.add(&self.k00),
            plus1: self.k10.add(&self.k11),
            minus0: self.k10.sub(&self.k00),
            minus1: self.k11.sub(&self.k01),
        }
    }

    /// Coupling of the adjoint problem: `(K00ᵀ, −K10ᵀ, −K01ᵀ, K11ᵀ)`.
    ///
    /// For couplings built from exchange rates this is the density (L¹) form;
    /// its aggregated matrix is the transpose of ours.
    pub fn adjoint(&self) -> DiffusionCoupling {
        DiffusionCoupling {
            k00: self.k00.transpose(),
            k01: self.k10.transpose().scale(-1.0),
            k10: self.k01.transpose().scale(-1.0),
            k11: self.k11.transpose(),
        }
    }

    /// Lumped matrix of the adjoint problem, `Kᵀ`.
    pub fn transpose_lumped_matrix(&self) -> SquareMatrix {
        self.aggregated_matrix().transpose()
    }

    pub fn permuted(&self, perm: &[usize]) -> DiffusionCoupling {
        DiffusionCoupling {
            k00: self.k00.permuted(perm),
            k01: self.k01.permuted(perm),
            k10: self.k10.permuted(perm),
            k11: self.k11.permuted(perm),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportCoupling {
    pub b: SquareMatrix,
}

impl TransportCoupling {
    pub fn new(b: SquareMatrix) -> Self {
        TransportCoupling { b }
    }

    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    /// `I + εB`.
    pub fn boundary_matrix(&self, eps: f64) -> SquareMatrix {
        SquareMatrix::identity(self.dim()).add(&self.b.scale(eps))
    }

    /// The coupling whose boundary matrix at `eps` equals `t`, i.e. `B = (T − I)/ε`.
    pub fn from_boundary_matrix(t: &SquareMatrix, eps: f64) -> Self {
        TransportCoupling {
            b: t.sub(&SquareMatrix::identity(t.dim())).scale(1.0 / eps),
        }
    }
}

/// Which endpoint of the receiving edge a flux enters through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Endpoint {
    Tail,
    Head,
}

impl Endpoint {
    pub fn from_index(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Endpoint::Tail),
            1 => Ok(Endpoint::Head),
            _ => Err(NetlumpError::invalid("endpoint", format!("must be 0 or 1, got {v}"))),
        }
    }
}

/// Fick-law exchange rates at the vertices of a network of edges.
///
/// `l[i]`/`r[i]` are the exit rates of edge `i` through its left/right
/// endpoint; `l_pairs[(i, j)] = (v, rate)` is the rate attached to edge `j`'s
/// endpoint `v` in the left condition of edge `i` (likewise `r_pairs`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeExchangeRates {
    pub l: Vec<f64>,
    pub r: Vec<f64>,
    pub l_pairs: BTreeMap<(usize, usize), (Endpoint, f64)>,
    pub r_pairs: BTreeMap<(usize, usize), (Endpoint, f64)>,
}

impl EdgeExchangeRates {
    pub fn zeros(m: usize) -> Self {
        EdgeExchangeRates {
            l: vec![0.0; m],
            r: vec![0.0; m],
            ..Default::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.l.len()
    }

    /// Sets every exit rate to the sum of its pair rates.
    pub fn balance_exit_rates(&mut self) {
        let m = self.dim();
        self.l = vec![0.0; m];
        self.r = vec![0.0; m];
        for (&(i, _), &(_, rate)) in &self.l_pairs {
            self.l[i] += rate;
        }
        for (&(i, _), &(_, rate)) in &self.r_pairs {
            self.r[i] += rate;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.dim();
        if m == 0 {
            return Err(NetlumpError::invalid("rates", "edge count must be positive"));
        }
        if self.r.len() != m {
            return Err(NetlumpError::mismatch("right exit rates", m, self.r.len()));
        }
        let all = self.l.iter().chain(&self.r).copied();
        let pairs = self.l_pairs.values().chain(self.r_pairs.values()).map(|p| p.1);
        if all.chain(pairs).any(|x| !x.is_finite()) {
            return Err(NetlumpError::NonFinite("exchange rates".into()));
        }
        for (name, map) in [("l_pairs", &self.l_pairs), ("r_pairs", &self.r_pairs)] {
            for &(i, j) in map.keys() {
                if i >= m || j >= m {
                    return Err(NetlumpError::invalid(name, format!("pair ({i}, {j}) out of range for m = {m}")));
                }
                if i == j {
                    return Err(NetlumpError::invalid(name, format!("self pair ({i}, {i}) not allowed")));
                }
            }
        }
        for (&(i, j), &(_, lr)) in &self.l_pairs {
            if let Some(&(_, rr)) = self.r_pairs.get(&(i, j)) {
                if lr != 0.0 && rr != 0.0 {
                    return Err(NetlumpError::invalid(
                        "rates",
                        format!("both l and r rates nonzero for pair ({i}, {j})"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Builds `(K00, K01, K10, K11)` from Fick-law rates.
pub fn coupling_from_rates(rates: &EdgeExchangeRates) -> Result<DiffusionCoupling> {
    rates.validate()?;
    let m = rates.dim();
    let mut k00 = DMatrix::zeros(m, m);
    let mut k01 = DMatrix::zeros(m, m);
    let mut k10 = DMatrix::zeros(m, m);
    let mut k11 = DMatrix::zeros(m, m);
    for i in 0..m {
        k00[(i, i)] = rates.l[i];
        k11[(i, i)] = -rates.r[i];
    }
    for (&(i, j), &(v, rate)) in &rates.l_pairs {
        match v {
            Endpoint::Tail => k00[(i, j)] = -rate,
            Endpoint::Head => k01[(i, j)] = -rate,
        }
    }
    for (&(i, j), &(v, rate)) in &rates.r_pairs {
        match v {
            Endpoint::Tail => k10[(i, j)] = rate,
            Endpoint::Head => k11[(i, j)] = rate,
        }
    }
    DiffusionCoupling::new(
        SquareMatrix::new(k00)?,
        SquareMatrix::new(k01)?,
        SquareMatrix::new(k10)?,
        SquareMatrix::new(k11)?,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignViolation {
    pub matrix: &'static str,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    pub positive: bool,
    pub violations: Vec<SignViolation>,
}

/// Sign pattern for a positive semigroup: `−K00`, `K11` nonnegative off the
/// diagonal; `−K01`, `K10` nonnegative everywhere.
pub fn check_diffusion_positivity(c: &DiffusionCoupling) -> PositivityReport {
    let tol = structural_tolerance();
    let mut violations = Vec::new();
    let checks: [(&'static str, &SquareMatrix, f64, bool); 4] = [
        ("-K00", &c.k00, -1.0, true),
        ("K11", &c.k11, 1.0, true),
        ("-K01", &c.k01, -1.0, false),
        ("K10", &c.k10, 1.0, false),
    ];
    let m = c.dim();
    for (name, k, sign, off_diag_only) in checks {
        for i in 0..m {
            for j in 0..m {
                if off_diag_only && i == j {
                    continue;
                }
                let value = sign * k.get(i, j);
                if value < -tol {
                    violations.push(SignViolation { matrix: name, i, j, value });
                }
            }
        }
    }
    PositivityReport {
        positive: violations.is_empty(),
        violations,
    }
}

/// Row-sum conditions `Σ_j (k00_ij + k01_ij) = 0` and `Σ_j (k10_ij + k11_ij) = 0`.
///
/// These say constants satisfy the boundary conditions; equivalently the
/// adjoint (density) problem conserves total mass. For rate-built couplings
/// they reduce to `l_i = Σ_j l_ij` and `r_i = Σ_j r_ij`.
pub fn check_markov_conditions(c: &DiffusionCoupling) -> bool {
    let tol = structural_tolerance();
    let aux = c.auxiliary_sums();
    let zero_rows = |k: &SquareMatrix| k.inner().row_iter().all(|r| r.sum().abs() <= tol);
    zero_rows(&aux.plus0) && zero_rows(&aux.plus1)
}

/// Nonnegative off-diagonal entries and zero column sums.
pub fn kolmogorov_check(k: &SquareMatrix) -> bool {
    let tol = structural_tolerance();
    let m = k.dim();
    let off_diag_ok = (0..m).all(|i| (0..m).all(|j| i == j || k.get(i, j) >= -tol));
    let cols_ok = k.inner().column_iter().all(|c| c.sum().abs() <= tol);
    off_diag_ok && cols_ok
}

fn reaches_all(adj: &[Vec<usize>]) -> bool {
    let m = adj.len();
    let mut seen = vec![false; m];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Strong connectivity of the digraph with an arc `j → i` for each `T_ij ≠ 0`.
pub fn is_strongly_connected(t: &SquareMatrix) -> bool {
    let m = t.dim();
    let mut fwd = vec![Vec::new(); m];
    let mut rev = vec![Vec::new(); m];
    for i in 0..m {
        for j in 0..m {
            if i != j && t.get(i, j) != 0.0 {
                fwd[j].push(i);
                rev[i].push(j);
            }
        }
    }
    reaches_all(&fwd) && reaches_all(&rev)
}

const PERRON_MAX_ITER: usize = 100_000;

/// Normalised Perron vector `N` (`TN = N`, `Σ N = 1`) of an irreducible
/// column-stochastic matrix.
pub fn perron_vector(t: &SquareMatrix) -> Result<DVector<f64>> {
    let m = t.dim();
    if let Some(v) = t.inner().iter().find(|v| **v < 0.0) {
        return Err(NetlumpError::NotStochastic(format!("negative entry {v}")));
    }
    for (j, col) in t.inner().column_iter().enumerate() {
        let s = col.sum();
        if (s - 1.0).abs() > 1e-10 {
            return Err(NetlumpError::NotStochastic(format!("column {j} sums to {s}")));
        }
    }
    if !is_strongly_connected(t) {
        return Err(NetlumpError::Reducible);
    }
    // (I + T)/2 has the same Perron vector and is aperiodic.
    let lazy = (t.inner() + DMatrix::identity(m, m)) * 0.5;
    let mut n = DVector::from_element(m, 1.0 / m as f64);
    for _ in 0..PERRON_MAX_ITER {
        let next = &lazy * &n;
        let next = &next / next.sum();
        n = next;
        let residual = (t.inner() * &n - &n).amax();
        if residual <= 1e-12 {
            return Ok(n);
        }
    }
    Err(NetlumpError::NoConvergence {
        what: "Perron power iteration".into(),
        iterations: PERRON_MAX_ITER,
    })
}
