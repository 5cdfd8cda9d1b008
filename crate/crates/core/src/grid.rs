//! Vector-valued functions on the unit interval, sampled on a uniform grid,
//! together with the quadratures and norms used everywhere else.

use std::ops::{Add, Mul, Sub};

use nalgebra::DVector;

use crate::error::{NetlumpError, Result};

/// `m` edge profiles sampled at `x_i = i / n_cells`, `i = 0..=n_cells`.
///
/// Samples are stored edge-major: row `j` is `values[j * (n_cells + 1)..]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    m: usize,
    n_cells: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(m: usize, n_cells: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(NetlumpError::invalid("m", "edge count must be positive"));
        }
        if n_cells == 0 {
            return Err(NetlumpError::invalid("n_cells", "must be positive"));
        }
        let expected = m * (n_cells + 1);
        if values.len() != expected {
            return Err(NetlumpError::mismatch("grid samples", expected, values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(NetlumpError::NonFinite("grid samples".into()));
        }
        Ok(GridFunction { m, n_cells, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(NetlumpError::invalid("m", "edge count must be positive"));
        }
        let len = rows[0].len();
        if len < 2 {
            return Err(NetlumpError::invalid("n_cells", "must be positive"));
        }
        for r in rows {
            if r.len() != len {
                return Err(NetlumpError::mismatch("row length", len, r.len()));
            }
        }
        GridFunction::new(m, len - 1, rows.concat())
    }

    pub fn zeros(m: usize, n_cells: usize) -> Self {
        assert!(m > 0 && n_cells > 0);
        GridFunction {
            m,
            n_cells,
            values: vec![0.0; m * (n_cells + 1)],
        }
    }

    /// Samples `f(edge, x)` on the grid.
    pub fn from_fn(m: usize, n_cells: usize, f: impl Fn(usize, f64) -> f64) -> Result<Self> {
        let h = 1.0 / n_cells as f64;
        let mut values = Vec::with_capacity(m * (n_cells + 1));
        for j in 0..m {
            for i in 0..=n_cells {
                values.push(f(j, i as f64 * h));
            }
        }
        GridFunction::new(m, n_cells, values)
    }

    /// Edge-wise constant function `x -> v`.
    pub fn constant(v: &[f64], n_cells: usize) -> Self {
        assert!(!v.is_empty() && n_cells > 0);
        let values = v
            .iter()
            .flat_map(|&c| std::iter::repeat(c).take(n_cells + 1))
            .collect();
        GridFunction {
            m: v.len(),
            n_cells,
            values,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.n_cells as f64
    }

    pub fn row(&self, edge: usize) -> &[f64] {
        let w = self.n_cells + 1;
        &self.values[edge * w..(edge + 1) * w]
    }

    pub fn row_mut(&mut self, edge: usize) -> &mut [f64] {
        let w = self.n_cells + 1;
        &mut self.values[edge * w..(edge + 1) * w]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.n_cells + 1)
    }

    /// Values at `x = 0` for every edge.
    pub fn left_values(&self) -> DVector<f64> {
        DVector::from_iterator(self.m, self.rows().map(|r| r[0]))
    }

    /// Values at `x = 1` for every edge.
    pub fn right_values(&self) -> DVector<f64> {
        DVector::from_iterator(self.m, self.rows().map(|r| r[self.n_cells]))
    }

    /// Piecewise-linear interpolation of one edge at `x` (clamped to [0, 1]).
    pub fn interpolate(&self, edge: usize, x: f64) -> f64 {
        interpolate_row(self.row(edge), x)
    }

    pub fn same_shape(&self, other: &GridFunction) -> Result<()> {
        if self.m != other.m {
            return Err(NetlumpError::mismatch("edge count", self.m, other.m));
        }
        if self.n_cells != other.n_cells {
            return Err(NetlumpError::mismatch("n_cells", self.n_cells, other.n_cells));
        }
        Ok(())
    }

    pub fn scaled(&self, a: f64) -> GridFunction {
        self.map(|v| a * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            m: self.m,
            n_cells: self.n_cells,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `a * self + b * other`.
    pub fn axpby(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        self.same_shape(other)?;
        Ok(GridFunction {
            m: self.m,
            n_cells: self.n_cells,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    /// Adds `v_j` to every sample of edge `j`.
    pub fn add_edge_constants(&self, v: &[f64]) -> Result<GridFunction> {
        if v.len() != self.m {
            return Err(NetlumpError::mismatch("edge constants", self.m, v.len()));
        }
        let mut out = self.clone();
        for (j, c) in v.iter().enumerate() {
            out.row_mut(j).iter_mut().for_each(|s| *s += c);
        }
        Ok(out)
    }
}

impl Add for &GridFunction {
    type Output = GridFunction;
    fn add(self, rhs: &GridFunction) -> GridFunction {
        self.axpby(1.0, rhs, 1.0).expect("grid shapes differ")
    }
}

impl Sub for &GridFunction {
    type Output = GridFunction;
    fn sub(self, rhs: &GridFunction) -> GridFunction {
        self.axpby(1.0, rhs, -1.0).expect("grid shapes differ")
    }
}

impl Mul<f64> for &GridFunction {
    type Output = GridFunction;
    fn mul(self, rhs: f64) -> GridFunction {
        self.scaled(rhs)
    }
}

pub(crate) fn interpolate_row(row: &[f64], x: f64) -> f64 {
    let n = row.len() - 1;
    let s = x.clamp(0.0, 1.0) * n as f64;
    let i = s.floor() as usize;
    if i >= n {
        return row[n];
    }
    let frac = s - i as f64;
    if frac == 0.0 {
        return row[i];
    }
    row[i] + frac * (row[i + 1] - row[i])
}

/// `∫_0^x` of the piecewise-linear interpolant of `row`, for `x` in `[0, 1]`.
pub(crate) fn interpolant_antiderivative(row: &[f64], x: f64) -> f64 {
    let n = row.len() - 1;
    let h = 1.0 / n as f64;
    let s = x.clamp(0.0, 1.0) * n as f64;
    let i = (s.floor() as usize).min(n - 1);
    let full: f64 = row[..=i].windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum();
    let frac = s - i as f64;
    let end = row[i] + frac * (row[i + 1] - row[i]);
    full + 0.5 * frac * h * (row[i] + end)
}

/// Edge totals `v = (∫u_1, …, ∫u_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedState(pub DVector<f64>);

impl AggregatedState {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() {
            return Err(NetlumpError::invalid("aggregated state", "must be non-empty"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(NetlumpError::NonFinite("aggregated state".into()));
        }
        Ok(AggregatedState(DVector::from_vec(v)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn total(&self) -> f64 {
        self.0.sum()
    }

    /// The edge-wise constant function carrying these totals.
    pub fn to_grid(&self, n_cells: usize) -> GridFunction {
        GridFunction::constant(self.as_slice(), n_cells)
    }
}

impl From<DVector<f64>> for AggregatedState {
    fn from(v: DVector<f64>) -> Self {
        AggregatedState(v)
    }
}

fn simpson_row(row: &[f64], n_cells: usize) -> f64 {
    let h = 1.0 / n_cells as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, &v) in row.iter().enumerate().take(n_cells).skip(1) {
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (row[0] + 4.0 * odd + 2.0 * even + row[n_cells])
}

fn trapezoid_row(row: &[f64], n_cells: usize) -> f64 {
    let h = 1.0 / n_cells as f64;
    let inner: f64 = row[1..n_cells].iter().sum();
    h * (0.5 * (row[0] + row[n_cells]) + inner)
}

/// Composite Simpson approximation of `∫₀¹ u_edge(x) dx`.
pub fn integrate_edge(u: &GridFunction, edge: usize) -> Result<f64> {
    if edge >= u.m {
        return Err(NetlumpError::invalid("edge", format!("{edge} >= m = {}", u.m)));
    }
    if u.n_cells < 2 || u.n_cells % 2 != 0 {
        return Err(NetlumpError::BadCellCount(u.n_cells));
    }
    Ok(simpson_row(u.row(edge), u.n_cells))
}

/// Projection onto the edge-wise constants: the vector of edge integrals.
pub fn project_average(u: &GridFunction) -> Result<AggregatedState> {
    let v = (0..u.m)
        .map(|j| integrate_edge(u, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(AggregatedState(DVector::from_vec(v)))
}

/// `Σ_j ∫|u_j|`, trapezoid rule on `|samples|`.
pub fn norm_l1(u: &GridFunction) -> f64 {
    u.rows()
        .map(|r| {
            let abs: Vec<f64> = r.iter().map(|v| v.abs()).collect();
            trapezoid_row(&abs, u.n_cells)
        })
        .sum()
}

/// Largest absolute sample.
pub fn norm_sup(u: &GridFunction) -> f64 {
    u.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Subtracts each edge's mean, leaving the zero-mean (kinetic) part.
pub fn remove_mean(u: &GridFunction) -> Result<(AggregatedState, GridFunction)> {
    let v = project_average(u)?;
    let neg: Vec<f64> = v.as_slice().iter().map(|x| -x).collect();
    let w = u.add_edge_constants(&neg)?;
    Ok((v, w))
}
