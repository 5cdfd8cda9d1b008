//! Small dense matrices: the matrix exponential (scaling and squaring with a
//! degree-13 Padé approximant) and integer powers by repeated squaring.

use nalgebra::{DMatrix, DVector};

use crate::error::{NetlumpError, Result};

/// A real `m × m` matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix(DMatrix<f64>);

impl SquareMatrix {
    pub fn new(inner: DMatrix<f64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(NetlumpError::mismatch("square matrix", inner.nrows(), inner.ncols()));
        }
        if inner.nrows() == 0 {
            return Err(NetlumpError::invalid("matrix", "dimension must be positive"));
        }
        if inner.iter().any(|v| !v.is_finite()) {
            return Err(NetlumpError::NonFinite("matrix".into()));
        }
        Ok(SquareMatrix(inner))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        for r in rows {
            if r.len() != m {
                return Err(NetlumpError::mismatch("matrix row", m, r.len()));
            }
        }
        SquareMatrix::new(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
    }

    pub fn from_row_slice(m: usize, data: &[f64]) -> Result<Self> {
        if data.len() != m * m {
            return Err(NetlumpError::mismatch("matrix entries", m * m, data.len()));
        }
        SquareMatrix::new(DMatrix::from_row_slice(m, m, data))
    }

    pub fn zeros(m: usize) -> Self {
        SquareMatrix(DMatrix::zeros(m, m))
    }

    pub fn identity(m: usize) -> Self {
        SquareMatrix(DMatrix::identity(m, m))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        SquareMatrix(DMatrix::from_diagonal(&DVector::from_row_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn inner(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn transpose(&self) -> SquareMatrix {
        SquareMatrix(self.0.transpose())
    }

    pub fn scale(&self, a: f64) -> SquareMatrix {
        SquareMatrix(&self.0 * a)
    }

    /// Maximum absolute column sum (induced ℓ¹ norm), the norm of the L¹ spaces here.
    pub fn norm1(&self) -> f64 {
        self.0
            .column_iter()
            .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.0 * v
    }

    pub fn add(&self, other: &SquareMatrix) -> SquareMatrix {
        SquareMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &SquareMatrix) -> SquareMatrix {
        SquareMatrix(&self.0 - &other.0)
    }

    pub fn mul(&self, other: &SquareMatrix) -> SquareMatrix {
        SquareMatrix(&self.0 * &other.0)
    }

    /// Applies a simultaneous permutation `i -> perm[i]` to rows and columns.
    pub fn permuted(&self, perm: &[usize]) -> SquareMatrix {
        let m = self.dim();
        let mut out = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                out[(perm[i], perm[j])] = self.0[(i, j)];
            }
        }
        SquareMatrix(out)
    }
}

// Higham (2005) coefficients of the [13/13] Padé approximant to exp.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371_920_351_148_152;

/// `e^{A}` by scaling and squaring.
pub fn expm(a: &SquareMatrix) -> Result<SquareMatrix> {
    let m = a.dim();
    let norm = a.norm1();
    if !norm.is_finite() {
        return Err(NetlumpError::NonFinite("matrix exponential argument".into()));
    }
    if norm == 0.0 {
        return Ok(SquareMatrix::identity(m));
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = &a.0 * 2f64.powi(-s);
    let ident = DMatrix::<f64>::identity(m, m);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;

    let u_inner = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let u_inner = &a6 * u_inner + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1];
    let u = &a * u_inner;
    let v_inner = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = &a6 * v_inner + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| NetlumpError::NonFinite("Padé denominator is singular".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    SquareMatrix::new(r)
}

/// `e^{tK} v0`.
pub fn matrix_exponential_apply(k: &SquareMatrix, t: f64, v0: &DVector<f64>) -> Result<DVector<f64>> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(NetlumpError::invalid("t", format!("must be finite and >= 0, got {t}")));
    }
    if v0.len() != k.dim() {
        return Err(NetlumpError::mismatch("initial vector", k.dim(), v0.len()));
    }
    if v0.iter().any(|x| !x.is_finite()) {
        return Err(NetlumpError::NonFinite("initial vector".into()));
    }
    Ok(expm(&k.scale(t))?.apply(v0))
}

/// `T^n` by binary powering.
pub fn matrix_power(t: &SquareMatrix, mut n: u64) -> SquareMatrix {
    let m = t.dim();
    let mut result = DMatrix::<f64>::identity(m, m);
    let mut base = t.0.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    SquareMatrix(result)
}

/// `T^n v`; `n = 0` returns `v` unchanged.
pub fn matrix_power_apply(t: &SquareMatrix, n: u64, v: &DVector<f64>) -> DVector<f64> {
    if n == 0 {
        return v.clone();
    }
    matrix_power(t, n).apply(v)
}
