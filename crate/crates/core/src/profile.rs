//! Named closed-form profiles, used for initial data on edges and for
//! age-dependent vital rates.

use serde::{Deserialize, Serialize};

use crate::error::{NetlumpError, Result};
use crate::grid::GridFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `mean + amplitude·cos(mode·π·x)`; satisfies homogeneous Neumann conditions.
    Cosine {
        #[serde(default)]
        mean: f64,
        amplitude: f64,
        #[serde(default = "one")]
        mode: u32,
    },
    /// `mean + amplitude·sin(2π·mode·x)`; 1-periodic.
    Sine {
        #[serde(default)]
        mean: f64,
        amplitude: f64,
        #[serde(default = "one")]
        mode: u32,
    },
    /// `Σ coeffs[k]·x^k`.
    Polynomial { coeffs: Vec<f64> },
    /// `start + slope·x`.
    Ramp { start: f64, slope: f64 },
    /// `base + height·16x²(1−x)²`; flat at both ends.
    Bump {
        #[serde(default)]
        base: f64,
        height: f64,
    },
    /// `base + height·exp(−(x−center)²/(2·width²))`.
    Gaussian {
        #[serde(default)]
        base: f64,
        height: f64,
        center: f64,
        width: f64,
    },
    /// Piecewise-linear through `(x, y)` points, constant beyond the ends.
    Tabulated { points: Vec<[f64; 2]> },
}

fn one() -> u32 {
    1
}

impl Profile {
    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, xs: &[f64]| -> Result<()> {
            if xs.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(NetlumpError::NonFinite(format!("{name} profile parameters")))
            }
        };
        match self {
            Profile::Constant { value } => finite("constant", &[*value]),
            Profile::Cosine { mean, amplitude, .. } => finite("cosine", &[*mean, *amplitude]),
            Profile::Sine { mean, amplitude, .. } => finite("sine", &[*mean, *amplitude]),
            Profile::Polynomial { coeffs } => {
                if coeffs.is_empty() {
                    return Err(NetlumpError::invalid("coeffs", "polynomial needs at least one coefficient"));
                }
                finite("polynomial", coeffs)
            }
            Profile::Ramp { start, slope } => finite("ramp", &[*start, *slope]),
            Profile::Bump { base, height } => finite("bump", &[*base, *height]),
            Profile::Gaussian {
                base,
                height,
                center,
                width,
            } => {
                finite("gaussian", &[*base, *height, *center, *width])?;
                if *width <= 0.0 {
                    return Err(NetlumpError::invalid("width", "must be positive"));
                }
                Ok(())
            }
            Profile::Tabulated { points } => {
                if points.is_empty() {
                    return Err(NetlumpError::invalid("points", "tabulated profile needs at least one point"));
                }
                finite("tabulated", &points.iter().flatten().copied().collect::<Vec<_>>())?;
                if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err(NetlumpError::invalid("points", "abscissae must be strictly increasing"));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            Profile::Constant { value } => *value,
            Profile::Cosine { mean, amplitude, mode } => mean + amplitude * (*mode as f64 * PI * x).cos(),
            Profile::Sine { mean, amplitude, mode } => mean + amplitude * (2.0 * PI * *mode as f64 * x).sin(),
            Profile::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            Profile::Ramp { start, slope } => start + slope * x,
            Profile::Bump { base, height } => base + height * 16.0 * x * x * (1.0 - x) * (1.0 - x),
            Profile::Gaussian {
                base,
                height,
                center,
                width,
            } => {
                let z = (x - center) / width;
                base + height * (-0.5 * z * z).exp()
            }
            Profile::Tabulated { points } => tabulated_eval(points, x),
        }
    }

    /// `∫_a^b f(x) dx`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            Profile::Constant { value } => value * (b - a),
            Profile::Cosine { mean, amplitude, mode } => {
                let k = *mode as f64 * PI;
                let osc = if *mode == 0 {
                    b - a
                } else {
                    ((k * b).sin() - (k * a).sin()) / k
                };
                mean * (b - a) + amplitude * osc
            }
            Profile::Sine { mean, amplitude, mode } => {
                let k = 2.0 * PI * *mode as f64;
                let osc = if *mode == 0 {
                    0.0
                } else {
                    ((k * a).cos() - (k * b).cos()) / k
                };
                mean * (b - a) + amplitude * osc
            }
            Profile::Polynomial { coeffs } => {
                let anti = |x: f64| {
                    coeffs
                        .iter()
                        .enumerate()
                        .rev()
                        .fold(0.0, |acc, (k, c)| acc * x + c / (k + 1) as f64)
                        * x
                };
                anti(b) - anti(a)
            }
            Profile::Ramp { start, slope } => start * (b - a) + 0.5 * slope * (b * b - a * a),
            Profile::Bump { base, height } => {
                // 16(x² − 2x³ + x⁴) integrates to 16(x³/3 − x⁴/2 + x⁵/5)
                let anti = |x: f64| 16.0 * x * x * x * (1.0 / 3.0 - x / 2.0 + x * x / 5.0);
                base * (b - a) + height * (anti(b) - anti(a))
            }
            Profile::Gaussian { .. } => gauss_legendre(|x| self.eval(x), a, b, 64),
            Profile::Tabulated { points } => tabulated_integral(points, a, b),
        }
    }

    pub fn is_nonnegative_on(&self, a: f64, b: f64) -> bool {
        let n = 2048;
        (0..=n).all(|i| self.eval(a + (b - a) * i as f64 / n as f64) >= 0.0)
    }
}

fn tabulated_eval(points: &[[f64; 2]], x: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if x <= first[0] {
        return first[1];
    }
    if x >= last[0] {
        return last[1];
    }
    let k = points.partition_point(|p| p[0] <= x);
    let (p, q) = (points[k - 1], points[k]);
    p[1] + (x - p[0]) / (q[0] - p[0]) * (q[1] - p[1])
}

fn tabulated_integral(points: &[[f64; 2]], a: f64, b: f64) -> f64 {
    if b < a {
        return -tabulated_integral(points, b, a);
    }
    // breakpoints of the interpolant inside (a, b), then exact trapezoids
    let mut xs = vec![a];
    xs.extend(points.iter().map(|p| p[0]).filter(|&x| x > a && x < b));
    xs.push(b);
    xs.windows(2)
        .map(|w| 0.5 * (w[1] - w[0]) * (tabulated_eval(points, w[0]) + tabulated_eval(points, w[1])))
        .sum()
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664_0,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664_0,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    128.0 / 225.0,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite 5-point Gauss–Legendre quadrature on `panels` equal panels.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GL5_NODES.iter().zip(&GL5_WEIGHTS) {
            sum += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * sum
}

/// One profile per edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeProfiles(pub Vec<Profile>);

impl EdgeProfiles {
    pub fn m(&self) -> usize {
        self.0.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.is_empty() {
            return Err(NetlumpError::invalid("profiles", "need at least one edge"));
        }
        self.0.iter().try_for_each(Profile::validate)
    }

    pub fn eval(&self, edge: usize, x: f64) -> f64 {
        self.0[edge].eval(x)
    }

    pub fn sample(&self, n_cells: usize) -> Result<GridFunction> {
        self.validate()?;
        GridFunction::from_fn(self.m(), n_cells, |j, x| self.eval(j, x))
    }
}
