//! Least-squares fit of `log(error) = p·log(ε) + c`.

use serde::{Deserialize, Serialize};

use crate::error::{NetlumpError, Result};

pub const DEFAULT_BAND: (f64, f64) = (0.8, 1.2);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Strictly decreasing.
    pub eps_list: Vec<f64>,
    /// The errors the order is fitted to.
    pub errors: Vec<f64>,
    /// Companion errors in the sup norm, reported but not fitted.
    pub errors_sup: Vec<f64>,
    pub fitted_order: Option<f64>,
    pub intercept: Option<f64>,
    pub band: (f64, f64),
    pub pass: bool,
    /// Why no order was fitted, if none was.
    pub degenerate: Option<String>,
}

/// Fits the convergence order and checks it against `band`.
///
/// Fewer than three points or non-positive errors give a degenerate report
/// (no fitted order, `pass = false`) rather than an error.
pub fn estimate_order(
    eps_list: &[f64],
    errors: &[f64],
    errors_sup: &[f64],
    band: (f64, f64),
) -> Result<ConvergenceReport> {
    if errors.len() != eps_list.len() {
        return Err(NetlumpError::mismatch("errors", eps_list.len(), errors.len()));
    }
    if errors_sup.len() != eps_list.len() {
        return Err(NetlumpError::mismatch("sup errors", eps_list.len(), errors_sup.len()));
    }
    if eps_list.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(NetlumpError::invalid("eps_list", "entries must be positive and finite"));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(NetlumpError::invalid("eps_list", "must be strictly decreasing"));
    }
    if errors.iter().chain(errors_sup).any(|e| e.is_nan() || e.is_infinite()) {
        return Err(NetlumpError::NonFinite("errors".into()));
    }
    if !(band.0 <= band.1) {
        return Err(NetlumpError::invalid("band", format!("lower bound {} exceeds upper {}", band.0, band.1)));
    }
    let mut report = ConvergenceReport {
        eps_list: eps_list.to_vec(),
        errors: errors.to_vec(),
        errors_sup: errors_sup.to_vec(),
        fitted_order: None,
        intercept: None,
        band,
        pass: false,
        degenerate: None,
    };
    if eps_list.len() < 3 {
        report.degenerate = Some(format!("need at least 3 eps values, got {}", eps_list.len()));
        return Ok(report);
    }
    if let Some(e) = errors.iter().find(|e| **e <= 0.0) {
        report.degenerate = Some(format!("non-positive error {e} (exact agreement)"));
        return Ok(report);
    }
    let xs: Vec<f64> = eps_list.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    report.fitted_order = Some(slope);
    report.intercept = Some(intercept);
    report.pass = slope >= band.0 && slope <= band.1;
    Ok(report)
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Order between consecutive points, `log(e_k/e_{k+1}) / log(ε_k/ε_{k+1})`.
pub fn pairwise_orders(eps_list: &[f64], errors: &[f64]) -> Vec<f64> {
    eps_list
        .windows(2)
        .zip(errors.windows(2))
        .map(|(e, r)| (r[0] / r[1]).ln() / (e[0] / e[1]).ln())
        .collect()
}
