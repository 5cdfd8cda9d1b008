//! Process-wide tolerance for exact-zero structural conditions
//! (Markov row sums, Kolmogorov column sums).

use std::sync::atomic::{AtomicU64, Ordering};

pub const DEFAULT_STRUCTURAL_TOL: f64 = 1e-12;

/// Environment variable read by the CLI to override the structural tolerance.
pub const TOL_ENV_VAR: &str = "NETLUMP_TOL";

static STRUCTURAL_TOL_BITS: AtomicU64 = AtomicU64::new(0x3D71_9799_812D_EA11); // 1e-12

pub fn structural_tolerance() -> f64 {
    f64::from_bits(STRUCTURAL_TOL_BITS.load(Ordering::Relaxed))
}

/// Panics on non-positive or non-finite values.
pub fn set_structural_tolerance(tol: f64) {
    assert!(tol.is_finite() && tol > 0.0, "tolerance must be positive");
    STRUCTURAL_TOL_BITS.store(tol.to_bits(), Ordering::Relaxed);
}

/// Applies `NETLUMP_TOL` if it is set and parses as a positive float.
/// Returns the tolerance now in effect.
pub fn apply_env_override() -> Result<f64, String> {
    match std::env::var(TOL_ENV_VAR) {
        Ok(s) => {
            let tol: f64 = s
                .trim()
                .parse()
                .map_err(|_| format!("{TOL_ENV_VAR}={s:?} is not a number"))?;
            if !(tol.is_finite() && tol > 0.0) {
                return Err(format!("{TOL_ENV_VAR} must be positive, got {tol}"));
            }
            set_structural_tolerance(tol);
            Ok(tol)
        }
        Err(_) => Ok(structural_tolerance()),
    }
}
