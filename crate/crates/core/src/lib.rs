//! Diffusion and transport on networks of unit-length edges with
//! matrix-valued boundary couplings, their aggregated ("lumped") ODE limits
//! as the fast scale ε → 0, and tools for measuring the convergence order.

pub mod config;
pub mod coupling;
pub mod diffusion;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod lumping;
pub mod mckendrick;
pub mod profile;
pub mod report;
pub mod scenario;
pub mod tolerance;
pub mod transport;

pub use error::{NetlumpError, Result};
