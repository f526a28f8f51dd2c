//! Laplacians on post-critically finite self-similar sets built from their
//! graph approximations, and exact-in-law simulation of the linear
//! stochastic heat equation
//!
//! ```text
//! du = L_b u dt + (1 - L_b)^{-alpha/2} dW
//! ```
//!
//! through its eigenfunction expansion, where every coefficient is an
//! independent Ornstein-Uhlenbeck process.
//!
//! The crate is organised bottom-up:
//!
//! * [`fractal`] word spaces, harmonic structures, partitions and neighbourhoods;
//! * [`network`] level-`m` electrical networks, traces, resistances, Green functions;
//! * [`spectral`] the generalized eigenproblem for `-L_b` and its diagnostics;
//! * [`she`] OU transitions, field simulation and analytic second moments;
//! * [`regularity`] Hölder exponent predictions and log-log estimation.

pub mod error;
pub mod fractal;
pub mod network;
pub mod regularity;
pub mod she;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};

/// Boundary condition of the Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    /// Reflecting at the boundary cell `F^0`.
    Neumann,
    /// Absorbing at `F^0`; functions vanish there.
    Dirichlet,
}

impl BoundaryCondition {
    pub fn tag(self) -> &'static str {
        match self {
            BoundaryCondition::Neumann => "N",
            BoundaryCondition::Dirichlet => "D",
        }
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "N" | "n" | "neumann" | "Neumann" => Ok(BoundaryCondition::Neumann),
            "D" | "d" | "dirichlet" | "Dirichlet" => Ok(BoundaryCondition::Dirichlet),
            other => Err(Error::InvalidArgument(format!(
                "unknown boundary condition {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}
