use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::ApproximationNetwork;
use crate::{Error, Result};

/// Effective resistance between two vertices: potential difference needed
/// to drive a unit current from `x` to `y`.
pub fn effective_resistance(net: &ApproximationNetwork, x: usize, y: usize) -> Result<f64> {
    check_vertex(net, x)?;
    check_vertex(net, y)?;
    if x == y {
        return Ok(0.0);
    }
    // ground x, inject unit current at y
    let free: Vec<usize> = (0..net.vertex_count()).filter(|&v| v != x).collect();
    let k = net.stiffness_restricted(&free);
    let chol = k
        .cholesky()
        .ok_or_else(|| Error::Singular("grounded stiffness matrix; network is disconnected".into()))?;
    let iy = free.iter().position(|&v| v == y).expect("y != x");
    let mut rhs = DVector::zeros(free.len());
    rhs[iy] = 1.0;
    let potential = chol.solve(&rhs);
    Ok(potential[iy])
}

/// Cached factorization of the stiffness matrix grounded at vertex 0, for
/// many resistance queries on one network.
#[derive(Debug, Clone)]
pub struct ResistanceSolver {
    n: usize,
    chol: Cholesky<f64, Dyn>,
}

impl ResistanceSolver {
    pub fn new(net: &ApproximationNetwork) -> Result<Self> {
        let n = net.vertex_count();
        if n < 2 {
            return Err(Error::InvalidArgument("network has a single vertex".into()));
        }
        let free: Vec<usize> = (1..n).collect();
        let chol = net
            .stiffness_restricted(&free)
            .cholesky()
            .ok_or_else(|| Error::Singular("grounded stiffness matrix; network is disconnected".into()))?;
        Ok(ResistanceSolver { n, chol })
    }

    pub fn resistance(&self, x: usize, y: usize) -> f64 {
        if x == y {
            return 0.0;
        }
        let mut rhs = DVector::zeros(self.n - 1);
        if x > 0 {
            rhs[x - 1] += 1.0;
        }
        if y > 0 {
            rhs[y - 1] -= 1.0;
        }
        let sol = self.chol.solve(&rhs);
        rhs.dot(&sol)
    }

    /// Full `n × n` resistance matrix from the grounded inverse:
    /// `R(x,y) = G_xx + G_yy - 2 G_xy` with `G_0· = 0`.
    pub fn all_pairs(&self) -> DMatrix<f64> {
        let g = self.chol.inverse();
        let n = self.n;
        let at = |i: usize, j: usize| if i == 0 || j == 0 { 0.0 } else { g[(i - 1, j - 1)] };
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else {
                (at(i, i) + at(j, j) - 2.0 * at(i, j)).max(0.0)
            }
        })
    }
}

fn check_vertex(net: &ApproximationNetwork, v: usize) -> Result<()> {
    if v >= net.vertex_count() {
        return Err(Error::InvalidArgument(format!(
            "vertex {v} out of range (network has {})",
            net.vertex_count()
        )));
    }
    Ok(())
}
