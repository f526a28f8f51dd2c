use nalgebra::{Cholesky, DVector, Dyn};

use super::ApproximationNetwork;
use crate::{Error, Result};

/// Green function of the network with the vertices of `B` pinned to zero.
///
/// `g_B(·, y)` solves `C g = δ_y` off `B`, so `g_B(x, y)` is the `(x, y)`
/// entry of the inverse of `C` restricted to the complement of `B`.
#[derive(Debug, Clone)]
pub struct GreenFunction {
    /// position of each vertex among the free ones, `usize::MAX` on `B`
    pos: Vec<usize>,
    chol: Cholesky<f64, Dyn>,
}

impl GreenFunction {
    pub fn new(net: &ApproximationNetwork, boundary: &[usize]) -> Result<Self> {
        let n = net.vertex_count();
        if boundary.is_empty() {
            return Err(Error::InvalidArgument("Green function needs a nonempty boundary".into()));
        }
        let mut pinned = vec![false; n];
        for &b in boundary {
            if b >= n {
                return Err(Error::InvalidArgument(format!("boundary vertex {b} out of range")));
            }
            pinned[b] = true;
        }
        let free: Vec<usize> = (0..n).filter(|&v| !pinned[v]).collect();
        let mut pos = vec![usize::MAX; n];
        for (i, &v) in free.iter().enumerate() {
            pos[v] = i;
        }
        if free.is_empty() {
            // everything pinned; g vanishes identically
            let chol = nalgebra::DMatrix::<f64>::identity(1, 1).cholesky().expect("identity");
            return Ok(GreenFunction { pos, chol });
        }
        let chol = net.stiffness_restricted(&free).cholesky().ok_or_else(|| {
            Error::Singular("pinned stiffness matrix; some vertices are cut off from the boundary".into())
        })?;
        Ok(GreenFunction { pos, chol })
    }

    /// `g_B(·, y)` on every vertex (zero on `B`).
    pub fn column(&self, y: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.pos.len()];
        let py = self.pos[y];
        if py == usize::MAX {
            return out;
        }
        let mut rhs = DVector::zeros(self.chol.l_dirty().nrows());
        rhs[py] = 1.0;
        let sol = self.chol.solve(&rhs);
        for (v, &p) in self.pos.iter().enumerate() {
            if p != usize::MAX {
                out[v] = sol[p];
            }
        }
        out
    }

    pub fn value(&self, x: usize, y: usize) -> f64 {
        let (px, py) = (self.pos[x], self.pos[y]);
        if px == usize::MAX || py == usize::MAX {
            return 0.0;
        }
        let mut rhs = DVector::zeros(self.chol.l_dirty().nrows());
        rhs[py] = 1.0;
        self.chol.solve(&rhs)[px]
    }
}

/// `g_B(x, y)`; zero whenever `x` or `y` lies in `B`.
pub fn green_function(net: &ApproximationNetwork, boundary: &[usize], x: usize, y: usize) -> Result<f64> {
    let n = net.vertex_count();
    if x >= n || y >= n {
        return Err(Error::InvalidArgument(format!("vertex out of range (network has {n})")));
    }
    Ok(GreenFunction::new(net, boundary)?.value(x, y))
}
