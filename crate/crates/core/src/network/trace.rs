use nalgebra::DMatrix;

use super::{build_network, ApproximationNetwork};
use crate::fractal::PcfStructure;
use crate::{BoundaryCondition, Error, Result};

/// Schur complement of a symmetric matrix onto the `keep` indices (in the
/// given order): `C_KK - C_KI C_II^{-1} C_IK`.
pub fn schur_complement(c: &DMatrix<f64>, keep: &[usize]) -> Result<DMatrix<f64>> {
    let n = c.nrows();
    if keep.is_empty() {
        return Err(Error::InvalidArgument("trace needs a nonempty keep set".into()));
    }
    let mut kept = vec![false; n];
    for &k in keep {
        if k >= n {
            return Err(Error::InvalidArgument(format!("vertex {k} out of range")));
        }
        kept[k] = true;
    }
    let elim: Vec<usize> = (0..n).filter(|&i| !kept[i]).collect();
    let ckk = DMatrix::from_fn(keep.len(), keep.len(), |i, j| c[(keep[i], keep[j])]);
    if elim.is_empty() {
        return Ok(ckk);
    }
    let cii = DMatrix::from_fn(elim.len(), elim.len(), |i, j| c[(elim[i], elim[j])]);
    let cik = DMatrix::from_fn(elim.len(), keep.len(), |i, j| c[(elim[i], keep[j])]);
    let chol = cii.cholesky().ok_or_else(|| {
        Error::Singular("eliminated block is not positive definite (interior cut off from keep set)".into())
    })?;
    let x = chol.solve(&cik);
    let reduced = ckk - cik.transpose() * x;
    // symmetrize away rounding
    Ok((&reduced + reduced.transpose()) * 0.5)
}

/// Trace of the network's stiffness matrix onto `keep`: the conductance
/// matrix of the harmonically reduced network.
pub fn network_trace(net: &ApproximationNetwork, keep: &[usize]) -> Result<DMatrix<f64>> {
    schur_complement(&net.stiffness(), keep)
}

/// Outcome of the level-1 harmonic-structure test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicCheck {
    pub passed: bool,
    /// Largest absolute entrywise deviation between the trace and `A0`.
    pub deviation: f64,
}

/// Builds the level-1 network, traces it onto `F^0` and compares with `A0`.
pub fn verify_harmonic_structure(structure: &PcfStructure) -> HarmonicCheck {
    let deviation = match build_network(structure, 1, BoundaryCondition::Neumann)
        .and_then(|net| network_trace(&net, net.boundary_ids()))
    {
        Ok(traced) => {
            let a0 = structure.a0();
            let mut dev = 0.0f64;
            for i in 0..a0.nrows() {
                for j in 0..a0.ncols() {
                    dev = dev.max((traced[(i, j)] + a0[(i, j)]).abs());
                }
            }
            dev
        }
        Err(_) => f64::INFINITY,
    };
    HarmonicCheck {
        passed: deviation <= 1e-10,
        deviation,
    }
}
