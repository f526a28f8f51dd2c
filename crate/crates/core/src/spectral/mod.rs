//! Generalized eigenproblem `C φ = λ M φ` for `-L_b` at a fixed level,
//! with diagnostics for eigenvalue growth and eigenfunction size, and the
//! discrete resolvent density.

mod resolvent;
mod weyl;

pub use resolvent::{resolvent_density, resolvent_row};
pub use weyl::{supnorm_fit, weyl_fit, SupNormDiagnostic, WeylDiagnostic};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use std::fmt::Write as _;

use crate::network::ApproximationNetwork;
use crate::{BoundaryCondition, Error, Result};

/// Ascending eigenvalues and mass-orthonormal eigenvectors of `-L_b`.
///
/// Eigenvectors are stored per vertex of the network (column `k` is
/// `φ_{k+1}`); under Dirichlet conditions they vanish on `F^0`.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    bc: BoundaryCondition,
    level: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    residuals: Vec<f64>,
    mass: Vec<f64>,
    free: Vec<usize>,
}

/// Solves for the lowest `count` eigenpairs.
///
/// The problem is symmetrized as `M^{-1/2} C M^{-1/2}` and handed to a
/// dense symmetric eigensolver; every eigenvalue is then replaced by its
/// Rayleigh quotient, which is accurate to the square of the vector error.
pub fn solve_spectrum(net: &ApproximationNetwork, bc: BoundaryCondition, count: usize) -> Result<SpectralBasis> {
    let free = net.free_vertices(bc);
    let nf = free.len();
    if count == 0 || count > nf {
        return Err(Error::TooManyEigenpairs {
            requested: count,
            available: nf,
        });
    }
    let c = net.stiffness_restricted(&free);
    let m: Vec<f64> = free.iter().map(|&v| net.mass()[v]).collect();
    let s: Vec<f64> = m.iter().map(|x| 1.0 / x.sqrt()).collect();
    let a = DMatrix::from_fn(nf, nf, |i, j| c[(i, j)] * s[i] * s[j]);
    let a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(a, f64::EPSILON, 0)
        .ok_or_else(|| Error::NonConvergence { residual: f64::NAN })?;
    let mut order: Vec<usize> = (0..nf).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1.0);
    let mut pairs = Vec::with_capacity(count);
    for (k, &col) in order.iter().take(count).enumerate() {
        let mut phi = DVector::from_fn(nf, |i, _| eig.eigenvectors[(i, col)] * s[i]);
        let norm: f64 = phi.iter().zip(&m).map(|(p, w)| p * p * w).sum::<f64>().sqrt();
        phi /= norm;
        let scale = phi.amax();
        if let Some(first) = phi.iter().find(|p| p.abs() > 1e-10 * scale) {
            if *first < 0.0 {
                phi = -phi;
            }
        }
        let cphi = &c * &phi;
        let lambda = phi.dot(&cphi);
        // the constant kernel comes back at rounding level, ~1e-14 relative
        // to the top of the spectrum; pin it so λ = 0 dispatch sees it
        let lambda = if bc == BoundaryCondition::Neumann && k == 0 && lambda <= 1e-11 * top {
            0.0
        } else {
            lambda
        };
        let res = cphi
            .iter()
            .zip(phi.iter().zip(&m))
            .map(|(cp, (p, w))| (cp - lambda * w * p).powi(2))
            .sum::<f64>()
            .sqrt();
        pairs.push((lambda, res, phi));
    }
    // refined values can swap order inside near-degenerate clusters
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = net.vertex_count();
    let mut vectors = DMatrix::zeros(n, count);
    for (k, (_, _, phi)) in pairs.iter().enumerate() {
        for (i, &v) in free.iter().enumerate() {
            vectors[(v, k)] = phi[i];
        }
    }
    let eigenvalues = pairs.iter().map(|p| p.0).collect();
    let residuals = pairs.iter().map(|p| p.1).collect();
    Ok(SpectralBasis {
        bc,
        level: net.level(),
        eigenvalues,
        eigenvectors: vectors,
        residuals,
        mass: net.mass().to_vec(),
        free,
    })
}

impl SpectralBasis {
    pub fn boundary_condition(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.eigenvectors.nrows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `λ_k`, 1-based.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k - 1]
    }

    /// `φ_k` over all vertices, 1-based.
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k - 1).iter().copied().collect()
    }

    /// Vertex-by-mode matrix of eigenvector values.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// `φ_k(x)`, `k` 1-based.
    pub fn value(&self, k: usize, x: usize) -> f64 {
        self.eigenvectors[(x, k - 1)]
    }

    /// `‖C φ_k − λ_k M φ_k‖` on the free vertices.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Vertices carrying degrees of freedom under the boundary condition.
    pub fn free_vertices(&self) -> &[usize] {
        &self.free
    }

    /// Number of modes exposed downstream by default (a quarter of the
    /// degrees of freedom, capped by what was solved).
    pub fn safe_count(&self) -> usize {
        (self.free.len() / 4).clamp(1, self.len())
    }

    /// Copy keeping only the first `k` modes.
    pub fn truncated(&self, k: usize) -> Result<SpectralBasis> {
        if k == 0 || k > self.len() {
            return Err(Error::TooManyEigenpairs {
                requested: k,
                available: self.len(),
            });
        }
        Ok(SpectralBasis {
            bc: self.bc,
            level: self.level,
            eigenvalues: self.eigenvalues[..k].to_vec(),
            eigenvectors: self.eigenvectors.columns(0, k).into_owned(),
            residuals: self.residuals[..k].to_vec(),
            mass: self.mass.clone(),
            free: self.free.clone(),
        })
    }

    /// Copy without the Neumann constant mode(s) (`λ < 1e-14`).
    pub fn without_zero_modes(&self) -> Result<SpectralBasis> {
        let skip = self.eigenvalues.iter().take_while(|&&l| l < crate::she::ZERO_RATE).count();
        if skip == self.len() {
            return Err(Error::TooManyEigenpairs {
                requested: 1,
                available: 0,
            });
        }
        let k = self.len() - skip;
        Ok(SpectralBasis {
            bc: self.bc,
            level: self.level,
            eigenvalues: self.eigenvalues[skip..].to_vec(),
            eigenvectors: self.eigenvectors.columns(skip, k).into_owned(),
            residuals: self.residuals[skip..].to_vec(),
            mass: self.mass.clone(),
            free: self.free.clone(),
        })
    }

    /// Mass inner product `Σ_x m_x f(x) g(x)`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.mass.iter().zip(f.iter().zip(g)).map(|(m, (a, b))| m * a * b).sum()
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let w = DMatrix::from_fn(self.vertex_count(), self.len(), |i, k| {
            self.eigenvectors[(i, k)] * self.mass[i]
        });
        let gram = self.eigenvectors.transpose() * w;
        (gram - DMatrix::identity(self.len(), self.len())).amax()
    }

    /// Spectrum CSV with columns `k,lambda,residual`.
    pub fn spectrum_csv(&self) -> String {
        let mut s = String::from("k,lambda,residual\n");
        for (k, (l, r)) in self.eigenvalues.iter().zip(&self.residuals).enumerate() {
            let _ = writeln!(s, "{},{:.17e},{:.6e}", k + 1, l, r);
        }
        s
    }

    /// Eigenfunction CSV: one row per vertex, `vertex,phi_1,...,phi_K`.
    pub fn eigenvectors_csv(&self) -> String {
        let mut s = String::from("vertex");
        for k in 1..=self.len() {
            let _ = write!(s, ",phi_{k}");
        }
        s.push('\n');
        for v in 0..self.vertex_count() {
            let _ = write!(s, "{v}");
            for k in 0..self.len() {
                let _ = write!(s, ",{:.17e}", self.eigenvectors[(v, k)]);
            }
            s.push('\n');
        }
        s
    }
}
