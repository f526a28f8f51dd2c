use super::SpectralBasis;
use crate::{Error, Result};

/// `ρ_λ(x, y) = Σ_k φ_k(x) φ_k(y) / (λ + λ_k)` over the modes of the basis.
///
/// With the full basis this is `(C + λM)^{-1}` restricted to the free
/// vertices, so it reproduces every level-`m` function in the inner
/// product `uᵀCv + λ uᵀMv`.
pub fn resolvent_density(basis: &SpectralBasis, lambda: f64, x: usize, y: usize) -> Result<f64> {
    check(basis, lambda)?;
    Ok((0..basis.len())
        .map(|k| basis.eigenvectors()[(x, k)] * basis.eigenvectors()[(y, k)] / (lambda + basis.eigenvalues()[k]))
        .sum())
}

/// `ρ_λ(x, ·)` on every vertex.
pub fn resolvent_row(basis: &SpectralBasis, lambda: f64, x: usize) -> Result<Vec<f64>> {
    check(basis, lambda)?;
    let v = basis.eigenvectors();
    let w: Vec<f64> = (0..basis.len())
        .map(|k| v[(x, k)] / (lambda + basis.eigenvalues()[k]))
        .collect();
    Ok((0..basis.vertex_count())
        .map(|y| (0..basis.len()).map(|k| w[k] * v[(y, k)]).sum())
        .collect())
}

fn check(basis: &SpectralBasis, lambda: f64) -> Result<()> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("resolvent parameter must be positive, got {lambda}")));
    }
    if basis.is_empty() {
        return Err(Error::BasisTooSmall { needed: 1, available: 0 });
    }
    Ok(())
}
