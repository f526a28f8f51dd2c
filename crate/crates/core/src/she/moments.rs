use super::ou::{ou_variance, ZERO_RATE};
use crate::spectral::SpectralBasis;
use crate::{Error, Result};

fn bessel(lambda: f64, alpha: f64) -> f64 {
    (1.0 + lambda).powf(-alpha)
}

/// `Var u(t, x) = Σ_k (1+λ_k)^{-α} v_k(t) φ_k(x)²` for `u₀ = 0`.
pub fn field_variance(basis: &SpectralBasis, alpha: f64, t: f64, x: usize) -> f64 {
    basis
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(k, &l)| bessel(l, alpha) * ou_variance(l, t) * basis.eigenvectors()[(x, k)].powi(2))
        .sum()
}

/// `E[(u(t,x) - u(t,y))²] = Σ_k (1+λ_k)^{-α} v_k(t) (φ_k(x) - φ_k(y))²`.
pub fn spatial_increment_variance(basis: &SpectralBasis, alpha: f64, t: f64, x: usize, y: usize) -> f64 {
    if x == y {
        return 0.0;
    }
    let v = basis.eigenvectors();
    basis
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(k, &l)| bessel(l, alpha) * ou_variance(l, t) * (v[(x, k)] - v[(y, k)]).powi(2))
        .sum()
}

/// `E[(X_s - X_{s+h})²]` for an OU process with rate `λ` started at 0:
/// `(1 - e^{-λh})/λ - e^{-2λs}(1 - e^{-λh})²/(2λ)`, and `h` when `λ` vanishes.
pub fn ou_increment_variance(lambda: f64, s: f64, h: f64) -> f64 {
    if lambda < ZERO_RATE {
        return h;
    }
    let d = -(-lambda * h).exp_m1();
    d / lambda - (-2.0 * lambda * s).exp() * d * d / (2.0 * lambda)
}

/// `E[(u(s,x) - u(s+h,x))²] = Σ_k (1+λ_k)^{-α} E[(X^k_s - X^k_{s+h})²] φ_k(x)²`.
pub fn temporal_increment_variance(basis: &SpectralBasis, alpha: f64, s: f64, h: f64, x: usize) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("lag must be positive, got {h}")));
    }
    if s < 0.0 {
        return Err(Error::InvalidArgument(format!("start time must be nonnegative, got {s}")));
    }
    Ok(basis
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(k, &l)| bessel(l, alpha) * ou_increment_variance(l, s, h) * basis.eigenvectors()[(x, k)].powi(2))
        .sum())
}

/// The `s → ∞` limit `Σ_{λ_k > 0} (1+λ_k)^{-α} (1 - e^{-λ_k h})/λ_k φ_k(x)²`.
/// A zero mode (Neumann constant) is left out, since it never becomes
/// stationary.
pub fn stationary_temporal_variance(basis: &SpectralBasis, alpha: f64, h: f64, x: usize) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("lag must be positive, got {h}")));
    }
    Ok(basis
        .eigenvalues()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l >= ZERO_RATE)
        .map(|(k, &l)| bessel(l, alpha) * (-(-l * h).exp_m1()) / l * basis.eigenvectors()[(x, k)].powi(2))
        .sum())
}
