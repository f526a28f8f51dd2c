use super::SpectralBasis;
use crate::stats::spearman;
use crate::{Error, Result};

/// Ratios `λ_k k^{-2/d_s}` over `k ∈ [2, K/4]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylDiagnostic {
    pub k_lo: usize,
    pub k_hi: usize,
    pub ratios: Vec<f64>,
    pub min: f64,
    pub max: f64,
    /// `max / min`
    pub window: f64,
    /// Spearman correlation of the ratios with `k`; a monotone drift shows
    /// up as `|ρ|` near 1.
    pub drift: f64,
}

pub fn weyl_fit(basis: &SpectralBasis, d_s: f64) -> Result<WeylDiagnostic> {
    let k_total = basis.len();
    if k_total < 16 {
        return Err(Error::BasisTooSmall {
            needed: 16,
            available: k_total,
        });
    }
    let (k_lo, k_hi) = (2, k_total / 4);
    let ks: Vec<f64> = (k_lo..=k_hi).map(|k| k as f64).collect();
    let ratios: Vec<f64> = (k_lo..=k_hi)
        .map(|k| basis.eigenvalue(k) * (k as f64).powf(-2.0 / d_s))
        .collect();
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(WeylDiagnostic {
        k_lo,
        k_hi,
        drift: spearman(&ks, &ratios),
        window: max / min,
        min,
        max,
        ratios,
    })
}

/// Empirical `c₃ = max_k ‖φ_k‖_∞ λ_k^{-d_s/4}` over `k ∈ [2, K/4]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupNormDiagnostic {
    pub value: f64,
    /// mode attaining the maximum
    pub argmax: usize,
    pub k_hi: usize,
}

pub fn supnorm_fit(basis: &SpectralBasis, d_s: f64) -> Result<SupNormDiagnostic> {
    if basis.len() < 2 {
        return Err(Error::BasisTooSmall {
            needed: 2,
            available: basis.len(),
        });
    }
    let k_hi = (basis.len() / 4).max(2);
    let mut best = SupNormDiagnostic {
        value: 0.0,
        argmax: 2,
        k_hi,
    };
    for k in 2..=k_hi {
        let sup = basis.eigenvectors().column(k - 1).amax();
        let stat = sup * basis.eigenvalue(k).powf(-d_s / 4.0);
        if stat > best.value {
            best.value = stat;
            best.argmax = k;
        }
    }
    Ok(best)
}
