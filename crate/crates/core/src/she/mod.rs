//! The SPDE in the eigenbasis: every coefficient is an independent OU
//! process with rate `λ_k`, sampled exactly on any time grid.

mod invariant;
mod moments;
mod ou;
mod rng;
mod sigma;
mod simulate;

pub use invariant::{invariant_variance, neumann_decompose, sample_invariant_dirichlet, NeumannSplit};
pub use moments::{
    field_variance, ou_increment_variance, spatial_increment_variance, stationary_temporal_variance,
    temporal_increment_variance,
};
pub use ou::{ou_transition, ou_variance, ZERO_RATE};
pub use rng::{NoiseStreams, Purpose, RngSpec};
pub use sigma::{required_terms, sigma_ab, zeta, SigmaCase, SigmaSum, TAIL_TOLERANCE};
pub use simulate::{
    evaluate_field, simulate_coefficients, simulate_ensemble, simulate_field, CoefficientTrajectory, FieldEnsemble,
    FieldSample, GalerkinState, Noise,
};

/// Default truncation: the basis' safe count, capped at 256.
pub fn default_truncation(basis: &crate::spectral::SpectralBasis) -> usize {
    basis.safe_count().min(256)
}
