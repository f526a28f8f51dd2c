use rand::Rng;
use rand_distr::StandardNormal;

use super::ou::ZERO_RATE;
use super::rng::NoiseStreams;
use super::simulate::CoefficientTrajectory;
use crate::spectral::SpectralBasis;
use crate::{BoundaryCondition, Error, Result};

/// Variance `(1+λ)^{-α} / (2λ)` of a coefficient under the invariant law.
pub fn invariant_variance(lambda: f64, alpha: f64) -> f64 {
    (1.0 + lambda).powf(-alpha) / (2.0 * lambda)
}

/// One draw of the Dirichlet invariant law, as solution coefficients.
/// Mode `k` uses the first normal of stream `k`.
pub fn sample_invariant_dirichlet(basis: &SpectralBasis, alpha: f64, streams: &NoiseStreams) -> Result<Vec<f64>> {
    if basis.boundary_condition() != BoundaryCondition::Dirichlet {
        return Err(Error::WrongBoundaryCondition(
            "the Neumann problem has no invariant law for the constant mode; use neumann_decompose".into(),
        ));
    }
    Ok(basis
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            let z: f64 = streams.mode(k).sample(StandardNormal);
            invariant_variance(l, alpha).sqrt() * z
        })
        .collect())
}

/// A Neumann trajectory split into its Wiener part and the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct NeumannSplit {
    pub times: Vec<f64>,
    /// `B(t) = X^1_t`, a standard Wiener process
    pub wiener: Vec<f64>,
    /// solution coefficients of `u - B φ_1`, `[time][mode]`; mode 0 is the
    /// constant initial mean
    pub remainder: Vec<Vec<f64>>,
}

/// Splits off the constant mode's noise. Since `φ_1 ≡ 1` and `λ_1 = 0`,
/// `B` enters `u` with weight one and shares no noise with the other modes.
pub fn neumann_decompose(traj: &CoefficientTrajectory) -> Result<NeumannSplit> {
    if traj.boundary_condition() != BoundaryCondition::Neumann {
        return Err(Error::WrongBoundaryCondition("decomposition needs Neumann conditions".into()));
    }
    if traj.modes() == 0 || traj.eigenvalues()[0] >= ZERO_RATE {
        return Err(Error::InvalidArgument("first Neumann mode is not the zero mode".into()));
    }
    let nt = traj.times().len();
    let wiener = (0..nt).map(|i| traj.ou(i, 0)).collect();
    let remainder = (0..nt)
        .map(|i| {
            let mut row: Vec<f64> = (0..traj.modes()).map(|k| traj.coefficient(i, k)).collect();
            row[0] = traj.initial()[0];
            row
        })
        .collect();
    Ok(NeumannSplit {
        times: traj.times().to_vec(),
        wiener,
        remainder,
    })
}
