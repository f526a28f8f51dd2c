use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Rates below this are treated as the Neumann constant mode, whose
/// coefficient is a standard Wiener process.
pub const ZERO_RATE: f64 = 1e-14;

/// Variance of `X_t` for a unit-volatility OU process with rate `λ`
/// started at 0: `(1 - e^{-2λt}) / (2λ)`, or `t` when `λ` vanishes.
pub fn ou_variance(lambda: f64, t: f64) -> f64 {
    if lambda < ZERO_RATE {
        t
    } else {
        -(-2.0 * lambda * t).exp_m1() / (2.0 * lambda)
    }
}

/// Exact transition of `dX = -λX dt + dB` over a step `dt`.
pub fn ou_transition<R: Rng + ?Sized>(x: f64, lambda: f64, dt: f64, rng: &mut R) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    if lambda < 0.0 {
        return Err(Error::InvalidArgument(format!("OU rate must be nonnegative, got {lambda}")));
    }
    Ok(ou_step(x, lambda, dt, rng.sample(StandardNormal)))
}

/// Transition driven by a given standard normal draw `z`.
pub(crate) fn ou_step(x: f64, lambda: f64, dt: f64, z: f64) -> f64 {
    (-lambda * dt).exp() * x + ou_variance(lambda, dt).sqrt() * z
}
