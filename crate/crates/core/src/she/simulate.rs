use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::fmt::Write as _;

use super::ou::ou_step;
use super::rng::{NoiseStreams, Purpose};
use crate::spectral::SpectralBasis;
use crate::{BoundaryCondition, Error, Result};

/// Whether the coefficients are driven by noise. `Off` leaves only the
/// deterministic semigroup `S_t u₀`; it exists for testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Noise {
    White,
    Off,
}

/// Solution coefficients `û_k(t)` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinState {
    pub alpha: f64,
    pub bc: BoundaryCondition,
    pub t: f64,
    pub coeffs: Vec<f64>,
}

/// OU paths `X^k` on a time grid together with the data needed to form
/// `û_k(t) = e^{-λ_k t} u₀_k + (1 + λ_k)^{-α/2} X^k_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTrajectory {
    alpha: f64,
    bc: BoundaryCondition,
    eigenvalues: Vec<f64>,
    times: Vec<f64>,
    u0: Vec<f64>,
    /// row-major `[time][mode]`
    ou: Vec<f64>,
}

impl CoefficientTrajectory {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn boundary_condition(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn initial(&self) -> &[f64] {
        &self.u0
    }

    /// `X^k` at time index `i` (`k` 0-based).
    pub fn ou(&self, i: usize, k: usize) -> f64 {
        self.ou[i * self.modes() + k]
    }

    /// `û_k` at time index `i` (`k` 0-based).
    pub fn coefficient(&self, i: usize, k: usize) -> f64 {
        let lambda = self.eigenvalues[k];
        let t = self.times[i];
        (-lambda * t).exp() * self.u0[k] + (1.0 + lambda).powf(-self.alpha / 2.0) * self.ou(i, k)
    }

    pub fn state(&self, i: usize) -> GalerkinState {
        GalerkinState {
            alpha: self.alpha,
            bc: self.bc,
            t: self.times[i],
            coeffs: (0..self.modes()).map(|k| self.coefficient(i, k)).collect(),
        }
    }

    /// `K × T` matrix of solution coefficients.
    pub fn coefficient_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.modes(), self.times.len(), |k, i| self.coefficient(i, k))
    }

    /// CSV rows `replica,t,k,coeff` (no header), `k` 1-based.
    pub fn write_csv_rows(&self, replica: u64, out: &mut String) {
        for (i, t) in self.times.iter().enumerate() {
            for k in 0..self.modes() {
                let _ = writeln!(out, "{replica},{t:.17e},{},{:.17e}", k + 1, self.coefficient(i, k));
            }
        }
    }
}

/// Field values `u(t, x)` on a time grid at chosen vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub times: Vec<f64>,
    pub vertices: Vec<usize>,
    /// `[time][vertex position]`
    pub values: Vec<Vec<f64>>,
}

impl FieldSample {
    /// CSV rows `replica,t,vertex,value` (no header).
    pub fn write_csv_rows(&self, replica: u64, out: &mut String) {
        for (t, row) in self.times.iter().zip(&self.values) {
            for (v, x) in self.vertices.iter().zip(row) {
                let _ = writeln!(out, "{replica},{t:.17e},{v},{x:.17e}");
            }
        }
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() || !(t_grid[0] >= 0.0) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonMonotoneGrid);
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotoneGrid);
    }
    Ok(())
}

/// Advances every mode of the basis by exact OU transitions along `t_grid`.
///
/// `u0` holds the initial coefficients and is zero-padded to the basis size.
pub fn simulate_coefficients(
    basis: &SpectralBasis,
    alpha: f64,
    u0: &[f64],
    t_grid: &[f64],
    streams: &NoiseStreams,
    noise: Noise,
) -> Result<CoefficientTrajectory> {
    check_grid(t_grid)?;
    if alpha < 0.0 {
        return Err(Error::InvalidArgument(format!("alpha must be nonnegative, got {alpha}")));
    }
    let k_modes = basis.len();
    if u0.len() > k_modes {
        return Err(Error::InvalidArgument(format!(
            "{} initial coefficients for a basis of {k_modes} modes",
            u0.len()
        )));
    }
    let mut init = u0.to_vec();
    init.resize(k_modes, 0.0);
    let nt = t_grid.len();
    let mut ou = vec![0.0; nt * k_modes];
    if noise == Noise::White {
        for k in 0..k_modes {
            let lambda = basis.eigenvalues()[k].max(0.0);
            let mut rng = streams.mode(k);
            let mut x = 0.0;
            let mut prev = 0.0;
            for (i, &t) in t_grid.iter().enumerate() {
                if t > prev {
                    x = ou_step(x, lambda, t - prev, rng.sample(StandardNormal));
                }
                ou[i * k_modes + k] = x;
                prev = t;
            }
        }
    }
    Ok(CoefficientTrajectory {
        alpha,
        bc: basis.boundary_condition(),
        eigenvalues: basis.eigenvalues().to_vec(),
        times: t_grid.to_vec(),
        u0: init,
        ou,
    })
}

/// `u(t, x)` at every vertex, together with the coefficient trajectory.
pub fn simulate_field(
    basis: &SpectralBasis,
    alpha: f64,
    u0: &[f64],
    t_grid: &[f64],
    streams: &NoiseStreams,
    noise: Noise,
) -> Result<(FieldSample, CoefficientTrajectory)> {
    let traj = simulate_coefficients(basis, alpha, u0, t_grid, streams, noise)?;
    let vertices: Vec<usize> = (0..basis.vertex_count()).collect();
    let field = evaluate_field(basis, &traj, &vertices);
    Ok((field, traj))
}

/// Assembles `u(t, x) = Σ_k û_k(t) φ_k(x)` at the given vertices.
pub fn evaluate_field(basis: &SpectralBasis, traj: &CoefficientTrajectory, vertices: &[usize]) -> FieldSample {
    let k_modes = traj.modes();
    let phi = DMatrix::from_fn(vertices.len(), k_modes, |i, k| basis.eigenvectors()[(vertices[i], k)]);
    let values = phi * traj.coefficient_matrix();
    FieldSample {
        times: traj.times.clone(),
        vertices: vertices.to_vec(),
        values: (0..traj.times.len())
            .map(|i| values.column(i).iter().copied().collect())
            .collect(),
    }
}

/// Field values of many independent replicas at fixed vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldEnsemble {
    pub times: Vec<f64>,
    pub vertices: Vec<usize>,
    /// `[replica][time][vertex position]`
    pub samples: Vec<Vec<Vec<f64>>>,
}

impl FieldEnsemble {
    pub fn replicas(&self) -> usize {
        self.samples.len()
    }
}

/// Runs `replicas` independent simulations from the same initial data.
/// Replica `r` uses the noise streams of `(seed, r)`, so the output does
/// not depend on the thread count.
#[allow(clippy::too_many_arguments)]
pub fn simulate_ensemble(
    basis: &SpectralBasis,
    alpha: f64,
    u0: &[f64],
    t_grid: &[f64],
    seed: u64,
    replicas: usize,
    vertices: &[usize],
    noise: Noise,
) -> Result<FieldEnsemble> {
    check_grid(t_grid)?;
    let phi = DMatrix::from_fn(vertices.len(), basis.len(), |i, k| basis.eigenvectors()[(vertices[i], k)]);
    let samples = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let streams = NoiseStreams::new(seed, r as u64, Purpose::Noise);
            let traj = simulate_coefficients(basis, alpha, u0, t_grid, &streams, noise)?;
            let values = &phi * traj.coefficient_matrix();
            Ok((0..t_grid.len())
                .map(|i| values.column(i).iter().copied().collect())
                .collect())
        })
        .collect::<Result<Vec<Vec<Vec<f64>>>>>()?;
    Ok(FieldEnsemble {
        times: t_grid.to_vec(),
        vertices: vertices.to_vec(),
        samples,
    })
}
