use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::she::{default_truncation, NoiseStreams, Purpose, stationary_temporal_variance, FieldEnsemble, ZERO_RATE};
use crate::spectral::SpectralBasis;
use crate::{Error, Result};

pub const MIN_REPLICAS: usize = 1000;
pub const MIN_PAIRS_PER_BIN: usize = 30;

/// How increments are grouped.
#[derive(Debug, Clone, Copy)]
pub enum ScanMode<'a> {
    /// Pairs of ensemble vertices at one time, binned logarithmically in
    /// `R`. `resistance` is indexed by network vertex ids.
    Spatial {
        time_index: usize,
        resistance: &'a DMatrix<f64>,
        bins: usize,
    },
    /// Lags `t_j - t_base` for every later grid time, pooled over the
    /// ensemble vertices.
    Temporal { base_index: usize },
}

/// Empirical increment moments for one bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRow {
    /// geometric mean of `R` over the bin, or the lag
    pub abscissa: f64,
    /// mean of `Δ²`
    pub second: f64,
    /// mean of `Δ⁴`
    pub fourth: f64,
    /// number of increments averaged
    pub count: usize,
}

impl MomentRow {
    pub fn pair(&self) -> (f64, f64) {
        (self.abscissa, self.second)
    }
}

pub fn increment_moment_scan(ensemble: &FieldEnsemble, mode: ScanMode<'_>) -> Result<Vec<MomentRow>> {
    let n = ensemble.replicas();
    if n < MIN_REPLICAS {
        return Err(Error::TooFewReplicas {
            got: n,
            needed: MIN_REPLICAS,
        });
    }
    match mode {
        ScanMode::Spatial {
            time_index,
            resistance,
            bins,
        } => spatial_scan(ensemble, time_index, resistance, bins),
        ScanMode::Temporal { base_index } => temporal_scan(ensemble, base_index),
    }
}

fn spatial_scan(e: &FieldEnsemble, ti: usize, r: &DMatrix<f64>, bins: usize) -> Result<Vec<MomentRow>> {
    if ti >= e.times.len() {
        return Err(Error::InvalidArgument(format!("time index {ti} out of range")));
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("need at least one bin".into()));
    }
    let nv = e.vertices.len();
    if let Some(&v) = e.vertices.iter().find(|&&v| v >= r.nrows() || v >= r.ncols()) {
        return Err(Error::InvalidArgument(format!("no resistance row for vertex {v}")));
    }
    let pairs: Vec<(usize, usize, f64)> = (0..nv)
        .flat_map(|i| (i + 1..nv).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, r[(e.vertices[i], e.vertices[j])]))
        .filter(|p| p.2 > 0.0)
        .collect();
    if pairs.is_empty() {
        return Ok(Vec::new());
    }
    // per-pair sums over replicas, each accumulated sequentially so the
    // result does not depend on scheduling
    let sums: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|&(i, j, _)| {
            e.samples.iter().fold((0.0, 0.0), |(s2, s4), rep| {
                let d = rep[ti][i] - rep[ti][j];
                let d2 = d * d;
                (s2 + d2, s4 + d2 * d2)
            })
        })
        .collect();
    let lo = pairs.iter().map(|p| p.2).fold(f64::INFINITY, f64::min).ln();
    let hi = pairs.iter().map(|p| p.2).fold(0.0, f64::max).ln();
    let width = ((hi - lo) / bins as f64).max(f64::MIN_POSITIVE);
    let mut acc = vec![(0usize, 0.0, 0.0, 0.0); bins];
    for (p, s) in pairs.iter().zip(&sums) {
        let b = (((p.2.ln() - lo) / width) as usize).min(bins - 1);
        let a = &mut acc[b];
        a.0 += 1;
        a.1 += p.2.ln();
        a.2 += s.0;
        a.3 += s.1;
    }
    let reps = e.replicas() as f64;
    Ok(acc
        .into_iter()
        .filter(|a| a.0 >= MIN_PAIRS_PER_BIN)
        .map(|(c, lsum, s2, s4)| {
            let m = c as f64 * reps;
            MomentRow {
                abscissa: (lsum / c as f64).exp(),
                second: s2 / m,
                fourth: s4 / m,
                count: c * e.replicas(),
            }
        })
        .collect())
}

fn temporal_scan(e: &FieldEnsemble, base: usize) -> Result<Vec<MomentRow>> {
    if base >= e.times.len() {
        return Err(Error::InvalidArgument(format!("base index {base} out of range")));
    }
    let nv = e.vertices.len();
    Ok((base + 1..e.times.len())
        .into_par_iter()
        .map(|j| {
            let (s2, s4) = e.samples.iter().fold((0.0, 0.0), |acc, rep| {
                (0..nv).fold(acc, |(s2, s4), v| {
                    let d = rep[j][v] - rep[base][v];
                    let d2 = d * d;
                    (s2 + d2, s4 + d2 * d2)
                })
            });
            let m = (nv * e.replicas()) as f64;
            MomentRow {
                abscissa: e.times[j] - e.times[base],
                second: s2 / m,
                fourth: s4 / m,
                count: nv * e.replicas(),
            }
        })
        .collect())
}

fn positive_modes(basis: &SpectralBasis) -> Vec<f64> {
    basis.eigenvalues().iter().copied().filter(|&l| l >= ZERO_RATE).collect()
}

/// Lags `[1/λ_K, 1/λ_10]` over which the temporal moment follows its power
/// law, with `K` the default truncation of the basis.
///
/// Eigenvalues near the top of a level-`m` spectrum are distorted by the
/// mesh, so the lower end uses the trusted modes only; the moment curve
/// itself should still be summed over every computed mode.
pub fn temporal_window(basis: &SpectralBasis) -> Result<(f64, f64)> {
    let k = default_truncation(basis);
    if k <= 10 {
        return Err(Error::BasisTooSmall {
            needed: 11,
            available: k,
        });
    }
    let (lk, l10) = (basis.eigenvalue(k), basis.eigenvalue(10));
    if !(l10 >= ZERO_RATE) || lk <= l10 {
        return Err(Error::BasisTooSmall {
            needed: 11,
            available: k,
        });
    }
    Ok((1.0 / lk, 1.0 / l10))
}

/// Time after which every non-constant mode is within 1% of stationary
/// variance: `e^{-2λ s} = 0.01` for the smallest positive `λ`.
pub fn burn_in_time(basis: &SpectralBasis) -> Result<f64> {
    let l = positive_modes(basis)
        .first()
        .copied()
        .ok_or_else(|| Error::InvalidArgument("basis has no positive eigenvalue".into()))?;
    Ok(100f64.ln() / (2.0 * l))
}

/// `count` distinct entries of `candidates` drawn uniformly, in the order
/// drawn. All of them when `count` is at least the number of candidates.
pub fn sample_vertices(candidates: &[usize], count: usize, seed: u64) -> Vec<usize> {
    if count >= candidates.len() {
        return candidates.to_vec();
    }
    let mut rng = NoiseStreams::new(seed, 0, Purpose::Sampling).mode(0);
    rand::seq::index::sample(&mut rng, candidates.len(), count)
        .into_iter()
        .map(|i| candidates[i])
        .collect()
}

/// `count` points spaced evenly in `log` from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Stationary temporal variance averaged over `vertices`, at `points`
/// lags spread over [`temporal_window`].
pub fn analytic_temporal_curve(
    basis: &SpectralBasis,
    alpha: f64,
    vertices: &[usize],
    points: usize,
) -> Result<Vec<(f64, f64)>> {
    if vertices.is_empty() {
        return Err(Error::InvalidArgument("no vertices to average over".into()));
    }
    let (lo, hi) = temporal_window(basis)?;
    log_grid(lo, hi, points)
        .into_iter()
        .map(|h| {
            let sum = vertices
                .iter()
                .map(|&x| stationary_temporal_variance(basis, alpha, h, x))
                .sum::<Result<f64>>()?;
            Ok((h, sum / vertices.len() as f64))
        })
        .collect()
}
