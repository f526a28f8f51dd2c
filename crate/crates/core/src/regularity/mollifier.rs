use std::collections::BTreeMap;

use crate::fractal::{level_partition, PcfStructure, Word};
use crate::network::ApproximationNetwork;
use crate::she::ou_variance;
use crate::spectral::SpectralBasis;
use crate::stats::{line_fit, LineFit};
use crate::{Error, Result};

/// Mean-square gap between the mollified pairing and the point value,
/// per neighbourhood level.
#[derive(Debug, Clone, PartialEq)]
pub struct MollifierCheck {
    pub levels: Vec<usize>,
    pub gaps: Vec<f64>,
    /// fit of `ln gap` against `n`
    pub fit: LineFit,
}

impl MollifierCheck {
    /// Fitted factor by which the gap shrinks per level.
    pub fn decay_factor(&self) -> f64 {
        self.fit.slope.exp()
    }

    /// Fitted rate `-d ln gap / dn`.
    pub fn rate(&self) -> f64 {
        -self.fit.slope
    }

    /// Whether the gap shrinks at least like `2^{-n}`.
    pub fn at_least_dyadic(&self) -> bool {
        self.rate() >= std::f64::consts::LN_2
    }
}

/// Quadrature weights of `𝟙_{D^0_n(x)}` on the network vertices: each
/// level-`m` cell inside the neighbourhood sends `μ(cell)/|F^0|` to each of
/// its corners.
fn mollifier_weights(
    structure: &PcfStructure,
    net: &ApproximationNetwork,
    x: usize,
    n: usize,
) -> Result<BTreeMap<usize, f64>> {
    let complex = net.complex();
    let m = complex.level();
    let partition = level_partition(structure, n);
    if partition.max_word_len() > m {
        return Err(Error::InvalidArgument(format!(
            "Λ_{n} has words of length {} beyond the network level {m}",
            partition.max_word_len()
        )));
    }
    let corners = complex.boundary_size() as f64;
    let mut weights = BTreeMap::new();
    for w in partition.words().iter().filter(|w| complex.cell_contains(w, x)) {
        for c in complex.cell_range(w) {
            let mu = structure.cell_measure(&Word::from_index(c, m, complex.alphabet()))? / corners;
            for &v in complex.cell(c) {
                *weights.entry(v).or_insert(0.0) += mu;
            }
        }
    }
    Ok(weights)
}

/// `E[(⟨u(t), f^x_n⟩ - u(t,x))²] = Σ_k (1+λ_k)^{-α} v_k(t) (⟨φ_k, f^x_n⟩ - φ_k(x))²`
/// for `u₀ = 0`.
pub fn mollifier_gap(
    structure: &PcfStructure,
    net: &ApproximationNetwork,
    basis: &SpectralBasis,
    alpha: f64,
    t: f64,
    x: usize,
    n: usize,
) -> Result<f64> {
    if basis.level() != net.level() || basis.vertex_count() != net.vertex_count() {
        return Err(Error::InvalidArgument("basis and network levels differ".into()));
    }
    if x >= net.vertex_count() {
        return Err(Error::InvalidArgument(format!("vertex {x} out of range")));
    }
    let weights = mollifier_weights(structure, net, x, n)?;
    let total: f64 = weights.values().sum();
    let phi = basis.eigenvectors();
    Ok(basis
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            let avg = weights.iter().map(|(&v, w)| w * phi[(v, k)]).sum::<f64>() / total;
            (1.0 + l).powf(-alpha) * ou_variance(l, t) * (avg - phi[(x, k)]).powi(2)
        })
        .sum())
}

/// Gaps at every level in `levels` and their exponential decay fit.
#[allow(clippy::too_many_arguments)]
pub fn mollifier_decay_check(
    structure: &PcfStructure,
    net: &ApproximationNetwork,
    basis: &SpectralBasis,
    alpha: f64,
    t: f64,
    x: usize,
    levels: &[usize],
) -> Result<MollifierCheck> {
    if levels.len() < 2 {
        return Err(Error::DegenerateFit("need at least two levels".into()));
    }
    let gaps = levels
        .iter()
        .map(|&n| mollifier_gap(structure, net, basis, alpha, t, x, n))
        .collect::<Result<Vec<f64>>>()?;
    if let Some(g) = gaps.iter().find(|g| !(**g > 0.0)) {
        return Err(Error::DegenerateFit(format!("nonpositive gap {g}")));
    }
    let ns: Vec<f64> = levels.iter().map(|&n| n as f64).collect();
    let logs: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
    Ok(MollifierCheck {
        levels: levels.to_vec(),
        gaps,
        fit: line_fit(&ns, &logs),
    })
}
