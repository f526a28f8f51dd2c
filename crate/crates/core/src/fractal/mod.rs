//! Word spaces, harmonic structures and the self-similar measure.
//!
//! A [`PcfStructure`] bundles the data of a post-critically finite
//! self-similar set together with a regular harmonic structure `(A0, r)`:
//! the number of contractions `M`, the boundary cell `F^0`, the resistance
//! weights, the boundary energy matrix and the combinatorial gluing rules
//! that say which images of boundary points coincide.

mod complex;
mod neighborhood;
mod partition;

pub use complex::{CellComplex, VertexAddress};
pub use neighborhood::{neighborhood, CellAddressSet, NeighborhoodOrder, Neighborhoods};
pub use partition::{
    build_partition, level_partition, verify_refinement, Partition, PartitionKind, PartitionLadder,
};

use nalgebra::DMatrix;
use std::fmt;

use crate::{Error, Result};

/// Finite word over the alphabet `{1, ..., M}`. Letters are stored 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<u16>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word from 1-based letters. Range checks happen against a
    /// structure, see [`Word::validate`].
    pub fn new<I: IntoIterator<Item = usize>>(letters: I) -> Self {
        Word(letters.into_iter().map(|l| l as u16).collect())
    }

    /// Parses compact notation such as `"121"` (single-digit letters) or
    /// `"1.12.3"` (dot separated). The empty string is the empty word.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "∅" {
            return Ok(Word::empty());
        }
        let letters: Option<Vec<u16>> = if s.contains('.') {
            s.split('.').map(|p| p.trim().parse::<u16>().ok()).collect()
        } else {
            s.chars().map(|c| c.to_digit(10).map(|d| d as u16)).collect()
        };
        match letters {
            Some(letters) if letters.iter().all(|&l| l > 0) => Ok(Word(letters)),
            _ => Err(Error::InvalidArgument(format!("cannot parse word {s:?}"))),
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&l| l as usize)
    }

    pub fn letter(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    pub fn child(&self, letter: usize) -> Word {
        let mut v = self.0.clone();
        v.push(letter as u16);
        Word(v)
    }

    pub fn push(&mut self, letter: usize) {
        self.0.push(letter as u16);
    }

    /// True if `self` is a (not necessarily proper) prefix of `other`.
    pub fn is_prefix_of(&self, other: &Word) -> bool {
        self.0.len() <= other.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn validate(&self, alphabet: usize) -> Result<()> {
        for l in self.letters() {
            if l == 0 || l > alphabet {
                return Err(Error::InvalidLetter {
                    letter: l,
                    alphabet,
                });
            }
        }
        Ok(())
    }

    /// Position of the word among all words of the same length in
    /// lexicographic order.
    pub fn index(&self, alphabet: usize) -> usize {
        self.letters().fold(0, |acc, l| acc * alphabet + (l - 1))
    }

    /// Inverse of [`Word::index`].
    pub fn from_index(mut index: usize, len: usize, alphabet: usize) -> Word {
        let mut letters = vec![0u16; len];
        for slot in letters.iter_mut().rev() {
            *slot = (index % alphabet + 1) as u16;
            index /= alphabet;
        }
        Word(letters)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("∅");
        }
        let wide = self.0.iter().any(|&l| l > 9);
        for (i, l) in self.0.iter().enumerate() {
            if wide && i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Identification `ψ_i(q_a) = ψ_j(q_b)` between level-1 boundary images.
/// Cells are 1-based letters, boundary points are 0-based indices into `F^0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gluing {
    pub left: (usize, usize),
    pub right: (usize, usize),
}

/// Exact coordinates available for the preset families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// `[0,1]` cut into `M` equal pieces; coordinates are numerators over `M^level`.
    Interval,
    /// `n`-dimensional gasket; barycentric integer triples over `2^level`.
    Gasket { dim: usize },
}

impl Geometry {
    /// Exact coordinates of `ψ_w(q_a)` scaled by `base^|w|`.
    pub fn point(&self, alphabet: usize, word: &Word, point: usize) -> Vec<u64> {
        match *self {
            Geometry::Interval => {
                let mut num = point as u64;
                let mut scale = 1u64;
                for l in word.0.iter().rev() {
                    num += (*l as u64 - 1) * scale;
                    scale *= alphabet as u64;
                }
                vec![num]
            }
            Geometry::Gasket { dim } => {
                let mut p = vec![0u64; dim + 1];
                p[point] = 1;
                let mut scale = 1u64;
                for l in word.0.iter().rev() {
                    p[*l as usize - 1] += scale;
                    scale *= 2;
                }
                p
            }
        }
    }

    /// Denominator of coordinates at the given level.
    pub fn denominator(&self, alphabet: usize, level: usize) -> u64 {
        match self {
            Geometry::Interval => (alphabet as u64).pow(level as u32),
            Geometry::Gasket { .. } => 2u64.pow(level as u32),
        }
    }
}

/// A p.c.f. self-similar set with a harmonic structure `(A0, r)`.
///
/// `A0` follows the sign convention of a generator: nonnegative
/// off-diagonal entries, rows summing to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PcfStructure {
    name: String,
    weights: Vec<f64>,
    a0: DMatrix<f64>,
    gluing: Vec<Gluing>,
    boundary_images: Vec<(usize, usize)>,
    geometry: Option<Geometry>,
    hausdorff_dim: f64,
    spectral_dim: f64,
}

impl PcfStructure {
    /// Validates and assembles a structure.
    ///
    /// `boundary_images[c] = (i, a)` declares `q_c = ψ_i(q_a)`; it is how a
    /// boundary point is located inside the level-1 cells.
    pub fn new(
        name: impl Into<String>,
        weights: Vec<f64>,
        a0: DMatrix<f64>,
        gluing: Vec<Gluing>,
        boundary_images: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let m = weights.len();
        if m < 2 {
            return Err(Error::InvalidStructure(format!(
                "need at least 2 contractions, got {m}"
            )));
        }
        let nb = a0.nrows();
        if nb < 2 || a0.ncols() != nb {
            return Err(Error::InvalidStructure(
                "A0 must be square with at least 2 boundary points".into(),
            ));
        }
        check_a0(&a0)?;
        for g in &gluing {
            for &(cell, pt) in [&g.left, &g.right] {
                if cell == 0 || cell > m || pt >= nb {
                    return Err(Error::InvalidStructure(format!(
                        "gluing refers to ψ_{cell}(q_{pt}) outside {m} cells × {nb} points"
                    )));
                }
            }
        }
        if boundary_images.len() != nb {
            return Err(Error::InvalidStructure(format!(
                "expected {nb} boundary images, got {}",
                boundary_images.len()
            )));
        }
        for &(cell, pt) in &boundary_images {
            if cell == 0 || cell > m || pt >= nb {
                return Err(Error::InvalidStructure(format!(
                    "boundary image ψ_{cell}(q_{pt}) out of range"
                )));
            }
        }
        let hausdorff_dim = solve_hausdorff_dimension(&weights)?;
        let spectral_dim = spectral_dimension(hausdorff_dim)?;
        Ok(PcfStructure {
            name: name.into(),
            weights,
            a0,
            gluing,
            boundary_images,
            geometry: None,
            hausdorff_dim,
            spectral_dim,
        })
    }

    /// The unit interval split into `M` equal pieces, `r_i = 1/M`.
    pub fn interval(pieces: usize) -> Result<Self> {
        if pieces < 2 {
            return Err(Error::InvalidStructure(
                "interval needs at least 2 pieces".into(),
            ));
        }
        let a0 = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]);
        let gluing = (1..pieces)
            .map(|i| Gluing {
                left: (i, 1),
                right: (i + 1, 0),
            })
            .collect();
        let mut s = PcfStructure::new(
            format!("interval({pieces})"),
            vec![1.0 / pieces as f64; pieces],
            a0,
            gluing,
            vec![(1, 0), (pieces, 1)],
        )?;
        s.geometry = Some(Geometry::Interval);
        Ok(s)
    }

    /// Standard harmonic structure on the `n`-dimensional Sierpinski gasket:
    /// `M = n + 1`, `r_i = (n+1)/(n+3)`.
    pub fn gasket(dim: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidStructure("gasket dimension must be >= 1".into()));
        }
        let m = dim + 1;
        let a0 = DMatrix::from_fn(m, m, |i, j| if i == j { -(dim as f64) } else { 1.0 });
        let mut gluing = Vec::new();
        for i in 0..m {
            for j in (i + 1)..m {
                gluing.push(Gluing {
                    left: (i + 1, j),
                    right: (j + 1, i),
                });
            }
        }
        let r = (dim as f64 + 1.0) / (dim as f64 + 3.0);
        let mut s = PcfStructure::new(
            format!("gasket({dim})"),
            vec![r; m],
            a0,
            gluing,
            (0..m).map(|c| (c + 1, c)).collect(),
        )?;
        s.geometry = Some(Geometry::Gasket { dim });
        Ok(s)
    }

    /// Resolves a preset name: `interval(M)` or `gasket(n)`.
    pub fn preset(name: &str) -> Result<Self> {
        let name = name.trim();
        let parse_arg = |prefix: &str| -> Option<usize> {
            name.strip_prefix(prefix)?
                .strip_suffix(')')?
                .trim()
                .parse()
                .ok()
        };
        if let Some(m) = parse_arg("interval(") {
            PcfStructure::interval(m)
        } else if let Some(n) = parse_arg("gasket(") {
            PcfStructure::gasket(n)
        } else {
            Err(Error::InvalidArgument(format!("unknown preset {name:?}")))
        }
    }

    /// Same combinatorics and `A0` with different weights. The result may
    /// fail [`crate::network::verify_harmonic_structure`].
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.weights.len() {
            return Err(Error::InvalidStructure(format!(
                "expected {} weights, got {}",
                self.weights.len(),
                weights.len()
            )));
        }
        let mut s = PcfStructure::new(
            format!("{}[r={:?}]", self.name, weights),
            weights,
            self.a0.clone(),
            self.gluing.clone(),
            self.boundary_images.clone(),
        )?;
        s.geometry = self.geometry;
        Ok(s)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of contractions `M`.
    pub fn alphabet(&self) -> usize {
        self.weights.len()
    }

    /// `|F^0|`.
    pub fn boundary_size(&self) -> usize {
        self.a0.nrows()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn a0(&self) -> &DMatrix<f64> {
        &self.a0
    }

    pub fn gluing(&self) -> &[Gluing] {
        &self.gluing
    }

    pub fn boundary_images(&self) -> &[(usize, usize)] {
        &self.boundary_images
    }

    pub fn geometry(&self) -> Option<Geometry> {
        self.geometry
    }

    pub fn hausdorff_dim(&self) -> f64 {
        self.hausdorff_dim
    }

    pub fn spectral_dim(&self) -> f64 {
        self.spectral_dim
    }

    pub fn r_min(&self) -> f64 {
        self.weights.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn r_max(&self) -> f64 {
        self.weights.iter().cloned().fold(0.0, f64::max)
    }

    /// `r_w`, the product of the weights along `w`.
    pub fn resistance_scale(&self, w: &Word) -> f64 {
        w.letters().map(|l| self.weights[l - 1]).product()
    }

    /// `μ(F_w) = r_w^{d_H}`.
    pub fn cell_measure(&self, w: &Word) -> Result<f64> {
        w.validate(self.alphabet())?;
        Ok(w
            .letters()
            .map(|l| self.weights[l - 1].powf(self.hausdorff_dim))
            .product())
    }
}

fn check_a0(a0: &DMatrix<f64>) -> Result<()> {
    let n = a0.nrows();
    for i in 0..n {
        let row_sum: f64 = a0.row(i).iter().sum();
        if row_sum.abs() > 1e-12 {
            return Err(Error::InvalidStructure(format!(
                "A0 row {i} sums to {row_sum}, expected 0"
            )));
        }
        for j in 0..n {
            if (a0[(i, j)] - a0[(j, i)]).abs() > 1e-12 {
                return Err(Error::InvalidStructure("A0 is not symmetric".into()));
            }
            if i != j && a0[(i, j)] < 0.0 {
                return Err(Error::InvalidStructure(format!(
                    "A0[{i},{j}] = {} is negative",
                    a0[(i, j)]
                )));
            }
        }
    }
    // irreducibility: the positive off-diagonal pattern must be connected
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if !seen[j] && a0[(i, j)] > 0.0 {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidStructure("A0 is reducible".into()));
    }
    Ok(())
}

/// The unique `s` with `Σ r_i^s = 1`, by bisection on `[1e-6, 64]`.
pub fn solve_hausdorff_dimension(weights: &[f64]) -> Result<f64> {
    if weights.len() < 2 {
        return Err(Error::InvalidStructure(
            "need at least 2 weights".into(),
        ));
    }
    for (index, &value) in weights.iter().enumerate() {
        if !(value > 0.0 && value < 1.0) {
            return Err(Error::WeightOutOfRange { index, value });
        }
    }
    let f = |s: f64| weights.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (1e-6_f64, 64.0_f64);
    // f is strictly decreasing; f(lo) > 0 always since M >= 2
    if f(hi) > 0.0 {
        return Err(Error::NonConvergence { residual: f(hi) });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let s = 0.5 * (lo + hi);
    let residual = f(s);
    if residual.abs() > 1e-12 {
        return Err(Error::NonConvergence { residual });
    }
    Ok(s)
}

/// `d_s = 2 d_H / (d_H + 1)`.
pub fn spectral_dimension(hausdorff_dim: f64) -> Result<f64> {
    if !(hausdorff_dim > 0.0) || !hausdorff_dim.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Hausdorff dimension must be positive, got {hausdorff_dim}"
        )));
    }
    Ok(2.0 * hausdorff_dim / (hausdorff_dim + 1.0))
}
