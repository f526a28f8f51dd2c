//! Level-`m` electrical networks approximating the Dirichlet form.
//!
//! The stiffness matrix is `C = -Σ_{w ∈ W_m} r_w^{-1} A0|_w`, i.e. every
//! level-`m` cell contributes a copy of the boundary network scaled by the
//! inverse of its resistance factor. `C` is positive semidefinite with zero
//! row sums; the energy of `f` is `fᵀ C f`.

mod green;
mod homogeneity;
mod resistance;
mod trace;

pub use green::{green_function, GreenFunction};
pub use homogeneity::{homogeneity_scan, HomogeneityRow};
pub use resistance::{effective_resistance, ResistanceSolver};
pub use trace::{network_trace, schur_complement, verify_harmonic_structure, HarmonicCheck};

use nalgebra::DMatrix;
use std::collections::HashMap;
use std::fmt::Write as _;

use crate::fractal::{CellComplex, PcfStructure, Word};
use crate::{BoundaryCondition, Result};

/// Edge with conductance (inverse resistance).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub conductance: f64,
}

/// Level-`m` network: canonical vertices, conductances, lumped masses.
#[derive(Debug, Clone)]
pub struct ApproximationNetwork {
    name: String,
    complex: CellComplex,
    edges: Vec<Edge>,
    degree: Vec<f64>,
    mass: Vec<f64>,
    bc: BoundaryCondition,
}

/// Assembles the level-`m` network of a structure.
///
/// Masses are lumped: each level-`m` cell spreads `μ(F_w)` evenly over its
/// `|F^0|` corners.
pub fn build_network(
    structure: &PcfStructure,
    level: usize,
    bc: BoundaryCondition,
) -> Result<ApproximationNetwork> {
    let complex = CellComplex::build(structure, level)?;
    let m = structure.alphabet();
    let nb = structure.boundary_size();
    let a0 = structure.a0();
    let d_h = structure.hausdorff_dim();
    let n = complex.vertex_count();
    let mut conductances: HashMap<(usize, usize), f64> = HashMap::new();
    let mut mass = vec![0.0; n];
    for (idx, corners) in complex.cells().iter().enumerate() {
        let w = Word::from_index(idx, level, m);
        let rw = structure.resistance_scale(&w);
        let share = rw.powf(d_h) / nb as f64;
        for a in 0..nb {
            mass[corners[a]] += share;
            for b in (a + 1)..nb {
                let c = a0[(a, b)];
                if c == 0.0 {
                    continue;
                }
                let (u, v) = (corners[a], corners[b]);
                if u == v {
                    continue;
                }
                let key = (u.min(v), u.max(v));
                *conductances.entry(key).or_insert(0.0) += c / rw;
            }
        }
    }
    let mut edges: Vec<Edge> = conductances
        .into_iter()
        .map(|((a, b), conductance)| Edge { a, b, conductance })
        .collect();
    edges.sort_by(|x, y| (x.a, x.b).cmp(&(y.a, y.b)));
    let mut degree = vec![0.0; n];
    for e in &edges {
        degree[e.a] += e.conductance;
        degree[e.b] += e.conductance;
    }
    assert!(mass.iter().all(|&x| x > 0.0), "every vertex lies in a cell");
    Ok(ApproximationNetwork {
        name: structure.name().to_string(),
        complex,
        edges,
        degree,
        mass,
        bc,
    })
}

impl ApproximationNetwork {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn level(&self) -> usize {
        self.complex.level()
    }

    pub fn complex(&self) -> &CellComplex {
        &self.complex
    }

    pub fn vertex_count(&self) -> usize {
        self.complex.vertex_count()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn boundary_condition(&self) -> BoundaryCondition {
        self.bc
    }

    /// Vertex ids of `F^0`.
    pub fn boundary_ids(&self) -> &[usize] {
        self.complex.boundary()
    }

    /// Vertices that carry degrees of freedom under the boundary condition.
    pub fn free_vertices(&self, bc: BoundaryCondition) -> Vec<usize> {
        match bc {
            BoundaryCondition::Neumann => (0..self.vertex_count()).collect(),
            BoundaryCondition::Dirichlet => (0..self.vertex_count())
                .filter(|v| !self.complex.is_boundary(*v))
                .collect(),
        }
    }

    /// Dense stiffness (graph Laplacian) matrix `C`.
    pub fn stiffness(&self) -> DMatrix<f64> {
        let n = self.vertex_count();
        let mut c = DMatrix::zeros(n, n);
        for (i, d) in self.degree.iter().enumerate() {
            c[(i, i)] = *d;
        }
        for e in &self.edges {
            c[(e.a, e.b)] -= e.conductance;
            c[(e.b, e.a)] -= e.conductance;
        }
        c
    }

    /// `C` restricted to the given vertex list (rows and columns in order).
    pub fn stiffness_restricted(&self, vertices: &[usize]) -> DMatrix<f64> {
        let n = self.vertex_count();
        let mut pos = vec![usize::MAX; n];
        for (i, &v) in vertices.iter().enumerate() {
            pos[v] = i;
        }
        let k = vertices.len();
        let mut c = DMatrix::zeros(k, k);
        for (i, &v) in vertices.iter().enumerate() {
            c[(i, i)] = self.degree[v];
        }
        for e in &self.edges {
            let (i, j) = (pos[e.a], pos[e.b]);
            if i != usize::MAX && j != usize::MAX {
                c[(i, j)] -= e.conductance;
                c[(j, i)] -= e.conductance;
            }
        }
        c
    }

    /// Energy `fᵀ C f`.
    pub fn energy(&self, f: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|e| e.conductance * (f[e.a] - f[e.b]).powi(2))
            .sum()
    }

    /// `C f`, computed from the edge list.
    pub fn apply_stiffness(&self, f: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.degree.iter().zip(f).map(|(d, x)| d * x).collect();
        for e in &self.edges {
            out[e.a] -= e.conductance * f[e.b];
            out[e.b] -= e.conductance * f[e.a];
        }
        out
    }

    /// Debug export: one `vertex`, `edge` or `boundary` record per line.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# network {} level {} vertices {} edges {}",
            self.name,
            self.level(),
            self.vertex_count(),
            self.edges.len()
        );
        for v in 0..self.vertex_count() {
            let _ = write!(s, "vertex {v} {:.17e} {}", self.mass[v], self.complex.address(v));
            if let (Some(c), Some(den)) = (self.complex.coords(v), self.complex.denominator()) {
                let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                let _ = write!(s, " {}/{den}", parts.join(","));
            }
            s.push('\n');
        }
        for e in &self.edges {
            let _ = writeln!(s, "edge {} {} {:.17e}", e.a, e.b, e.conductance);
        }
        let ids: Vec<String> = self.boundary_ids().iter().map(|b| b.to_string()).collect();
        let _ = writeln!(s, "boundary {}", ids.join(" "));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interval_level_one() {
        let s = PcfStructure::interval(2).unwrap();
        let net = build_network(&s, 1, BoundaryCondition::Neumann).unwrap();
        assert_eq!(net.vertex_count(), 3);
        assert_eq!(net.edges().len(), 2);
        for e in net.edges() {
            assert_relative_eq!(e.conductance, 2.0);
        }
    }

    #[test]
    fn gasket_level_one() {
        let s = PcfStructure::gasket(2).unwrap();
        let net = build_network(&s, 1, BoundaryCondition::Neumann).unwrap();
        assert_eq!(net.vertex_count(), 6);
        assert_eq!(net.edges().len(), 9);
        for e in net.edges() {
            assert_relative_eq!(e.conductance, 5.0 / 3.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn level_zero_is_a0() {
        let s = PcfStructure::gasket(3).unwrap();
        let net = build_network(&s, 0, BoundaryCondition::Neumann).unwrap();
        let c = net.stiffness();
        let a0 = s.a0();
        for i in 0..4 {
            for j in 0..4 {
                assert_relative_eq!(c[(i, j)], -a0[(i, j)], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn stiffness_invariants_and_mass() {
        for s in [PcfStructure::gasket(2).unwrap(), PcfStructure::interval(3).unwrap()] {
            let net = build_network(&s, 3, BoundaryCondition::Dirichlet).unwrap();
            let c = net.stiffness();
            for i in 0..net.vertex_count() {
                assert!(c.row(i).iter().sum::<f64>().abs() < 1e-10);
                for j in 0..net.vertex_count() {
                    assert_eq!(c[(i, j)], c[(j, i)]);
                    if i != j {
                        assert!(c[(i, j)] <= 0.0);
                    }
                }
            }
            assert!((net.mass().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let f: Vec<f64> = (0..net.vertex_count()).map(|i| (i as f64 * 0.37).sin()).collect();
            let cf = c.clone() * nalgebra::DVector::from_vec(f.clone());
            let applied = net.apply_stiffness(&f);
            for i in 0..f.len() {
                assert_relative_eq!(cf[i], applied[i], epsilon = 1e-9);
            }
            let energy: f64 = f.iter().zip(applied.iter()).map(|(a, b)| a * b).sum();
            assert_relative_eq!(energy, net.energy(&f), epsilon = 1e-9);
        }
    }

    #[test]
    fn gasket_masses() {
        let s = PcfStructure::gasket(2).unwrap();
        let net = build_network(&s, 1, BoundaryCondition::Neumann).unwrap();
        for v in 0..6 {
            let expected = if net.boundary_ids().contains(&v) { 1.0 / 9.0 } else { 2.0 / 9.0 };
            assert_relative_eq!(net.mass()[v], expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn edge_list_export() {
        let s = PcfStructure::interval(2).unwrap();
        let net = build_network(&s, 1, BoundaryCondition::Dirichlet).unwrap();
        let text = net.to_edge_list();
        assert!(text.starts_with("# network interval(2) level 1 vertices 3 edges 2"));
        assert_eq!(text.lines().filter(|l| l.starts_with("edge")).count(), 2);
        assert!(text.contains("boundary"));
    }
}
