use super::{build_network, ResistanceSolver};
use crate::fractal::{Neighborhoods, PcfStructure};
use crate::{BoundaryCondition, Result};

/// One level of the homogeneity scan.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneityRow {
    pub level: usize,
    /// number of vertices of `F^n_Λ` scanned
    pub vertices: usize,
    /// `min_x inner(n, x) · 2^n`; infinite when every `D¹_n(x)` is all of `F^n_Λ`
    pub min_inner_scaled: f64,
    /// `max_x outer(n, x) · 2^n`
    pub max_outer_scaled: f64,
    /// largest `|D¹_n(x)|` seen
    pub max_neighbourhood: usize,
}

/// For each `n ≤ max_level` compares `D¹_n(x)` with resistance balls around
/// every vertex `x` of `F^n_Λ`.
///
/// `inner(n, x)` is the distance from `x` to the nearest vertex of `F^n_Λ`
/// outside `D¹_n(x)`, which is the largest radius of an open ball whose
/// trace on `F^n_Λ` stays inside the neighbourhood. `outer(n, x)` is the
/// largest distance from `x` to a vertex of `D¹_n(x)`.
///
/// Resistances are all-pairs on the complex deep enough to hold `Λ_n`,
/// so this is meant for small levels (gasket up to 5).
pub fn homogeneity_scan(structure: &PcfStructure, max_level: usize) -> Result<Vec<HomogeneityRow>> {
    let mut rows = Vec::with_capacity(max_level + 1);
    for n in 0..=max_level {
        let hoods = Neighborhoods::new(structure, n, 0)?;
        let net = build_network(structure, hoods.complex().level(), BoundaryCondition::Neumann)?;
        let r = ResistanceSolver::new(&net)?.all_pairs();
        let fv = hoods.partition_vertices();
        let mut in_fv = vec![false; net.vertex_count()];
        for &v in &fv {
            in_fv[v] = true;
        }
        let scale = 2f64.powi(n as i32);
        let mut min_inner = f64::INFINITY;
        let mut max_outer = 0.0f64;
        let mut max_hood = 0;
        for &x in &fv {
            let cells = hoods.order_one(x);
            max_hood = max_hood.max(cells.len());
            let inside = hoods.vertices_of(&cells);
            let mut member = vec![false; net.vertex_count()];
            for &v in &inside {
                member[v] = true;
                if in_fv[v] {
                    max_outer = max_outer.max(r[(x, v)] * scale);
                }
            }
            for &z in &fv {
                if !member[z] {
                    min_inner = min_inner.min(r[(x, z)] * scale);
                }
            }
        }
        rows.push(HomogeneityRow {
            level: n,
            vertices: fv.len(),
            min_inner_scaled: min_inner,
            max_outer_scaled: max_outer,
            max_neighbourhood: max_hood,
        });
    }
    Ok(rows)
}
