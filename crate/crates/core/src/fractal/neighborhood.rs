use std::collections::BTreeSet;

use super::{level_partition, CellComplex, Partition, PcfStructure, VertexAddress, Word};
use crate::{Error, Result};

/// `0` for `D^0_n(x)`, `1` for `D^1_n(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborhoodOrder {
    Zero,
    One,
}

impl TryFrom<u8> for NeighborhoodOrder {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(NeighborhoodOrder::Zero),
            1 => Ok(NeighborhoodOrder::One),
            _ => Err(Error::InvalidArgument(format!("neighbourhood order must be 0 or 1, got {v}"))),
        }
    }
}

/// Partition words whose cells make up a neighbourhood of `owner`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellAddressSet {
    pub level: usize,
    pub owner: VertexAddress,
    pub words: Vec<Word>,
}

/// `Λ_n` together with a cell complex deep enough to decide membership
/// and intersection of its cells.
#[derive(Debug, Clone)]
pub struct Neighborhoods {
    level: usize,
    partition: Partition,
    complex: CellComplex,
    /// vertex ids of each partition cell, aligned with `partition.words()`
    cell_vertices: Vec<Vec<usize>>,
    /// partition index of the word extended by each complex cell
    owner: Vec<usize>,
}

impl Neighborhoods {
    /// Prepares level-`n` neighbourhoods on a complex of depth at least
    /// `min_depth` (and at least the longest word of `Λ_n`).
    pub fn new(structure: &PcfStructure, n: usize, min_depth: usize) -> Result<Self> {
        let partition = level_partition(structure, n);
        let depth = partition.max_word_len().max(min_depth);
        let complex = CellComplex::build(structure, depth)?;
        Ok(Self::with_complex(partition, complex, n))
    }

    fn with_complex(partition: Partition, complex: CellComplex, level: usize) -> Self {
        let cell_vertices = partition
            .words()
            .iter()
            .map(|w| complex.cell_vertices(w))
            .collect();
        let mut owner = vec![usize::MAX; complex.cell_count()];
        for (i, w) in partition.words().iter().enumerate() {
            for c in complex.cell_range(w) {
                owner[c] = i;
            }
        }
        Neighborhoods {
            level,
            partition,
            complex,
            cell_vertices,
            owner,
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn complex(&self) -> &CellComplex {
        &self.complex
    }

    /// Indices (into the partition) of cells containing the vertex.
    pub fn order_zero(&self, vertex: usize) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .complex
            .incident_cells(vertex)
            .iter()
            .map(|&c| self.owner[c])
            .collect();
        set.into_iter().collect()
    }

    /// Indices of cells meeting `D^0_n(vertex)`. Two cells of a partition
    /// can only meet at vertices of the complex, so a shared vertex decides.
    pub fn order_one(&self, vertex: usize) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .order_zero(vertex)
            .into_iter()
            .flat_map(|i| self.cell_vertices[i].iter())
            .flat_map(|&v| self.complex.incident_cells(v).iter().map(|&c| self.owner[c]))
            .collect();
        set.into_iter().collect()
    }

    /// Vertex ids of `D^i_n(vertex)` on the underlying complex.
    pub fn vertices_of(&self, cells: &[usize]) -> Vec<usize> {
        let set: BTreeSet<usize> = cells
            .iter()
            .flat_map(|&i| self.cell_vertices[i].iter().copied())
            .collect();
        set.into_iter().collect()
    }

    /// Vertex ids of `F^n_Λ`, the corners of the partition cells.
    pub fn partition_vertices(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .partition
            .words()
            .iter()
            .flat_map(|w| {
                (0..self.complex.boundary_size()).map(move |p| VertexAddress::new(w.clone(), p))
            })
            .map(|a| self.complex.locate(&a).expect("partition words fit the complex"))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn set(&self, vertex: usize, order: NeighborhoodOrder) -> CellAddressSet {
        let idx = match order {
            NeighborhoodOrder::Zero => self.order_zero(vertex),
            NeighborhoodOrder::One => self.order_one(vertex),
        };
        CellAddressSet {
            level: self.level,
            owner: self.complex.address(vertex).clone(),
            words: idx.into_iter().map(|i| self.partition.words()[i].clone()).collect(),
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }
}

/// `{w ∈ Λ_n : F_w ∋ x}` (order 0) or `{w ∈ Λ_n : F_w ∩ D^0_n(x) ≠ ∅}` (order 1).
pub fn neighborhood(
    structure: &PcfStructure,
    n: usize,
    x: &VertexAddress,
    order: NeighborhoodOrder,
) -> Result<CellAddressSet> {
    x.word.validate(structure.alphabet())?;
    if x.point >= structure.boundary_size() {
        return Err(Error::UnrealizableAddress(format!(
            "{x}: boundary index out of range"
        )));
    }
    let hoods = Neighborhoods::new(structure, n, x.word.len())?;
    let v = hoods.complex.locate(x)?;
    let mut set = hoods.set(v, order);
    set.owner = x.clone();
    Ok(set)
}
