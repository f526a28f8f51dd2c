use std::collections::HashMap;
use std::fmt;

use super::{Geometry, PcfStructure, Word};
use crate::{Error, Result};

/// A point `ψ_w(q_point)` of `F_*`, written as a word and a boundary index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexAddress {
    pub word: Word,
    pub point: usize,
}

impl VertexAddress {
    pub fn new(word: Word, point: usize) -> Self {
        VertexAddress { word, point }
    }

    /// Boundary point `q_point` itself.
    pub fn boundary(point: usize) -> Self {
        VertexAddress {
            word: Word::empty(),
            point,
        }
    }
}

impl fmt::Display for VertexAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ψ_{}(q_{})", self.word, self.point)
    }
}

/// Level-`m` cell structure: the vertices of `F^m` and, for every word of
/// length `m`, the vertex ids of its `|F^0|` corners.
///
/// Vertices are identified up to the gluing relation and represented by the
/// lexicographically smallest `(word, point)` pair of their class; vertex ids
/// follow the order of these representatives.
#[derive(Debug, Clone)]
pub struct CellComplex {
    level: usize,
    alphabet: usize,
    boundary_size: usize,
    boundary_images: Vec<(usize, usize)>,
    vertices: Vec<VertexAddress>,
    cells: Vec<Vec<usize>>,
    incidence: Vec<Vec<usize>>,
    boundary: Vec<usize>,
    coords: Option<Vec<Vec<u64>>>,
    geometry: Option<Geometry>,
}

impl CellComplex {
    /// Builds the level-`m` complex. Presets are identified through exact
    /// coordinates, other structures through the combinatorial gluing rules.
    pub fn build(structure: &PcfStructure, level: usize) -> Result<Self> {
        match structure.geometry() {
            Some(g) => Self::build_geometric(structure, level, g),
            None => Self::build_combinatorial(structure, level),
        }
    }

    /// Identification through the propagated gluing relation only.
    pub fn build_combinatorial(structure: &PcfStructure, level: usize) -> Result<Self> {
        let m = structure.alphabet();
        let nb = structure.boundary_size();
        check_level_one_gluing(structure)?;
        let n_cells = checked_cells(m, level)?;
        let mut uf = UnionFind::new(n_cells * nb);
        let slot = |w: &Word, p: usize| w.index(m) * nb + p;
        for k in 0..level {
            for idx in 0..m.pow(k as u32) {
                let prefix = Word::from_index(idx, k, m);
                for g in structure.gluing() {
                    let (wl, pl) = extend(structure, prefix.child(g.left.0), g.left.1, level);
                    let (wr, pr) = extend(structure, prefix.child(g.right.0), g.right.1, level);
                    uf.union(slot(&wl, pl), slot(&wr, pr));
                }
            }
        }
        let roots: Vec<usize> = (0..n_cells * nb).map(|i| uf.find(i)).collect();
        let mut complex = Self::assemble(structure, level, |cell, p| roots[cell * nb + p]);
        complex.geometry = None;
        Ok(complex)
    }

    fn build_geometric(structure: &PcfStructure, level: usize, geometry: Geometry) -> Result<Self> {
        let m = structure.alphabet();
        let nb = structure.boundary_size();
        // declared gluings must agree with the coordinates
        for g in structure.gluing() {
            let l = geometry.point(m, &Word::new([g.left.0]), g.left.1);
            let r = geometry.point(m, &Word::new([g.right.0]), g.right.1);
            if l != r {
                return Err(Error::GluingInconsistency(format!(
                    "ψ_{}(q_{}) and ψ_{}(q_{}) have different coordinates",
                    g.left.0, g.left.1, g.right.0, g.right.1
                )));
            }
        }
        let n_cells = checked_cells(m, level)?;
        let mut keys: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut class = vec![0usize; n_cells * nb];
        for cell in 0..n_cells {
            let w = Word::from_index(cell, level, m);
            for p in 0..nb {
                let c = geometry.point(m, &w, p);
                let next = keys.len();
                class[cell * nb + p] = *keys.entry(c).or_insert(next);
            }
        }
        let mut complex = Self::assemble(structure, level, |cell, p| class[cell * nb + p]);
        let coords = complex
            .vertices
            .iter()
            .map(|v| geometry.point(m, &v.word, v.point))
            .collect();
        complex.coords = Some(coords);
        complex.geometry = Some(geometry);
        Ok(complex)
    }

    /// Numbers classes in order of first appearance; cells are visited in
    /// lexicographic order so the first member seen is the canonical one.
    fn assemble(structure: &PcfStructure, level: usize, class_of: impl Fn(usize, usize) -> usize) -> Self {
        let m = structure.alphabet();
        let nb = structure.boundary_size();
        let n_cells = m.pow(level as u32);
        let mut ids: HashMap<usize, usize> = HashMap::new();
        let mut vertices = Vec::new();
        let mut cells = Vec::with_capacity(n_cells);
        for cell in 0..n_cells {
            let mut corners = Vec::with_capacity(nb);
            for p in 0..nb {
                let key = class_of(cell, p);
                let id = *ids.entry(key).or_insert_with(|| {
                    vertices.push(VertexAddress::new(Word::from_index(cell, level, m), p));
                    vertices.len() - 1
                });
                corners.push(id);
            }
            cells.push(corners);
        }
        let mut incidence = vec![Vec::new(); vertices.len()];
        for (c, corners) in cells.iter().enumerate() {
            for &v in corners {
                if incidence[v].last() != Some(&c) {
                    incidence[v].push(c);
                }
            }
        }
        let mut complex = CellComplex {
            level,
            alphabet: m,
            boundary_size: nb,
            boundary_images: structure.boundary_images().to_vec(),
            vertices,
            cells,
            incidence,
            boundary: Vec::new(),
            coords: None,
            geometry: None,
        };
        complex.boundary = (0..nb)
            .map(|c| complex.locate(&VertexAddress::boundary(c)).expect("boundary is realizable"))
            .collect();
        complex
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn boundary_size(&self) -> usize {
        self.boundary_size
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Canonical address of a vertex.
    pub fn address(&self, vertex: usize) -> &VertexAddress {
        &self.vertices[vertex]
    }

    pub fn addresses(&self) -> &[VertexAddress] {
        &self.vertices
    }

    /// Corner vertex ids of the level-`m` cell with the given lexicographic index.
    pub fn cell(&self, index: usize) -> &[usize] {
        &self.cells[index]
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    /// Level-`m` cells containing the vertex.
    pub fn incident_cells(&self, vertex: usize) -> &[usize] {
        &self.incidence[vertex]
    }

    /// Vertex ids of `F^0`, in boundary-point order.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary(&self, vertex: usize) -> bool {
        self.boundary.contains(&vertex)
    }

    pub fn geometry(&self) -> Option<Geometry> {
        self.geometry
    }

    /// Exact coordinates over [`CellComplex::denominator`], presets only.
    pub fn coords(&self, vertex: usize) -> Option<&[u64]> {
        self.coords.as_ref().map(|c| c[vertex].as_slice())
    }

    pub fn denominator(&self) -> Option<u64> {
        self.geometry.map(|g| g.denominator(self.alphabet, self.level))
    }

    /// Coordinates as floats (interval: the position in `[0,1]`; gasket:
    /// barycentric weights).
    pub fn coords_f64(&self, vertex: usize) -> Option<Vec<f64>> {
        let den = self.denominator()? as f64;
        self.coords(vertex)
            .map(|c| c.iter().map(|&x| x as f64 / den).collect())
    }

    /// Finds the vertex at exact coordinates `numerators / denominator`.
    pub fn vertex_at(&self, numerators: &[u64], denominator: u64) -> Option<usize> {
        let den = self.denominator()?;
        if den % denominator != 0 {
            return None;
        }
        let scale = den / denominator;
        let target: Vec<u64> = numerators.iter().map(|&x| x * scale).collect();
        self.coords
            .as_ref()?
            .iter()
            .position(|c| *c == target)
    }

    /// Vertex id of an address realizable at this level (`|w| <= m`).
    pub fn locate(&self, address: &VertexAddress) -> Result<usize> {
        address.word.validate(self.alphabet)?;
        if address.point >= self.boundary_size {
            return Err(Error::UnrealizableAddress(format!(
                "{address}: boundary index out of range"
            )));
        }
        if address.word.len() > self.level {
            return Err(Error::UnrealizableAddress(format!(
                "{address} needs level {} but the complex has level {}",
                address.word.len(),
                self.level
            )));
        }
        let (w, p) = extend_with(&self.boundary_images, address.word.clone(), address.point, self.level);
        Ok(self.cells[w.index(self.alphabet)][p])
    }

    /// Range of level-`m` cell indices whose words extend `w`.
    pub fn cell_range(&self, w: &Word) -> std::ops::Range<usize> {
        debug_assert!(w.len() <= self.level);
        let span = self.alphabet.pow((self.level - w.len()) as u32);
        let start = w.index(self.alphabet) * span;
        start..start + span
    }

    /// Whether the vertex lies in the cell `F_w` (`|w| <= m`).
    pub fn cell_contains(&self, w: &Word, vertex: usize) -> bool {
        let range = self.cell_range(w);
        self.incidence[vertex].iter().any(|c| range.contains(c))
    }

    /// All vertex ids lying in `F_w`, sorted.
    pub fn cell_vertices(&self, w: &Word) -> Vec<usize> {
        let mut out: Vec<usize> = self.cell_range(w).flat_map(|c| self.cells[c].iter().copied()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn checked_cells(alphabet: usize, level: usize) -> Result<usize> {
    alphabet
        .checked_pow(level as u32)
        .filter(|&n| n <= 50_000_000)
        .ok_or_else(|| Error::InvalidArgument(format!("level {level} is too deep")))
}

/// Rewrites `ψ_w(q_p)` as an address with a word of length `level`,
/// using `q_c = ψ_i(q_a)` repeatedly.
pub(crate) fn extend(structure: &PcfStructure, word: Word, point: usize, level: usize) -> (Word, usize) {
    extend_with(structure.boundary_images(), word, point, level)
}

fn extend_with(images: &[(usize, usize)], mut word: Word, mut point: usize, level: usize) -> (Word, usize) {
    while word.len() < level {
        let (cell, next) = images[point];
        word.push(cell);
        point = next;
    }
    (word, point)
}

/// Level-1 sanity: boundary images must stay distinct after gluing.
fn check_level_one_gluing(structure: &PcfStructure) -> Result<()> {
    let nb = structure.boundary_size();
    let m = structure.alphabet();
    let mut uf = UnionFind::new(m * nb);
    for g in structure.gluing() {
        uf.union((g.left.0 - 1) * nb + g.left.1, (g.right.0 - 1) * nb + g.right.1);
    }
    let roots: Vec<usize> = structure
        .boundary_images()
        .iter()
        .map(|&(i, a)| uf.find((i - 1) * nb + a))
        .collect();
    for i in 0..nb {
        for j in (i + 1)..nb {
            if roots[i] == roots[j] {
                return Err(Error::GluingInconsistency(format!(
                    "boundary points q_{i} and q_{j} are glued together"
                )));
            }
        }
    }
    Ok(())
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller slot as root
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}
