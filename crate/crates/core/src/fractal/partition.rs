use std::collections::BTreeSet;

use super::{PcfStructure, Word};

/// How a partition was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PartitionKind {
    /// `Λ(a)` for a threshold `a ∈ (0,1)`.
    Threshold(f64),
    /// `Λ_n = Λ(2^{-n})`, with `Λ_0 = {∅}`.
    Level(usize),
    /// Any other explicit set of words.
    Explicit,
}

/// Finite set of words whose cylinder sets tile the infinite word space.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    words: Vec<Word>,
    kind: PartitionKind,
}

impl Partition {
    /// Wraps an explicit word list. No validity check is performed; see
    /// [`Partition::is_prefix_free`] and [`Partition::is_covering`].
    pub fn from_words(words: impl IntoIterator<Item = Word>) -> Self {
        let set: BTreeSet<Word> = words.into_iter().collect();
        Partition {
            words: set.into_iter().collect(),
            kind: PartitionKind::Explicit,
        }
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn kind(&self) -> PartitionKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn max_word_len(&self) -> usize {
        self.words.iter().map(Word::len).max().unwrap_or(0)
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.words.binary_search(w).is_ok()
    }

    /// No word is a proper prefix of another.
    pub fn is_prefix_free(&self) -> bool {
        // sorted lexicographically, so a prefix sits immediately before some
        // extension of it; checking neighbours is enough
        self.words
            .windows(2)
            .all(|p| !(p[0].is_prefix_of(&p[1]) && p[0] != p[1]))
    }

    /// Every infinite word has exactly one prefix in the set.
    ///
    /// For a prefix-free set this is the Kraft equality `Σ M^{-|w|} = 1`,
    /// evaluated in exact integer arithmetic.
    pub fn is_covering(&self, alphabet: usize) -> bool {
        if !self.is_prefix_free() {
            return false;
        }
        let depth = self.max_word_len() as u32;
        let total = (alphabet as u128).checked_pow(depth);
        let Some(total) = total else {
            return self.covers_by_enumeration(alphabet);
        };
        let sum: u128 = self
            .words
            .iter()
            .map(|w| (alphabet as u128).pow(depth - w.len() as u32))
            .sum();
        sum == total
    }

    fn covers_by_enumeration(&self, alphabet: usize) -> bool {
        // fallback for very deep partitions: walk the tree
        fn walk(p: &Partition, w: Word, alphabet: usize) -> bool {
            if p.contains(&w) {
                return true;
            }
            if w.len() >= p.max_word_len() {
                return false;
            }
            (1..=alphabet).all(|l| walk(p, w.child(l), alphabet))
        }
        walk(self, Word::empty(), alphabet)
    }
}

/// `Λ(a) = { w : r_{w_1..w_{m-1}} > a ≥ r_w }`, by depth-first expansion.
pub fn build_partition(structure: &PcfStructure, a: f64) -> crate::Result<Partition> {
    if !(a > 0.0 && a < 1.0) {
        return Err(crate::Error::InvalidArgument(format!(
            "partition threshold must lie in (0,1), got {a}"
        )));
    }
    let mut words = Vec::new();
    let mut stack = vec![(Word::empty(), 1.0f64)];
    while let Some((w, rw)) = stack.pop() {
        if rw <= a {
            words.push(w);
            continue;
        }
        for letter in (1..=structure.alphabet()).rev() {
            let r = rw * structure.weights()[letter - 1];
            stack.push((w.child(letter), r));
        }
    }
    words.sort();
    Ok(Partition {
        words,
        kind: PartitionKind::Threshold(a),
    })
}

/// `Λ_n = Λ(2^{-n})`; `Λ_0` is the singleton empty word.
pub fn level_partition(structure: &PcfStructure, n: usize) -> Partition {
    if n == 0 {
        return Partition {
            words: vec![Word::empty()],
            kind: PartitionKind::Level(0),
        };
    }
    let mut p = build_partition(structure, 0.5f64.powi(n as i32))
        .expect("2^-n lies in (0,1) for n >= 1");
    p.kind = PartitionKind::Level(n);
    p
}

/// True iff every `(w, v) ∈ fine × coarse` has `Σ_w ⊆ Σ_v` or `Σ_w ∩ Σ_v = ∅`.
///
/// Only a coarse word strictly extending `w` can violate this, and in
/// lexicographic order the extensions of `w` directly follow `w`.
pub fn verify_refinement(fine: &Partition, coarse: &Partition) -> bool {
    let mut sorted: Vec<&Word> = coarse.words().iter().collect();
    sorted.sort_unstable();
    fine.words().iter().all(|w| {
        let i = sorted.partition_point(|v| *v <= w);
        sorted.get(i).is_none_or(|v| !w.is_prefix_of(v))
    })
}

/// Lazily grown cache of the level partitions `Λ_0, Λ_1, ...`.
#[derive(Debug, Clone)]
pub struct PartitionLadder {
    structure: PcfStructure,
    levels: Vec<Partition>,
}

impl PartitionLadder {
    pub fn new(structure: &PcfStructure) -> Self {
        PartitionLadder {
            structure: structure.clone(),
            levels: Vec::new(),
        }
    }

    pub fn level(&mut self, n: usize) -> &Partition {
        while self.levels.len() <= n {
            let next = level_partition(&self.structure, self.levels.len());
            self.levels.push(next);
        }
        &self.levels[n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::PcfStructure;
    use nalgebra::DMatrix;

    fn two_weight(r1: f64, r2: f64) -> PcfStructure {
        PcfStructure::new(
            "custom",
            vec![r1, r2],
            DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]),
            vec![],
            vec![(1, 0), (2, 1)],
        )
        .unwrap()
    }

    /// Brute-force oracle: scan every word up to `depth` and keep those
    /// meeting the defining inequality directly.
    fn brute_force_partition(s: &PcfStructure, a: f64, depth: usize) -> Vec<Word> {
        let mut out = Vec::new();
        for len in 0..=depth {
            let count = s.alphabet().pow(len as u32);
            for idx in 0..count {
                let w = Word::from_index(idx, len, s.alphabet());
                if len == 0 {
                    continue;
                }
                let parent = Word::new(w.letters().take(len - 1));
                if s.resistance_scale(&parent) > a && a >= s.resistance_scale(&w) {
                    out.push(w);
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn equal_weights_give_full_level() {
        let s = PcfStructure::interval(2).unwrap();
        let p = build_partition(&s, 0.125).unwrap();
        assert_eq!(p.len(), 8);
        assert!(p.words().iter().all(|w| w.len() == 3));
    }

    #[test]
    fn unequal_weights_example() {
        let s = two_weight(0.5, 0.25);
        let p = build_partition(&s, 0.25).unwrap();
        let expected: Vec<Word> = ["11", "12", "2"].iter().map(|w| Word::parse(w).unwrap()).collect();
        assert_eq!(p.words(), &expected[..]);
        assert_eq!(p.words(), &brute_force_partition(&s, 0.25, 6)[..]);
    }

    #[test]
    fn matches_brute_force_for_mixed_weights() {
        let s = two_weight(0.7, 0.3);
        for &a in &[0.6, 0.31, 0.1, 0.02] {
            let p = build_partition(&s, a).unwrap();
            assert_eq!(p.words(), &brute_force_partition(&s, a, 14)[..], "a = {a}");
            assert!(p.is_covering(2));
            for w in p.words() {
                let rw = s.resistance_scale(w);
                assert!(s.r_min() * a < rw && rw <= a);
            }
        }
    }

    #[test]
    fn refinement_examples() {
        let s = PcfStructure::interval(2).unwrap();
        assert!(verify_refinement(&level_partition(&s, 3), &level_partition(&s, 1)));
        let p = level_partition(&s, 2);
        assert!(verify_refinement(&p, &p));
        let fine = Partition::from_words(["1", "2"].map(|w| Word::parse(w).unwrap()));
        let coarse = Partition::from_words(["11", "12", "2"].map(|w| Word::parse(w).unwrap()));
        assert!(!verify_refinement(&fine, &coarse));
        assert!(verify_refinement(&coarse, &fine));
    }

    #[test]
    fn refinement_agrees_with_pairwise_check() {
        let brute = |fine: &Partition, coarse: &Partition| {
            fine.words()
                .iter()
                .all(|w| coarse.words().iter().all(|v| v.is_prefix_of(w) || !w.is_prefix_of(v)))
        };
        let a = PcfStructure::interval(3).unwrap();
        let b = a.with_weights(vec![0.2, 0.5, 0.3]).unwrap();
        let parts: Vec<Partition> = (1..5)
            .flat_map(|n| [level_partition(&a, n), level_partition(&b, n)])
            .collect();
        let mut disagreements = 0;
        for f in &parts {
            for c in &parts {
                disagreements += (verify_refinement(f, c) != brute(f, c)) as usize;
            }
        }
        assert_eq!(disagreements, 0);
    }

    #[test]
    fn covering_detects_gaps_and_overlaps() {
        let gap = Partition::from_words(["11", "2"].map(|w| Word::parse(w).unwrap()));
        assert!(gap.is_prefix_free());
        assert!(!gap.is_covering(2));
        let overlap = Partition::from_words(["1", "11", "12", "2"].map(|w| Word::parse(w).unwrap()));
        assert!(!overlap.is_prefix_free());
        assert!(!overlap.is_covering(2));
    }

    #[test]
    fn threshold_outside_unit_interval_is_rejected() {
        let s = PcfStructure::interval(2).unwrap();
        assert!(build_partition(&s, 1.0).is_err());
        assert!(build_partition(&s, 0.0).is_err());
    }

    #[test]
    fn ladder_caches_levels() {
        let s = PcfStructure::gasket(2).unwrap();
        let mut ladder = PartitionLadder::new(&s);
        assert_eq!(ladder.level(0).len(), 1);
        let l3 = ladder.level(3).clone();
        assert_eq!(l3, level_partition(&s, 3));
        assert_eq!(l3.kind(), PartitionKind::Level(3));
    }
}
