//! Random pastings of Boolean blocks, used to hunt for orthomodular
//! lattices that violate the covering law.
//!
//! A pasting is given by a family of blocks (sets of atoms). Blocks pairwise
//! share at most one atom, and two-atom blocks share none. Each block
//! contributes the Boolean algebra on its atoms; elements common to several
//! blocks (bottom, top, shared atoms and their complements) are identified.
//! Whether the result is actually an orthomodular lattice is left to
//! [`OrthoLattice::build`] and [`check_orthomodular`].

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lattice::{check_covering_law, check_orthomodular, LatticeSpec, OrthoLattice, MAX_ELEMENTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Bottom,
    Top,
    Atom(usize),
    AtomPerp(usize),
    Block(usize, u32),
}

/// Builds the spec of the pasting of `blocks`, each a list of atom ids.
///
/// Returns `None` when the block family breaks the sharing rules above.
pub fn paste(blocks: &[Vec<usize>]) -> Option<LatticeSpec> {
    let mut membership: BTreeMap<usize, usize> = BTreeMap::new();
    for block in blocks {
        if block.len() < 2 || block.len() > 8 {
            return None;
        }
        for &atom in block {
            *membership.entry(atom).or_default() += 1;
        }
    }
    for (i, a) in blocks.iter().enumerate() {
        for b in &blocks[i + 1..] {
            let shared = a.iter().filter(|x| b.contains(x)).count();
            if shared > 1 || (shared == 1 && (a.len() == 2 || b.len() == 2)) {
                return None;
            }
        }
    }

    let key_of = |b: usize, mask: u32| -> Key {
        let block = &blocks[b];
        let full = (1u32 << block.len()) - 1;
        if mask == 0 {
            Key::Bottom
        } else if mask == full {
            Key::Top
        } else if mask.count_ones() == 1 {
            Key::Atom(block[mask.trailing_zeros() as usize])
        } else if mask.count_ones() as usize == block.len() - 1 {
            let missing = (!mask & full).trailing_zeros() as usize;
            Key::AtomPerp(block[missing])
        } else {
            Key::Block(b, mask)
        }
    };

    let mut ids: BTreeMap<Key, usize> = BTreeMap::new();
    for (b, block) in blocks.iter().enumerate() {
        for mask in 0..(1u32 << block.len()) {
            ids.entry(key_of(b, mask)).or_insert(0);
        }
    }
    if ids.len() > MAX_ELEMENTS {
        return None;
    }
    for (i, id) in ids.values_mut().enumerate() {
        *id = i;
    }

    let n = ids.len();
    let mut covers = Vec::new();
    let mut ortho = vec![usize::MAX; n];
    for (b, block) in blocks.iter().enumerate() {
        let full = (1u32 << block.len()) - 1;
        for mask in 0..=full {
            let id = ids[&key_of(b, mask)];
            ortho[id] = ids[&key_of(b, !mask & full)];
            for bit in 0..block.len() {
                if mask & (1 << bit) == 0 {
                    covers.push([id, ids[&key_of(b, mask | 1 << bit)]]);
                }
            }
        }
    }
    covers.sort_unstable();
    covers.dedup();

    let names = ids
        .keys()
        .map(|k| match *k {
            Key::Bottom => "0".to_owned(),
            Key::Top => "1".to_owned(),
            Key::Atom(a) => format!("p{a}"),
            Key::AtomPerp(a) => format!("p{a}'"),
            Key::Block(b, mask) => {
                let atoms: Vec<String> = blocks[b]
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, a)| format!("p{a}"))
                    .collect();
                atoms.join("v")
            }
        })
        .collect();

    Some(LatticeSpec { n, covers, ortho, names: Some(names) })
}

/// An orthomodular pasting on which the covering law fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveringCounterexample {
    pub seed: u64,
    pub attempt: usize,
    pub blocks: Vec<Vec<usize>>,
    pub lattice: LatticeSpec,
    /// `[atom, element]` returned by the covering-law checker.
    pub witness: Vec<usize>,
}

fn random_blocks(rng: &mut impl Rng) -> Vec<Vec<usize>> {
    let count = rng.random_range(2..=4);
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut next_atom = 0;
    for _ in 0..count {
        let size = rng.random_range(2..=3);
        let mut block = Vec::with_capacity(size);
        if size == 3 && rng.random_bool(0.5) {
            let sharable: Vec<usize> = blocks.iter().filter(|b| b.len() == 3).flatten().copied().collect();
            if !sharable.is_empty() {
                block.push(sharable[rng.random_range(0..sharable.len())]);
            }
        }
        while block.len() < size {
            block.push(next_atom);
            next_atom += 1;
        }
        block.sort_unstable();
        blocks.push(block);
    }
    blocks
}

/// Samples `attempts` random pastings and keeps the distinct ones that are
/// orthomodular lattices but fail the covering law.
pub fn search_covering_counterexamples(seed: u64, attempts: usize) -> Vec<CoveringCounterexample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<CoveringCounterexample> = Vec::new();
    for attempt in 0..attempts {
        let blocks = random_blocks(&mut rng);
        let Some(spec) = paste(&blocks) else { continue };
        let Ok(lattice) = OrthoLattice::build(&spec) else { continue };
        if !check_orthomodular(&lattice).pass {
            continue;
        }
        let report = check_covering_law(&lattice);
        if report.pass || found.iter().any(|c| c.lattice == spec) {
            continue;
        }
        found.push(CoveringCounterexample {
            seed,
            attempt,
            blocks,
            lattice: spec,
            witness: report.counterexample.unwrap_or_default(),
        });
    }
    found
}
