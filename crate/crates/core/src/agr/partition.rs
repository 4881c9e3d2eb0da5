use std::collections::{BTreeMap, BTreeSet};

use crate::model::{Mdp, StateId};
use crate::pctl::BoundedFormula;
use crate::prob::Probability;

/// A partition of a model's states into numbered blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    block_of: Vec<usize>,
    blocks: Vec<Vec<StateId>>,
}

impl Partition {
    /// Renumbers `block_of` so blocks appear in order of their smallest
    /// state.
    pub fn from_assignment(block_of: &[usize]) -> Self {
        let mut renumber: BTreeMap<usize, usize> = BTreeMap::new();
        let mut blocks: Vec<Vec<StateId>> = Vec::new();
        let mut out = Vec::with_capacity(block_of.len());
        for (s, b) in block_of.iter().enumerate() {
            let id = *renumber.entry(*b).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[id].push(StateId(s));
            out.push(id);
        }
        Partition {
            block_of: out,
            blocks,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_assignment(&(0..n).collect::<Vec<_>>())
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn num_states(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_of(&self, s: StateId) -> usize {
        self.block_of[s.0]
    }

    pub fn block(&self, b: usize) -> &[StateId] {
        &self.blocks[b]
    }

    pub fn blocks(&self) -> &[Vec<StateId>] {
        &self.blocks
    }

    pub fn is_identity(&self) -> bool {
        self.blocks.len() == self.block_of.len()
    }

    /// Every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.blocks.iter().all(|b| {
            let first = coarser.block_of(b[0]);
            b.iter().all(|s| coarser.block_of(*s) == first)
        })
    }

    /// Moves the states of `part` out of their block `b` into a new block.
    /// Fails unless `part` is a proper, non-empty subset of block `b`.
    pub fn split(&self, b: usize, part: &BTreeSet<StateId>) -> Option<Partition> {
        let inside = self.blocks[b].iter().filter(|s| part.contains(s)).count();
        if inside == 0 || inside == self.blocks[b].len() || inside != part.len() {
            return None;
        }
        let fresh = self.blocks.len();
        let assignment: Vec<usize> = self
            .block_of
            .iter()
            .enumerate()
            .map(|(s, &x)| if part.contains(&StateId(s)) { fresh } else { x })
            .collect();
        Some(Self::from_assignment(&assignment))
    }
}

/// Groups states by their valuation of the formula's propositions, with the
/// initial state always alone.
pub fn initial_partition<P: Probability>(m: &Mdp<P>, f: &BoundedFormula) -> Partition {
    let atoms = f.atoms();
    let mut keys: BTreeMap<(bool, Vec<bool>), usize> = BTreeMap::new();
    let assignment: Vec<usize> = m
        .states()
        .map(|s| {
            let valuation = atoms.iter().map(|a| m.has_label(s, a)).collect();
            let next = keys.len();
            *keys.entry((s == m.initial(), valuation)).or_insert(next)
        })
        .collect();
    Partition::from_assignment(&assignment)
}
