use std::collections::{BTreeMap, BTreeSet};

use super::Partition;
use crate::model::{ActionId, Distribution, Mdp, StateId};
use crate::prob::Probability;

/// Lifts `mu` onto blocks; block ids are encoded as [`StateId`]s.
pub fn lift<P: Probability>(mu: &Distribution<P>, p: &Partition) -> Distribution<P> {
    Distribution::new(mu.iter().map(|(t, q)| (StateId(p.block_of(t)), q.clone())))
}

/// Quotient probabilistic automaton: one abstract state per block, and per
/// `(block, action)` the set of lifted distributions of its members.
#[derive(Debug, Clone)]
pub struct QuotientPa<P> {
    partition: Partition,
    action_names: Vec<String>,
    choices: Vec<BTreeMap<ActionId, Vec<Distribution<P>>>>,
    labels: Vec<BTreeSet<String>>,
    initial: usize,
}

impl<P: Probability> QuotientPa<P> {
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn num_blocks(&self) -> usize {
        self.choices.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    /// Lifted distributions of `action` in block `b`, in order of first
    /// occurrence among the block's states.
    pub fn distributions(&self, b: usize, action: ActionId) -> &[Distribution<P>] {
        self.choices[b].get(&action).map_or(&[], |v| v.as_slice())
    }

    pub fn choices(&self, b: usize) -> impl Iterator<Item = (ActionId, &[Distribution<P>])> + '_ {
        self.choices[b].iter().map(|(a, v)| (*a, v.as_slice()))
    }

    /// Propositions shared by every state of the block.
    pub fn labels(&self, b: usize) -> &BTreeSet<String> {
        &self.labels[b]
    }
}

/// Builds the quotient of `m` under `p`, de-duplicating identical lifted
/// distributions.
pub fn build_quotient<P: Probability>(m: &Mdp<P>, p: &Partition) -> QuotientPa<P> {
    let choices = p
        .blocks()
        .iter()
        .map(|block| {
            let mut row: BTreeMap<ActionId, Vec<Distribution<P>>> = BTreeMap::new();
            for s in block {
                for (a, mu) in m.choices(*s) {
                    let lifted = lift(mu, p);
                    let set = row.entry(a).or_default();
                    if !set.contains(&lifted) {
                        set.push(lifted);
                    }
                }
            }
            row
        })
        .collect();
    let labels = p
        .blocks()
        .iter()
        .map(|block| {
            let mut common = m.labels(block[0]).clone();
            for s in &block[1..] {
                common.retain(|l| m.has_label(*s, l));
            }
            common
        })
        .collect();
    QuotientPa {
        partition: p.clone(),
        action_names: m.action_names().to_vec(),
        choices,
        labels,
        initial: p.block_of(m.initial()),
    }
}

/// Whether every block's members enable the same actions with the same
/// lifted distributions, making the quotient exact.
pub fn is_stable<P: Probability>(m: &Mdp<P>, p: &Partition) -> bool {
    unstable_blocks(m, p).is_empty()
}

fn signature<P: Probability>(
    m: &Mdp<P>,
    p: &Partition,
    s: StateId,
) -> Vec<(ActionId, Distribution<P>)> {
    m.choices(s).map(|(a, mu)| (a, lift(mu, p))).collect()
}

/// Blocks whose members disagree on their lifted behaviour.
pub fn unstable_blocks<P: Probability>(m: &Mdp<P>, p: &Partition) -> Vec<usize> {
    (0..p.num_blocks())
        .filter(|&b| {
            let block = p.block(b);
            let first = signature(m, p, block[0]);
            block[1..].iter().any(|s| signature(m, p, *s) != first)
        })
        .collect()
}

/// Members of block `b` that behave like its smallest state.
pub fn signature_class<P: Probability>(m: &Mdp<P>, p: &Partition, b: usize) -> BTreeSet<StateId> {
    let block = p.block(b);
    let first = signature(m, p, block[0]);
    block
        .iter()
        .copied()
        .filter(|s| signature(m, p, *s) == first)
        .collect()
}
