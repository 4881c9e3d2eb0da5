use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use crate::model::Dtmc;
use crate::pctl::{BoundedFormula, PathFormula};
use crate::prob::Probability;

/// A path of chain nodes from the initial node.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainPath<P> {
    pub nodes: Vec<usize>,
    pub probability: P,
}

struct Entry<P> {
    probability: P,
    /// `(origin state, action)` per node; the tie-break key.
    key: Vec<(usize, usize)>,
    nodes: Vec<usize>,
}

impl<P: Probability> PartialEq for Entry<P> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<P: Probability> Eq for Entry<P> {}

impl<P: Probability> PartialOrd for Entry<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<P: Probability> Ord for Entry<P> {
    // max-heap: higher probability first, then lexicographically smaller key
    fn cmp(&self, other: &Self) -> Ordering {
        self.probability
            .partial_cmp(&other.probability)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.key.cmp(&self.key))
    }
}

/// Best-first enumeration of the target-hitting paths of a chain in
/// non-increasing probability order.
///
/// A path qualifies when its last node is the first target node on it, it
/// has at least `min_hops` and at most `max_hops` steps, and every earlier
/// node satisfies the path constraint. Equal probabilities are ordered
/// lexicographically by their `(state, action)` sequence.
pub struct PathEnumerator<'a, P> {
    chain: &'a Dtmc<P>,
    keep: Vec<bool>,
    target: Vec<bool>,
    min_hops: usize,
    max_hops: usize,
    heap: BinaryHeap<Entry<P>>,
}

impl<'a, P: Probability> PathEnumerator<'a, P> {
    pub fn new(
        chain: &'a Dtmc<P>,
        keep: impl Fn(&BTreeSet<String>) -> bool,
        target: impl Fn(&BTreeSet<String>) -> bool,
        min_hops: usize,
        max_hops: usize,
    ) -> Self {
        let n = chain.num_nodes();
        let keep = (0..n).map(|i| keep(chain.labels(i))).collect();
        let target = (0..n).map(|i| target(chain.labels(i))).collect();
        let root = chain.initial();
        let mut heap = BinaryHeap::new();
        heap.push(Entry {
            probability: P::one(),
            key: vec![Self::key_of(chain, root)],
            nodes: vec![root],
        });
        PathEnumerator {
            chain,
            keep,
            target,
            min_hops,
            max_hops,
            heap,
        }
    }

    /// Paths witnessing the path formula of `f`.
    pub fn for_formula(chain: &'a Dtmc<P>, f: &BoundedFormula) -> Self {
        let lhs = f.lhs();
        let rhs = f.target().clone();
        let min_hops = match f.path {
            PathFormula::Next(_) => 1,
            PathFormula::Until { .. } => 0,
        };
        Self::new(
            chain,
            move |l| lhs.eval(l),
            move |l| rhs.eval(l),
            min_hops,
            f.horizon(),
        )
    }

    fn key_of(chain: &Dtmc<P>, node: usize) -> (usize, usize) {
        let n = chain.node(node);
        (n.origin.0, n.action.map_or(usize::MAX, |a| a.0))
    }

    pub fn next_best_path(&mut self) -> Option<ChainPath<P>> {
        while let Some(entry) = self.heap.pop() {
            let last = *entry.nodes.last().expect("entries are non-empty");
            let hops = entry.nodes.len() - 1;
            if hops >= self.min_hops && self.target[last] {
                return Some(ChainPath {
                    nodes: entry.nodes,
                    probability: entry.probability,
                });
            }
            if hops >= self.max_hops || self.chain.is_absorbing(last) {
                continue;
            }
            if hops >= self.min_hops && !self.keep[last] {
                continue;
            }
            for (next, p) in self.chain.successors(last) {
                let mut nodes = entry.nodes.clone();
                nodes.push(*next);
                let mut key = entry.key.clone();
                key.push(Self::key_of(self.chain, *next));
                self.heap.push(Entry {
                    probability: entry.probability.clone() * p.clone(),
                    key,
                    nodes,
                });
            }
        }
        None
    }
}

impl<P: Probability> Iterator for PathEnumerator<'_, P> {
    type Item = ChainPath<P>;

    fn next(&mut self) -> Option<ChainPath<P>> {
        self.next_best_path()
    }
}
