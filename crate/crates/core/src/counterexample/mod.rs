//! Counterexamples for the synthesis loop.
//!
//! Negative counterexamples are probable violating paths a supervisor must
//! forbid. Positive counterexamples are realizable words a conjecture
//! forbids although no eliminated path is a prefix of them.

mod enumerate;

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

pub use enumerate::{ChainPath, PathEnumerator};

use crate::model::{Dfa, Dtmc, Mdp, Path, Scheduler, StateId, WordSymbol};
use crate::pctl::BoundedFormula;
use crate::prob::Probability;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Negative,
    Positive,
}

/// A counterexample word in plant coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CePath<P> {
    pub polarity: Polarity,
    pub word: Vec<WordSymbol>,
    /// Final state of a negative counterexample.
    pub last: Option<StateId>,
    /// Path probability for negatives; for positives, the probability of the
    /// state sequence spelled by the word.
    pub probability: P,
    pub iteration: usize,
}

impl<P: Probability> CePath<P> {
    pub fn negative(path: &Path<P>, iteration: usize) -> Self {
        CePath {
            polarity: Polarity::Negative,
            word: path.word(),
            last: Some(path.last_state()),
            probability: path.probability.clone(),
            iteration,
        }
    }

    pub fn positive(m: &Mdp<P>, word: Vec<WordSymbol>, iteration: usize) -> Self {
        let probability = word.windows(2).fold(P::one(), |acc, w| {
            acc * m.transition(w[0].state, w[0].action, w[1].state)
        });
        CePath {
            polarity: Polarity::Positive,
            word,
            last: None,
            probability,
            iteration,
        }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// The full alternating path of a negative counterexample.
    pub fn path(&self) -> Option<Path<P>> {
        let last = self.last?;
        let mut states: Vec<StateId> = self.word.iter().map(|w| w.state).collect();
        states.push(last);
        Some(Path {
            states,
            actions: self.word.iter().map(|w| w.action).collect(),
            probability: self.probability.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CeError {
    #[error("every violating path follows the minimising scheduler")]
    NoDeviatingPath,
    #[error("the chain has no path witnessing the formula")]
    NoViolatingPath,
}

/// Most probable witness path of `f` in `d`, mapped to plant states.
pub fn most_probable_path<P: Probability>(
    d: &Dtmc<P>,
    plant_of: impl Fn(StateId) -> StateId,
    f: &BoundedFormula,
) -> Result<Path<P>, CeError> {
    let found = PathEnumerator::for_formula(d, f)
        .next()
        .ok_or(CeError::NoViolatingPath)?;
    Ok(project(d, &found, &plant_of))
}

fn project<P: Probability>(
    d: &Dtmc<P>,
    found: &ChainPath<P>,
    plant_of: &impl Fn(StateId) -> StateId,
) -> Path<P> {
    let mut path = d.to_model_path(&found.nodes, found.probability.clone());
    for s in path.states.iter_mut() {
        *s = plant_of(*s);
    }
    path
}

/// The most probable witness path of `f` in `d` that leaves `sigma_min` at
/// some step. `plant_of` maps chain-origin states to the states
/// `sigma_min` is defined on.
pub fn select_negative_ce<P: Probability>(
    d: &Dtmc<P>,
    sigma_min: &Scheduler,
    plant_of: impl Fn(StateId) -> StateId,
    f: &BoundedFormula,
) -> Result<Path<P>, CeError> {
    PathEnumerator::for_formula(d, f)
        .map(|found| project(d, &found, &plant_of))
        .find(|path| !sigma_min.induces(&path.word(), |s| s))
        .ok_or(CeError::NoDeviatingPath)
}

/// Shortest, then lexicographically smallest, word of length at most `k`
/// that is a path of `m`, is rejected by `conjecture`, and has no word of
/// `negatives` as a prefix.
pub fn find_positive_ce<P: Probability>(
    m: &Mdp<P>,
    conjecture: &Dfa<WordSymbol>,
    negatives: &[Vec<WordSymbol>],
    k: usize,
) -> Option<Vec<WordSymbol>> {
    let symbols = conjecture.symbol_indices();
    let negative_set: HashSet<&[WordSymbol]> = negatives.iter().map(|w| w.as_slice()).collect();
    let negative_prefixes: HashSet<&[WordSymbol]> = negatives
        .iter()
        .flat_map(|w| (0..=w.len()).map(move |i| &w[..i]))
        .collect();
    if negative_set.contains(&[][..]) {
        return None;
    }
    if !conjecture.is_accepting(conjecture.initial()) {
        return Some(Vec::new());
    }

    // (last symbol, conjecture state, word while it is a prefix of a negative)
    type Node = (WordSymbol, usize, Option<Vec<WordSymbol>>);
    let mut seen: HashSet<Node> = HashSet::new();
    let mut level: VecDeque<(Vec<WordSymbol>, usize)> =
        VecDeque::from([(Vec::new(), conjecture.initial())]);
    let mut memo: HashMap<StateId, Vec<WordSymbol>> = HashMap::new();
    let mut extensions = |s: StateId| -> Vec<WordSymbol> {
        memo.entry(s)
            .or_insert_with(|| m.enabled(s).map(|a| WordSymbol::new(s, a)).collect())
            .clone()
    };
    for _ in 0..k {
        let mut next_level = VecDeque::new();
        while let Some((word, q)) = level.pop_front() {
            let mut starts: Vec<StateId> = match word.last() {
                None => vec![m.initial()],
                Some(w) => m
                    .distribution(w.state, w.action)
                    .map(|d| d.support().collect())
                    .unwrap_or_default(),
            };
            starts.sort();
            let mut candidates: Vec<WordSymbol> =
                starts.into_iter().flat_map(&mut extensions).collect();
            candidates.sort();
            for sym in candidates {
                let mut longer = word.clone();
                longer.push(sym);
                if negative_set.contains(longer.as_slice()) {
                    continue;
                }
                let q2 = symbols.get(&sym).and_then(|&i| conjecture.step(q, i));
                match q2 {
                    Some(q2) if conjecture.is_accepting(q2) => {
                        let trie = negative_prefixes
                            .contains(longer.as_slice())
                            .then(|| longer.clone());
                        if seen.insert((sym, q2, trie)) {
                            next_level.push_back((longer, q2));
                        }
                    }
                    _ => return Some(longer),
                }
            }
        }
        level = next_level;
    }
    None
}
