use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

/// A deterministic automaton with a partial transition function.
///
/// Symbols are addressed by their index into `alphabet`; words handed to
/// [`Dfa::run`] are index sequences. Supervisors use
/// [`WordSymbol`](crate::model::WordSymbol) as the symbol type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa<A> {
    alphabet: Vec<A>,
    delta: Vec<Vec<Option<usize>>>,
    initial: usize,
    accepting: Vec<bool>,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum DfaError {
    #[error("initial state {0} out of range")]
    BadInitial(usize),
    #[error("transition row {state} has {len} entries, alphabet has {alphabet}")]
    RowLength {
        state: usize,
        len: usize,
        alphabet: usize,
    },
    #[error("transition to unknown state {0}")]
    BadTarget(usize),
    #[error("accepting vector length {0} does not match state count {1}")]
    AcceptingLength(usize, usize),
}

impl<A: Clone + Eq + Hash> Dfa<A> {
    pub fn new(
        alphabet: Vec<A>,
        delta: Vec<Vec<Option<usize>>>,
        initial: usize,
        accepting: Vec<bool>,
    ) -> Result<Self, DfaError> {
        let n = delta.len();
        if initial >= n {
            return Err(DfaError::BadInitial(initial));
        }
        if accepting.len() != n {
            return Err(DfaError::AcceptingLength(accepting.len(), n));
        }
        for (state, row) in delta.iter().enumerate() {
            if row.len() != alphabet.len() {
                return Err(DfaError::RowLength {
                    state,
                    len: row.len(),
                    alphabet: alphabet.len(),
                });
            }
            if let Some(t) = row.iter().flatten().find(|t| **t >= n) {
                return Err(DfaError::BadTarget(*t));
            }
        }
        Ok(Dfa {
            alphabet,
            delta,
            initial,
            accepting,
        })
    }

    /// One accepting state with a self-loop on every symbol.
    pub fn universal(alphabet: Vec<A>) -> Self {
        let row = (0..alphabet.len()).map(|_| Some(0)).collect();
        Dfa {
            alphabet,
            delta: vec![row],
            initial: 0,
            accepting: vec![true],
        }
    }

    pub fn alphabet(&self) -> &[A] {
        &self.alphabet
    }

    pub fn symbol_index(&self, symbol: &A) -> Option<usize> {
        self.alphabet.iter().position(|a| a == symbol)
    }

    /// Lookup table from symbol to index.
    pub fn symbol_indices(&self) -> HashMap<A, usize> {
        self.alphabet
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect()
    }

    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn step(&self, q: usize, symbol: usize) -> Option<usize> {
        self.delta[q][symbol]
    }

    /// Outgoing `(symbol, target)` pairs of `q` in symbol order.
    pub fn successors(&self, q: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.delta[q]
            .iter()
            .enumerate()
            .filter_map(|(a, t)| t.map(|t| (a, t)))
    }

    /// State reached on `word`, or `None` if some transition is undefined.
    pub fn run(&self, word: &[usize]) -> Option<usize> {
        word.iter().try_fold(self.initial, |q, &a| self.delta[q][a])
    }

    pub fn accepts(&self, word: &[usize]) -> bool {
        self.run(word).is_some_and(|q| self.accepting[q])
    }

    pub fn accepts_symbols(&self, word: &[A]) -> bool {
        let mut q = self.initial;
        for sym in word {
            match self.symbol_index(sym).and_then(|a| self.delta[q][a]) {
                Some(next) => q = next,
                None => return false,
            }
        }
        self.accepting[q]
    }

    /// Removes transitions into non-accepting states, then drops states no
    /// longer reachable from the initial state. The initial state is kept
    /// even when it is not accepting.
    pub fn prune_rejecting(&self) -> Self {
        let delta: Vec<Vec<Option<usize>>> = self
            .delta
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| t.filter(|&t| self.accepting[t]))
                    .collect()
            })
            .collect();
        Dfa {
            alphabet: self.alphabet.clone(),
            delta,
            initial: self.initial,
            accepting: self.accepting.clone(),
        }
        .trim()
    }

    /// Restriction to states reachable from the initial state, renumbered in
    /// BFS order (symbols in index order).
    pub fn trim(&self) -> Self {
        let mut index = vec![None; self.num_states()];
        let mut order = vec![self.initial];
        index[self.initial] = Some(0);
        let mut queue = VecDeque::from([self.initial]);
        while let Some(q) = queue.pop_front() {
            for (_, t) in self.successors(q) {
                if index[t].is_none() {
                    index[t] = Some(order.len());
                    order.push(t);
                    queue.push_back(t);
                }
            }
        }
        let delta = order
            .iter()
            .map(|&q| {
                self.delta[q]
                    .iter()
                    .map(|t| t.and_then(|t| index[t]))
                    .collect()
            })
            .collect();
        Dfa {
            alphabet: self.alphabet.clone(),
            delta,
            initial: 0,
            accepting: order.iter().map(|&q| self.accepting[q]).collect(),
        }
    }

    pub fn map_alphabet<B: Clone + Eq + Hash>(&self, f: impl FnMut(&A) -> B) -> Dfa<B> {
        Dfa {
            alphabet: self.alphabet.iter().map(f).collect(),
            delta: self.delta.clone(),
            initial: self.initial,
            accepting: self.accepting.clone(),
        }
    }
}
