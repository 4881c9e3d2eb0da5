use serde::{Deserialize, Serialize};

use super::mdp::{ActionId, Mdp, StateId};
use crate::prob::Probability;

/// A supervisor symbol: the action `action` taken in state `state`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WordSymbol {
    pub state: StateId,
    pub action: ActionId,
}

impl WordSymbol {
    pub fn new(state: StateId, action: ActionId) -> Self {
        WordSymbol { state, action }
    }
}

/// The state-action alphabet of `m`: every enabled `(s, a)` pair, ordered
/// by state index then action index.
pub fn alphabet<P: Probability>(m: &Mdp<P>) -> Vec<WordSymbol> {
    m.states()
        .flat_map(|s| m.enabled(s).map(move |a| WordSymbol::new(s, a)))
        .collect()
}

/// Renders a word as `(s0,a)(s1,b)` using the model's names.
pub fn format_word<P: Probability>(m: &Mdp<P>, word: &[WordSymbol]) -> String {
    word.iter()
        .map(|w| format!("({},{})", m.state_name(w.state), m.action_name(w.action)))
        .collect()
}

/// `true` iff `word` is the state-action trace of a finite path of `m` from
/// its initial state. The last symbol only needs an enabled action.
pub fn is_path<P: Probability>(m: &Mdp<P>, word: &[WordSymbol]) -> bool {
    let Some(first) = word.first() else {
        return true;
    };
    if first.state != m.initial() {
        return false;
    }
    word.iter().all(|w| m.is_enabled(w.state, w.action))
        && word.windows(2).all(|pair| {
            !m.transition(pair[0].state, pair[0].action, pair[1].state)
                .is_zero()
        })
}

/// An alternating sequence `s0 a0 s1 a1 ... sn` with its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Path<P> {
    pub states: Vec<StateId>,
    pub actions: Vec<ActionId>,
    pub probability: P,
}

impl<P: Probability> Path<P> {
    /// Number of actions.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn last_state(&self) -> StateId {
        *self.states.last().expect("a path has at least one state")
    }

    /// The `(s_i, a_i)` symbols, dropping the final state.
    pub fn word(&self) -> Vec<WordSymbol> {
        self.states
            .iter()
            .zip(&self.actions)
            .map(|(s, a)| WordSymbol::new(*s, *a))
            .collect()
    }

    /// Product of the transition probabilities of `m` along the path; zero
    /// when some step is not a transition of `m`.
    pub fn probability_in(&self, m: &Mdp<P>) -> P {
        self.states
            .windows(2)
            .zip(&self.actions)
            .fold(P::one(), |acc, (pair, a)| {
                acc * m.transition(pair[0], *a, pair[1])
            })
    }

    pub fn format(&self, m: &Mdp<P>) -> String {
        let mut out = m.state_name(self.states[0]).to_string();
        for (a, s) in self.actions.iter().zip(&self.states[1..]) {
            out.push_str(&format!(" -{}-> {}", m.action_name(*a), m.state_name(*s)));
        }
        out
    }
}

/// A finite-horizon, step-indexed scheduler: `choice(s, t)` for
/// `t in 0..horizon`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scheduler {
    horizon: usize,
    choice: Vec<Vec<Option<ActionId>>>,
}

impl Scheduler {
    pub fn new(horizon: usize, num_states: usize) -> Self {
        Scheduler {
            horizon,
            choice: vec![vec![None; num_states]; horizon],
        }
    }

    /// Same action at every step.
    pub fn memoryless(horizon: usize, choice: &[Option<ActionId>]) -> Self {
        Scheduler {
            horizon,
            choice: vec![choice.to_vec(); horizon],
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.choice.first().map_or(0, |row| row.len())
    }

    pub fn get(&self, s: StateId, step: usize) -> Option<ActionId> {
        self.choice
            .get(step)
            .and_then(|row| row.get(s.0).copied().flatten())
    }

    pub fn set(&mut self, s: StateId, step: usize, a: Option<ActionId>) {
        self.choice[step][s.0] = a;
    }

    /// Whether `word` (read from step 0) follows this scheduler at every
    /// step, mapping word states through `project` first.
    pub fn induces(&self, word: &[WordSymbol], project: impl Fn(StateId) -> StateId) -> bool {
        word.iter()
            .enumerate()
            .all(|(t, w)| self.get(project(w.state), t) == Some(w.action))
    }
}
