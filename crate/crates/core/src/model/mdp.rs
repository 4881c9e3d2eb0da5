use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::prob::Probability;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActionId(pub usize);

impl StateId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl ActionId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A finite distribution over successor states, sorted by state id.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<P> {
    entries: Vec<(StateId, P)>,
}

impl<P: Probability> Distribution<P> {
    /// Merges duplicate targets and drops zero entries.
    pub fn new(entries: impl IntoIterator<Item = (StateId, P)>) -> Self {
        let mut merged: BTreeMap<StateId, P> = BTreeMap::new();
        for (s, p) in entries {
            match merged.remove(&s) {
                Some(q) => merged.insert(s, q + p),
                None => merged.insert(s, p),
            };
        }
        Distribution {
            entries: merged.into_iter().filter(|(_, p)| !p.is_zero()).collect(),
        }
    }

    pub fn dirac(target: StateId) -> Self {
        Distribution {
            entries: vec![(target, P::one())],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateId, &P)> + '_ {
        self.entries.iter().map(|(s, p)| (*s, p))
    }

    pub fn entries(&self) -> &[(StateId, P)] {
        &self.entries
    }

    pub fn prob(&self, target: StateId) -> P {
        self.entries
            .binary_search_by_key(&target, |(s, _)| *s)
            .map(|i| self.entries[i].1.clone())
            .unwrap_or_else(|_| P::zero())
    }

    pub fn support(&self) -> impl Iterator<Item = StateId> + '_ {
        self.entries.iter().map(|(s, _)| *s)
    }

    pub fn mass(&self) -> P {
        self.entries
            .iter()
            .fold(P::zero(), |acc, (_, p)| acc + p.clone())
    }
}

/// A finite MDP with named states and actions.
///
/// States and actions are identified by dense indices; their declaration
/// order is the tie-break order used by every optimisation in the crate.
/// Composed models may contain deadlock states, so construction only checks
/// index bounds. Use [`Mdp::validate`] for the full well-formedness check.
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp<P> {
    state_names: Vec<String>,
    action_names: Vec<String>,
    initial: StateId,
    trans: Vec<BTreeMap<ActionId, Distribution<P>>>,
    labels: Vec<BTreeSet<String>>,
    ap: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    MassNotOne { mass: String },
    NegativeProbability,
    ProbabilityAboveOne,
    Deadlock,
    UnknownProposition(String),
    NonUniformSupport,
}

/// One well-formedness violation found by [`Mdp::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub state: String,
    pub action: Option<String>,
    pub kind: DiagnosticKind,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.action {
            Some(a) => write!(f, "state {}, action {}: ", self.state, a)?,
            None => write!(f, "state {}: ", self.state)?,
        }
        match &self.kind {
            DiagnosticKind::MassNotOne { mass } => write!(f, "probability mass {mass} != 1"),
            DiagnosticKind::NegativeProbability => write!(f, "negative probability"),
            DiagnosticKind::ProbabilityAboveOne => write!(f, "probability above 1"),
            DiagnosticKind::Deadlock => write!(f, "no enabled action"),
            DiagnosticKind::UnknownProposition(ap) => {
                write!(f, "label {ap} is not a declared atomic proposition")
            }
            DiagnosticKind::NonUniformSupport => {
                write!(f, "distributions do not share one support")
            }
        }
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum MdpError {
    #[error("state index {0} out of range")]
    StateOutOfRange(usize),
    #[error("action index {0} out of range")]
    ActionOutOfRange(usize),
    #[error("model has no states")]
    Empty,
    #[error("state, transition and label tables disagree in length")]
    ShapeMismatch,
    #[error("invalid model: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

impl<P: Probability> Mdp<P> {
    pub fn new(
        state_names: Vec<String>,
        action_names: Vec<String>,
        initial: StateId,
        trans: Vec<BTreeMap<ActionId, Distribution<P>>>,
        labels: Vec<BTreeSet<String>>,
    ) -> Result<Self, MdpError> {
        if state_names.is_empty() {
            return Err(MdpError::Empty);
        }
        if trans.len() != state_names.len() || labels.len() != state_names.len() {
            return Err(MdpError::ShapeMismatch);
        }
        if initial.0 >= state_names.len() {
            return Err(MdpError::StateOutOfRange(initial.0));
        }
        for row in &trans {
            for (a, dist) in row {
                if a.0 >= action_names.len() {
                    return Err(MdpError::ActionOutOfRange(a.0));
                }
                if let Some(s) = dist.support().find(|s| s.0 >= state_names.len()) {
                    return Err(MdpError::StateOutOfRange(s.0));
                }
            }
        }
        let ap = labels.iter().flatten().cloned().collect();
        Ok(Mdp {
            state_names,
            action_names,
            initial,
            trans,
            labels,
            ap,
        })
    }

    /// Declares extra atomic propositions that no state carries.
    pub fn with_propositions(mut self, extra: impl IntoIterator<Item = String>) -> Self {
        self.ap.extend(extra);
        self
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.num_states()).map(StateId)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.state_names[s.0]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.action_names[a.0]
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name).map(StateId)
    }

    pub fn action_by_name(&self, name: &str) -> Option<ActionId> {
        self.action_names
            .iter()
            .position(|n| n == name)
            .map(ActionId)
    }

    /// Enabled actions of `s` in ascending index order.
    pub fn enabled(&self, s: StateId) -> impl Iterator<Item = ActionId> + '_ {
        self.trans[s.0].keys().copied()
    }

    pub fn is_enabled(&self, s: StateId, a: ActionId) -> bool {
        self.trans[s.0].contains_key(&a)
    }

    pub fn distribution(&self, s: StateId, a: ActionId) -> Option<&Distribution<P>> {
        self.trans[s.0].get(&a)
    }

    /// `(action, distribution)` pairs of `s` in action order.
    pub fn choices(&self, s: StateId) -> impl Iterator<Item = (ActionId, &Distribution<P>)> + '_ {
        self.trans[s.0].iter().map(|(a, d)| (*a, d))
    }

    pub fn transition(&self, s: StateId, a: ActionId, t: StateId) -> P {
        self.distribution(s, a)
            .map(|d| d.prob(t))
            .unwrap_or_else(P::zero)
    }

    pub fn labels(&self, s: StateId) -> &BTreeSet<String> {
        &self.labels[s.0]
    }

    pub fn has_label(&self, s: StateId, ap: &str) -> bool {
        self.labels[s.0].contains(ap)
    }

    pub fn propositions(&self) -> &BTreeSet<String> {
        &self.ap
    }

    pub fn is_deadlock(&self, s: StateId) -> bool {
        self.trans[s.0].is_empty()
    }

    /// Number of enabled `(state, action)` pairs.
    pub fn num_choices(&self) -> usize {
        self.trans.iter().map(|row| row.len()).sum()
    }

    /// Assumption of the nonblocking guarantee: at every state all enabled
    /// distributions share one support.
    pub fn has_uniform_support(&self) -> bool {
        self.states().all(|s| self.uniform_at(s))
    }

    fn uniform_at(&self, s: StateId) -> bool {
        let mut supports = self.trans[s.0]
            .values()
            .map(|d| d.support().collect::<Vec<_>>());
        match supports.next() {
            Some(first) => supports.all(|other| other == first),
            None => true,
        }
    }

    /// Lists every violated well-formedness condition. With
    /// `require_uniform_support` the shared-support assumption is checked too.
    pub fn diagnostics(&self, require_uniform_support: bool) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let tol = P::mass_tolerance();
        for s in self.states() {
            let state = self.state_name(s).to_string();
            if self.is_deadlock(s) {
                out.push(Diagnostic {
                    state: state.clone(),
                    action: None,
                    kind: DiagnosticKind::Deadlock,
                });
            }
            for (a, dist) in self.choices(s) {
                let action = Some(self.action_name(a).to_string());
                for (_, p) in dist.iter() {
                    if *p < P::zero() {
                        out.push(Diagnostic {
                            state: state.clone(),
                            action: action.clone(),
                            kind: DiagnosticKind::NegativeProbability,
                        });
                    } else if *p > P::one() + tol.clone() {
                        out.push(Diagnostic {
                            state: state.clone(),
                            action: action.clone(),
                            kind: DiagnosticKind::ProbabilityAboveOne,
                        });
                    }
                }
                let mass = dist.mass();
                if !mass.within(&P::one(), &tol) {
                    out.push(Diagnostic {
                        state: state.clone(),
                        action,
                        kind: DiagnosticKind::MassNotOne {
                            mass: mass.to_exact_string(),
                        },
                    });
                }
            }
            for ap in self.labels(s) {
                if !self.ap.contains(ap) {
                    out.push(Diagnostic {
                        state: state.clone(),
                        action: None,
                        kind: DiagnosticKind::UnknownProposition(ap.clone()),
                    });
                }
            }
            if require_uniform_support && !self.uniform_at(s) {
                out.push(Diagnostic {
                    state,
                    action: None,
                    kind: DiagnosticKind::NonUniformSupport,
                });
            }
        }
        out
    }

    /// Well-formedness diagnostics; empty iff the model is a valid MDP.
    pub fn validate(&self) -> Vec<Diagnostic> {
        self.diagnostics(false)
    }

    pub fn ensure_valid(&self) -> Result<(), MdpError> {
        let diags = self.validate();
        if diags.is_empty() {
            Ok(())
        } else {
            Err(MdpError::Invalid(diags))
        }
    }

    /// States reachable from the initial state, in BFS order.
    pub fn reachable(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.num_states()];
        let mut order = vec![self.initial];
        seen[self.initial.0] = true;
        let mut head = 0;
        while head < order.len() {
            let s = order[head];
            head += 1;
            for (_, d) in self.choices(s) {
                for t in d.support() {
                    if !seen[t.0] {
                        seen[t.0] = true;
                        order.push(t);
                    }
                }
            }
        }
        order
    }

    /// Copy of the model with `keep(s, a)` deciding which actions survive.
    /// States and ids are unchanged; states may become deadlocks.
    pub fn restrict(&self, mut keep: impl FnMut(StateId, ActionId) -> bool) -> Self {
        let trans = self
            .trans
            .iter()
            .enumerate()
            .map(|(s, row)| {
                row.iter()
                    .filter(|(a, _)| keep(StateId(s), **a))
                    .map(|(a, d)| (*a, d.clone()))
                    .collect()
            })
            .collect();
        Mdp {
            trans,
            ..self.clone()
        }
    }

    /// Converts every probability into another scalar type.
    pub fn map_probabilities<Q: Probability>(&self, mut f: impl FnMut(&P) -> Q) -> Mdp<Q> {
        let trans = self
            .trans
            .iter()
            .map(|row| {
                row.iter()
                    .map(|(a, d)| (*a, Distribution::new(d.iter().map(|(s, p)| (s, f(p))))))
                    .collect()
            })
            .collect();
        Mdp {
            state_names: self.state_names.clone(),
            action_names: self.action_names.clone(),
            initial: self.initial,
            trans,
            labels: self.labels.clone(),
            ap: self.ap.clone(),
        }
    }
}

/// Incremental construction by name.
#[derive(Debug, Clone)]
pub struct MdpBuilder<P> {
    state_names: Vec<String>,
    action_names: Vec<String>,
    initial: Option<usize>,
    trans: Vec<BTreeMap<ActionId, Vec<(StateId, P)>>>,
    labels: Vec<BTreeSet<String>>,
    extra_ap: BTreeSet<String>,
}

impl<P: Probability> Default for MdpBuilder<P> {
    fn default() -> Self {
        MdpBuilder {
            state_names: Vec::new(),
            action_names: Vec::new(),
            initial: None,
            trans: Vec::new(),
            labels: Vec::new(),
            extra_ap: BTreeSet::new(),
        }
    }
}

impl<P: Probability> MdpBuilder<P> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&mut self, name: &str) -> StateId {
        if let Some(i) = self.state_names.iter().position(|n| n == name) {
            return StateId(i);
        }
        self.state_names.push(name.to_string());
        self.trans.push(BTreeMap::new());
        self.labels.push(BTreeSet::new());
        StateId(self.state_names.len() - 1)
    }

    pub fn action(&mut self, name: &str) -> ActionId {
        if let Some(i) = self.action_names.iter().position(|n| n == name) {
            return ActionId(i);
        }
        self.action_names.push(name.to_string());
        ActionId(self.action_names.len() - 1)
    }

    pub fn initial(&mut self, name: &str) -> &mut Self {
        let s = self.state(name);
        self.initial = Some(s.0);
        self
    }

    pub fn label(&mut self, state: &str, ap: &str) -> &mut Self {
        let s = self.state(state);
        self.labels[s.0].insert(ap.to_string());
        self
    }

    pub fn proposition(&mut self, ap: &str) -> &mut Self {
        self.extra_ap.insert(ap.to_string());
        self
    }

    /// Adds `(target, p)` entries to the distribution of `(state, action)`.
    pub fn transition(&mut self, state: &str, action: &str, targets: &[(&str, P)]) -> &mut Self {
        let s = self.state(state);
        let a = self.action(action);
        let targets: Vec<(StateId, P)> = targets
            .iter()
            .map(|(t, p)| (self.state(t), p.clone()))
            .collect();
        self.trans[s.0].entry(a).or_default().extend(targets);
        self
    }

    pub fn build(&self) -> Result<Mdp<P>, MdpError> {
        let trans = self
            .trans
            .iter()
            .map(|row| {
                row.iter()
                    .map(|(a, entries)| (*a, Distribution::new(entries.iter().cloned())))
                    .collect()
            })
            .collect();
        Mdp::new(
            self.state_names.clone(),
            self.action_names.clone(),
            StateId(self.initial.unwrap_or(0)),
            trans,
            self.labels.clone(),
        )
        .map(|m| m.with_propositions(self.extra_ap.iter().cloned()))
    }
}
