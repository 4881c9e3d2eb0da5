use std::collections::{BTreeSet, HashMap};

use super::mdp::{ActionId, Mdp, StateId};
use super::path::{Path, Scheduler};
use crate::prob::Probability;

/// Where a chain node came from in the model it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainNode {
    pub origin: StateId,
    /// Step index when produced by horizon unrolling.
    pub step: Option<usize>,
    /// The single action taken here; `None` for absorbing nodes.
    pub action: Option<ActionId>,
}

/// A discrete-time Markov chain. Absorbing nodes carry a probability-one
/// self-loop and no action.
#[derive(Debug, Clone)]
pub struct Dtmc<P> {
    nodes: Vec<ChainNode>,
    succ: Vec<Vec<(usize, P)>>,
    labels: Vec<BTreeSet<String>>,
    initial: usize,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum DtmcError {
    #[error("state {state} enables {count} actions; a chain needs at most one")]
    Nondeterministic { state: String, count: usize },
    #[error("scheduler has no choice for state {state} at step {step}")]
    UndefinedChoice { state: String, step: usize },
    #[error("scheduler picks action {action} which is not enabled in state {state}")]
    DisabledChoice { state: String, action: String },
}

impl<P: Probability> Dtmc<P> {
    /// Reads an MDP whose states enable at most one action as a chain.
    /// Deadlock states become absorbing.
    pub fn from_mdp(m: &Mdp<P>) -> Result<Self, DtmcError> {
        let mut nodes = Vec::with_capacity(m.num_states());
        let mut succ = Vec::with_capacity(m.num_states());
        for s in m.states() {
            let mut choices = m.choices(s);
            match (choices.next(), choices.next()) {
                (None, _) => {
                    nodes.push(ChainNode {
                        origin: s,
                        step: None,
                        action: None,
                    });
                    succ.push(vec![(s.0, P::one())]);
                }
                (Some((a, d)), None) => {
                    nodes.push(ChainNode {
                        origin: s,
                        step: None,
                        action: Some(a),
                    });
                    succ.push(d.iter().map(|(t, p)| (t.0, p.clone())).collect());
                }
                (Some(_), Some(_)) => {
                    return Err(DtmcError::Nondeterministic {
                        state: m.state_name(s).to_string(),
                        count: m.enabled(s).count(),
                    })
                }
            }
        }
        Ok(Dtmc {
            nodes,
            succ,
            labels: m.states().map(|s| m.labels(s).clone()).collect(),
            initial: m.initial().0,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn node(&self, i: usize) -> ChainNode {
        self.nodes[i]
    }

    pub fn labels(&self, i: usize) -> &BTreeSet<String> {
        &self.labels[i]
    }

    pub fn successors(&self, i: usize) -> &[(usize, P)] {
        &self.succ[i]
    }

    pub fn is_absorbing(&self, i: usize) -> bool {
        self.nodes[i].action.is_none()
    }

    /// Probability of reaching a node satisfying `target` within `k` steps
    /// while `keep` holds before it.
    pub fn bounded_reach(
        &self,
        keep: impl Fn(&BTreeSet<String>) -> bool,
        target: impl Fn(&BTreeSet<String>) -> bool,
        k: usize,
    ) -> P {
        let hit: Vec<bool> = self.labels.iter().map(&target).collect();
        let alive: Vec<bool> = self.labels.iter().map(&keep).collect();
        let mut x: Vec<P> = hit
            .iter()
            .map(|&h| if h { P::one() } else { P::zero() })
            .collect();
        for _ in 0..k {
            x = (0..self.num_nodes())
                .map(|i| {
                    if hit[i] {
                        P::one()
                    } else if !alive[i] {
                        P::zero()
                    } else {
                        self.succ[i]
                            .iter()
                            .fold(P::zero(), |acc, (j, p)| acc + p.clone() * x[*j].clone())
                    }
                })
                .collect();
        }
        x[self.initial].clone()
    }

    /// Maps a chain path (node indices) back to a path of the origin model.
    pub fn to_model_path(&self, nodes: &[usize], probability: P) -> Path<P> {
        Path {
            states: nodes.iter().map(|&i| self.nodes[i].origin).collect(),
            actions: nodes[..nodes.len().saturating_sub(1)]
                .iter()
                .map(|&i| self.nodes[i].action.expect("path leaves an absorbing node"))
                .collect(),
            probability,
        }
    }
}

/// Unrolls `m` under the step-indexed scheduler `sigma` into a chain over
/// `(state, step)` pairs for steps `0..=k`. Nodes at step `k` and deadlock
/// states are absorbing. Only pairs reachable from `(initial, 0)` are built.
pub fn induced_dtmc<P: Probability>(
    m: &Mdp<P>,
    sigma: &Scheduler,
    k: usize,
) -> Result<Dtmc<P>, DtmcError> {
    let mut index: HashMap<(StateId, usize), usize> = HashMap::new();
    let mut nodes: Vec<ChainNode> = Vec::new();
    let mut pending: Vec<(StateId, usize)> = Vec::new();
    let mut intern = |s: StateId, t: usize, nodes: &mut Vec<ChainNode>, pending: &mut Vec<_>| {
        *index.entry((s, t)).or_insert_with(|| {
            nodes.push(ChainNode {
                origin: s,
                step: Some(t),
                action: None,
            });
            pending.push((s, t));
            nodes.len() - 1
        })
    };
    let initial = intern(m.initial(), 0, &mut nodes, &mut pending);
    let mut succ: Vec<Vec<(usize, P)>> = Vec::new();
    let mut head = 0;
    while head < pending.len() {
        let (s, t) = pending[head];
        let id = head;
        head += 1;
        succ.push(Vec::new());
        if t == k || m.is_deadlock(s) {
            succ[id].push((id, P::one()));
            continue;
        }
        let a = sigma.get(s, t).ok_or_else(|| DtmcError::UndefinedChoice {
            state: m.state_name(s).to_string(),
            step: t,
        })?;
        let dist = m
            .distribution(s, a)
            .ok_or_else(|| DtmcError::DisabledChoice {
                state: m.state_name(s).to_string(),
                action: m.action_name(a).to_string(),
            })?;
        nodes[id].action = Some(a);
        let edges: Vec<(usize, P)> = dist
            .iter()
            .map(|(s2, p)| (intern(s2, t + 1, &mut nodes, &mut pending), p.clone()))
            .collect();
        succ[id] = edges;
    }
    let labels = nodes.iter().map(|n| m.labels(n.origin).clone()).collect();
    Ok(Dtmc {
        nodes,
        succ,
        labels,
        initial,
    })
}
