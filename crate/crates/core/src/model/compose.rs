use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::dfa::{Dfa, DfaError};
use super::mdp::{ActionId, Distribution, Mdp, MdpError, StateId};
use super::path::WordSymbol;
use crate::prob::Probability;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ComposeError {
    #[error("left operand: {0}")]
    InvalidLeft(MdpError),
    #[error("right operand: {0}")]
    InvalidRight(MdpError),
    #[error("supervisor symbol ({state}, {action}) is outside the model's state-action alphabet")]
    AlphabetMismatch { state: usize, action: usize },
    #[error(transparent)]
    Dfa(#[from] DfaError),
}

/// `m1 || m2` restricted to reachable states, with the component pair of
/// every product state.
#[derive(Debug, Clone)]
pub struct Product<P> {
    pub mdp: Mdp<P>,
    pub components: Vec<(StateId, StateId)>,
}

/// `m ||sup K` restricted to reachable states.
#[derive(Debug, Clone)]
pub struct Supervised<P> {
    pub mdp: Mdp<P>,
    /// Plant state and supervisor state of every product state.
    pub components: Vec<(StateId, usize)>,
    /// Product states where the plant has enabled actions but the supervisor
    /// allows none of them.
    pub blocking: Vec<StateId>,
}

impl<P: Probability> Supervised<P> {
    pub fn plant_state(&self, s: StateId) -> StateId {
        self.components[s.0].0
    }

    /// Plant state of every product state, indexable by product id.
    pub fn plant_map(&self) -> Vec<StateId> {
        self.components.iter().map(|(s, _)| *s).collect()
    }

    /// Blocking states reachable in fewer than `k` steps.
    pub fn blocking_within(&self, k: usize) -> Vec<StateId> {
        let depth = bfs_depth(&self.mdp);
        self.blocking
            .iter()
            .copied()
            .filter(|s| depth[s.0].is_some_and(|d| d < k))
            .collect()
    }
}

pub(crate) fn bfs_depth<P: Probability>(m: &Mdp<P>) -> Vec<Option<usize>> {
    let mut depth = vec![None; m.num_states()];
    depth[m.initial().0] = Some(0);
    let mut queue = VecDeque::from([m.initial()]);
    while let Some(s) = queue.pop_front() {
        let d = depth[s.0].unwrap();
        for (_, dist) in m.choices(s) {
            for t in dist.support() {
                if depth[t.0].is_none() {
                    depth[t.0] = Some(d + 1);
                    queue.push_back(t);
                }
            }
        }
    }
    depth
}

/// Parallel composition: actions with the same name synchronise and
/// multiply probabilities, all others interleave. Both inputs must be valid.
pub fn parallel_compose<P: Probability>(
    m1: &Mdp<P>,
    m2: &Mdp<P>,
) -> Result<Product<P>, ComposeError> {
    m1.ensure_valid().map_err(ComposeError::InvalidLeft)?;
    m2.ensure_valid().map_err(ComposeError::InvalidRight)?;
    Ok(parallel_compose_unchecked(m1, m2))
}

/// [`parallel_compose`] without input validation; deadlock states in the
/// operands simply contribute no moves.
pub fn parallel_compose_unchecked<P: Probability>(m1: &Mdp<P>, m2: &Mdp<P>) -> Product<P> {
    let mut action_names: Vec<String> = m1.action_names().to_vec();
    for name in m2.action_names() {
        if !action_names.contains(name) {
            action_names.push(name.clone());
        }
    }
    let in1: Vec<Option<ActionId>> = action_names.iter().map(|n| m1.action_by_name(n)).collect();
    let in2: Vec<Option<ActionId>> = action_names.iter().map(|n| m2.action_by_name(n)).collect();

    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut components: Vec<(StateId, StateId)> = Vec::new();
    let start = (m1.initial(), m2.initial());
    index.insert(start, StateId(0));
    components.push(start);
    let mut trans: Vec<BTreeMap<ActionId, Distribution<P>>> = Vec::new();
    let mut head = 0;
    while head < components.len() {
        let (s1, s2) = components[head];
        head += 1;
        let mut row = BTreeMap::new();
        for (x, (a1, a2)) in in1.iter().zip(&in2).enumerate() {
            let entries: Vec<((StateId, StateId), P)> = match (a1, a2) {
                (Some(a1), Some(a2)) => {
                    match (m1.distribution(s1, *a1), m2.distribution(s2, *a2)) {
                        (Some(d1), Some(d2)) => d1
                            .iter()
                            .flat_map(|(t1, p1)| {
                                d2.iter()
                                    .map(move |(t2, p2)| ((t1, t2), p1.clone() * p2.clone()))
                            })
                            .collect(),
                        _ => continue,
                    }
                }
                (Some(a1), None) => match m1.distribution(s1, *a1) {
                    Some(d1) => d1.iter().map(|(t1, p)| ((t1, s2), p.clone())).collect(),
                    None => continue,
                },
                (None, Some(a2)) => match m2.distribution(s2, *a2) {
                    Some(d2) => d2.iter().map(|(t2, p)| ((s1, t2), p.clone())).collect(),
                    None => continue,
                },
                (None, None) => unreachable!("every product action comes from an operand"),
            };
            let dist = entries.into_iter().map(|(pair, p)| {
                let id = *index.entry(pair).or_insert_with(|| {
                    components.push(pair);
                    StateId(components.len() - 1)
                });
                (id, p)
            });
            row.insert(ActionId(x), Distribution::new(dist));
        }
        trans.push(row);
    }
    let names = components
        .iter()
        .map(|(a, b)| format!("({},{})", m1.state_name(*a), m2.state_name(*b)))
        .collect();
    let labels = components
        .iter()
        .map(|(a, b)| {
            m1.labels(*a)
                .union(m2.labels(*b))
                .cloned()
                .collect::<BTreeSet<_>>()
        })
        .collect();
    let mdp = Mdp::new(names, action_names, StateId(0), trans, labels)
        .expect("product indices are in range by construction")
        .with_propositions(m1.propositions().union(m2.propositions()).cloned());
    Product { mdp, components }
}

/// Parallel composition of several agents with the component tuple of
/// every reachable product state.
#[derive(Debug, Clone)]
pub struct SystemProduct<P> {
    pub mdp: Mdp<P>,
    pub components: Vec<Vec<StateId>>,
}

/// `m_1 || ... || m_n` built directly over state tuples: an action moves
/// every agent that has it, jointly, and leaves the others in place.
/// Action order is the first-appearance order across the agents.
pub fn parallel_compose_all<P: Probability>(agents: &[&Mdp<P>]) -> SystemProduct<P> {
    let mut action_names: Vec<String> = Vec::new();
    for m in agents {
        for name in m.action_names() {
            if !action_names.contains(name) {
                action_names.push(name.clone());
            }
        }
    }
    let local: Vec<Vec<Option<ActionId>>> = action_names
        .iter()
        .map(|n| agents.iter().map(|m| m.action_by_name(n)).collect())
        .collect();
    let start: Vec<StateId> = agents.iter().map(|m| m.initial()).collect();
    let mut index: HashMap<Vec<StateId>, StateId> = HashMap::from([(start.clone(), StateId(0))]);
    let mut components = vec![start];
    let mut trans: Vec<BTreeMap<ActionId, Distribution<P>>> = Vec::new();
    let mut head = 0;
    while head < components.len() {
        let tuple = components[head].clone();
        head += 1;
        let mut row = BTreeMap::new();
        'action: for (x, ids) in local.iter().enumerate() {
            let mut joint: Vec<(Vec<StateId>, P)> = vec![(tuple.clone(), P::one())];
            for (i, id) in ids.iter().enumerate() {
                let Some(a) = id else { continue };
                let Some(d) = agents[i].distribution(tuple[i], *a) else {
                    continue 'action;
                };
                joint = joint
                    .into_iter()
                    .flat_map(|(t, p)| {
                        d.iter().map(move |(s, q)| {
                            let mut t = t.clone();
                            t[i] = s;
                            (t, p.clone() * q.clone())
                        })
                    })
                    .collect();
            }
            let dist = joint.into_iter().map(|(t, p)| {
                let id = *index.entry(t.clone()).or_insert_with(|| {
                    components.push(t);
                    StateId(components.len() - 1)
                });
                (id, p)
            });
            row.insert(ActionId(x), Distribution::new(dist));
        }
        trans.push(row);
    }
    let names = components
        .iter()
        .map(|t| {
            let parts: Vec<&str> = t
                .iter()
                .zip(agents)
                .map(|(s, m)| m.state_name(*s))
                .collect();
            format!("({})", parts.join(","))
        })
        .collect();
    let labels = components
        .iter()
        .map(|t| {
            t.iter()
                .zip(agents)
                .flat_map(|(s, m)| m.labels(*s).iter().cloned())
                .collect::<BTreeSet<_>>()
        })
        .collect();
    let propositions: BTreeSet<String> = agents
        .iter()
        .flat_map(|m| m.propositions().iter().cloned())
        .collect();
    let mdp = Mdp::new(names, action_names, StateId(0), trans, labels)
        .expect("product indices are in range by construction")
        .with_propositions(propositions);
    SystemProduct { mdp, components }
}

/// Supervised composition `m ||sup k`: in product state `(s, q)` action `a`
/// is enabled iff `k` has a transition on `(s, a)` from `q`.
pub fn supervised_compose<P: Probability>(
    m: &Mdp<P>,
    k: &Dfa<WordSymbol>,
) -> Result<Supervised<P>, ComposeError> {
    if let Some(bad) = k
        .alphabet()
        .iter()
        .find(|w| w.state.0 >= m.num_states() || w.action.0 >= m.num_actions())
    {
        return Err(ComposeError::AlphabetMismatch {
            state: bad.state.0,
            action: bad.action.0,
        });
    }
    let symbols = k.symbol_indices();
    let mut index: HashMap<(StateId, usize), StateId> = HashMap::new();
    let start = (m.initial(), k.initial());
    index.insert(start, StateId(0));
    let mut components = vec![start];
    let mut trans: Vec<BTreeMap<ActionId, Distribution<P>>> = Vec::new();
    let mut blocking = Vec::new();
    let mut head = 0;
    while head < components.len() {
        let (s, q) = components[head];
        let id = StateId(head);
        head += 1;
        let mut row = BTreeMap::new();
        for (a, dist) in m.choices(s) {
            let Some(q2) = symbols
                .get(&WordSymbol::new(s, a))
                .and_then(|&sym| k.step(q, sym))
            else {
                continue;
            };
            let entries = dist.iter().map(|(t, p)| {
                let pair = (t, q2);
                let id = *index.entry(pair).or_insert_with(|| {
                    components.push(pair);
                    StateId(components.len() - 1)
                });
                (id, p.clone())
            });
            row.insert(a, Distribution::new(entries));
        }
        if row.is_empty() && !m.is_deadlock(s) {
            blocking.push(id);
        }
        trans.push(row);
    }
    let names = components
        .iter()
        .map(|(s, q)| format!("({},q{})", m.state_name(*s), q))
        .collect();
    let labels = components
        .iter()
        .map(|(s, _)| m.labels(*s).clone())
        .collect();
    let mdp = Mdp::new(names, m.action_names().to_vec(), StateId(0), trans, labels)
        .expect("product indices are in range by construction")
        .with_propositions(m.propositions().iter().cloned());
    Ok(Supervised {
        mdp,
        components,
        blocking,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{alphabet, MdpBuilder};

    fn toggler(action: &str) -> Mdp<f64> {
        let mut b = MdpBuilder::new();
        b.initial("x0")
            .transition("x0", action, &[("x1", 0.5), ("x0", 0.5)])
            .transition("x1", action, &[("x0", 1.0)])
            .label("x1", "on");
        b.build().unwrap()
    }

    #[test]
    fn disjoint_alphabets_interleave() {
        let p = parallel_compose(&toggler("a"), &toggler("b")).unwrap();
        assert_eq!(p.mdp.num_states(), 4);
        assert_eq!(p.mdp.action_names(), &["a".to_string(), "b".to_string()]);
        let init = p.mdp.initial();
        // a moves only the left component
        let d = p.mdp.distribution(init, ActionId(0)).unwrap();
        for (t, _) in d.iter() {
            assert_eq!(p.components[t.0].1, StateId(0));
        }
        assert!(p.mdp.validate().is_empty());
    }

    #[test]
    fn synchronising_with_a_trivial_loop_is_identity() {
        let m = toggler("a");
        let mut b = MdpBuilder::new();
        b.initial("i").transition("i", "a", &[("i", 1.0)]);
        let p = parallel_compose(&m, &b.build().unwrap()).unwrap();
        assert_eq!(p.mdp.num_states(), m.num_states());
        for s in p.mdp.states() {
            let (orig, _) = p.components[s.0];
            assert_eq!(p.mdp.labels(s), m.labels(orig));
            for (a, d) in p.mdp.choices(s) {
                for (t, prob) in d.iter() {
                    assert_eq!(*prob, m.transition(orig, a, p.components[t.0].0));
                }
            }
        }
    }

    #[test]
    fn nary_composition_matches_binary() {
        let (a, b) = (toggler("a"), toggler("b"));
        let binary = parallel_compose(&a, &b).unwrap();
        let all = parallel_compose_all(&[&a, &b]);
        assert_eq!(all.mdp.num_states(), binary.mdp.num_states());
        for s in all.mdp.states() {
            let pair = (all.components[s.0][0], all.components[s.0][1]);
            let t = StateId(binary.components.iter().position(|c| *c == pair).unwrap());
            for (x, d) in all.mdp.choices(s) {
                for (u, p) in d.iter() {
                    let tu = &all.components[u.0];
                    let bu = binary
                        .components
                        .iter()
                        .position(|c| *c == (tu[0], tu[1]))
                        .unwrap();
                    assert_eq!(*p, binary.mdp.transition(t, x, StateId(bu)));
                }
            }
        }
    }

    #[test]
    fn universal_supervisor_changes_nothing() {
        let m = toggler("a");
        let k = Dfa::universal(alphabet(&m));
        let sup = supervised_compose(&m, &k).unwrap();
        assert_eq!(sup.mdp.num_states(), m.num_states());
        assert!(sup.blocking.is_empty());
    }

    #[test]
    fn supervisor_restricts_the_initial_choice() {
        let mut b = MdpBuilder::<f64>::new();
        b.initial("s")
            .transition("s", "a", &[("s", 1.0)])
            .transition("s", "b", &[("s", 1.0)]);
        let m = b.build().unwrap();
        let sigma = alphabet(&m);
        // only (s, a) defined from the initial state
        let k = Dfa::new(sigma, vec![vec![Some(0), None]], 0, vec![true]).unwrap();
        let sup = supervised_compose(&m, &k).unwrap();
        let enabled: Vec<_> = sup.mdp.enabled(sup.mdp.initial()).collect();
        assert_eq!(enabled, vec![ActionId(0)]);
    }

    #[test]
    fn foreign_symbols_are_rejected() {
        let m = toggler("a");
        let k = Dfa::universal(vec![WordSymbol::new(StateId(7), ActionId(0))]);
        assert_eq!(
            supervised_compose(&m, &k).unwrap_err(),
            ComposeError::AlphabetMismatch {
                state: 7,
                action: 0
            }
        );
    }

    #[test]
    fn empty_supervisor_language_blocks() {
        let m = toggler("a");
        let sigma = alphabet(&m);
        let n = sigma.len();
        let k = Dfa::new(sigma, vec![vec![None; n]], 0, vec![true]).unwrap();
        let sup = supervised_compose(&m, &k).unwrap();
        assert_eq!(sup.blocking, vec![StateId(0)]);
        assert_eq!(sup.blocking_within(1), vec![StateId(0)]);
        assert!(sup.blocking_within(0).is_empty());
    }
}
