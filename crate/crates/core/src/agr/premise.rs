use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{AbstractCe, AbstractStep, AgrError, QuotientPa};
use crate::counterexample::most_probable_path;
use crate::model::{induced_dtmc, ActionId, Distribution, Mdp, StateId};
use crate::pctl::{check, BoundedFormula, Verdict};
use crate::prob::Probability;

/// `m1 || A` for a quotient automaton `A`, flattened into an MDP whose
/// actions are `(action, choice)` pairs.
#[derive(Debug, Clone)]
pub struct PremiseProduct<P> {
    pub mdp: Mdp<P>,
    /// `(m1 state, block)` per product state.
    pub components: Vec<(StateId, usize)>,
    /// `(action name, distribution index)` per product action.
    pub moves: Vec<(String, usize)>,
}

pub fn premise_product<P: Probability>(m1: &Mdp<P>, ab: &QuotientPa<P>) -> PremiseProduct<P> {
    let mut names: Vec<String> = m1.action_names().to_vec();
    for n in ab.action_names() {
        if !names.contains(n) {
            names.push(n.clone());
        }
    }
    let in2 = |n: &str| ab.action_names().iter().position(|x| x == n).map(ActionId);
    let width: Vec<usize> = names
        .iter()
        .map(|n| {
            in2(n).map_or(1, |a| {
                (0..ab.num_blocks())
                    .map(|b| ab.distributions(b, a).len())
                    .max()
                    .unwrap_or(0)
                    .max(1)
            })
        })
        .collect();
    let mut moves = Vec::new();
    let mut move_id: HashMap<(usize, usize), ActionId> = HashMap::new();
    for (x, w) in width.iter().enumerate() {
        for j in 0..*w {
            move_id.insert((x, j), ActionId(moves.len()));
            moves.push((names[x].clone(), j));
        }
    }

    let start = (m1.initial(), ab.initial());
    let mut index: HashMap<(StateId, usize), StateId> = HashMap::from([(start, StateId(0))]);
    let mut components = vec![start];
    let mut trans: Vec<BTreeMap<ActionId, Distribution<P>>> = Vec::new();
    let mut head = 0;
    while head < components.len() {
        let (s1, b) = components[head];
        head += 1;
        let mut row = BTreeMap::new();
        for (x, name) in names.iter().enumerate() {
            let a1 = m1.action_by_name(name);
            let a2 = in2(name);
            let d1 = a1.and_then(|a| m1.distribution(s1, a));
            let options: Vec<Vec<((StateId, usize), P)>> = match (a1, a2) {
                (Some(_), Some(a2)) => match d1 {
                    Some(d1) => ab
                        .distributions(b, a2)
                        .iter()
                        .map(|mu| {
                            d1.iter()
                                .flat_map(|(t1, p)| {
                                    mu.iter()
                                        .map(move |(c, q)| ((t1, c.0), p.clone() * q.clone()))
                                })
                                .collect()
                        })
                        .collect(),
                    None => Vec::new(),
                },
                (Some(_), None) => d1
                    .map(|d1| vec![d1.iter().map(|(t1, p)| ((t1, b), p.clone())).collect()])
                    .unwrap_or_default(),
                (None, Some(a2)) => ab
                    .distributions(b, a2)
                    .iter()
                    .map(|mu| mu.iter().map(|(c, q)| ((s1, c.0), q.clone())).collect())
                    .collect(),
                (None, None) => unreachable!("every product action comes from an operand"),
            };
            for (j, entries) in options.into_iter().enumerate() {
                let dist = entries.into_iter().map(|(pair, p)| {
                    let id = *index.entry(pair).or_insert_with(|| {
                        components.push(pair);
                        StateId(components.len() - 1)
                    });
                    (id, p)
                });
                row.insert(move_id[&(x, j)], Distribution::new(dist));
            }
        }
        trans.push(row);
    }
    let state_names = components
        .iter()
        .map(|(s, b)| format!("({},#{})", m1.state_name(*s), b))
        .collect();
    let labels = components
        .iter()
        .map(|(s, b)| {
            m1.labels(*s)
                .union(ab.labels(*b))
                .cloned()
                .collect::<BTreeSet<_>>()
        })
        .collect();
    let action_names = moves.iter().map(|(n, j)| format!("{n}#{j}")).collect();
    let mdp = Mdp::new(state_names, action_names, StateId(0), trans, labels)
        .expect("product indices are in range by construction")
        .with_propositions(m1.propositions().iter().cloned());
    PremiseProduct {
        mdp,
        components,
        moves,
    }
}

/// Outcome of checking `m1 || A |= f`.
#[derive(Debug, Clone)]
pub struct PremiseOutcome<P> {
    pub verdict: Verdict<P>,
    pub product: PremiseProduct<P>,
    /// Most probable violating path under the maximising scheduler.
    pub ce: Option<AbstractCe<P>>,
}

/// Decides the first premise of the assume-guarantee rule. `extra_props`
/// are the propositions of the abstracted component.
pub fn check_premise<P: Probability>(
    m1: &Mdp<P>,
    ab: &QuotientPa<P>,
    f: &BoundedFormula,
    extra_props: &BTreeSet<String>,
) -> Result<PremiseOutcome<P>, AgrError> {
    let mut product = premise_product(m1, ab);
    product.mdp = product.mdp.with_propositions(extra_props.iter().cloned());
    let verdict = check(&product.mdp, f)?;
    if verdict.holds {
        return Ok(PremiseOutcome {
            verdict,
            product,
            ce: None,
        });
    }
    let chain = induced_dtmc(&product.mdp, verdict.witness(), f.horizon())?;
    let path = most_probable_path(&chain, |s| s, f)?;
    let steps = path
        .states
        .iter()
        .zip(&path.actions)
        .map(|(s, a)| {
            let (m1_state, block) = product.components[s.0];
            let (action, choice) = product.moves[a.0].clone();
            AbstractStep {
                m1: m1_state,
                block,
                action,
                choice,
            }
        })
        .collect();
    let ce = AbstractCe {
        steps,
        last: product.components[path.last_state().0],
        probability: path.probability.clone(),
    };
    Ok(PremiseOutcome {
        verdict,
        product,
        ce: Some(ce),
    })
}
