//! Assume-guarantee checking of `m1 || m2 |= P<=p [...]`.
//!
//! `m2` is replaced by a quotient automaton over a state partition, which
//! simulates it by construction. The first premise `m1 || A |= f` is checked
//! directly; abstract counterexamples are replayed on `m2` and the partition
//! is split until the premise holds or a concrete violation is found.

mod partition;
mod premise;
mod quotient;

use std::collections::BTreeMap;

pub use partition::{initial_partition, Partition};
pub use premise::{check_premise, premise_product, PremiseOutcome, PremiseProduct};
pub use quotient::{build_quotient, is_stable, lift, signature_class, unstable_blocks, QuotientPa};

use crate::counterexample::CeError;
use crate::model::{DtmcError, Mdp, StateId};
use crate::pctl::{BoundedFormula, PctlError};
use crate::prob::Probability;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AgrError {
    #[error(transparent)]
    Formula(#[from] PctlError),
    #[error(transparent)]
    Chain(#[from] DtmcError),
    #[error(transparent)]
    Counterexample(#[from] CeError),
    #[error("block {block} cannot be split along the spurious step")]
    Unsplittable { block: usize },
    #[error("abstract counterexample starts outside the initial block")]
    BadStart,
}

/// One step of an abstract counterexample: the `m1` state, the block of
/// `m2`, and the action with the chosen lifted distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractStep {
    pub m1: StateId,
    pub block: usize,
    pub action: String,
    pub choice: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbstractCe<P> {
    pub steps: Vec<AbstractStep>,
    pub last: (StateId, usize),
    pub probability: P,
}

impl<P> AbstractCe<P> {
    /// Blocks visited, including the final one.
    pub fn blocks(&self) -> Vec<usize> {
        self.steps
            .iter()
            .map(|s| s.block)
            .chain(std::iter::once(self.last.1))
            .collect()
    }

    pub fn m1_states(&self) -> Vec<StateId> {
        self.steps
            .iter()
            .map(|s| s.m1)
            .chain(std::iter::once(self.last.0))
            .collect()
    }
}

/// A path of `m1 || m2` over state pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcretePath<P> {
    pub states: Vec<(StateId, StateId)>,
    pub actions: Vec<String>,
    pub probability: P,
}

impl<P: Probability> ConcretePath<P> {
    /// Probability of the path recomputed from the two models.
    pub fn probability_in(&self, m1: &Mdp<P>, m2: &Mdp<P>) -> P {
        self.states
            .windows(2)
            .zip(&self.actions)
            .fold(P::one(), |acc, (w, x)| {
                let f1 = match m1.action_by_name(x) {
                    Some(a) => m1.transition(w[0].0, a, w[1].0),
                    None if w[0].0 == w[1].0 => P::one(),
                    None => P::zero(),
                };
                let f2 = match m2.action_by_name(x) {
                    Some(a) => m2.transition(w[0].1, a, w[1].1),
                    None if w[0].1 == w[1].1 => P::one(),
                    None => P::zero(),
                };
                acc * f1 * f2
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Realization<P> {
    /// The most probable concrete path following the abstract one.
    Real(ConcretePath<P>),
    /// No concrete state of `block` reached so far can take step `step`.
    Spurious { step: usize, block: usize },
}

/// Replays `ce` on `m2` by transition support, keeping the best concrete
/// probability of every reachable state in the current block.
pub fn realize<P: Probability>(
    m1: &Mdp<P>,
    m2: &Mdp<P>,
    partition: &Partition,
    ce: &AbstractCe<P>,
) -> Result<Realization<P>, AgrError> {
    let blocks = ce.blocks();
    let m1_states = ce.m1_states();
    if partition.block_of(m2.initial()) != blocks[0] {
        return Err(AgrError::BadStart);
    }
    let mut layers: Vec<BTreeMap<StateId, (P, StateId)>> =
        vec![BTreeMap::from([(m2.initial(), (P::one(), m2.initial()))])];
    let mut m1_factor = P::one();
    for (i, step) in ce.steps.iter().enumerate() {
        if let Some(a1) = m1.action_by_name(&step.action) {
            m1_factor = m1_factor * m1.transition(m1_states[i], a1, m1_states[i + 1]);
        }
        let current = layers.last().expect("layers start non-empty");
        let mut next: BTreeMap<StateId, (P, StateId)> = BTreeMap::new();
        match m2.action_by_name(&step.action) {
            Some(a2) => {
                for (s, (p, _)) in current {
                    let Some(mu) = m2.distribution(*s, a2) else {
                        continue;
                    };
                    for (t, q) in mu.iter() {
                        if partition.block_of(t) != blocks[i + 1] {
                            continue;
                        }
                        let cand = p.clone() * q.clone();
                        let better = next.get(&t).is_none_or(|(old, _)| cand > *old);
                        if better {
                            next.insert(t, (cand, *s));
                        }
                    }
                }
            }
            None => {
                for (s, (p, _)) in current {
                    next.insert(*s, (p.clone(), *s));
                }
            }
        }
        if next.is_empty() {
            return Ok(Realization::Spurious {
                step: i,
                block: blocks[i],
            });
        }
        layers.push(next);
    }
    let last = layers.last().expect("layers start non-empty");
    let (mut s, (best, _)) = last
        .iter()
        .fold(None::<(StateId, &(P, StateId))>, |acc, (s, e)| match acc {
            Some((_, a)) if a.0 >= e.0 => acc,
            _ => Some((*s, e)),
        })
        .map(|(s, e)| (s, e.clone()))
        .expect("last layer is non-empty");
    let mut m2_states = vec![s];
    for layer in layers[1..].iter().rev() {
        s = layer[&s].1;
        m2_states.push(s);
    }
    m2_states.reverse();
    Ok(Realization::Real(ConcretePath {
        states: m1_states.into_iter().zip(m2_states).collect(),
        actions: ce.steps.iter().map(|s| s.action.clone()).collect(),
        probability: m1_factor * best,
    }))
}

/// Splits the block of a spurious step into the states that can take the
/// step into the counterexample's next block and those that cannot.
pub fn refine<P: Probability>(
    p: &Partition,
    step: usize,
    block: usize,
    ce: &AbstractCe<P>,
    m2: &Mdp<P>,
) -> Result<Partition, AgrError> {
    let target = ce.blocks()[step + 1];
    let action = m2
        .action_by_name(&ce.steps[step].action)
        .ok_or(AgrError::Unsplittable { block })?;
    let can = p
        .block(block)
        .iter()
        .copied()
        .filter(|s| {
            m2.distribution(*s, action)
                .is_some_and(|mu| mu.support().any(|t| p.block_of(t) == target))
        })
        .collect();
    p.split(block, &can).ok_or(AgrError::Unsplittable { block })
}

#[derive(Debug, Clone, PartialEq)]
pub enum RoundOutcome {
    Holds,
    Real,
    Spurious {
        step: usize,
        block: usize,
    },
    /// Realizable, but the witness alone does not exceed the bound and the
    /// quotient is not exact yet; an unstable block was split.
    Weak {
        block: usize,
    },
}

/// One abstraction round of [`compositional_check`].
#[derive(Debug, Clone)]
pub struct AgrRound<P> {
    pub partition: Partition,
    pub abstract_pmax: P,
    pub ce: Option<AbstractCe<P>>,
    pub outcome: RoundOutcome,
}

#[derive(Debug, Clone)]
pub struct CompositionalResult<P> {
    pub holds: bool,
    pub counterexample: Option<ConcretePath<P>>,
    pub rounds: Vec<AgrRound<P>>,
}

impl<P> CompositionalResult<P> {
    pub fn refinements(&self) -> usize {
        self.rounds
            .iter()
            .filter(|r| {
                matches!(
                    r.outcome,
                    RoundOutcome::Spurious { .. } | RoundOutcome::Weak { .. }
                )
            })
            .count()
    }

    pub fn spurious(&self) -> impl Iterator<Item = &AgrRound<P>> {
        self.rounds
            .iter()
            .filter(|r| matches!(r.outcome, RoundOutcome::Spurious { .. }))
    }
}

/// Decides `m1 || m2 |= f` without building the product, abstracting `m2`.
///
/// A realizable abstract counterexample is accepted as real when its best
/// concrete witness alone exceeds the bound, or when the partition is stable
/// so that the quotient is exact; otherwise an unstable block is split.
pub fn compositional_check<P: Probability>(
    m1: &Mdp<P>,
    m2: &Mdp<P>,
    f: &BoundedFormula,
) -> Result<CompositionalResult<P>, AgrError> {
    let bound: P = f.bound()?;
    let mut partition = initial_partition(m2, f);
    let mut rounds = Vec::new();
    loop {
        let quotient = build_quotient(m2, &partition);
        let premise = check_premise(m1, &quotient, f, m2.propositions())?;
        let abstract_pmax = premise.verdict.pmax.clone();
        let Some(ce) = premise.ce else {
            rounds.push(AgrRound {
                partition,
                abstract_pmax,
                ce: None,
                outcome: RoundOutcome::Holds,
            });
            return Ok(CompositionalResult {
                holds: true,
                counterexample: None,
                rounds,
            });
        };
        let (next, outcome) = match realize(m1, m2, &partition, &ce)? {
            Realization::Spurious { step, block } => (
                refine(&partition, step, block, &ce, m2)?,
                RoundOutcome::Spurious { step, block },
            ),
            Realization::Real(witness) => {
                if witness.probability > bound.clone() + P::tie_tolerance()
                    || is_stable(m2, &partition)
                {
                    rounds.push(AgrRound {
                        partition,
                        abstract_pmax,
                        ce: Some(ce),
                        outcome: RoundOutcome::Real,
                    });
                    return Ok(CompositionalResult {
                        holds: false,
                        counterexample: Some(witness),
                        rounds,
                    });
                }
                let unstable = unstable_blocks(m2, &partition);
                let on_path = ce.blocks();
                let block = unstable
                    .iter()
                    .copied()
                    .find(|b| on_path.contains(b))
                    .unwrap_or(unstable[0]);
                let class = signature_class(m2, &partition, block);
                let split = partition
                    .split(block, &class)
                    .ok_or(AgrError::Unsplittable { block })?;
                (split, RoundOutcome::Weak { block })
            }
        };
        rounds.push(AgrRound {
            partition,
            abstract_pmax,
            ce: Some(ce),
            outcome,
        });
        partition = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parallel_compose, MdpBuilder};
    use crate::pctl::{check, parse_formula};

    fn looper() -> Mdp<f64> {
        let mut b = MdpBuilder::new();
        b.initial("x").transition("x", "a", &[("x", 1.0)]);
        b.build().unwrap()
    }

    /// Counts up to `n - 1` on `a`, failing from the top with 0.1.
    fn counter(n: usize) -> Mdp<f64> {
        let mut b = MdpBuilder::new();
        b.initial("c0").proposition("failure");
        for i in 0..n {
            let here = format!("c{i}");
            if i + 1 < n {
                let next = format!("c{}", i + 1);
                b.transition(&here, "a", &[(&next, 0.9), (&here, 0.1)]);
            } else {
                b.transition(&here, "a", &[(&here, 0.9), ("bad", 0.1)]);
            }
        }
        b.transition("bad", "a", &[("bad", 1.0)])
            .label("bad", "failure");
        b.build().unwrap()
    }

    #[test]
    fn initial_partition_groups_by_valuation() {
        let m = counter(4);
        let f = parse_formula(r#"P<=0.3 [ true U<=3 "failure" ]"#).unwrap();
        let p = initial_partition(&m, &f);
        assert_eq!(p.num_blocks(), 3);
        assert_eq!(p.block(p.block_of(m.initial())), &[m.initial()]);
    }

    #[test]
    fn quotient_keeps_both_lifted_distributions() {
        let m = counter(4);
        let f = parse_formula(r#"P<=0.3 [ true U<=3 "failure" ]"#).unwrap();
        let p = initial_partition(&m, &f);
        let q = build_quotient(&m, &p);
        let middle = p.block_of(m.state_by_name("c1").unwrap());
        let a = m.action_by_name("a").unwrap();
        assert_eq!(q.distributions(middle, a).len(), 2);
    }

    #[test]
    fn identity_quotient_is_exact() {
        let m = counter(3);
        let f = parse_formula(r#"P<=0.01 [ true U<=4 "failure" ]"#).unwrap();
        let p = Partition::identity(m.num_states());
        let q = build_quotient(&m, &p);
        let premise = check_premise(&looper(), &q, &f, m.propositions()).unwrap();
        let mono = check(&parallel_compose(&looper(), &m).unwrap().mdp, &f).unwrap();
        assert!((premise.verdict.pmax - mono.pmax).abs() < 1e-12);
        assert!(is_stable(&m, &p));
    }

    #[test]
    fn long_counter_needs_refinement_and_holds() {
        let m = counter(4);
        // failure needs at least 4 steps
        let f = parse_formula(r#"P<=0 [ true U<=3 "failure" ]"#).unwrap();
        let r = compositional_check(&looper(), &m, &f).unwrap();
        assert!(r.holds);
        assert!(r.spurious().count() >= 1);
        assert!(r.refinements() <= m.num_states());
        for w in r.rounds.windows(2) {
            assert!(w[1].partition.refines(&w[0].partition));
            assert!(w[1].partition.num_blocks() > w[0].partition.num_blocks());
        }
    }

    #[test]
    fn violations_come_with_real_paths() {
        let m = counter(2);
        let f = parse_formula(r#"P<=0.05 [ true U<=3 "failure" ]"#).unwrap();
        let r = compositional_check(&looper(), &m, &f).unwrap();
        let mono = check(&parallel_compose(&looper(), &m).unwrap().mdp, &f).unwrap();
        assert!(!mono.holds);
        assert!(!r.holds);
        let w = r.counterexample.unwrap();
        let p = w.probability_in(&looper(), &m);
        assert!(p > 0.0);
        assert!((p - w.probability).abs() < 1e-12);
    }
}
