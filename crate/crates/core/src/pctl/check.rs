use super::formula::{BoundedFormula, PathFormula, StateFormula};
use super::PctlError;
use crate::model::{ActionId, Mdp, Scheduler, StateId};
use crate::prob::Probability;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Max,
    Min,
}

/// Optimal values `values[t][s]` for steps `0..=horizon` and the scheduler
/// that attains them.
#[derive(Debug, Clone)]
pub struct Extremal<P> {
    pub values: Vec<Vec<P>>,
    pub scheduler: Scheduler,
}

impl<P: Probability> Extremal<P> {
    pub fn at(&self, s: StateId, step: usize) -> &P {
        &self.values[step][s.0]
    }
}

/// Result of deciding `P<=p [ path ]` over all schedulers.
#[derive(Debug, Clone)]
pub struct Verdict<P> {
    pub holds: bool,
    pub bound: P,
    pub pmax: P,
    pub pmin: P,
    pub max: Extremal<P>,
    pub min: Extremal<P>,
}

impl<P: Probability> Verdict<P> {
    /// The maximising scheduler, a witness of violation when `!holds`.
    pub fn witness(&self) -> &Scheduler {
        &self.max.scheduler
    }

    pub fn sigma_min(&self) -> &Scheduler {
        &self.min.scheduler
    }

    /// `pmin > p`: no supervisor can repair the model.
    pub fn infeasible(&self) -> bool {
        self.pmin > self.bound.clone() + P::tie_tolerance()
    }
}

/// Rejects formulas mentioning propositions the model does not declare.
pub fn check_atoms<P: Probability>(m: &Mdp<P>, f: &BoundedFormula) -> Result<(), PctlError> {
    match f
        .atoms()
        .into_iter()
        .find(|a| !m.propositions().contains(a))
    {
        Some(a) => Err(PctlError::UnknownProposition(a)),
        None => Ok(()),
    }
}

pub fn eval_prop<P: Probability>(
    m: &Mdp<P>,
    sf: &StateFormula,
    s: StateId,
) -> Result<bool, PctlError> {
    if let Some(a) = sf
        .atoms()
        .into_iter()
        .find(|a| !m.propositions().contains(a))
    {
        return Err(PctlError::UnknownProposition(a));
    }
    Ok(sf.eval(m.labels(s)))
}

/// Satisfaction vector of `sf` over all states.
pub fn sat<P: Probability>(m: &Mdp<P>, sf: &StateFormula) -> Vec<bool> {
    m.states().map(|s| sf.eval(m.labels(s))).collect()
}

fn indicator<P: Probability>(bits: &[bool]) -> Vec<P> {
    bits.iter()
        .map(|&b| if b { P::one() } else { P::zero() })
        .collect()
}

/// One Bellman step: the optimal expected value of `next` per state and
/// the lowest-indexed action within tie tolerance of the optimum.
/// Deadlocks get value zero and no action.
fn sweep<P: Probability>(m: &Mdp<P>, next: &[P], mode: Mode) -> (Vec<P>, Vec<Option<ActionId>>) {
    let tol = P::tie_tolerance();
    m.states()
        .map(|s| {
            let q: Vec<(ActionId, P)> = m
                .choices(s)
                .map(|(a, d)| {
                    let v = d
                        .iter()
                        .fold(P::zero(), |acc, (t, p)| acc + p.clone() * next[t.0].clone());
                    (a, v)
                })
                .collect();
            let Some(first) = q.first() else {
                return (P::zero(), None);
            };
            let best = q
                .iter()
                .skip(1)
                .fold(first.1.clone(), |acc, (_, v)| match mode {
                    Mode::Max => acc.max_of(v.clone()),
                    Mode::Min => acc.min_of(v.clone()),
                });
            let choice = q
                .iter()
                .find(|(_, v)| v.within(&best, &tol))
                .map(|(a, _)| *a);
            (best, choice)
        })
        .unzip()
}

/// Backward value iteration for the bounded path formula of `f`.
pub fn extremal_bounded_until<P: Probability>(
    m: &Mdp<P>,
    f: &BoundedFormula,
    mode: Mode,
) -> Result<Extremal<P>, PctlError> {
    check_atoms(m, f)?;
    let k = f.horizon();
    let target = sat(m, f.target());
    let mut values: Vec<Vec<P>> = vec![Vec::new(); k + 1];
    values[k] = indicator(&target);
    let mut scheduler = Scheduler::new(k, m.num_states());
    match &f.path {
        PathFormula::Next(_) => {
            let (v, choice) = sweep(m, &values[1], mode);
            for (s, a) in choice.into_iter().enumerate() {
                scheduler.set(StateId(s), 0, a);
            }
            values[0] = v;
        }
        PathFormula::Until { lhs, .. } => {
            let keep = sat(m, lhs);
            for t in (0..k).rev() {
                let (v, choice) = sweep(m, &values[t + 1], mode);
                for (s, a) in choice.into_iter().enumerate() {
                    scheduler.set(StateId(s), t, a);
                }
                values[t] = v
                    .into_iter()
                    .enumerate()
                    .map(|(s, x)| {
                        if target[s] {
                            P::one()
                        } else if keep[s] {
                            x
                        } else {
                            P::zero()
                        }
                    })
                    .collect();
            }
        }
    }
    Ok(Extremal { values, scheduler })
}

/// Decides `m |= f`: holds iff the maximal probability from the initial
/// state does not exceed the bound.
pub fn check<P: Probability>(m: &Mdp<P>, f: &BoundedFormula) -> Result<Verdict<P>, PctlError> {
    let bound: P = f.bound()?;
    let max = extremal_bounded_until(m, f, Mode::Max)?;
    let min = extremal_bounded_until(m, f, Mode::Min)?;
    let pmax = max.at(m.initial(), 0).clone();
    let pmin = min.at(m.initial(), 0).clone();
    Ok(Verdict {
        holds: pmax <= bound.clone() + P::tie_tolerance(),
        bound,
        pmax,
        pmin,
        max,
        min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MdpBuilder;
    use crate::pctl::parse_formula;

    fn two_state() -> Mdp<f64> {
        let mut b = MdpBuilder::new();
        b.initial("u")
            .transition("u", "a", &[("v", 0.5), ("u", 0.5)])
            .transition("u", "b", &[("v", 0.2), ("u", 0.8)])
            .transition("v", "a", &[("v", 1.0)])
            .label("v", "goal");
        b.build().unwrap()
    }

    #[test]
    fn two_state_maximum() {
        let m = two_state();
        let f = parse_formula(r#"P<=0.5 [ true U<=2 "goal" ]"#).unwrap();
        let x = extremal_bounded_until(&m, &f, Mode::Max).unwrap();
        assert!((x.at(StateId(0), 0) - 0.75).abs() < 1e-15);
        assert_eq!(x.scheduler.get(StateId(0), 0), Some(ActionId(0)));
        assert_eq!(x.scheduler.get(StateId(0), 1), Some(ActionId(0)));
        let y = extremal_bounded_until(&m, &f, Mode::Min).unwrap();
        // b twice: 1 - 0.8^2
        assert!((y.at(StateId(0), 0) - 0.36).abs() < 1e-15);
        assert_eq!(y.scheduler.get(StateId(0), 0), Some(ActionId(1)));
    }

    #[test]
    fn target_states_have_value_one() {
        let m = two_state();
        let f = parse_formula(r#"P<=0.5 [ true U<=3 "goal" ]"#).unwrap();
        for mode in [Mode::Max, Mode::Min] {
            let x = extremal_bounded_until(&m, &f, mode).unwrap();
            for t in 0..=3 {
                assert_eq!(*x.at(StateId(1), t), 1.0);
            }
        }
    }

    #[test]
    fn bound_one_always_holds() {
        let f = parse_formula(r#"P<=1 [ true U<=4 "goal" ]"#).unwrap();
        assert!(check(&two_state(), &f).unwrap().holds);
    }

    #[test]
    fn unreachable_target_has_zero_probability() {
        let m = two_state().restrict(|s, _| s != StateId(0));
        let f = parse_formula(r#"P<=0 [ !"goal" U<=4 "goal" ]"#).unwrap();
        let mut b = MdpBuilder::<f64>::new();
        b.initial("x")
            .transition("x", "a", &[("x", 1.0)])
            .proposition("goal");
        let v = check(&b.build().unwrap(), &f).unwrap();
        assert_eq!(v.pmax, 0.0);
        assert!(v.holds);
        // the restricted model has a deadlock at u, which contributes zero
        assert_eq!(check(&m, &f).unwrap().pmax, 0.0);
    }

    #[test]
    fn next_ignores_current_state() {
        let m = two_state();
        let f = parse_formula(r#"P<=0.3 [ X "goal" ]"#).unwrap();
        let v = check(&m, &f).unwrap();
        assert!((v.pmax - 0.5).abs() < 1e-15);
        assert!((v.pmin - 0.2).abs() < 1e-15);
        assert!(!v.holds);
        assert_eq!(*v.max.at(StateId(1), 0), 1.0);
    }

    #[test]
    fn path_constraint_blocks_progress() {
        let m = two_state();
        let f = parse_formula(r#"P<=1 [ "goal" U<=3 "goal" ]"#).unwrap();
        assert_eq!(check(&m, &f).unwrap().pmax, 0.0);
    }

    #[test]
    fn unknown_propositions_are_errors() {
        let f = parse_formula(r#"P<=1 [ true U<=3 "nope" ]"#).unwrap();
        assert_eq!(
            check(&two_state(), &f).unwrap_err(),
            PctlError::UnknownProposition("nope".into())
        );
        assert!(eval_prop(&two_state(), &StateFormula::atom("nope"), StateId(0)).is_err());
        assert!(eval_prop(&two_state(), &StateFormula::atom("goal"), StateId(1)).unwrap());
    }

    #[test]
    fn exact_arithmetic_agrees() {
        use num_rational::BigRational;
        let m = two_state();
        let exact: Mdp<BigRational> = m.map_probabilities(|p| BigRational::from_f64(*p).unwrap());
        let f = parse_formula(r#"P<=3/4 [ true U<=2 "goal" ]"#).unwrap();
        let v = check(&exact, &f).unwrap();
        assert_eq!(v.pmax, BigRational::parse("3/4").unwrap());
        assert!(v.holds);
    }
}
