use std::collections::BTreeSet;
use std::fmt;

use super::report::{
    AgrRoundRecord, CeRecord, CheckRecord, IterationRecord, SupervisorRecord, SynthesisReport,
    Termination,
};
use super::{default_iteration_cap, spvsyn, Learning, Synthesis, SynthesisError, SynthesisOptions};
use crate::agr::compositional_check;
use crate::counterexample::{most_probable_path, Polarity};
use crate::model::{
    bfs_depth, format_word, induced_dtmc, parallel_compose_all, supervised_compose, Mdp, StateId,
    Supervised, SystemProduct, WordSymbol,
};
use crate::pctl::{check, BoundedFormula};
use crate::prob::Probability;

/// How the supervised system is checked in every iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckMode {
    /// Build the full product of the supervised agents.
    #[default]
    Monolithic,
    /// Keep one agent concrete and abstract the others.
    Compositional,
}

#[derive(Debug, Clone)]
pub struct Agent<P> {
    pub name: String,
    pub mdp: Mdp<P>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Active,
    Passive,
    Normal,
}

/// Active and passive actions of one agent; the rest are normal.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AgentRoles {
    pub active: BTreeSet<String>,
    pub passive: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActionOwnership {
    pub agents: Vec<AgentRoles>,
}

impl ActionOwnership {
    pub fn new(agents: Vec<AgentRoles>) -> Self {
        ActionOwnership { agents }
    }

    /// Every action of every agent is normal.
    pub fn all_normal(n: usize) -> Self {
        ActionOwnership {
            agents: vec![AgentRoles::default(); n],
        }
    }

    pub fn role(&self, agent: usize, action: &str) -> Role {
        match self.agents.get(agent) {
            Some(r) if r.active.contains(action) => Role::Active,
            Some(r) if r.passive.contains(action) => Role::Passive,
            _ => Role::Normal,
        }
    }

    fn declared(&self, agent: usize) -> impl Iterator<Item = (&String, Role)> {
        self.agents.get(agent).into_iter().flat_map(|r| {
            r.active
                .iter()
                .map(|a| (a, Role::Active))
                .chain(r.passive.iter().map(|a| (a, Role::Passive)))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OwnershipIssue {
    UnknownAction,
    ActiveAndPassive,
    NoPassivePartner,
    PassiveOwners(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OwnershipDiagnostic {
    pub agent: usize,
    pub action: String,
    pub issue: OwnershipIssue,
}

impl fmt::Display for OwnershipDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, x) = (self.agent, &self.action);
        match self.issue {
            OwnershipIssue::UnknownAction => {
                write!(f, "agent {a} declares a role for unknown action {x}")
            }
            OwnershipIssue::ActiveAndPassive => {
                write!(f, "agent {a} declares {x} both active and passive")
            }
            OwnershipIssue::NoPassivePartner => {
                write!(
                    f,
                    "active action {x} of agent {a} is passive in no other agent"
                )
            }
            OwnershipIssue::PassiveOwners(n) => {
                write!(
                    f,
                    "passive action {x} of agent {a} has {n} active owners instead of one"
                )
            }
        }
    }
}

/// Diagnostics of the role declarations; empty iff the system is
/// well-communicated.
pub fn check_well_communicated<P: Probability>(
    agents: &[Agent<P>],
    ownership: &ActionOwnership,
) -> Vec<OwnershipDiagnostic> {
    let mut out = Vec::new();
    let diag = |agent: usize, action: &str, issue| OwnershipDiagnostic {
        agent,
        action: action.to_string(),
        issue,
    };
    for (i, agent) in agents.iter().enumerate() {
        for (x, role) in ownership.declared(i) {
            if agent.mdp.action_by_name(x).is_none() {
                out.push(diag(i, x, OwnershipIssue::UnknownAction));
                continue;
            }
            let others = (0..agents.len()).filter(|&j| j != i);
            match role {
                Role::Active if ownership.agents[i].passive.contains(x) => {
                    out.push(diag(i, x, OwnershipIssue::ActiveAndPassive));
                }
                Role::Active => {
                    if !others
                        .into_iter()
                        .any(|j| ownership.role(j, x) == Role::Passive)
                    {
                        out.push(diag(i, x, OwnershipIssue::NoPassivePartner));
                    }
                }
                Role::Passive if ownership.agents[i].active.contains(x) => {}
                Role::Passive => {
                    let owners = others
                        .filter(|&j| ownership.role(j, x) == Role::Active)
                        .count();
                    if owners != 1 {
                        out.push(diag(i, x, OwnershipIssue::PassiveOwners(owners)));
                    }
                }
                Role::Normal => unreachable!("only active and passive roles are declared"),
            }
        }
    }
    out
}

/// A path of the composed system in plant coordinates: one state per agent
/// at every step.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemPath<P> {
    pub states: Vec<Vec<StateId>>,
    pub actions: Vec<String>,
    pub probability: P,
}

impl<P: Probability> SystemPath<P> {
    pub fn format(&self, agents: &[Agent<P>]) -> String {
        let tuple = |t: &[StateId]| {
            let parts: Vec<&str> = t
                .iter()
                .zip(agents)
                .map(|(s, a)| a.mdp.state_name(*s))
                .collect();
            format!("({})", parts.join(","))
        };
        let mut out = tuple(&self.states[0]);
        for (a, t) in self.actions.iter().zip(&self.states[1..]) {
            out.push_str(&format!(" {a} {}", tuple(t)));
        }
        out
    }
}

/// The agent responsible for a counterexample: scanning from the last
/// action backwards, the owner of the first active action, or the first
/// agent having the first normal action. Passive actions are skipped.
pub fn select_subsystem<P: Probability>(
    agents: &[Agent<P>],
    ownership: &ActionOwnership,
    actions: &[String],
) -> Option<usize> {
    actions.iter().rev().find_map(|x| {
        let having = || (0..agents.len()).filter(|&i| agents[i].mdp.action_by_name(x).is_some());
        having()
            .find(|&i| ownership.role(i, x) == Role::Active)
            .or_else(|| having().find(|&i| ownership.role(i, x) == Role::Normal))
    })
}

/// The local word of agent `k` along `ce`: its steps, with its own state.
pub fn project_ce<P: Probability>(
    agents: &[Agent<P>],
    ce: &SystemPath<P>,
    k: usize,
) -> Vec<WordSymbol> {
    let m = &agents[k].mdp;
    ce.actions
        .iter()
        .zip(&ce.states)
        .filter_map(|(x, t)| m.action_by_name(x).map(|a| WordSymbol::new(t[k], a)))
        .collect()
}

struct Evaluation<P> {
    holds: bool,
    pmax: P,
    ce: Option<SystemPath<P>>,
    rounds: Vec<AgrRoundRecord>,
}

fn to_plant<P: Probability>(supervised: &[Supervised<P>], tuple: &[StateId]) -> Vec<StateId> {
    tuple
        .iter()
        .zip(supervised)
        .map(|(s, sup)| sup.plant_state(*s))
        .collect()
}

fn monolithic<P: Probability>(
    supervised: &[Supervised<P>],
    f: &BoundedFormula,
    want_ce: bool,
) -> Result<(SystemProduct<P>, Evaluation<P>), SynthesisError> {
    let sys = parallel_compose_all(&supervised.iter().map(|s| &s.mdp).collect::<Vec<_>>());
    let verdict = check(&sys.mdp, f)?;
    let ce = if verdict.holds || !want_ce {
        None
    } else {
        let chain = induced_dtmc(&sys.mdp, verdict.witness(), f.horizon())?;
        let path = most_probable_path(&chain, |s| s, f)?;
        Some(SystemPath {
            states: path
                .states
                .iter()
                .map(|s| to_plant(supervised, &sys.components[s.0]))
                .collect(),
            actions: path
                .actions
                .iter()
                .map(|a| sys.mdp.action_name(*a).to_string())
                .collect(),
            probability: path.probability,
        })
    };
    let eval = Evaluation {
        holds: verdict.holds,
        pmax: verdict.pmax,
        ce,
        rounds: Vec::new(),
    };
    Ok((sys, eval))
}

fn compositional<P: Probability>(
    supervised: &[Supervised<P>],
    f: &BoundedFormula,
    concrete: usize,
    audit: bool,
) -> Result<Evaluation<P>, SynthesisError> {
    let others: Vec<usize> = (0..supervised.len()).filter(|&i| i != concrete).collect();
    let folded = parallel_compose_all(
        &others
            .iter()
            .map(|&i| &supervised[i].mdp)
            .collect::<Vec<_>>(),
    );
    let result = compositional_check(&supervised[concrete].mdp, &folded.mdp, f)?;
    let rounds: Vec<AgrRoundRecord> = result.rounds.iter().map(AgrRoundRecord::from).collect();
    let ce = result.counterexample.map(|w| {
        let states = w
            .states
            .iter()
            .map(|(s1, s2)| {
                let mut tuple = vec![StateId(0); supervised.len()];
                tuple[concrete] = *s1;
                for (i, s) in others.iter().zip(&folded.components[s2.0]) {
                    tuple[*i] = *s;
                }
                to_plant(supervised, &tuple)
            })
            .collect();
        SystemPath {
            states,
            actions: w.actions,
            probability: w.probability,
        }
    });
    let pmax = if audit {
        let (_, exact) = monolithic(supervised, f, false)?;
        debug_assert_eq!(exact.holds, result.holds);
        exact.pmax
    } else {
        result
            .rounds
            .last()
            .expect("a compositional check has at least one round")
            .abstract_pmax
            .clone()
    };
    Ok(Evaluation {
        holds: result.holds,
        pmax,
        ce,
        rounds,
    })
}

/// Composed states reachable within `k` steps where the plants could move
/// jointly but the supervisors allow nothing.
fn system_blocks<P: Probability>(
    agents: &[Agent<P>],
    supervised: &[Supervised<P>],
    sys: &SystemProduct<P>,
    k: usize,
) -> bool {
    let depth = bfs_depth(&sys.mdp);
    let names: BTreeSet<&String> = agents.iter().flat_map(|a| a.mdp.action_names()).collect();
    sys.mdp.states().any(|s| {
        if !depth[s.0].is_some_and(|d| d < k) || !sys.mdp.is_deadlock(s) {
            return false;
        }
        let plant = to_plant(supervised, &sys.components[s.0]);
        names.iter().any(|x| {
            agents
                .iter()
                .zip(&plant)
                .all(|(a, p)| match a.mdp.action_by_name(x) {
                    Some(id) => a.mdp.is_enabled(*p, id),
                    None => true,
                })
        })
    })
}

/// Learns one supervisor per agent so that the composed supervised system
/// satisfies `f`. Each negative counterexample is attributed to one agent
/// and projected onto it; every learner is then brought back in line with
/// its teacher through positive counterexamples.
pub fn n_spvsyn<P: Probability>(
    agents: &[Agent<P>],
    ownership: &ActionOwnership,
    f: &BoundedFormula,
    opts: &SynthesisOptions,
) -> Result<Synthesis, SynthesisError> {
    if agents.is_empty() {
        return Err(SynthesisError::NoAgents);
    }
    if agents.len() == 1 {
        let mut out = spvsyn(&agents[0].mdp, f, opts)?;
        out.report.agents = vec![agents[0].name.clone()];
        out.report.supervisors[0].agent = agents[0].name.clone();
        return Ok(out);
    }
    let diagnostics = check_well_communicated(agents, ownership);
    if !diagnostics.is_empty() {
        return Err(SynthesisError::NotWellCommunicated(
            diagnostics.iter().map(|d| d.to_string()).collect(),
        ));
    }
    for a in agents {
        a.mdp.ensure_valid()?;
    }
    let k = f.horizon();
    let plants: Vec<&Mdp<P>> = agents.iter().map(|a| &a.mdp).collect();
    let cap = opts
        .max_iterations
        .unwrap_or_else(|| default_iteration_cap(&plants, k));
    let concrete = opts.concrete_agent.unwrap_or_else(|| {
        (0..agents.len())
            .min_by_key(|&i| agents[i].mdp.num_states())
            .expect("agents are non-empty")
    });
    let mut learners: Vec<Learning<P>> = plants.iter().map(|m| Learning::new(m, k)).collect();
    let mut report = SynthesisReport {
        formula: f.to_string(),
        agents: agents.iter().map(|a| a.name.clone()).collect(),
        horizon: k,
        bound: f.bound::<P>()?.to_f64(),
        iteration_bound: plants
            .iter()
            .map(|m| super::iteration_bound(m, k))
            .product(),
        iteration_cap: cap,
        iterations: 0,
        pmax_initial: 0.0,
        pmin_initial: None,
        checks: Vec::new(),
        records: Vec::new(),
        final_pmax: 0.0,
        termination: Termination::Satisfied,
        supervisors: Vec::new(),
        queries: 0,
    };
    let mut history = Vec::new();

    loop {
        let supervised = learners
            .iter()
            .map(|l| supervised_compose(l.plant, &l.supervisor))
            .collect::<Result<Vec<_>, _>>()?;
        let (eval, sys) = match opts.mode {
            CheckMode::Monolithic => {
                let (sys, eval) = monolithic(&supervised, f, true)?;
                (eval, Some(sys))
            }
            CheckMode::Compositional => {
                (compositional(&supervised, f, concrete, opts.audit)?, None)
            }
        };
        let pmax = eval.pmax.to_f64();
        if report.checks.is_empty() {
            report.pmax_initial = pmax;
        }
        report.checks.push(CheckRecord {
            holds: eval.holds,
            pmax,
            agr_rounds: eval.rounds,
        });
        if let Some(last) = report.records.last_mut() {
            last.pmax_after = pmax;
        }
        report.final_pmax = pmax;
        if report.iterations >= cap {
            return Err(SynthesisError::IterationCap(cap));
        }

        let negative = match eval.ce {
            Some(ce) => {
                let owner = select_subsystem(agents, ownership, &ce.actions)
                    .ok_or(SynthesisError::NoAttributableAction)?;
                Some((owner, project_ce(agents, &ce, owner), ce))
            }
            None => None,
        };
        if negative.is_none() && learners.iter().all(|l| l.positive_ce().is_none()) {
            let local = supervised.iter().any(|s| !s.blocking_within(k).is_empty());
            let composed = match (&sys, opts.audit) {
                (Some(sys), _) => system_blocks(agents, &supervised, sys, k),
                (None, true) => {
                    let sys = parallel_compose_all(
                        &supervised.iter().map(|s| &s.mdp).collect::<Vec<_>>(),
                    );
                    system_blocks(agents, &supervised, &sys, k)
                }
                (None, false) => false,
            };
            if local || composed {
                report.termination = Termination::Blocking;
            }
            break;
        }

        report.iterations += 1;
        let mut record = IterationRecord {
            iteration: report.iterations,
            negative: None,
            positives: Vec::new(),
            pmax_before: pmax,
            pmax_after: pmax,
            supervisor_states: Vec::new(),
        };
        if let Some((owner, word, ce)) = negative {
            let m = &agents[owner].mdp;
            log::debug!(
                "iteration {}: agent {} eliminates {}",
                report.iterations,
                agents[owner].name,
                format_word(m, &word)
            );
            record.negative = Some(CeRecord {
                polarity: Polarity::Negative,
                agent: owner,
                path: ce.format(agents),
                word: format_word(m, &word),
                length: word.len(),
                probability: ce.probability.to_f64(),
            });
            learners[owner].eliminate(&word)?;
        }
        for (i, l) in learners.iter_mut().enumerate() {
            let fed = l.drain(cap)?;
            record
                .positives
                .extend(fed.iter().map(|w| CeRecord::positive(l.plant, i, w)));
        }
        record.supervisor_states = learners.iter().map(|l| l.supervisor.num_states()).collect();
        report.records.push(record);
        history.push(learners.iter().map(|l| l.supervisor.clone()).collect());
    }

    report.queries = learners.iter().map(|l| l.queries()).sum();
    report.supervisors = learners
        .iter()
        .zip(agents)
        .map(|(l, a)| SupervisorRecord::new(&a.name, &a.mdp, &l.supervisor))
        .collect();
    Ok(Synthesis {
        negatives: learners
            .iter()
            .map(|l| l.oracle.negatives().to_vec())
            .collect(),
        supervisors: learners.into_iter().map(|l| l.supervisor).collect(),
        history,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MdpBuilder;

    fn agent(name: &str, actions: &[&str]) -> Agent<f64> {
        let mut b = MdpBuilder::new();
        b.initial("s");
        for a in actions {
            b.transition("s", a, &[("s", 1.0)]);
        }
        Agent {
            name: name.to_string(),
            mdp: b.build().unwrap(),
        }
    }

    fn roles(active: &[&str], passive: &[&str]) -> AgentRoles {
        AgentRoles {
            active: active.iter().map(|s| s.to_string()).collect(),
            passive: passive.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn well_communicated_pair() {
        let agents = [agent("m1", &["a", "b", "c"]), agent("m2", &["a", "b", "c"])];
        let own =
            ActionOwnership::new(vec![roles(&["c"], &["a", "b"]), roles(&["a", "b"], &["c"])]);
        assert!(check_well_communicated(&agents, &own).is_empty());
    }

    #[test]
    fn active_without_partner() {
        let agents = [agent("m1", &["a"]), agent("m2", &["a"])];
        let own = ActionOwnership::new(vec![roles(&["a"], &[]), roles(&[], &[])]);
        let d = check_well_communicated(&agents, &own);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].issue, OwnershipIssue::NoPassivePartner);
    }

    #[test]
    fn passive_with_two_owners() {
        let agents = [
            agent("m1", &["a"]),
            agent("m2", &["a"]),
            agent("m3", &["a"]),
        ];
        let own = ActionOwnership::new(vec![
            roles(&[], &["a"]),
            roles(&["a"], &[]),
            roles(&["a"], &[]),
        ]);
        let d = check_well_communicated(&agents, &own);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].issue, OwnershipIssue::PassiveOwners(2));
    }

    #[test]
    fn select_scans_backwards_past_passive_actions() {
        let agents = [
            agent("m1", &["a", "b", "c", "p"]),
            agent("m2", &["a", "b", "c", "q"]),
        ];
        let own =
            ActionOwnership::new(vec![roles(&["c"], &["a", "b"]), roles(&["a", "b"], &["c"])]);
        let names = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert_eq!(
            select_subsystem(&agents, &own, &names(&["a", "c"])),
            Some(0)
        );
        assert_eq!(
            select_subsystem(&agents, &own, &names(&["c", "b"])),
            Some(1)
        );
        assert_eq!(
            select_subsystem(&agents, &own, &names(&["q", "p"])),
            Some(0)
        );
        assert_eq!(
            select_subsystem(&agents, &own, &names(&["p", "q"])),
            Some(1)
        );
        assert_eq!(select_subsystem(&agents, &own, &[]), None);
    }

    #[test]
    fn projection_keeps_local_steps() {
        let agents = [agent("m1", &["a", "p"]), agent("m2", &["a", "q"])];
        let ce = SystemPath {
            states: vec![vec![StateId(0), StateId(0)]; 4],
            actions: vec!["q".into(), "a".into(), "q".into()],
            probability: 1.0,
        };
        let w = project_ce(&agents, &ce, 0);
        assert_eq!(
            w,
            vec![WordSymbol::new(
                StateId(0),
                agents[0].mdp.action_by_name("a").unwrap()
            )]
        );
        assert_eq!(project_ce(&agents, &ce, 1).len(), 3);
        let only_q = SystemPath {
            states: vec![vec![StateId(0), StateId(0)]; 2],
            actions: vec!["q".into()],
            probability: 1.0,
        };
        assert!(project_ce(&agents, &only_q, 0).is_empty());
    }
}
