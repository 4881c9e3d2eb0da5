//! The synthesis loops: a single agent against its own model, and several
//! agents whose supervisors are learned separately against the composed
//! system.

mod multi;
mod report;
mod single;

pub use multi::{
    check_well_communicated, n_spvsyn, project_ce, select_subsystem, ActionOwnership, Agent,
    AgentRoles, CheckMode, OwnershipDiagnostic, OwnershipIssue, Role, SystemPath,
};
pub use report::{
    AgrRoundRecord, CeRecord, CheckRecord, EdgeRecord, IterationRecord, SupervisorRecord,
    SynthesisReport, Termination,
};
pub use single::spvsyn;

use crate::agr::AgrError;
use crate::counterexample::{find_positive_ce, CeError, Polarity};
use crate::lstar::{LStar, LStarError, SynthesisOracle};
use crate::model::{ComposeError, Dfa, DtmcError, Mdp, MdpError, WordSymbol};
use crate::pctl::PctlError;
use crate::prob::Probability;

/// A supervisor: a DFA over the state-action pairs of its agent.
pub type Supervisor = Dfa<WordSymbol>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Formula(#[from] PctlError),
    #[error(transparent)]
    Model(#[from] MdpError),
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    Chain(#[from] DtmcError),
    #[error(transparent)]
    Counterexample(#[from] CeError),
    #[error(transparent)]
    Learner(#[from] LStarError),
    #[error(transparent)]
    Compositional(#[from] AgrError),
    #[error("no termination within {0} iterations")]
    IterationCap(usize),
    #[error("system is not well-communicated: {}", .0.join("; "))]
    NotWellCommunicated(Vec<String>),
    #[error("counterexample has no action attributable to an agent")]
    NoAttributableAction,
    #[error("at least one agent is required")]
    NoAgents,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisOptions {
    /// Hard iteration cap; defaults to `10 * |S x A|^min(k, 3)`.
    pub max_iterations: Option<usize>,
    pub mode: CheckMode,
    /// Agent kept concrete in compositional mode; the rest are abstracted.
    pub concrete_agent: Option<usize>,
    /// In compositional mode, also compute the exact pmax of the composed
    /// supervised system for the report.
    pub audit: bool,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            max_iterations: None,
            mode: CheckMode::Monolithic,
            concrete_agent: None,
            audit: true,
        }
    }
}

/// Outcome of a synthesis run.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub supervisors: Vec<Supervisor>,
    /// The supervisors in force after every iteration.
    pub history: Vec<Vec<Supervisor>>,
    /// Eliminated negative words per agent, in order.
    pub negatives: Vec<Vec<Vec<WordSymbol>>>,
    pub report: SynthesisReport,
}

impl Synthesis {
    pub fn termination(&self) -> Termination {
        self.report.termination
    }

    pub fn supervisor(&self) -> &Supervisor {
        &self.supervisors[0]
    }
}

/// Removes transitions into non-accepting states and trims what becomes
/// unreachable.
pub fn finalize_supervisor(d: &Supervisor) -> Supervisor {
    d.prune_rejecting()
}

/// `|S x A|^k`, the iteration bound for one agent.
pub fn iteration_bound<P: Probability>(m: &Mdp<P>, k: usize) -> f64 {
    ((m.num_states() * m.num_actions()) as f64).powi(k as i32)
}

pub fn default_iteration_cap<P: Probability>(agents: &[&Mdp<P>], k: usize) -> usize {
    let cap = agents
        .iter()
        .map(|m| ((m.num_states() * m.num_actions()) as f64).powi(k.min(3) as i32))
        .product::<f64>()
        * 10.0;
    cap.min(usize::MAX as f64) as usize
}

/// Learner state of one agent. The learner is created at the first
/// negative counterexample; until then the supervisor is universal.
struct Learning<'a, P> {
    plant: &'a Mdp<P>,
    alphabet: Vec<WordSymbol>,
    oracle: SynthesisOracle<'a, P>,
    learner: Option<LStar<WordSymbol>>,
    supervisor: Supervisor,
    horizon: usize,
}

impl<'a, P: Probability> Learning<'a, P> {
    fn new(plant: &'a Mdp<P>, horizon: usize) -> Self {
        let alphabet = crate::model::alphabet(plant);
        Learning {
            plant,
            oracle: SynthesisOracle::new(plant, alphabet.clone(), horizon),
            supervisor: Dfa::universal(alphabet.clone()),
            alphabet,
            learner: None,
            horizon,
        }
    }

    fn indices(&self, word: &[WordSymbol]) -> Vec<usize> {
        self.oracle
            .indices(word)
            .expect("counterexample words are paths of the plant")
    }

    /// Records `word` as forbidden. A learner created here already sees it.
    fn eliminate(&mut self, word: &[WordSymbol]) -> Result<(), SynthesisError> {
        let idx = self.indices(word);
        match self.learner.as_mut() {
            None => {
                self.oracle.add_negative(word.to_vec());
                self.learner = Some(LStar::new(self.alphabet.clone(), &mut self.oracle));
            }
            Some(learner) => {
                learner.add_counterexample(&mut self.oracle, &idx, Polarity::Negative)?;
            }
        }
        Ok(())
    }

    fn positive_ce(&self) -> Option<Vec<WordSymbol>> {
        let learner = self.learner.as_ref()?;
        find_positive_ce(
            self.plant,
            learner.conjecture(),
            self.oracle.negatives(),
            self.horizon,
        )
    }

    /// Corrects the conjecture until it accepts every realizable word within
    /// the horizon that the teacher accepts and rejects every eliminated
    /// word. Returns the positive counterexamples fed.
    fn drain(&mut self, limit: usize) -> Result<Vec<Vec<WordSymbol>>, SynthesisError> {
        let mut fed = Vec::new();
        let mut rounds = 0;
        while let Some(learner) = self.learner.as_mut() {
            if rounds >= limit {
                return Err(SynthesisError::IterationCap(limit));
            }
            rounds += 1;
            let (word, polarity) = match find_positive_ce(
                self.plant,
                learner.conjecture(),
                self.oracle.negatives(),
                self.horizon,
            ) {
                Some(word) => (word, Polarity::Positive),
                None => match self
                    .oracle
                    .negatives()
                    .iter()
                    .find(|n| learner.conjecture().accepts_symbols(n))
                {
                    Some(n) => (n.clone(), Polarity::Negative),
                    None => break,
                },
            };
            let idx = self
                .oracle
                .indices(&word)
                .expect("counterexample words are paths of the plant");
            learner.add_counterexample(&mut self.oracle, &idx, polarity)?;
            if polarity == Polarity::Positive {
                fed.push(word);
            }
        }
        if let Some(learner) = &self.learner {
            self.supervisor = finalize_supervisor(learner.conjecture());
        }
        Ok(fed)
    }

    fn queries(&self) -> usize {
        self.oracle.queries()
    }
}
