use serde::{Deserialize, Serialize};

use super::Supervisor;
use crate::agr::{AgrRound, RoundOutcome};
use crate::counterexample::Polarity;
use crate::model::{format_word, Mdp, WordSymbol};
use crate::prob::Probability;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    Satisfied,
    Infeasible,
    Blocking,
}

/// A counterexample as reported: the full path for negatives and the word
/// fed to the learner of `agent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CeRecord {
    pub polarity: Polarity,
    pub agent: usize,
    pub path: String,
    pub word: String,
    pub length: usize,
    pub probability: f64,
}

impl CeRecord {
    pub(crate) fn positive<P: Probability>(m: &Mdp<P>, agent: usize, word: &[WordSymbol]) -> Self {
        let text = format_word(m, word);
        CeRecord {
            polarity: Polarity::Positive,
            agent,
            path: text.clone(),
            word: text,
            length: word.len(),
            probability: word
                .windows(2)
                .map(|w| m.transition(w[0].state, w[0].action, w[1].state).to_f64())
                .product(),
        }
    }
}

/// One abstraction round of a compositional check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgrRoundRecord {
    pub blocks: usize,
    pub abstract_pmax: f64,
    /// `holds`, `real`, `spurious` or `weak`.
    pub outcome: String,
    pub step: Option<usize>,
    pub block: Option<usize>,
    pub ce_probability: Option<f64>,
}

impl<P: Probability> From<&AgrRound<P>> for AgrRoundRecord {
    fn from(r: &AgrRound<P>) -> Self {
        let (outcome, step, block) = match &r.outcome {
            RoundOutcome::Holds => ("holds", None, None),
            RoundOutcome::Real => ("real", None, None),
            RoundOutcome::Spurious { step, block } => ("spurious", Some(*step), Some(*block)),
            RoundOutcome::Weak { block } => ("weak", None, Some(*block)),
        };
        AgrRoundRecord {
            blocks: r.partition.num_blocks(),
            abstract_pmax: r.abstract_pmax.to_f64(),
            outcome: outcome.to_string(),
            step,
            block,
            ce_probability: r.ce.as_ref().map(|c| c.probability.to_f64()),
        }
    }
}

/// One model check of the supervised system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub holds: bool,
    /// Exact pmax of the supervised system, or the abstract bound when
    /// compositional checking runs without audit.
    pub pmax: f64,
    pub agr_rounds: Vec<AgrRoundRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub negative: Option<CeRecord>,
    pub positives: Vec<CeRecord>,
    pub pmax_before: f64,
    pub pmax_after: f64,
    /// Supervisor sizes after the iteration, per agent.
    pub supervisor_states: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub from: usize,
    pub to: usize,
    pub symbols: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupervisorRecord {
    pub agent: String,
    pub states: usize,
    pub initial: usize,
    pub accepting: Vec<bool>,
    pub edges: Vec<EdgeRecord>,
}

impl SupervisorRecord {
    pub fn new<P: Probability>(agent: &str, m: &Mdp<P>, k: &Supervisor) -> Self {
        let mut edges: Vec<EdgeRecord> = Vec::new();
        for q in 0..k.num_states() {
            for (sym, t) in k.successors(q) {
                let w = k.alphabet()[sym];
                let text = format!("{}{}", m.state_name(w.state), m.action_name(w.action));
                match edges.iter_mut().find(|e| e.from == q && e.to == t) {
                    Some(e) => e.symbols.push(text),
                    None => edges.push(EdgeRecord {
                        from: q,
                        to: t,
                        symbols: vec![text],
                    }),
                }
            }
        }
        SupervisorRecord {
            agent: agent.to_string(),
            states: k.num_states(),
            initial: k.initial(),
            accepting: (0..k.num_states()).map(|q| k.is_accepting(q)).collect(),
            edges,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub formula: String,
    pub agents: Vec<String>,
    pub horizon: usize,
    pub bound: f64,
    /// `|S x A|^k` per agent, multiplied over agents.
    pub iteration_bound: f64,
    pub iteration_cap: usize,
    pub iterations: usize,
    pub pmax_initial: f64,
    /// Only computed for a single agent.
    pub pmin_initial: Option<f64>,
    pub checks: Vec<CheckRecord>,
    pub records: Vec<IterationRecord>,
    pub final_pmax: f64,
    pub termination: Termination,
    pub supervisors: Vec<SupervisorRecord>,
    pub queries: usize,
}

impl SynthesisReport {
    /// pmax of every check, in order.
    pub fn pmax_sequence(&self) -> Vec<f64> {
        self.checks.iter().map(|c| c.pmax).collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.pmax_sequence().windows(2).all(|w| w[1] <= w[0] + 1e-9)
    }

    pub fn negatives(&self) -> impl Iterator<Item = &CeRecord> {
        self.records.iter().filter_map(|r| r.negative.as_ref())
    }

    pub fn spurious_rounds(&self) -> impl Iterator<Item = &AgrRoundRecord> {
        self.checks
            .iter()
            .flat_map(|c| &c.agr_rounds)
            .filter(|r| r.outcome == "spurious")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("formula: {}\n", self.formula));
        out.push_str(&format!("termination: {:?}\n", self.termination).to_lowercase());
        out.push_str(&format!("iterations: {}\n", self.iterations));
        out.push_str(&format!(
            "pmax: {} -> {}\n",
            self.pmax_initial, self.final_pmax
        ));
        if let Some(pmin) = self.pmin_initial {
            out.push_str(&format!("pmin: {pmin}\n"));
        }
        for r in &self.records {
            if let Some(n) = &r.negative {
                out.push_str(&format!(
                    "#{} agent {} negative {} (p={}) pmax {} -> {}\n",
                    r.iteration,
                    self.agents[n.agent],
                    n.path,
                    n.probability,
                    r.pmax_before,
                    r.pmax_after
                ));
            }
            for p in &r.positives {
                out.push_str(&format!(
                    "#{} agent {} positive {}\n",
                    r.iteration, self.agents[p.agent], p.word
                ));
            }
        }
        for s in &self.supervisors {
            out.push_str(&format!("supervisor {}: {} states\n", s.agent, s.states));
        }
        out
    }
}
