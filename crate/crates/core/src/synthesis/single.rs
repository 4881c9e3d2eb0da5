use super::report::{
    CeRecord, CheckRecord, IterationRecord, SupervisorRecord, SynthesisReport, Termination,
};
use super::{
    default_iteration_cap, iteration_bound, Learning, Synthesis, SynthesisError, SynthesisOptions,
};
use crate::counterexample::{select_negative_ce, Polarity};
use crate::model::{format_word, induced_dtmc, supervised_compose, Mdp};
use crate::pctl::{check, check_atoms, BoundedFormula};
use crate::prob::Probability;

/// Learns a permissive supervisor for `m` so that `m ||sup K |= f`.
///
/// The model is checked once unsupervised: if it already satisfies `f` the
/// universal supervisor is returned, and if even the minimising scheduler
/// violates it the run ends as infeasible. Otherwise each iteration removes
/// the most probable violating path that deviates from the minimising
/// scheduler, then restores every wrongly forbidden word.
pub fn spvsyn<P: Probability>(
    m: &Mdp<P>,
    f: &BoundedFormula,
    opts: &SynthesisOptions,
) -> Result<Synthesis, SynthesisError> {
    m.ensure_valid()?;
    check_atoms(m, f)?;
    let k = f.horizon();
    let cap = opts
        .max_iterations
        .unwrap_or_else(|| default_iteration_cap(&[m], k));
    let initial = check(m, f)?;
    let sigma_min = initial.sigma_min().clone();
    let mut agent = Learning::new(m, k);
    let mut report = SynthesisReport {
        formula: f.to_string(),
        agents: vec!["agent".to_string()],
        horizon: k,
        bound: initial.bound.to_f64(),
        iteration_bound: iteration_bound(m, k),
        iteration_cap: cap,
        iterations: 0,
        pmax_initial: initial.pmax.to_f64(),
        pmin_initial: Some(initial.pmin.to_f64()),
        checks: Vec::new(),
        records: Vec::new(),
        final_pmax: initial.pmax.to_f64(),
        termination: Termination::Satisfied,
        supervisors: Vec::new(),
        queries: 0,
    };
    let mut history = Vec::new();

    if !initial.holds && initial.infeasible() {
        log::info!(
            "pmin {} exceeds the bound; no supervisor exists",
            initial.pmin.to_f64()
        );
        report.checks.push(CheckRecord {
            holds: false,
            pmax: initial.pmax.to_f64(),
            agr_rounds: Vec::new(),
        });
        report.termination = Termination::Infeasible;
        return Ok(finish(m, agent, report, history));
    }

    loop {
        let supervised = supervised_compose(m, &agent.supervisor)?;
        let verdict = check(&supervised.mdp, f)?;
        report.checks.push(CheckRecord {
            holds: verdict.holds,
            pmax: verdict.pmax.to_f64(),
            agr_rounds: Vec::new(),
        });
        if let Some(last) = report.records.last_mut() {
            last.pmax_after = verdict.pmax.to_f64();
        }
        report.final_pmax = verdict.pmax.to_f64();
        if report.iterations >= cap {
            return Err(SynthesisError::IterationCap(cap));
        }

        let negative = if verdict.holds {
            None
        } else {
            let chain = induced_dtmc(&supervised.mdp, verdict.witness(), k)?;
            let plant = supervised.plant_map();
            Some(select_negative_ce(&chain, &sigma_min, |s| plant[s.0], f)?)
        };
        if negative.is_none() && agent.positive_ce().is_none() {
            if !supervised.blocking_within(k).is_empty() {
                report.termination = Termination::Blocking;
            }
            break;
        }

        report.iterations += 1;
        let mut record = IterationRecord {
            iteration: report.iterations,
            negative: None,
            positives: Vec::new(),
            pmax_before: verdict.pmax.to_f64(),
            pmax_after: verdict.pmax.to_f64(),
            supervisor_states: Vec::new(),
        };
        if let Some(path) = negative {
            let word = path.word();
            log::debug!(
                "iteration {}: eliminating {}",
                report.iterations,
                path.format(m)
            );
            record.negative = Some(CeRecord {
                polarity: Polarity::Negative,
                agent: 0,
                path: path.format(m),
                word: format_word(m, &word),
                length: word.len(),
                probability: path.probability.to_f64(),
            });
            agent.eliminate(&word)?;
        }
        let positives = agent.drain(cap)?;
        record.positives = positives
            .iter()
            .map(|w| CeRecord::positive(m, 0, w))
            .collect();
        record.supervisor_states = vec![agent.supervisor.num_states()];
        report.records.push(record);
        history.push(vec![agent.supervisor.clone()]);
    }
    Ok(finish(m, agent, report, history))
}

fn finish<P: Probability>(
    m: &Mdp<P>,
    agent: Learning<'_, P>,
    mut report: SynthesisReport,
    history: Vec<Vec<super::Supervisor>>,
) -> Synthesis {
    report.queries = agent.queries();
    report.supervisors = vec![SupervisorRecord::new(
        &report.agents[0],
        m,
        &agent.supervisor,
    )];
    Synthesis {
        negatives: vec![agent.oracle.negatives().to_vec()],
        supervisors: vec![agent.supervisor],
        history,
        report,
    }
}
