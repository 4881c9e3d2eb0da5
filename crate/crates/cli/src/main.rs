use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use supsyn::agr::compositional_check;
use supsyn::io::{export_supervisor_dot, parse_model, RunReport};
use supsyn::model::parallel_compose_all;
use supsyn::pctl::{check, check_atoms, parse_formula, BoundedFormula};
use supsyn::synthesis::{
    check_well_communicated, n_spvsyn, spvsyn, CheckMode, Synthesis, SynthesisError,
    SynthesisOptions, Termination,
};
use supsyn::ModelFile64;

const TIE_BREAK: &str = "\
tie-breaking (all algorithms are deterministic):
  schedulers      equal values resolve to the lowest action index, in declaration order
  counterexamples equal probabilities resolve to the lexicographically smallest (state, action) sequence
  positive words  shortest first, then lexicographically smallest
  agents          the last attributable action of a counterexample selects its active owner";

#[derive(Parser)]
#[command(
    name = "supsyn",
    version,
    about = "Permissive supervisor synthesis for MDP agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Model-check a bounded formula on the (composed) model.
    Check(Common),
    /// Learn a supervisor for a single agent.
    Synthesize(Common),
    /// Learn one supervisor per agent of a multi-agent model.
    SynthesizeMulti {
        #[command(flatten)]
        common: Common,
        /// Agent kept concrete in compositional mode.
        #[arg(long)]
        concrete_agent: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    model: PathBuf,
    /// Formula such as 'P<=0.6 [ true U<=5 "q5" ]'.
    #[arg(long)]
    spec: String,
    #[arg(long, value_enum, default_value_t = Mode::Monolithic)]
    mode: Mode,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Directory for supervisor DOT files and report.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    report: Format,
    /// Print the tie-breaking order and continue.
    #[arg(long)]
    seed_order: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Monolithic,
    Compositional,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Monolithic => "monolithic",
            Mode::Compositional => "compositional",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Bad input: exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Usage(String);

fn usage(message: impl Into<String>) -> anyhow::Error {
    Usage(message.into()).into()
}

fn load(common: &Common) -> Result<(ModelFile64, BoundedFormula)> {
    let text = fs::read_to_string(&common.model)
        .with_context(|| format!("cannot read {}", common.model.display()))
        .map_err(|e| usage(format!("{e:#}")))?;
    let file: ModelFile64 =
        parse_model(&text).map_err(|e| usage(format!("{}: {e}", common.model.display())))?;
    let f = parse_formula(&common.spec).map_err(|e| usage(format!("--spec: {e}")))?;
    if common.seed_order {
        eprintln!("{TIE_BREAK}");
    }
    Ok((file, f))
}

/// Prints to stdout, ignoring a closed pipe.
fn print_out(text: &str) {
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn write_out(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn run_check(common: &Common) -> Result<bool> {
    let (file, f) = load(common)?;
    let plants: Vec<_> = file.agents.iter().map(|a| &a.mdp).collect();
    let system = parallel_compose_all(&plants).mdp;
    check_atoms(&system, &f).map_err(|e| usage(e.to_string()))?;
    let verdict = check(&system, &f)?;
    let mut rounds = None;
    if common.mode == Mode::Compositional {
        if file.agents.len() < 2 {
            return Err(usage("compositional mode needs at least two agents"));
        }
        let rest = parallel_compose_all(&plants[1..]).mdp;
        let result = compositional_check(&file.agents[0].mdp, &rest, &f)?;
        if result.holds != verdict.holds {
            bail!("compositional and monolithic verdicts differ");
        }
        rounds = Some(result.rounds.len());
    }
    let verdict_text = if verdict.holds {
        "satisfied"
    } else {
        "violated"
    };
    let mut text = format!(
        "verdict: {verdict_text}\npmax: {}\npmin: {}\n",
        verdict.pmax, verdict.pmin
    );
    if let Some(r) = rounds {
        text.push_str(&format!("abstraction rounds: {r}\n"));
    }
    match common.report {
        Format::Text => print_out(&text),
        Format::Json => {
            let value = serde_json::json!({
                "formula": f.to_string(),
                "verdict": verdict_text,
                "holds": verdict.holds,
                "bound": verdict.bound,
                "pmax": verdict.pmax,
                "pmin": verdict.pmin,
                "mode": common.mode.name(),
                "abstraction_rounds": rounds,
            });
            print_out(&format!("{}\n", serde_json::to_string_pretty(&value)?));
        }
    }
    if let Some(dir) = &common.out {
        write_out(dir, "check.txt", &text)?;
    }
    Ok(verdict.holds)
}

fn emit(common: &Common, command: &str, file: &ModelFile64, run: &mut Synthesis) -> Result<bool> {
    let names: Vec<String> = file.agents.iter().map(|a| a.name.clone()).collect();
    run.report.agents = names.clone();
    for (record, name) in run.report.supervisors.iter_mut().zip(&names) {
        record.agent = name.clone();
    }
    let report = RunReport::new(
        command,
        &common.model.display().to_string(),
        common.mode.name(),
        run.report.clone(),
    );
    if let Some(dir) = &common.out {
        for (i, (sup, agent)) in run.supervisors.iter().zip(&file.agents).enumerate() {
            let name = if run.supervisors.len() == 1 {
                "supervisor.dot".to_string()
            } else {
                format!("supervisor_{}.dot", agent.name)
            };
            let dot = export_supervisor_dot(sup, &agent.mdp, &format!("K{}", i + 1));
            write_out(dir, &name, &dot)?;
        }
        write_out(dir, "report.json", &report.to_json())?;
    }
    match common.report {
        Format::Text => print_out(&run.report.to_text()),
        Format::Json => print_out(&format!("{}\n", report.to_json())),
    }
    match run.termination() {
        Termination::Satisfied => Ok(true),
        Termination::Infeasible => {
            eprintln!("infeasible: even the minimising scheduler violates the formula");
            Ok(false)
        }
        Termination::Blocking => {
            eprintln!("blocking: a supervised state within the horizon has no allowed action");
            Ok(false)
        }
    }
}

fn options(common: &Common) -> SynthesisOptions {
    SynthesisOptions {
        max_iterations: common.max_iters,
        mode: match common.mode {
            Mode::Monolithic => CheckMode::Monolithic,
            Mode::Compositional => CheckMode::Compositional,
        },
        ..SynthesisOptions::default()
    }
}

fn synthesis_error(e: SynthesisError) -> anyhow::Error {
    match e {
        SynthesisError::Formula(_)
        | SynthesisError::NotWellCommunicated(_)
        | SynthesisError::NoAgents => usage(e.to_string()),
        e => e.into(),
    }
}

fn run_synthesize(common: &Common) -> Result<bool> {
    let (file, f) = load(common)?;
    if file.agents.len() != 1 {
        return Err(usage(format!(
            "synthesize needs exactly one agent, found {}; use synthesize-multi",
            file.agents.len()
        )));
    }
    if common.mode == Mode::Compositional {
        return Err(usage("compositional mode applies to synthesize-multi"));
    }
    let mut run = spvsyn(&file.agents[0].mdp, &f, &options(common)).map_err(synthesis_error)?;
    emit(common, "synthesize", &file, &mut run)
}

fn run_multi(common: &Common, concrete: Option<&str>) -> Result<bool> {
    let (file, f) = load(common)?;
    let issues = check_well_communicated(&file.agents, &file.ownership);
    if !issues.is_empty() {
        let lines: Vec<String> = issues.iter().map(|i| i.to_string()).collect();
        return Err(usage(format!(
            "not well-communicated:\n  {}",
            lines.join("\n  ")
        )));
    }
    let mut opts = options(common);
    if let Some(name) = concrete {
        let i = file
            .agents
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| usage(format!("unknown agent `{name}`")))?;
        opts.concrete_agent = Some(i);
    }
    let mut run = n_spvsyn(&file.agents, &file.ownership, &f, &opts).map_err(synthesis_error)?;
    emit(common, "synthesize-multi", &file, &mut run)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Check(common) => run_check(common),
        Command::Synthesize(common) => run_synthesize(common),
        Command::SynthesizeMulti {
            common,
            concrete_agent,
        } => run_multi(common, concrete_agent.as_deref()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
