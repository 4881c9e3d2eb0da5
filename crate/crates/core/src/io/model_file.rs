use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use crate::model::{Mdp, MdpBuilder};
use crate::prob::Probability;
use crate::synthesis::{ActionOwnership, Agent, AgentRoles};

/// Agents and their action roles, as read from a model file.
#[derive(Debug, Clone)]
pub struct ModelFile<P> {
    pub agents: Vec<Agent<P>>,
    pub ownership: ActionOwnership,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("agent {agent}: {}", .problems.iter().map(|(l, m)| match l {
        Some(l) => format!("line {l}: {m}"),
        None => m.clone(),
    }).collect::<Vec<_>>().join("; "))]
    Invalid {
        agent: String,
        problems: Vec<(Option<usize>, String)>,
    },
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    column: usize,
    text: &'a str,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let code = line.split('#').next().unwrap_or("");
    let column = |i: usize| code[..i].chars().count() + 1;
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in code.char_indices() {
        let separator = c.is_whitespace() || c == ':' || c == ',';
        if separator {
            if let Some(s) = start.take() {
                out.push(Token {
                    column: column(s),
                    text: &code[s..i],
                });
            }
            if !c.is_whitespace() {
                out.push(Token {
                    column: column(i),
                    text: &code[i..i + 1],
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            column: column(s),
            text: &code[s..],
        });
    }
    out
}

fn is_name(t: &str) -> bool {
    t != ":" && t != ","
}

/// Line number, state, action and successors of one `action` line.
type TransitionLine<P> = (usize, String, String, Vec<(String, P)>);

struct AgentDraft<P> {
    name: String,
    line: usize,
    states: Option<Vec<String>>,
    init: Option<String>,
    actions: Option<Vec<String>>,
    propositions: Option<Vec<String>>,
    labels: BTreeMap<String, Vec<String>>,
    transitions: Vec<TransitionLine<P>>,
    active: Option<BTreeSet<String>>,
    passive: Option<BTreeSet<String>>,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
    end: usize,
}

impl<'a> Line<'a> {
    fn err<T>(&self, column: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            line: self.number,
            column,
            message: message.into(),
        })
    }

    fn column(&self, i: usize) -> usize {
        self.tokens.get(i).map_or(self.end, |t| t.column)
    }

    fn expect(&self, i: usize, text: &str) -> Result<(), ParseError> {
        match self.tokens.get(i) {
            Some(t) if t.text == text => Ok(()),
            Some(t) => self.err(t.column, format!("expected `{text}`, found `{}`", t.text)),
            None => self.err(self.end, format!("expected `{text}`")),
        }
    }

    fn name(&self, i: usize, what: &str) -> Result<&'a str, ParseError> {
        match self.tokens.get(i) {
            Some(t) if is_name(t.text) => Ok(t.text),
            Some(t) => self.err(t.column, format!("expected {what}, found `{}`", t.text)),
            None => self.err(self.end, format!("expected {what}")),
        }
    }

    /// Names after position `from`, which must all be names.
    fn names(&self, from: usize) -> Result<Vec<String>, ParseError> {
        self.tokens[from.min(self.tokens.len())..]
            .iter()
            .map(|t| {
                if is_name(t.text) {
                    Ok(t.text.to_string())
                } else {
                    self.err(t.column, format!("unexpected `{}`", t.text))
                }
            })
            .collect()
    }

    fn no_dupes(&self, from: usize, names: &[String], what: &str) -> Result<(), ParseError> {
        let mut seen = HashSet::new();
        for (i, n) in names.iter().enumerate() {
            if !seen.insert(n) {
                return self.err(self.column(from + i), format!("duplicate {what} `{n}`"));
            }
        }
        Ok(())
    }
}

fn once<T>(slot: &mut Option<T>, value: T, line: &Line<'_>, what: &str) -> Result<(), ParseError> {
    if slot.is_some() {
        return line.err(line.column(0), format!("duplicate `{what}` declaration"));
    }
    *slot = Some(value);
    Ok(())
}

/// Parses the line-based model grammar:
///
/// ```text
/// agent <name>
/// states: s0 s1 ...
/// init: s0
/// actions: a b ...            # optional, fixes the action order
/// propositions: p q ...       # optional, declares unused propositions
/// label <state>: ap1 ap2
/// action <state> <act>: <state> <prob>, ...
/// active: a b
/// passive: c
/// ```
///
/// `#` starts a comment. Unlisted actions are normal.
pub fn parse_model<P: Probability>(text: &str) -> Result<ModelFile<P>, ParseError> {
    let mut drafts: Vec<AgentDraft<P>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = Line {
            number: i + 1,
            tokens: tokenize(raw),
            end: raw
                .split('#')
                .next()
                .unwrap_or("")
                .trim_end()
                .chars()
                .count()
                + 1,
        };
        let Some(head) = line.tokens.first() else {
            continue;
        };
        if head.text == "agent" {
            let name = line.name(1, "agent name")?;
            if line.tokens.len() > 2 {
                return line.err(line.column(2), "unexpected text after agent name");
            }
            if drafts.iter().any(|d| d.name == name) {
                return line.err(line.column(1), format!("duplicate agent `{name}`"));
            }
            drafts.push(AgentDraft {
                name: name.to_string(),
                line: line.number,
                states: None,
                init: None,
                actions: None,
                propositions: None,
                labels: BTreeMap::new(),
                transitions: Vec::new(),
                active: None,
                passive: None,
            });
            continue;
        }
        let Some(draft) = drafts.last_mut() else {
            return line.err(head.column, "expected `agent <name>` first");
        };
        let states_known =
            |line: &Line<'_>, draft: &AgentDraft<P>, i: usize| -> Result<String, ParseError> {
                let name = line.name(i, "state name")?;
                match &draft.states {
                    None => line.err(line.column(i), "`states:` must come before states are used"),
                    Some(s) if !s.iter().any(|x| x == name) => {
                        line.err(line.column(i), format!("unknown state `{name}`"))
                    }
                    Some(_) => Ok(name.to_string()),
                }
            };
        let action_known =
            |line: &Line<'_>, draft: &AgentDraft<P>, i: usize| -> Result<String, ParseError> {
                let name = line.name(i, "action name")?;
                match &draft.actions {
                    Some(a) if !a.iter().any(|x| x == name) => {
                        line.err(line.column(i), format!("undeclared action `{name}`"))
                    }
                    _ => Ok(name.to_string()),
                }
            };
        match head.text {
            "states" | "actions" | "propositions" | "active" | "passive" | "init" => {
                line.expect(1, ":")?;
                let names = line.names(2)?;
                line.no_dupes(2, &names, head.text.trim_end_matches('s'))?;
                match head.text {
                    "states" => {
                        if names.is_empty() {
                            return line.err(line.end, "an agent needs at least one state");
                        }
                        once(&mut draft.states, names, &line, "states")?;
                    }
                    "actions" => once(&mut draft.actions, names, &line, "actions")?,
                    "propositions" => once(&mut draft.propositions, names, &line, "propositions")?,
                    "active" => once(
                        &mut draft.active,
                        names.into_iter().collect(),
                        &line,
                        "active",
                    )?,
                    "passive" => once(
                        &mut draft.passive,
                        names.into_iter().collect(),
                        &line,
                        "passive",
                    )?,
                    _ => {
                        let s = states_known(&line, draft, 2)?;
                        if line.tokens.len() > 3 {
                            return line.err(line.column(3), "one initial state expected");
                        }
                        once(&mut draft.init, s, &line, "init")?;
                    }
                }
            }
            "label" => {
                let s = states_known(&line, draft, 1)?;
                line.expect(2, ":")?;
                let aps = line.names(3)?;
                line.no_dupes(3, &aps, "label")?;
                if draft.labels.insert(s.clone(), aps).is_some() {
                    return line.err(line.column(1), format!("duplicate labels for state `{s}`"));
                }
            }
            "action" => {
                let s = states_known(&line, draft, 1)?;
                let a = action_known(&line, draft, 2)?;
                line.expect(3, ":")?;
                if draft
                    .transitions
                    .iter()
                    .any(|(_, s2, a2, _)| *s2 == s && *a2 == a)
                {
                    return line.err(
                        line.column(2),
                        format!("duplicate action `{a}` in state `{s}`"),
                    );
                }
                let mut entries: Vec<(String, P)> = Vec::new();
                let mut i = 4;
                loop {
                    let t = states_known(&line, draft, i)?;
                    let Some(p_tok) = line.tokens.get(i + 1) else {
                        return line.err(line.end, "expected probability");
                    };
                    let Some(p) = P::parse(p_tok.text) else {
                        return line.err(
                            p_tok.column,
                            format!("invalid probability `{}`", p_tok.text),
                        );
                    };
                    if entries.iter().any(|(x, _)| *x == t) {
                        return line.err(line.column(i), format!("duplicate successor `{t}`"));
                    }
                    entries.push((t, p));
                    match line.tokens.get(i + 2) {
                        None => break,
                        Some(c) if c.text == "," => i += 3,
                        Some(c) => {
                            return line.err(c.column, format!("expected `,`, found `{}`", c.text))
                        }
                    }
                }
                draft.transitions.push((line.number, s, a, entries));
            }
            other => return line.err(head.column, format!("unknown directive `{other}`")),
        }
    }
    if drafts.is_empty() {
        return Err(ParseError::Syntax {
            line: 1,
            column: 1,
            message: "no agent declared".into(),
        });
    }
    let mut agents = Vec::new();
    let mut roles = Vec::new();
    for d in drafts {
        let (agent, r) = build_agent(d)?;
        agents.push(agent);
        roles.push(r);
    }
    Ok(ModelFile {
        agents,
        ownership: ActionOwnership::new(roles),
    })
}

fn build_agent<P: Probability>(d: AgentDraft<P>) -> Result<(Agent<P>, AgentRoles), ParseError> {
    let missing = |what: &str| ParseError::Syntax {
        line: d.line,
        column: 1,
        message: format!("agent `{}` has no `{what}` declaration", d.name),
    };
    let states = d.states.as_ref().ok_or_else(|| missing("states:"))?;
    let init = d.init.as_ref().ok_or_else(|| missing("init:"))?;
    let mut b: MdpBuilder<P> = MdpBuilder::new();
    for s in states {
        b.state(s);
    }
    for a in d.actions.iter().flatten() {
        b.action(a);
    }
    b.initial(init);
    for ap in d.propositions.iter().flatten() {
        b.proposition(ap);
    }
    for (s, aps) in &d.labels {
        for ap in aps {
            b.label(s, ap);
        }
    }
    for (_, s, a, entries) in &d.transitions {
        let refs: Vec<(&str, P)> = entries
            .iter()
            .map(|(t, p)| (t.as_str(), p.clone()))
            .collect();
        b.transition(s, a, &refs);
    }
    let invalid = |problems| ParseError::Invalid {
        agent: d.name.clone(),
        problems,
    };
    let mdp = b
        .build()
        .map_err(|e| invalid(vec![(None, e.to_string())]))?;
    let diagnostics = mdp.validate();
    if !diagnostics.is_empty() {
        let problems = diagnostics
            .iter()
            .map(|g| {
                let line = d
                    .transitions
                    .iter()
                    .find(|(_, s, a, _)| *s == g.state && Some(a) == g.action.as_ref())
                    .map(|(l, ..)| *l);
                (line, g.to_string())
            })
            .collect();
        return Err(invalid(problems));
    }
    let roles = AgentRoles {
        active: d.active.unwrap_or_default(),
        passive: d.passive.unwrap_or_default(),
    };
    Ok((Agent { name: d.name, mdp }, roles))
}

/// Writes `file` in the grammar read by [`parse_model`]; parsing the output
/// gives the same agents and roles.
pub fn serialize_model<P: Probability>(file: &ModelFile<P>) -> String {
    let mut out = String::new();
    for (i, agent) in file.agents.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let m: &Mdp<P> = &agent.mdp;
        let _ = writeln!(out, "agent {}", agent.name);
        let _ = writeln!(out, "states: {}", m.state_names().join(" "));
        let _ = writeln!(out, "init: {}", m.state_name(m.initial()));
        let _ = writeln!(out, "actions: {}", m.action_names().join(" "));
        if !m.propositions().is_empty() {
            let aps: Vec<&str> = m.propositions().iter().map(|x| x.as_str()).collect();
            let _ = writeln!(out, "propositions: {}", aps.join(" "));
        }
        for s in m.states() {
            if !m.labels(s).is_empty() {
                let aps: Vec<&str> = m.labels(s).iter().map(|x| x.as_str()).collect();
                let _ = writeln!(out, "label {}: {}", m.state_name(s), aps.join(" "));
            }
        }
        for s in m.states() {
            for (a, mu) in m.choices(s) {
                let entries: Vec<String> = mu
                    .iter()
                    .map(|(t, p)| format!("{} {}", m.state_name(t), p.to_exact_string()))
                    .collect();
                let _ = writeln!(
                    out,
                    "action {} {}: {}",
                    m.state_name(s),
                    m.action_name(a),
                    entries.join(", ")
                );
            }
        }
        if let Some(r) = file.ownership.agents.get(i) {
            if !r.active.is_empty() {
                let v: Vec<&str> = r.active.iter().map(|x| x.as_str()).collect();
                let _ = writeln!(out, "active: {}", v.join(" "));
            }
            if !r.passive.is_empty() {
                let v: Vec<&str> = r.passive.iter().map(|x| x.as_str()).collect();
                let _ = writeln!(out, "passive: {}", v.join(" "));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "\
# two states
agent toy
states: s0 s1
init: s0
label s1: goal
action s0 go: s1 0.5, s0 0.5   # risky
action s0 stay: s0 1
action s1 stay: s1 1
";

    #[test]
    fn parses_a_small_agent() {
        let f: ModelFile<f64> = parse_model(TOY).unwrap();
        assert_eq!(f.agents.len(), 1);
        let m = &f.agents[0].mdp;
        assert_eq!(m.num_states(), 2);
        assert_eq!(m.action_names(), ["go", "stay"]);
        assert!(m.has_label(m.state_by_name("s1").unwrap(), "goal"));
        assert_eq!(f.ownership.agents[0], AgentRoles::default());
    }

    #[test]
    fn round_trips() {
        let f: ModelFile<f64> = parse_model(TOY).unwrap();
        let g: ModelFile<f64> = parse_model(&serialize_model(&f)).unwrap();
        assert_eq!(f.agents[0].mdp, g.agents[0].mdp);
        assert_eq!(serialize_model(&f), serialize_model(&g));
    }

    fn syntax(text: &str) -> (usize, usize) {
        match parse_model::<f64>(text) {
            Err(ParseError::Syntax { line, column, .. }) => (line, column),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn reports_positions() {
        assert_eq!(syntax("states: a"), (1, 1));
        assert_eq!(syntax("agent x\nstates: a b\ninit: c"), (3, 7));
        assert_eq!(
            syntax("agent x\nstates: a\ninit: a\naction a go: a zero"),
            (4, 16)
        );
        assert_eq!(syntax("agent x\nstates: a a"), (2, 11));
        assert_eq!(syntax("agent x\nstates: a\ninit: a\ninit: a"), (4, 1));
        assert_eq!(
            syntax("agent x\nstates: a\naction a go: a 1\naction a go: a 1"),
            (4, 10)
        );
        assert_eq!(syntax("agent x\nagent x"), (2, 7));
        assert_eq!(syntax("agent x\nstates: a\nfrobnicate"), (3, 1));
    }

    #[test]
    fn mass_errors_point_at_the_action() {
        let text = "agent x\nstates: s0 s1\ninit: s0\naction s0 R: s1 0.8\naction s1 R: s1 1";
        match parse_model::<f64>(text) {
            Err(ParseError::Invalid { problems, .. }) => {
                assert_eq!(problems.len(), 1);
                assert_eq!(problems[0].0, Some(4));
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn undeclared_actions_are_rejected_when_listed() {
        assert_eq!(
            syntax("agent x\nstates: a\nactions: u\naction a v: a 1"),
            (4, 10)
        );
    }
}
