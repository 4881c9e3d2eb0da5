use std::fmt::Write as _;
use std::hash::Hash;

use crate::model::{Dfa, Mdp, WordSymbol};
use crate::prob::Probability;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Deterministic DOT rendering: one node per state (accepting states
/// doubled), one edge per source and target listing its symbols. Edges are
/// ordered by source state, then by their first symbol.
pub fn export_dot<A: Clone + Eq + Hash>(
    d: &Dfa<A>,
    name: &str,
    symbol: impl Fn(&A) -> String,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{}\" {{", escape(name));
    let _ = writeln!(out, "  rankdir=LR;");
    let _ = writeln!(out, "  start [shape=point];");
    for q in 0..d.num_states() {
        let shape = if d.is_accepting(q) {
            "doublecircle"
        } else {
            "circle"
        };
        let _ = writeln!(out, "  q{q} [shape={shape}];");
    }
    let _ = writeln!(out, "  start -> q{};", d.initial());
    for q in 0..d.num_states() {
        let mut edges: Vec<(usize, Vec<String>)> = Vec::new();
        for (sym, t) in d.successors(q) {
            let text = symbol(&d.alphabet()[sym]);
            match edges.iter_mut().find(|(to, _)| *to == t) {
                Some((_, v)) => v.push(text),
                None => edges.push((t, vec![text])),
            }
        }
        for (t, symbols) in edges {
            let _ = writeln!(
                out,
                "  q{q} -> q{t} [label=\"{}\"];",
                escape(&symbols.join(", "))
            );
        }
    }
    out.push_str("}\n");
    out
}

/// DOT rendering of a supervisor with symbols written as state name
/// followed by action name.
pub fn export_supervisor_dot<P: Probability>(
    d: &Dfa<WordSymbol>,
    m: &Mdp<P>,
    name: &str,
) -> String {
    export_dot(d, name, |w| {
        format!("{}{}", m.state_name(w.state), m.action_name(w.action))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn universal_is_one_node_one_loop() {
        let d = Dfa::universal(vec!['x', 'y']);
        let dot = export_dot(&d, "k", |c| c.to_string());
        assert_eq!(dot.matches("shape=doublecircle").count(), 1);
        assert_eq!(dot.matches("->").count(), 2);
        assert!(dot.contains("q0 -> q0 [label=\"x, y\"];"));
        assert_eq!(dot, export_dot(&d, "k", |c| c.to_string()));
    }
}
