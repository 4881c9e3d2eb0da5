#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeSet, HashMap, VecDeque};

use supsyn::model::{alphabet, ActionId, Dfa, Dtmc, Mdp, MdpBuilder, StateId, WordSymbol};

/// Two-state shuttle: `a` toggles between `s0` and `s1`, `b`/`c` toggle
/// between `s0` and `s2`.
pub fn shuttle() -> Mdp<f64> {
    let mut b = MdpBuilder::new();
    b.initial("s0")
        .transition("s0", "a", &[("s1", 1.0)])
        .transition("s0", "c", &[("s2", 1.0)])
        .transition("s0", "b", &[("s2", 1.0)])
        .transition("s1", "a", &[("s0", 1.0)])
        .transition("s2", "c", &[("s0", 1.0)])
        .transition("s2", "b", &[("s0", 1.0)]);
    b.build().unwrap()
}

/// Counter over `<0>..<n-1>` that fails from its top value, or at once
/// with probability 0.5 on `b` and `c`.
pub fn counter(n: usize) -> Mdp<f64> {
    let mut b = MdpBuilder::new();
    b.initial("<0>").proposition("failure");
    let bad = format!("<{},bad>", n - 1);
    for i in 0..n {
        let here = format!("<{i}>");
        if i + 1 < n {
            let next = format!("<{}>", i + 1);
            b.transition(&here, "a", &[(&next, 0.9), (&here, 0.1)]);
        } else {
            b.transition(&here, "a", &[(&here, 0.9), (&bad, 0.1)]);
        }
    }
    b.transition("<0>", "b", &[(&bad, 0.5), ("<0>", 0.5)])
        .transition("<0>", "c", &[(&bad, 0.5), ("<0>", 0.5)])
        .transition(&bad, "a", &[(&bad, 1.0)])
        .label(&bad, "failure");
    b.build().unwrap()
}

pub fn grid() -> Mdp<f64> {
    supsyn::io::parse_model::<f64>(include_str!("../../../../models/grid.mdp"))
        .unwrap()
        .agents
        .remove(0)
        .mdp
}

pub fn two_agent() -> supsyn::io::ModelFile<f64> {
    supsyn::io::parse_model(include_str!("../../../../models/two_agent.mdp")).unwrap()
}

/// A hand-built five-state grid supervisor meeting the 0.6 bound.
pub fn grid_reference_supervisor(m: &Mdp<f64>) -> Dfa<WordSymbol> {
    let sigma = alphabet(m);
    let sym = |text: &str| -> usize {
        let (s, a) = text.split_at(2);
        let w = WordSymbol::new(m.state_by_name(s).unwrap(), m.action_by_name(a).unwrap());
        sigma.iter().position(|x| *x == w).unwrap()
    };
    let rest = |from: usize, drop: &[&str]| -> Vec<usize> {
        (0..sigma.len())
            .filter(|&i| sigma[i].state.0 >= from)
            .filter(|&i| !drop.iter().any(|d| sym(d) == i))
            .collect()
    };
    let mut delta = vec![vec![None; sigma.len()]; 5];
    let mut put = |q: usize, syms: Vec<usize>, t: usize| {
        for s in syms {
            delta[q][s] = Some(t);
        }
    };
    put(0, rest(1, &[]), 0);
    put(1, rest(1, &["q2D"]), 0);
    put(2, rest(2, &[]), 0);
    put(2, vec![sym("q1L")], 0);
    put(3, rest(1, &["q4R"]), 0);
    put(4, rest(1, &["q3R"]), 0);
    for q in [0, 1, 3, 4] {
        put(q, vec![sym("q0R")], 2);
        put(q, vec![sym("q0D")], 4);
    }
    put(2, vec![sym("q1R")], 1);
    put(2, vec![sym("q0R")], 2);
    put(2, vec![sym("q1D")], 3);
    put(2, vec![sym("q0D")], 4);
    put(4, vec![sym("q3R")], 3);
    Dfa::new(sigma, delta, 0, vec![true; 5]).unwrap()
}

/// Every state-action word of length at most `k` that is a path of `m`.
pub fn realizable_words(m: &Mdp<f64>, k: usize) -> Vec<Vec<WordSymbol>> {
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<(Vec<WordSymbol>, StateId)> = vec![(Vec::new(), m.initial())];
    for _ in 0..k {
        let mut next = Vec::new();
        for (w, s) in &frontier {
            for a in m.enabled(*s) {
                let mut w2 = w.clone();
                w2.push(WordSymbol::new(*s, a));
                out.push(w2.clone());
                let mut targets: Vec<StateId> = m.distribution(*s, a).unwrap().support().collect();
                targets.sort();
                targets.dedup();
                for t in targets {
                    next.push((w2.clone(), t));
                }
            }
        }
        frontier = next;
    }
    out.sort();
    out.dedup();
    out
}

/// Random valid MDP with `n` states over `actions`, each state enabling a
/// non-empty subset of them; states carry `prop` with probability 0.4 and
/// `h` with probability 0.2.
pub fn random_mdp(rng: &mut ChaCha8Rng, n: usize, actions: &[&str], prop: &str) -> Mdp<f64> {
    let mut b = MdpBuilder::new();
    b.initial("s0").proposition(prop).proposition("h");
    for s in 0..n {
        b.state(&format!("s{s}"));
    }
    for a in actions {
        b.action(a);
    }
    for s in 0..n {
        let name = format!("s{s}");
        if rng.gen_bool(0.4) {
            b.label(&name, prop);
        }
        if rng.gen_bool(0.2) {
            b.label(&name, "h");
        }
        let enabled: Vec<&str> = loop {
            let pick: Vec<&str> = actions
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(0.7))
                .collect();
            if !pick.is_empty() {
                break pick;
            }
        };
        for a in enabled {
            let targets: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            let targets = if targets.is_empty() {
                vec![rng.gen_range(0..n)]
            } else {
                targets
            };
            let weights: Vec<u32> = targets.iter().map(|_| rng.gen_range(1..=4)).collect();
            let total: u32 = weights.iter().sum();
            let entries: Vec<(String, f64)> = targets
                .iter()
                .zip(&weights)
                .map(|(t, w)| (format!("s{t}"), *w as f64 / total as f64))
                .collect();
            let refs: Vec<(&str, f64)> = entries.iter().map(|(t, p)| (t.as_str(), *p)).collect();
            b.transition(&name, a, &refs);
        }
    }
    b.build().unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Bounded-until probability from the initial state under a step-indexed
/// scheduler given as `choice[step][state]`.
fn until_under(m: &Mdp<f64>, keep: &[bool], hit: &[bool], choice: &[Vec<ActionId>]) -> f64 {
    let k = choice.len();
    let mut x: Vec<f64> = hit.iter().map(|&h| if h { 1.0 } else { 0.0 }).collect();
    for step in (0..k).rev() {
        x = m
            .states()
            .map(|s| {
                if hit[s.0] {
                    1.0
                } else if !keep[s.0] || m.is_deadlock(s) {
                    0.0
                } else {
                    let d = m.distribution(s, choice[step][s.0]).unwrap();
                    d.iter().map(|(t, p)| p * x[t.0]).sum()
                }
            })
            .collect();
    }
    x[m.initial().0]
}

/// `(pmax, pmin)` of `keep U<=k hit` by enumerating every deterministic
/// step-indexed scheduler.
pub fn brute_force_extremes(m: &Mdp<f64>, keep: &[bool], hit: &[bool], k: usize) -> (f64, f64) {
    let options: Vec<Vec<ActionId>> = m
        .states()
        .map(|s| {
            let e: Vec<ActionId> = m.enabled(s).collect();
            if e.is_empty() {
                vec![ActionId(0)]
            } else {
                e
            }
        })
        .collect();
    let slots: Vec<usize> = (0..k)
        .flat_map(|_| options.iter().map(|o| o.len()))
        .collect();
    let mut digits = vec![0usize; slots.len()];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    loop {
        let choice: Vec<Vec<ActionId>> = (0..k)
            .map(|t| {
                (0..options.len())
                    .map(|s| options[s][digits[t * options.len() + s]])
                    .collect()
            })
            .collect();
        let v = until_under(m, keep, hit, &choice);
        lo = lo.min(v);
        hi = hi.max(v);
        let mut i = 0;
        while i < digits.len() {
            digits[i] += 1;
            if digits[i] < slots[i] {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == digits.len() {
            return (hi, lo);
        }
    }
}

/// Every witness path of `keep U<=k hit` in `chain`, with probabilities
/// multiplied from the root, sorted like the enumerator: probability
/// descending, then by `(state, action)` sequence.
pub fn exhaustive_paths(
    chain: &Dtmc<f64>,
    keep: &[bool],
    hit: &[bool],
    k: usize,
) -> Vec<(f64, Vec<usize>)> {
    fn walk(
        chain: &Dtmc<f64>,
        keep: &[bool],
        hit: &[bool],
        k: usize,
        nodes: &mut Vec<usize>,
        p: f64,
        out: &mut Vec<(f64, Vec<usize>)>,
    ) {
        let last = *nodes.last().unwrap();
        if hit[last] {
            out.push((p, nodes.clone()));
            return;
        }
        if nodes.len() > k || chain.is_absorbing(last) || !keep[last] {
            return;
        }
        for (next, q) in chain.successors(last) {
            nodes.push(*next);
            walk(chain, keep, hit, k, nodes, p * q, out);
            nodes.pop();
        }
    }
    let mut out = Vec::new();
    walk(
        chain,
        keep,
        hit,
        k,
        &mut vec![chain.initial()],
        1.0,
        &mut out,
    );
    let key = |nodes: &[usize]| -> Vec<(usize, usize)> {
        nodes
            .iter()
            .map(|&i| {
                let n = chain.node(i);
                (n.origin.0, n.action.map_or(usize::MAX, |a| a.0))
            })
            .collect()
    };
    out.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then_with(|| key(&a.1).cmp(&key(&b.1)))
    });
    out
}

/// Random complete DFA over `sigma` symbols with `n` states.
pub fn random_dfa(rng: &mut ChaCha8Rng, n: usize, sigma: usize) -> Dfa<usize> {
    let delta = (0..n)
        .map(|_| (0..sigma).map(|_| Some(rng.gen_range(0..n))).collect())
        .collect();
    let accepting = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    Dfa::new((0..sigma).collect(), delta, 0, accepting).unwrap()
}

/// State count of the minimal complete DFA for the language of `d`, by
/// Moore refinement of the reachable part.
pub fn minimal_states<A: Clone + Eq + std::hash::Hash>(d: &Dfa<A>) -> usize {
    let n = d.num_states();
    let sigma = d.alphabet().len();
    let mut reach = vec![false; n];
    let mut stack = vec![d.initial()];
    reach[d.initial()] = true;
    let mut sink_needed = false;
    while let Some(q) = stack.pop() {
        for a in 0..sigma {
            match d.step(q, a) {
                Some(t) if !reach[t] => {
                    reach[t] = true;
                    stack.push(t);
                }
                Some(_) => {}
                None => sink_needed = true,
            }
        }
    }
    // state n is the implicit rejecting sink
    let states: Vec<usize> = (0..n)
        .filter(|&q| reach[q])
        .chain(sink_needed.then_some(n))
        .collect();
    let next = |q: usize, a: usize| if q == n { n } else { d.step(q, a).unwrap_or(n) };
    let accept = |q: usize| q != n && d.is_accepting(q);
    let mut class: Vec<usize> = (0..=n).map(|q| accept(q) as usize).collect();
    loop {
        let mut sigs: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut fresh = vec![0; n + 1];
        for &q in &states {
            let sig = (
                class[q],
                (0..sigma).map(|a| class[next(q, a)]).collect::<Vec<_>>(),
            );
            fresh[q] = match sigs.iter().position(|x| *x == sig) {
                Some(i) => i,
                None => {
                    sigs.push(sig);
                    sigs.len() - 1
                }
            };
        }
        let before: BTreeSet<usize> = states.iter().map(|&q| class[q]).collect();
        if sigs.len() == before.len() {
            return sigs.len();
        }
        class = fresh;
    }
}

/// Shortest word on which `a` and `b` disagree, by product BFS.
pub fn distinguishing_word<A: Clone + Eq + std::hash::Hash>(
    a: &Dfa<A>,
    b: &Dfa<A>,
) -> Option<Vec<usize>> {
    let sigma = a.alphabet().len();
    let acc = |d: &Dfa<A>, q: Option<usize>| q.is_some_and(|q| d.is_accepting(q));
    let start = (Some(a.initial()), Some(b.initial()));
    let mut seen = HashMap::from([(start, Vec::new())]);
    let mut queue = VecDeque::from([start]);
    while let Some((p, q)) = queue.pop_front() {
        let w = seen[&(p, q)].clone();
        if acc(a, p) != acc(b, q) {
            return Some(w);
        }
        for s in 0..sigma {
            let t = (p.and_then(|p| a.step(p, s)), q.and_then(|q| b.step(q, s)));
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(t) {
                let mut w2 = w.clone();
                w2.push(s);
                e.insert(w2);
                queue.push_back(t);
            }
        }
    }
    None
}
