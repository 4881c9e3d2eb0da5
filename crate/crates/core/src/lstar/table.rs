use std::collections::{HashMap, HashSet};

use super::MembershipOracle;

/// Angluin observation table over symbol indices `0..alphabet_len`.
///
/// Entries are cached per concatenated word, so every distinct word is
/// queried once until [`ObservationTable::refresh`] re-asks all of them.
#[derive(Debug, Clone)]
pub struct ObservationTable {
    alphabet_len: usize,
    prefixes: Vec<Vec<usize>>,
    prefix_set: HashSet<Vec<usize>>,
    suffixes: Vec<Vec<usize>>,
    entries: HashMap<Vec<usize>, bool>,
    queries: usize,
}

fn concat(u: &[usize], e: &[usize]) -> Vec<usize> {
    let mut w = Vec::with_capacity(u.len() + e.len());
    w.extend_from_slice(u);
    w.extend_from_slice(e);
    w
}

impl ObservationTable {
    /// The table with `S = E = {ε}`, not yet filled.
    pub fn new(alphabet_len: usize) -> Self {
        ObservationTable {
            alphabet_len,
            prefixes: vec![Vec::new()],
            prefix_set: HashSet::from([Vec::new()]),
            suffixes: vec![Vec::new()],
            entries: HashMap::new(),
            queries: 0,
        }
    }

    pub fn alphabet_len(&self) -> usize {
        self.alphabet_len
    }

    pub fn prefixes(&self) -> &[Vec<usize>] {
        &self.prefixes
    }

    pub fn suffixes(&self) -> &[Vec<usize>] {
        &self.suffixes
    }

    /// Membership queries issued so far, counting re-queries on refresh.
    pub fn queries(&self) -> usize {
        self.queries
    }

    /// Distinct words whose membership is recorded.
    pub fn distinct_words(&self) -> usize {
        self.entries.len()
    }

    pub fn contains_prefix(&self, u: &[usize]) -> bool {
        self.prefix_set.contains(u)
    }

    /// Adds `u` to `S`; returns whether it was new.
    pub fn add_prefix(&mut self, u: Vec<usize>) -> bool {
        if self.prefix_set.insert(u.clone()) {
            self.prefixes.push(u);
            true
        } else {
            false
        }
    }

    pub fn add_suffix(&mut self, e: Vec<usize>) -> bool {
        if self.suffixes.contains(&e) {
            false
        } else {
            self.suffixes.push(e);
            true
        }
    }

    fn extensions(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.prefixes
            .iter()
            .flat_map(move |u| (0..self.alphabet_len).map(move |a| concat(u, &[a])))
    }

    /// Queries every missing entry of `(S ∪ S·Σ)·E`.
    pub fn fill(&mut self, oracle: &mut dyn MembershipOracle) {
        let rows: Vec<Vec<usize>> = self
            .prefixes
            .iter()
            .cloned()
            .chain(self.extensions())
            .collect();
        for u in &rows {
            for e in &self.suffixes {
                let w = concat(u, e);
                if !self.entries.contains_key(&w) {
                    let answer = oracle.query(&w);
                    self.queries += 1;
                    self.entries.insert(w, answer);
                }
            }
        }
    }

    /// Re-asks every recorded word; needed after the oracle revised answers.
    pub fn refresh(&mut self, oracle: &mut dyn MembershipOracle) {
        for (w, answer) in self.entries.iter_mut() {
            *answer = oracle.query(w);
            self.queries += 1;
        }
    }

    /// `T(w)`; panics if the word was never queried.
    pub fn entry(&self, w: &[usize]) -> bool {
        self.entries[w]
    }

    pub fn lookup(&self, w: &[usize]) -> Option<bool> {
        self.entries.get(w).copied()
    }

    pub fn row(&self, u: &[usize]) -> Vec<bool> {
        self.suffixes
            .iter()
            .map(|e| self.entry(&concat(u, e)))
            .collect()
    }

    /// An extension `u·a` whose row matches no prefix row.
    pub fn unclosed(&self) -> Option<Vec<usize>> {
        let rows: HashSet<Vec<bool>> = self.prefixes.iter().map(|u| self.row(u)).collect();
        self.extensions().find(|ua| !rows.contains(&self.row(ua)))
    }

    /// A suffix `a·e` separating two prefixes with equal rows.
    pub fn inconsistency(&self) -> Option<Vec<usize>> {
        let mut by_row: HashMap<Vec<bool>, Vec<&Vec<usize>>> = HashMap::new();
        for u in &self.prefixes {
            by_row.entry(self.row(u)).or_default().push(u);
        }
        let mut groups: Vec<Vec<&Vec<usize>>> =
            by_row.into_values().filter(|g| g.len() > 1).collect();
        groups.sort();
        for group in groups {
            let first = group[0];
            for other in &group[1..] {
                for a in 0..self.alphabet_len {
                    for e in &self.suffixes {
                        let x = concat(&concat(first, &[a]), e);
                        let y = concat(&concat(other, &[a]), e);
                        if self.entry(&x) != self.entry(&y) {
                            return Some(concat(&[a], e));
                        }
                    }
                }
            }
        }
        None
    }

    pub fn is_closed(&self) -> bool {
        self.unclosed().is_none()
    }

    pub fn is_consistent(&self) -> bool {
        self.inconsistency().is_none()
    }

    /// Fills, closes and makes consistent via membership queries.
    pub fn stabilize(&mut self, oracle: &mut dyn MembershipOracle) {
        loop {
            self.fill(oracle);
            if let Some(ua) = self.unclosed() {
                self.add_prefix(ua);
            } else if let Some(e) = self.inconsistency() {
                self.add_suffix(e);
            } else {
                return;
            }
        }
    }

    /// Conjecture as `(delta, initial, accepting)`: states are the distinct
    /// prefix rows numbered by first occurrence in `S`.
    pub fn conjecture(&self) -> (Vec<Vec<Option<usize>>>, usize, Vec<bool>) {
        let mut ids: HashMap<Vec<bool>, usize> = HashMap::new();
        let mut reps: Vec<&Vec<usize>> = Vec::new();
        for u in &self.prefixes {
            let r = self.row(u);
            if let std::collections::hash_map::Entry::Vacant(e) = ids.entry(r) {
                e.insert(reps.len());
                reps.push(u);
            }
        }
        let delta = reps
            .iter()
            .map(|u| {
                (0..self.alphabet_len)
                    .map(|a| Some(ids[&self.row(&concat(u, &[a]))]))
                    .collect()
            })
            .collect();
        let accepting = reps.iter().map(|u| self.entry(u)).collect();
        (delta, ids[&self.row(&[])], accepting)
    }
}
