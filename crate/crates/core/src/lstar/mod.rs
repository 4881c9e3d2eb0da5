//! Angluin's L* over an arbitrary finite alphabet, with a teacher whose
//! membership answers may change when negative counterexamples arrive.

mod oracle;
mod table;

use std::hash::Hash;

pub use oracle::SynthesisOracle;
pub use table::ObservationTable;

use crate::counterexample::Polarity;
use crate::model::Dfa;

/// Membership teacher over symbol indices.
pub trait MembershipOracle {
    fn query(&mut self, word: &[usize]) -> bool;

    /// Records a word that must be rejected from now on. Teachers with a
    /// fixed target ignore it.
    fn revise(&mut self, _negative: &[usize]) {}
}

impl<F: FnMut(&[usize]) -> bool> MembershipOracle for F {
    fn query(&mut self, word: &[usize]) -> bool {
        self(word)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LStarError {
    #[error("positive counterexample {0:?} is rejected by the teacher")]
    PositiveRejected(Vec<usize>),
    #[error("symbol {symbol} outside the alphabet of size {size}")]
    UnknownSymbol { symbol: usize, size: usize },
    #[error("no conjecture within {0} equivalence rounds")]
    RoundLimit(usize),
}

/// What [`LStar::add_counterexample`] did with a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Update {
    Refined,
    /// The current conjecture already classified the word correctly.
    AlreadyClassified,
}

/// An L* learner; the conjecture is kept stable between calls.
#[derive(Debug, Clone)]
pub struct LStar<A> {
    alphabet: Vec<A>,
    table: ObservationTable,
    conjecture: Dfa<A>,
    conjectures: usize,
}

impl<A: Clone + Eq + Hash> LStar<A> {
    /// Builds the first conjecture.
    pub fn new(alphabet: Vec<A>, oracle: &mut dyn MembershipOracle) -> Self {
        let mut table = ObservationTable::new(alphabet.len());
        table.stabilize(oracle);
        let conjecture = Self::build(&alphabet, &table);
        LStar {
            alphabet,
            table,
            conjecture,
            conjectures: 1,
        }
    }

    fn build(alphabet: &[A], table: &ObservationTable) -> Dfa<A> {
        let (delta, initial, accepting) = table.conjecture();
        Dfa::new(alphabet.to_vec(), delta, initial, accepting)
            .expect("table conjectures are well-formed")
    }

    pub fn alphabet(&self) -> &[A] {
        &self.alphabet
    }

    pub fn table(&self) -> &ObservationTable {
        &self.table
    }

    pub fn conjecture(&self) -> &Dfa<A> {
        &self.conjecture
    }

    /// Number of conjectures built, including the first.
    pub fn conjectures(&self) -> usize {
        self.conjectures
    }

    pub fn queries(&self) -> usize {
        self.table.queries()
    }

    /// Re-queries the whole table, then closes it again.
    pub fn stabilize(&mut self, oracle: &mut dyn MembershipOracle) -> &Dfa<A> {
        self.table.refresh(oracle);
        self.table.stabilize(oracle);
        self.conjecture = Self::build(&self.alphabet, &self.table);
        &self.conjecture
    }

    /// Processes a counterexample. A negative word is first recorded with the
    /// teacher and the table refreshed; then, if the conjecture misclassifies
    /// the word, all its prefixes join `S` and the table is stabilised.
    pub fn add_counterexample(
        &mut self,
        oracle: &mut dyn MembershipOracle,
        word: &[usize],
        polarity: Polarity,
    ) -> Result<Update, LStarError> {
        if let Some(&symbol) = word.iter().find(|&&a| a >= self.alphabet.len()) {
            return Err(LStarError::UnknownSymbol {
                symbol,
                size: self.alphabet.len(),
            });
        }
        let accepted = self.conjecture.accepts(word);
        match polarity {
            Polarity::Negative => {
                oracle.revise(word);
                self.table.refresh(oracle);
            }
            Polarity::Positive => {
                if !oracle.query(word) {
                    return Err(LStarError::PositiveRejected(word.to_vec()));
                }
            }
        }
        let misclassified = match polarity {
            Polarity::Negative => accepted,
            Polarity::Positive => !accepted,
        };
        if !misclassified {
            log::warn!("counterexample {word:?} is already classified correctly");
            self.table.stabilize(oracle);
            self.conjecture = Self::build(&self.alphabet, &self.table);
            return Ok(Update::AlreadyClassified);
        }
        for i in 1..=word.len() {
            self.table.add_prefix(word[..i].to_vec());
        }
        self.table.stabilize(oracle);
        self.conjecture = Self::build(&self.alphabet, &self.table);
        self.conjectures += 1;
        Ok(Update::Refined)
    }

    /// Alternates conjectures and equivalence queries until the teacher
    /// answers `None`.
    pub fn learn(
        &mut self,
        oracle: &mut dyn MembershipOracle,
        mut equivalence: impl FnMut(&Dfa<A>) -> Option<(Vec<usize>, Polarity)>,
        max_rounds: usize,
    ) -> Result<Dfa<A>, LStarError> {
        for _ in 0..max_rounds {
            match equivalence(&self.conjecture) {
                None => return Ok(self.conjecture.clone()),
                Some((word, polarity)) => {
                    self.add_counterexample(oracle, &word, polarity)?;
                }
            }
        }
        Err(LStarError::RoundLimit(max_rounds))
    }
}
