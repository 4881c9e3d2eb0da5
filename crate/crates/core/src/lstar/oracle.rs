use super::MembershipOracle;
use crate::model::{is_path, Mdp, WordSymbol};
use crate::prob::Probability;

/// The synthesis teacher: a word is a member iff it is longer than the
/// horizon, or it is a path of the plant with no eliminated word as a
/// prefix.
#[derive(Debug, Clone)]
pub struct SynthesisOracle<'a, P> {
    plant: &'a Mdp<P>,
    alphabet: Vec<WordSymbol>,
    horizon: usize,
    negatives: Vec<Vec<WordSymbol>>,
    queries: usize,
}

impl<'a, P: Probability> SynthesisOracle<'a, P> {
    pub fn new(plant: &'a Mdp<P>, alphabet: Vec<WordSymbol>, horizon: usize) -> Self {
        SynthesisOracle {
            plant,
            alphabet,
            horizon,
            negatives: Vec::new(),
            queries: 0,
        }
    }

    pub fn alphabet(&self) -> &[WordSymbol] {
        &self.alphabet
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn negatives(&self) -> &[Vec<WordSymbol>] {
        &self.negatives
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    pub fn symbols(&self, word: &[usize]) -> Vec<WordSymbol> {
        word.iter().map(|&i| self.alphabet[i]).collect()
    }

    /// Symbol indices of `word`; `None` if a symbol is outside the alphabet.
    pub fn indices(&self, word: &[WordSymbol]) -> Option<Vec<usize>> {
        word.iter()
            .map(|w| self.alphabet.iter().position(|a| a == w))
            .collect()
    }

    pub fn add_negative(&mut self, word: Vec<WordSymbol>) {
        if !self.negatives.contains(&word) {
            self.negatives.push(word);
        }
    }

    /// The answer rule on symbol words.
    pub fn answer(&self, word: &[WordSymbol]) -> bool {
        if word.len() > self.horizon {
            return true;
        }
        is_path(self.plant, word) && !self.negatives.iter().any(|n| word.starts_with(n))
    }
}

impl<P: Probability> MembershipOracle for SynthesisOracle<'_, P> {
    fn query(&mut self, word: &[usize]) -> bool {
        self.queries += 1;
        let symbols = self.symbols(word);
        self.answer(&symbols)
    }

    fn revise(&mut self, negative: &[usize]) {
        let symbols = self.symbols(negative);
        self.add_negative(symbols);
    }
}
