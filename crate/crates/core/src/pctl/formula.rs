use std::collections::BTreeSet;
use std::fmt;

use super::PctlError;
use crate::prob::Probability;

/// Boolean state formula over atomic propositions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StateFormula {
    True,
    Atom(String),
    Not(Box<StateFormula>),
    And(Box<StateFormula>, Box<StateFormula>),
    Or(Box<StateFormula>, Box<StateFormula>),
}

impl StateFormula {
    pub fn atom(name: &str) -> Self {
        StateFormula::Atom(name.to_string())
    }

    pub fn negate(f: StateFormula) -> Self {
        StateFormula::Not(Box::new(f))
    }

    pub fn and(a: StateFormula, b: StateFormula) -> Self {
        StateFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: StateFormula, b: StateFormula) -> Self {
        StateFormula::Or(Box::new(a), Box::new(b))
    }

    /// Truth value under the label set of a state.
    pub fn eval(&self, labels: &BTreeSet<String>) -> bool {
        match self {
            StateFormula::True => true,
            StateFormula::Atom(a) => labels.contains(a),
            StateFormula::Not(f) => !f.eval(labels),
            StateFormula::And(a, b) => a.eval(labels) && b.eval(labels),
            StateFormula::Or(a, b) => a.eval(labels) || b.eval(labels),
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            StateFormula::True => {}
            StateFormula::Atom(a) => {
                out.insert(a.clone());
            }
            StateFormula::Not(f) => f.collect_atoms(out),
            StateFormula::And(a, b) | StateFormula::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            StateFormula::Or(..) => 1,
            StateFormula::And(..) => 2,
            _ => 3,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            StateFormula::True => f.write_str("true")?,
            StateFormula::Atom(a) => write!(f, "\"{a}\"")?,
            StateFormula::Not(inner) => {
                f.write_str("!")?;
                inner.fmt_at(f, 3)?;
            }
            StateFormula::And(a, b) => {
                a.fmt_at(f, 2)?;
                f.write_str(" & ")?;
                b.fmt_at(f, 3)?;
            }
            StateFormula::Or(a, b) => {
                a.fmt_at(f, 1)?;
                f.write_str(" | ")?;
                b.fmt_at(f, 2)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for StateFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PathFormula {
    Next(StateFormula),
    Until {
        lhs: StateFormula,
        rhs: StateFormula,
        bound: usize,
    },
}

/// `P<=p [ path ]`. The bound keeps its source text so that every scalar
/// type can read it without loss.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoundedFormula {
    bound: String,
    pub path: PathFormula,
}

impl BoundedFormula {
    /// Fails when `bound` is not a number in `[0, 1]`.
    pub fn new(bound: &str, path: PathFormula) -> Result<Self, PctlError> {
        let value = f64::parse(bound).ok_or_else(|| PctlError::BadBound(bound.to_string()))?;
        if !(0.0..=1.0).contains(&value) {
            return Err(PctlError::BoundOutOfRange(bound.to_string()));
        }
        Ok(BoundedFormula {
            bound: bound.trim().to_string(),
            path,
        })
    }

    pub fn until(
        bound: &str,
        lhs: StateFormula,
        rhs: StateFormula,
        k: usize,
    ) -> Result<Self, PctlError> {
        Self::new(bound, PathFormula::Until { lhs, rhs, bound: k })
    }

    pub fn next(bound: &str, rhs: StateFormula) -> Result<Self, PctlError> {
        Self::new(bound, PathFormula::Next(rhs))
    }

    pub fn bound_text(&self) -> &str {
        &self.bound
    }

    pub fn bound<P: Probability>(&self) -> Result<P, PctlError> {
        P::parse(&self.bound).ok_or_else(|| PctlError::BadBound(self.bound.clone()))
    }

    /// Number of steps the path formula looks ahead.
    pub fn horizon(&self) -> usize {
        match &self.path {
            PathFormula::Next(_) => 1,
            PathFormula::Until { bound, .. } => *bound,
        }
    }

    /// Path constraint; `true` for next.
    pub fn lhs(&self) -> StateFormula {
        match &self.path {
            PathFormula::Next(_) => StateFormula::True,
            PathFormula::Until { lhs, .. } => lhs.clone(),
        }
    }

    pub fn target(&self) -> &StateFormula {
        match &self.path {
            PathFormula::Next(rhs) | PathFormula::Until { rhs, .. } => rhs,
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = self.target().atoms();
        out.extend(self.lhs().atoms());
        out
    }

    /// Same path formula under a different bound.
    pub fn with_bound(&self, bound: &str) -> Result<Self, PctlError> {
        Self::new(bound, self.path.clone())
    }
}

impl fmt::Display for BoundedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.path {
            PathFormula::Next(rhs) => write!(f, "P<={} [ X {} ]", self.bound, rhs),
            PathFormula::Until { lhs, rhs, bound } => {
                write!(f, "P<={} [ {} U<={} {} ]", self.bound, lhs, bound, rhs)
            }
        }
    }
}
