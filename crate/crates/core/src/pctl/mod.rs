//! Bounded weak-safety PCTL: `P<=p [ phi1 U<=k phi2 ]` and `P<=p [ X phi ]`
//! over boolean state formulas, decided by finite-horizon value iteration.

mod check;
mod formula;
mod parse;

pub use check::{
    check, check_atoms, eval_prop, extremal_bounded_until, sat, Extremal, Mode, Verdict,
};
pub use formula::{BoundedFormula, PathFormula, StateFormula};
pub use parse::{parse_formula, parse_state_formula};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PctlError {
    #[error("syntax error at offset {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("probability bound `{0}` is not a number")]
    BadBound(String),
    #[error("probability bound {0} is outside [0, 1]")]
    BoundOutOfRange(String),
    #[error("step bound {0} is negative")]
    NegativeHorizon(String),
    #[error("nested probabilistic operator at offset {pos} is not supported")]
    Nested { pos: usize },
    #[error("unknown atomic proposition \"{0}\"")]
    UnknownProposition(String),
}
