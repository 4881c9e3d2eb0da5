//! Core data model: MDPs, chains, automata, paths and the two composition
//! operators.

mod compose;
mod dfa;
mod dtmc;
mod mdp;
mod path;

pub(crate) use compose::bfs_depth;
pub use compose::{
    parallel_compose, parallel_compose_all, parallel_compose_unchecked, supervised_compose,
    ComposeError, Product, Supervised, SystemProduct,
};
pub use dfa::{Dfa, DfaError};
pub use dtmc::{induced_dtmc, ChainNode, Dtmc, DtmcError};
pub use mdp::{
    ActionId, Diagnostic, DiagnosticKind, Distribution, Mdp, MdpBuilder, MdpError, StateId,
};
pub use path::{alphabet, format_word, is_path, Path, Scheduler, WordSymbol};

/// Well-formedness diagnostics of `m`; empty iff every invariant holds.
pub fn validate_mdp<P: crate::Probability>(m: &Mdp<P>) -> Vec<Diagnostic> {
    m.validate()
}
