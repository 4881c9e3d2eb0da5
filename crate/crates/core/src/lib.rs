//! Counterexample-guided synthesis of permissive supervisors for MDP agents
//! under bounded weak-safety PCTL, with compositional checking of
//! multi-agent systems.
//!
//! Every algorithm is generic over the [`Probability`] scalar; `f64`, `f32`
//! and exact `BigRational` are supported.

pub mod agr;
pub mod counterexample;
pub mod io;
pub mod lstar;
pub mod model;
pub mod pctl;
pub mod prob;
pub mod synthesis;

pub use num_rational::BigRational;
pub use prob::Probability;

pub type Mdp64 = model::Mdp<f64>;
pub type Mdp32 = model::Mdp<f32>;
pub type MdpExact = model::Mdp<BigRational>;
pub type Dtmc64 = model::Dtmc<f64>;
pub type DtmcExact = model::Dtmc<BigRational>;
pub type Verdict64 = pctl::Verdict<f64>;
pub type VerdictExact = pctl::Verdict<BigRational>;
pub type ModelFile64 = io::ModelFile<f64>;
pub type ModelFileExact = io::ModelFile<BigRational>;
