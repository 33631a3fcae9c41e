//! Narrowing-driven partial evaluation of order-sorted equational programs
//! whose equations apply modulo associativity, commutativity and identity.

pub mod embed;
pub mod error;
pub mod generalize;
pub mod narrow;
pub mod pe;
pub mod rewrite;
pub mod signature;
pub mod solver;
pub mod subst;
pub mod syntax;
pub mod term;
pub mod bench;

pub use error::{Error, Result};
pub use signature::{Equation, Signature, SortId, SymId, Theory};
pub use subst::Subst;
pub use term::{Term, Var};
