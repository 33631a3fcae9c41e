//! Matching and unification modulo the structural axioms.

pub mod dioph;
pub mod matching;
pub mod unify;

pub use matching::{match_modulo, matches};
pub use unify::{unify_modulo, unify_seq};
