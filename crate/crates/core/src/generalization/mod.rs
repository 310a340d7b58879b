//! Lifting bounded solutions back to quantified candidates.

mod grammar;
mod matching;

pub use grammar::{build_generalization_grammar, build_template_grammar, GrammarError};
pub use matching::{matching, syntactic_generalize, syntactic_generalize_traced, MatchSet, MatchWitness};
