//! Synthesis of specifications over unbounded integer arrays.
//!
//! A problem whose constraints quantify over array indices is first restricted
//! to arrays of a small bound, where quantifiers unfold into finite
//! conjunctions and disjunctions. Solutions of the bounded problem are lifted
//! back to quantified candidates, either by syntactic pattern matching or by a
//! second, grammar-guided synthesis call, and then checked against the
//! original problem.

pub mod ast;
pub mod corpus;
pub mod driver;
pub mod eval;
pub mod fragment;
pub mod generalization;
pub mod restriction;
pub mod solvers;
pub mod sygus;
