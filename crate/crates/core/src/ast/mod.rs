//! Expression language shared by every phase of the pipeline.

mod expr;
mod problem;
mod simplify;
mod subst;

pub use expr::{Expr, Op, Quantifier, Sort, SortError, Symbol};
pub use problem::{Grammar, Problem, Production, SynthFun};
pub use simplify::{mk_app, simplify};
pub use subst::{
    all_symbols, canonical, desugar_binders, equivalent_modulo_ac, free_names, free_sort_of,
    free_variables, substitute, substitute_all, FreshNames, FRESH_PREFIX,
};
