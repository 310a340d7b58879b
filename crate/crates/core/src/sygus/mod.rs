//! Text formats: the extended SyGuS-IF input language, SMT-LIB queries and
//! solver replies.

mod parse;
mod print;
mod reply;
pub mod sexp;

use thiserror::Error;

pub use parse::{parse_params, parse_problem, parse_sort, parse_term, Scope};
pub use print::{grammar_block, print_define_fun, print_smtlib_query, print_sygus, synth_fun_decl};
pub use reply::{parse_reply, ParsedReply};
pub use sexp::Pos;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SygusError {
    #[error("{pos}: {message}")]
    Parse { pos: Pos, message: String },
    #[error("{pos}: unsupported {message}")]
    Unsupported { pos: Pos, message: String },
    #[error("cannot print: {0}")]
    Format(String),
}
