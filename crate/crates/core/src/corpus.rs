//! The bundled benchmark corpus.
//!
//! Twelve reconstructed problems in three families: hand-written invariant
//! problems, loops in the style of software-verification benchmarks, and
//! sketches of string utility methods over integer arrays. Each problem has
//! a JSON sidecar naming the bound at which a solution is expected, the
//! expected candidate, which generalization step should produce it, and a
//! short argument for why the candidate is correct.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ast::{Expr, Problem};
use crate::sygus::{parse_problem, parse_term, sexp::read_all, Scope, SygusError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Crafted,
    Svcomp,
    Sketching,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Crafted, Category::Svcomp, Category::Sketching];

    pub fn dir_name(self) -> &'static str {
        match self {
            Category::Crafted => "crafted",
            Category::Svcomp => "svcomp",
            Category::Sketching => "sketching",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.dir_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    /// Pattern-based reintroduction of quantifiers.
    Syntactic,
    /// The second synthesis call over the generalization grammar.
    Synthesis,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Golden {
    pub name: String,
    pub category: Category,
    pub expected_bound: usize,
    /// Body of the single synthesis function, over its parameters.
    pub expected_candidate: String,
    pub expected_phase: Phase,
    /// Why the candidate is correct, checked by hand.
    pub argument: String,
}

#[derive(Debug, Clone)]
pub struct GoldenCase {
    /// Path relative to the corpus root.
    pub path: &'static str,
    pub source: &'static str,
    pub golden: Golden,
}

impl GoldenCase {
    pub fn problem(&self) -> Result<Problem, SygusError> {
        parse_problem(self.source)
    }

    /// The expected body, parsed in the scope of the function's parameters.
    pub fn expected_candidate(&self) -> Result<Expr, SygusError> {
        let p = self.problem()?;
        let f = p
            .synth_funs
            .first()
            .ok_or_else(|| SygusError::Format("corpus problem has no synth-fun".into()))?;
        let mut scope = Scope::default();
        scope.vars.extend(f.params.iter().cloned());
        let forms = read_all(&self.golden.expected_candidate).map_err(|e| SygusError::Parse {
            pos: e.pos,
            message: e.message,
        })?;
        match forms.as_slice() {
            [term] => parse_term(term, &scope),
            _ => Err(SygusError::Format("expected one term".into())),
        }
    }
}

macro_rules! cases {
    ($($dir:literal / $name:literal),* $(,)?) => {
        [$((
            concat!($dir, "/", $name, ".sl"),
            include_str!(concat!("../corpus/", $dir, "/", $name, ".sl")),
            include_str!(concat!("../corpus/", $dir, "/", $name, ".json")),
        )),*]
    };
}

const FILES: [(&str, &str, &str); 12] = cases![
    "crafted" / "running_example",
    "crafted" / "swap_and_shift",
    "crafted" / "sorted_shift",
    "crafted" / "lockstep_update",
    "svcomp" / "zero_prefix",
    "svcomp" / "copy_prefix",
    "svcomp" / "fill_value",
    "svcomp" / "running_max",
    "sketching" / "contains",
    "sketching" / "equals",
    "sketching" / "contains_all",
    "sketching" / "is_sorted",
];

/// Every bundled case, grouped by category in file order.
pub fn all_cases() -> Vec<GoldenCase> {
    FILES
        .iter()
        .map(|&(path, source, sidecar)| GoldenCase {
            path,
            source,
            golden: serde_json::from_str(sidecar).unwrap_or_else(|e| panic!("bad sidecar for {path}: {e}")),
        })
        .collect()
}

pub fn load_corpus(category: Category) -> Vec<GoldenCase> {
    all_cases().into_iter().filter(|c| c.golden.category == category).collect()
}

/// The case called `name`.
pub fn case(name: &str) -> Option<GoldenCase> {
    all_cases().into_iter().find(|c| c.golden.name == name)
}

/// Directory holding the corpus files in a source checkout.
pub fn corpus_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}
