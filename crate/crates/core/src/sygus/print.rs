//! SyGuS-IF and SMT-LIB text for problems, queries and solutions.

use std::fmt::Write;

use super::SygusError;
use crate::ast::{Expr, Grammar, Problem, Sort, Symbol, SynthFun};

/// SyGuS-IF text for `p`. Quantified constraints are rejected unless
/// `allow_quantifiers` is set, since standard solvers do not accept them.
pub fn print_sygus(p: &Problem, allow_quantifiers: bool) -> Result<String, SygusError> {
    if !allow_quantifiers {
        if let Some(c) = p.constraints.iter().find(|c| !c.is_quantifier_free()) {
            return Err(SygusError::Format(format!("quantified constraint `{c}`")));
        }
    }
    let mut out = String::new();
    writeln!(out, "(set-logic {})", p.logic).unwrap();
    for f in &p.synth_funs {
        out.push_str(&synth_fun_decl(f));
        out.push('\n');
    }
    for (v, s) in &p.declared_vars {
        writeln!(out, "(declare-var {v} {s})").unwrap();
    }
    for c in &p.constraints {
        writeln!(out, "(constraint {c})").unwrap();
    }
    out.push_str("(check-synth)\n");
    Ok(out)
}

fn params(ps: &[(Symbol, Sort)]) -> String {
    let items: Vec<String> = ps.iter().map(|(n, s)| format!("({n} {s})")).collect();
    format!("({})", items.join(" "))
}

pub fn synth_fun_decl(f: &SynthFun) -> String {
    let mut out = format!("(synth-fun {} {} {}", f.name, params(&f.params), f.return_sort);
    if let Some(g) = &f.grammar {
        out.push('\n');
        out.push_str(&grammar_block(g));
    }
    out.push(')');
    out
}

/// Two-part grammar block: nonterminal declarations, then rules.
pub fn grammar_block(g: &Grammar) -> String {
    let decls: Vec<String> = g
        .nonterminals
        .iter()
        .map(|(n, s)| format!("({n} {s})"))
        .collect();
    let mut out = format!("  ({})\n  (", decls.join(" "));
    for (i, (n, s)) in g.nonterminals.iter().enumerate() {
        if i > 0 {
            out.push_str("\n   ");
        }
        let rules: Vec<String> = g.rules(n).iter().map(Expr::to_string).collect();
        write!(out, "({n} {s} ({}))", rules.join(" ")).unwrap();
    }
    out.push(')');
    out
}

pub fn print_define_fun(f: &SynthFun, body: &Expr) -> String {
    format!("(define-fun {} {} {} {body})", f.name, params(&f.params), f.return_sort)
}

/// A satisfiability query for `assertion` under the AUFLIA logic.
pub fn print_smtlib_query(decls: &[(Symbol, Sort)], assertion: &Expr) -> String {
    let mut out = String::from("(set-logic AUFLIA)\n");
    for (v, s) in decls {
        writeln!(out, "(declare-fun {v} () {s})").unwrap();
    }
    writeln!(out, "(assert {assertion})").unwrap();
    out.push_str("(check-sat)\n(get-model)\n");
    out
}
