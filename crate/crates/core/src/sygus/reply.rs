//! Classification of solver output.

use std::collections::BTreeMap;

use super::parse::{parse_params, parse_sort, parse_term, Scope};
use super::sexp::{read_all, Sexp};
use crate::ast::{substitute_all, Expr, Problem, Symbol, SynthFun};
use crate::eval::{ArrayValue, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedReply {
    DefineFuns(Vec<(SynthFun, Expr)>),
    Sat(BTreeMap<Symbol, Value>),
    Unsat,
    Unknown,
    Malformed(String),
}

/// Classify `text` against the declarations of `expected`. Never fails;
/// anything unrecognized becomes `Malformed`.
pub fn parse_reply(text: &str, expected: &Problem) -> ParsedReply {
    let malformed = || ParsedReply::Malformed(text.to_string());
    let Ok(forms) = read_all(text) else {
        return malformed();
    };
    let Some(first) = forms.first() else {
        return malformed();
    };
    match first.atom() {
        Some("unsat" | "infeasible") => return ParsedReply::Unsat,
        Some("unknown" | "timeout") => return ParsedReply::Unknown,
        Some("sat") => {
            return match forms.get(1) {
                None => ParsedReply::Sat(BTreeMap::new()),
                Some(m) => parse_model(m, expected).map(ParsedReply::Sat).unwrap_or_else(malformed),
            }
        }
        _ => {}
    }
    // Solutions may come bare or wrapped in one list.
    let defs: Vec<&Sexp> = if first.head() == Some("define-fun") {
        forms.iter().collect()
    } else if forms.len() == 1 && first.list().is_some_and(|xs| !xs.is_empty()) {
        first.list().unwrap().iter().collect()
    } else {
        return malformed();
    };
    let mut out = Vec::new();
    for d in defs {
        match parse_solution(d, expected) {
            Some(s) => out.push(s),
            None => return malformed(),
        }
    }
    ParsedReply::DefineFuns(out)
}

fn parse_solution(d: &Sexp, expected: &Problem) -> Option<(SynthFun, Expr)> {
    let items = d.list().filter(|xs| xs.len() == 5 && xs[0].atom() == Some("define-fun"))?;
    let f = expected.synth_fun(items[1].atom()?)?;
    let params = parse_params(&items[2]).ok()?;
    if parse_sort(&items[3]).ok()? != f.return_sort
        || params.iter().map(|(_, s)| *s).ne(f.params.iter().map(|(_, s)| *s))
    {
        return None;
    }
    let mut scope = Scope::default();
    scope.vars.extend(params.iter().cloned());
    let body = parse_term(&items[4], &scope).ok()?;
    if body.sort() != f.return_sort || !body.is_quantifier_free() && body.contains_synth_app() {
        return None;
    }
    let renaming: BTreeMap<Symbol, Expr> = params
        .iter()
        .zip(&f.params)
        .filter(|((a, _), (b, _))| a != b)
        .map(|((a, _), (b, s))| (a.clone(), Expr::var(b.clone(), *s)))
        .collect();
    Some((f.clone(), substitute_all(&body, &renaming)))
}

/// `(model (define-fun x () S v) ...)` or the same entries in a bare list.
fn parse_model(m: &Sexp, expected: &Problem) -> Option<BTreeMap<Symbol, Value>> {
    let mut entries = m.list()?;
    if entries.first().and_then(Sexp::atom) == Some("model") {
        entries = &entries[1..];
    }
    let mut defs: BTreeMap<&str, &[Sexp]> = BTreeMap::new();
    for e in entries {
        let items = e.list().filter(|xs| xs.len() == 5 && xs[0].atom() == Some("define-fun"))?;
        defs.insert(items[1].atom()?, items);
    }
    let mut out = BTreeMap::new();
    for (v, sort) in &expected.declared_vars {
        let Some(items) = defs.get(v.as_str()) else {
            continue;
        };
        if parse_sort(&items[3]).ok()? != *sort {
            return None;
        }
        out.insert(v.clone(), model_value(&items[4], &defs)?);
    }
    Some(out)
}

fn model_value(sx: &Sexp, defs: &BTreeMap<&str, &[Sexp]>) -> Option<Value> {
    match sx.atom() {
        Some("true") => return Some(Value::Bool(true)),
        Some("false") => return Some(Value::Bool(false)),
        _ => {}
    }
    if let Some(v) = int_literal(sx) {
        return Some(Value::Int(v));
    }
    array_value(sx, defs).map(Value::array)
}

fn int_literal(sx: &Sexp) -> Option<i64> {
    match sx {
        Sexp::Atom(a, _) if a.bytes().all(|b| b.is_ascii_digit()) => a.parse().ok(),
        Sexp::List(xs, _) if xs.len() == 2 && xs[0].atom() == Some("-") => {
            int_literal(&xs[1]).map(|v| -v)
        }
        _ => None,
    }
}

/// Store chains over a constant array, a `lambda` over an `ite` chain, or an
/// `as-array` reference to such a function.
fn array_value(sx: &Sexp, defs: &BTreeMap<&str, &[Sexp]>) -> Option<ArrayValue> {
    let xs = sx.list()?;
    match xs.first()? {
        Sexp::List(inner, _)
            if xs.len() == 2 && inner.len() == 3 && inner[0].atom() == Some("as") && inner[1].atom() == Some("const") =>
        {
            Some(ArrayValue::constant(int_literal(&xs[1])?))
        }
        Sexp::Atom(a, _) if a == "store" && xs.len() == 4 => {
            let base = array_value(&xs[1], defs)?;
            Some(base.with(int_literal(&xs[2])?, int_literal(&xs[3])?))
        }
        Sexp::Atom(a, _) if a == "lambda" && xs.len() == 3 => {
            let binder = xs[1].list()?.first()?.head()?;
            ite_chain(binder, &xs[2])
        }
        Sexp::Atom(a, _) if a == "_" && xs.len() == 3 && xs[1].atom() == Some("as-array") => {
            let items = defs.get(xs[2].atom()?)?;
            let binder = items[2].list()?.first()?.head()?;
            ite_chain(binder, &items[4])
        }
        _ => None,
    }
}

fn ite_chain(x: &str, body: &Sexp) -> Option<ArrayValue> {
    if let Some(v) = int_literal(body) {
        return Some(ArrayValue::constant(v));
    }
    let xs = body.list()?;
    if xs.len() != 4 || xs[0].atom() != Some("ite") {
        return None;
    }
    let cond = xs[1].list()?;
    if cond.len() != 3 || cond[0].atom() != Some("=") {
        return None;
    }
    let index = if cond[1].atom() == Some(x) {
        int_literal(&cond[2])?
    } else if cond[2].atom() == Some(x) {
        int_literal(&cond[1])?
    } else {
        return None;
    };
    let rest = ite_chain(x, &xs[3])?;
    let mut out = rest.clone();
    // earlier branches take precedence
    out.set_in_place(index, int_literal(&xs[2])?);
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Sort;
    use crate::sygus::parse_problem;

    fn problem() -> Problem {
        parse_problem(
            "(synth-fun inv ((c Int) (A (Array Int Int))) Bool)\n(declare-var c Int)\n(declare-var A (Array Int Int))",
        )
        .unwrap()
    }

    #[test]
    fn classifies_simple_answers() {
        let p = problem();
        assert_eq!(parse_reply("unsat\n", &p), ParsedReply::Unsat);
        assert_eq!(parse_reply("infeasible", &p), ParsedReply::Unsat);
        assert_eq!(parse_reply("unknown", &p), ParsedReply::Unknown);
        assert!(matches!(parse_reply("\u{1}\u{2}garbage((", &p), ParsedReply::Malformed(_)));
        assert!(matches!(parse_reply("", &p), ParsedReply::Malformed(_)));
    }

    #[test]
    fn parses_solutions() {
        let p = parse_problem("(synth-fun inv ((c Int)) Bool)").unwrap();
        let r = parse_reply("(define-fun inv ((c Int)) Bool (> c 0))", &p);
        let ParsedReply::DefineFuns(defs) = r else { panic!("{r:?}") };
        assert_eq!(defs[0].1, Expr::gt(Expr::int_var("c"), Expr::int(0)));
        let wrapped = parse_reply("(\n(define-fun inv ((x Int)) Bool (> x 0))\n)", &p);
        assert_eq!(wrapped, ParsedReply::DefineFuns(defs));
        let wrong_sort = parse_reply("(define-fun inv ((c Int)) Int c)", &p);
        assert!(matches!(wrong_sort, ParsedReply::Malformed(_)));
    }

    #[test]
    fn parses_array_models() {
        let p = problem();
        let text = "sat\n(\n  (define-fun c () Int (- 2))\n  (define-fun A () (Array Int Int) (store ((as const (Array Int Int)) 0) 1 (- 1)))\n)";
        let ParsedReply::Sat(m) = parse_reply(text, &p) else { panic!() };
        assert_eq!(m["c"], Value::Int(-2));
        let Value::Array(a) = &m["A"] else { panic!() };
        assert_eq!((a.get(0), a.get(1), a.get(7)), (0, -1, 0));
        let lam = "sat\n((define-fun A () (Array Int Int) (lambda ((x Int)) (ite (= x 2) 5 (ite (= x 0) 1 3)))))";
        let ParsedReply::Sat(m) = parse_reply(lam, &p) else { panic!() };
        let Value::Array(a) = &m["A"] else { panic!() };
        assert_eq!((a.get(0), a.get(2), a.get(9)), (1, 5, 3));
        assert_eq!(p.var_sort("A"), Some(Sort::Array));
    }
}
