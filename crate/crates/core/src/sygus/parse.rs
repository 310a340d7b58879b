//! Problems and terms from SyGuS-IF text, with quantified constraints allowed.

use std::collections::BTreeMap;

use super::sexp::{read_all, Pos, Sexp};
use super::SygusError;
use crate::ast::{Expr, Grammar, Op, Problem, Quantifier, Sort, SortError, Symbol, SynthFun, FRESH_PREFIX};

/// Names visible while parsing a term.
#[derive(Debug, Clone, Default)]
pub struct Scope {
    pub vars: BTreeMap<Symbol, Sort>,
    pub funs: BTreeMap<Symbol, (Vec<Sort>, Sort)>,
}

impl Scope {
    pub fn of_problem(p: &Problem) -> Self {
        Scope {
            vars: p.declared_vars.iter().cloned().collect(),
            funs: p
                .synth_funs
                .iter()
                .map(|f| {
                    let params = f.params.iter().map(|(_, s)| *s).collect();
                    (f.name.clone(), (params, f.return_sort))
                })
                .collect(),
        }
    }
}

pub fn parse_problem(text: &str) -> Result<Problem, SygusError> {
    let forms = read_all(text).map_err(|e| SygusError::Parse {
        pos: e.pos,
        message: e.message,
    })?;
    let mut p = Problem::default();
    let mut scope = Scope::default();
    for form in &forms {
        let items = form
            .list()
            .filter(|xs| !xs.is_empty())
            .ok_or_else(|| parse_err(form.pos(), "expected a command"))?;
        let head = items[0]
            .atom()
            .ok_or_else(|| parse_err(form.pos(), "expected a command name"))?;
        match head {
            "set-logic" => {
                expect_len(form, items, 2)?;
                p.logic = symbol(&items[1])?;
            }
            "set-option" | "set-info" => {}
            "declare-var" => {
                expect_len(form, items, 3)?;
                let name = fresh_symbol(&items[1], &scope)?;
                let sort = parse_sort(&items[2])?;
                scope.vars.insert(name.clone(), sort);
                p.declared_vars.push((name, sort));
            }
            "synth-fun" => {
                let f = parse_synth_fun(form, items, &scope)?;
                let params = f.params.iter().map(|(_, s)| *s).collect();
                scope.funs.insert(f.name.clone(), (params, f.return_sort));
                p.synth_funs.push(f);
            }
            "constraint" => {
                expect_len(form, items, 2)?;
                let c = parse_term(&items[1], &scope)?;
                if c.sort() != Sort::Bool {
                    return Err(parse_err(items[1].pos(), "constraint is not Bool"));
                }
                p.constraints.push(c);
            }
            "check-synth" => {}
            other => {
                return Err(SygusError::Unsupported {
                    pos: form.pos(),
                    message: format!("command `{other}`"),
                })
            }
        }
    }
    Ok(p)
}

fn parse_synth_fun(form: &Sexp, items: &[Sexp], scope: &Scope) -> Result<SynthFun, SygusError> {
    if items.len() != 4 && items.len() != 5 && items.len() != 6 {
        return Err(parse_err(form.pos(), "malformed synth-fun"));
    }
    let name = fresh_symbol(&items[1], scope)?;
    let params = parse_params(&items[2])?;
    let return_sort = parse_sort(&items[3])?;
    let mut f = SynthFun::new(name, params, return_sort);
    if items.len() > 4 {
        let grammar = parse_grammar(&items[4..], &f)?;
        if grammar.start_sort() != Some(return_sort) {
            return Err(parse_err(items[4].pos(), "grammar start symbol has the wrong sort"));
        }
        f.grammar = Some(grammar);
    }
    Ok(f)
}

/// `((x Int) ...)`; names must be distinct.
pub fn parse_params(sx: &Sexp) -> Result<Vec<(Symbol, Sort)>, SygusError> {
    let items = sx
        .list()
        .ok_or_else(|| parse_err(sx.pos(), "expected a parameter list"))?;
    let mut out: Vec<(Symbol, Sort)> = Vec::new();
    for it in items {
        let pair = it
            .list()
            .filter(|xs| xs.len() == 2)
            .ok_or_else(|| parse_err(it.pos(), "expected `(name sort)`"))?;
        let name = symbol(&pair[0])?;
        check_reserved(&name, pair[0].pos())?;
        if out.iter().any(|(n, _)| *n == name) {
            return Err(parse_err(pair[0].pos(), format!("duplicate parameter `{name}`")));
        }
        out.push((name, parse_sort(&pair[1])?));
    }
    Ok(out)
}

/// Either the two-part form `((N S)*) ((N S (rule+))*)` or the single
/// rule-list form.
fn parse_grammar(parts: &[Sexp], f: &SynthFun) -> Result<Grammar, SygusError> {
    let rules_sx = parts.last().unwrap();
    let rules = rules_sx
        .list()
        .ok_or_else(|| parse_err(rules_sx.pos(), "expected grammar rules"))?;
    let mut decls = Vec::new();
    for r in rules {
        let items = r
            .list()
            .filter(|xs| xs.len() == 3)
            .ok_or_else(|| parse_err(r.pos(), "expected `(N Sort (rules))`"))?;
        let nt = symbol(&items[0])?;
        check_reserved(&nt, items[0].pos())?;
        if f.params.iter().any(|(p, _)| *p == nt) {
            return Err(parse_err(items[0].pos(), format!("nonterminal `{nt}` shadows a parameter")));
        }
        decls.push((nt, parse_sort(&items[1])?));
    }
    if parts.len() == 2 {
        let declared = parts[0]
            .list()
            .ok_or_else(|| parse_err(parts[0].pos(), "expected nonterminal declarations"))?;
        let names: Vec<Symbol> = declared
            .iter()
            .map(|d| d.head().map(str::to_string).ok_or_else(|| parse_err(d.pos(), "bad nonterminal")))
            .collect::<Result<_, _>>()?;
        if names != decls.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>() {
            return Err(parse_err(parts[0].pos(), "nonterminal declarations do not match rules"));
        }
    }
    let mut scope = Scope::default();
    scope.vars.extend(f.params.iter().cloned());
    scope.vars.extend(decls.iter().cloned());
    let mut g = Grammar::new(decls.clone());
    for (r, (nt, sort)) in rules.iter().zip(&decls) {
        let prods = r.list().unwrap()[2]
            .list()
            .ok_or_else(|| parse_err(r.pos(), "expected a list of productions"))?;
        for prod in prods {
            if matches!(prod.head(), Some("Constant" | "Variable")) {
                return Err(SygusError::Unsupported {
                    pos: prod.pos(),
                    message: "`Constant`/`Variable` productions".into(),
                });
            }
            let e = parse_term(prod, &scope)?;
            if e.sort() != *sort {
                return Err(parse_err(prod.pos(), format!("production for `{nt}` has sort {}", e.sort())));
            }
            g.add(nt, e);
        }
    }
    Ok(g)
}

pub fn parse_sort(sx: &Sexp) -> Result<Sort, SygusError> {
    match sx {
        Sexp::Atom(a, _) if a == "Int" => Ok(Sort::Int),
        Sexp::Atom(a, _) if a == "Bool" => Ok(Sort::Bool),
        Sexp::List(xs, _)
            if xs.len() == 3
                && xs[0].atom() == Some("Array")
                && xs[1].atom() == Some("Int")
                && xs[2].atom() == Some("Int") =>
        {
            Ok(Sort::Array)
        }
        _ => Err(SygusError::Unsupported {
            pos: sx.pos(),
            message: format!("sort `{sx}`"),
        }),
    }
}

pub fn parse_term(sx: &Sexp, scope: &Scope) -> Result<Expr, SygusError> {
    TermParser {
        scope,
        locals: Vec::new(),
    }
    .term(sx)
}

enum Local {
    Binder(Symbol),
    Let(Symbol, Expr),
}

struct TermParser<'a> {
    scope: &'a Scope,
    locals: Vec<Local>,
}

impl TermParser<'_> {
    fn term(&mut self, sx: &Sexp) -> Result<Expr, SygusError> {
        match sx {
            Sexp::Atom(a, pos) => self.atom(a, *pos),
            Sexp::List(items, pos) => {
                let Some(head) = items.first().and_then(Sexp::atom) else {
                    return Err(parse_err(*pos, format!("unexpected term `{sx}`")));
                };
                let args = &items[1..];
                let e = match head {
                    "forall" | "exists" => {
                        let kind = if head == "forall" {
                            Quantifier::Forall
                        } else {
                            Quantifier::Exists
                        };
                        return self.quantifier(kind, args, *pos);
                    }
                    "let" => return self.let_term(args, *pos),
                    "-" if args.len() == 1 => {
                        if let Some(n) = args[0].atom().and_then(numeral) {
                            return n
                                .map(|v| Expr::Int(-v))
                                .ok_or_else(|| unsupported(*pos, "integer literal out of range"));
                        }
                        Expr::App(Op::Neg, vec![self.term(&args[0])?])
                    }
                    "-" if args.len() > 2 => {
                        let mut xs = self.terms(args)?.into_iter();
                        let first = xs.next().unwrap();
                        xs.fold(first, Expr::sub)
                    }
                    "*" => {
                        let xs = self.terms(args)?;
                        match xs.as_slice() {
                            [Expr::Int(k), t] | [t, Expr::Int(k)] => Expr::mul_const(*k, t.clone()),
                            [_, _] => return Err(unsupported(*pos, format!("nonlinear term `{sx}`"))),
                            _ => return Err(parse_err(*pos, "`*` takes two arguments")),
                        }
                    }
                    "select" if args.len() == 2 => {
                        Expr::select(self.term(&args[0])?, self.term(&args[1])?)
                    }
                    "store" if args.len() == 3 => Expr::store(
                        self.term(&args[0])?,
                        self.term(&args[1])?,
                        self.term(&args[2])?,
                    ),
                    _ => match op_of(head) {
                        Some(op) => Expr::App(op, self.terms(args)?),
                        None => {
                            let Some((params, ret)) = self.scope.funs.get(head) else {
                                return Err(parse_err(*pos, format!("unknown function `{head}`")));
                            };
                            if params.len() != args.len() {
                                return Err(parse_err(
                                    *pos,
                                    format!("`{head}` expects {} arguments", params.len()),
                                ));
                            }
                            let xs = self.terms(args)?;
                            for (x, s) in xs.iter().zip(params) {
                                if x.sort() != *s {
                                    return Err(parse_err(*pos, format!("argument `{x}` of `{head}` is not {s}")));
                                }
                            }
                            Expr::synth_app(head, *ret, xs)
                        }
                    },
                };
                check(e, *pos)
            }
        }
    }

    fn terms(&mut self, xs: &[Sexp]) -> Result<Vec<Expr>, SygusError> {
        xs.iter().map(|x| self.term(x)).collect()
    }

    fn atom(&self, a: &str, pos: Pos) -> Result<Expr, SygusError> {
        if let Some(n) = numeral(a) {
            return n
                .map(Expr::Int)
                .ok_or_else(|| unsupported(pos, "integer literal out of range"));
        }
        match a {
            "true" => return Ok(Expr::Bool(true)),
            "false" => return Ok(Expr::Bool(false)),
            _ => {}
        }
        for l in self.locals.iter().rev() {
            match l {
                Local::Binder(b) if b == a => return Ok(Expr::int_var(a)),
                Local::Let(n, e) if n == a => return Ok(e.clone()),
                _ => {}
            }
        }
        if let Some(s) = self.scope.vars.get(a) {
            return Ok(Expr::var(a, *s));
        }
        if let Some((params, ret)) = self.scope.funs.get(a) {
            if params.is_empty() {
                return Ok(Expr::synth_app(a, *ret, Vec::new()));
            }
        }
        Err(parse_err(pos, format!("unknown symbol `{a}`")))
    }

    fn quantifier(&mut self, kind: Quantifier, args: &[Sexp], pos: Pos) -> Result<Expr, SygusError> {
        let [binders, body] = args else {
            return Err(parse_err(pos, "quantifier takes a binder list and a body"));
        };
        let bs = binders
            .list()
            .filter(|xs| !xs.is_empty())
            .ok_or_else(|| parse_err(binders.pos(), "expected a binder list"))?;
        let mut names = Vec::new();
        for b in bs {
            let pair = b
                .list()
                .filter(|xs| xs.len() == 2)
                .ok_or_else(|| parse_err(b.pos(), "expected `(name Int)`"))?;
            let name = symbol(&pair[0])?;
            check_reserved(&name, pair[0].pos())?;
            if parse_sort(&pair[1])? != Sort::Int {
                return Err(unsupported(pair[1].pos(), "quantified variables must be Int"));
            }
            names.push(name);
        }
        let len = self.locals.len();
        self.locals.extend(names.iter().cloned().map(Local::Binder));
        let body = self.term(body);
        self.locals.truncate(len);
        let e = Expr::quant(kind, names, body?);
        check(e, pos)
    }

    fn let_term(&mut self, args: &[Sexp], pos: Pos) -> Result<Expr, SygusError> {
        let [bindings, body] = args else {
            return Err(parse_err(pos, "let takes a binding list and a body"));
        };
        let bs = bindings
            .list()
            .ok_or_else(|| parse_err(bindings.pos(), "expected a binding list"))?;
        let mut bound = Vec::new();
        for b in bs {
            let pair = b
                .list()
                .filter(|xs| xs.len() == 2)
                .ok_or_else(|| parse_err(b.pos(), "expected `(name term)`"))?;
            bound.push(Local::Let(symbol(&pair[0])?, self.term(&pair[1])?));
        }
        let len = self.locals.len();
        self.locals.extend(bound);
        let body = self.term(body);
        self.locals.truncate(len);
        body
    }
}

fn op_of(head: &str) -> Option<Op> {
    Some(match head {
        "+" => Op::Add,
        "-" => Op::Sub,
        "<=" => Op::Le,
        "<" => Op::Lt,
        ">=" => Op::Ge,
        ">" => Op::Gt,
        "=" => Op::Eq,
        "distinct" => Op::Neq,
        "and" => Op::And,
        "or" => Op::Or,
        "not" => Op::Not,
        "=>" => Op::Implies,
        "ite" => Op::Ite,
        _ => return None,
    })
}

/// `Some(None)` for a numeral that does not fit in an `i64`.
fn numeral(a: &str) -> Option<Option<i64>> {
    if !a.is_empty() && a.bytes().all(|b| b.is_ascii_digit()) {
        Some(a.parse().ok())
    } else {
        None
    }
}

fn check(e: Expr, pos: Pos) -> Result<Expr, SygusError> {
    match e.typecheck() {
        Ok(_) => Ok(e),
        Err(SortError::NonLinear(m)) => Err(unsupported(pos, format!("nonlinear term `{m}`"))),
        Err(err) => Err(parse_err(pos, err.to_string())),
    }
}

fn symbol(sx: &Sexp) -> Result<Symbol, SygusError> {
    match sx {
        Sexp::Atom(a, _) if numeral(a).is_none() && !a.starts_with('"') => Ok(a.clone()),
        _ => Err(parse_err(sx.pos(), format!("expected a symbol, found `{sx}`"))),
    }
}

fn fresh_symbol(sx: &Sexp, scope: &Scope) -> Result<Symbol, SygusError> {
    let name = symbol(sx)?;
    check_reserved(&name, sx.pos())?;
    if scope.vars.contains_key(&name) || scope.funs.contains_key(&name) {
        return Err(parse_err(sx.pos(), format!("`{name}` is already declared")));
    }
    Ok(name)
}

fn check_reserved(name: &str, pos: Pos) -> Result<(), SygusError> {
    if name.starts_with(FRESH_PREFIX) {
        return Err(parse_err(pos, format!("symbol `{name}` uses the reserved prefix `{FRESH_PREFIX}`")));
    }
    Ok(())
}

fn expect_len(form: &Sexp, items: &[Sexp], n: usize) -> Result<(), SygusError> {
    if items.len() != n {
        return Err(parse_err(form.pos(), format!("malformed `{}`", items[0])));
    }
    Ok(())
}

fn parse_err(pos: Pos, message: impl Into<String>) -> SygusError {
    SygusError::Parse {
        pos,
        message: message.into(),
    }
}

fn unsupported(pos: Pos, message: impl Into<String>) -> SygusError {
    SygusError::Unsupported {
        pos,
        message: message.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_declarations_and_constraints() {
        let p = parse_problem("(declare-var c Int)(constraint (> c 0))(check-synth)").unwrap();
        assert_eq!(p.declared_vars, vec![("c".to_string(), Sort::Int)]);
        assert_eq!(p.constraints, vec![Expr::gt(Expr::int_var("c"), Expr::int(0))]);
    }

    #[test]
    fn keeps_quantifiers() {
        let p = parse_problem(
            "(declare-var A (Array Int Int))\n(constraint (forall ((i Int)) (>= (select A i) 0)))",
        )
        .unwrap();
        let i = Expr::int_var("i");
        let want = Expr::forall("i", Expr::ge(Expr::select(Expr::array_var("A"), i), Expr::int(0)));
        assert_eq!(p.constraints[0], want);
    }

    #[test]
    fn rejects_nonlinear_multiplication() {
        let err = parse_problem("(declare-var x Int)(declare-var y Int)(constraint (= (* x y) 0))").unwrap_err();
        assert!(matches!(err, SygusError::Unsupported { .. }), "{err}");
        let ok = parse_problem("(declare-var x Int)(constraint (= (* x 3) 0))").unwrap();
        assert_eq!(
            ok.constraints[0],
            Expr::eq(Expr::mul_const(3, Expr::int_var("x")), Expr::int(0))
        );
    }

    #[test]
    fn reports_positions() {
        let err = parse_problem("(declare-var x Int)\n(constraint (> y 0))").unwrap_err();
        match err {
            SygusError::Parse { pos, .. } => assert_eq!(pos, Pos { line: 2, col: 16 }),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn rejects_reserved_names_and_other_sorts() {
        assert!(parse_problem("(declare-var z!0 Int)").is_err());
        let err = parse_problem("(declare-var r Real)").unwrap_err();
        assert!(matches!(err, SygusError::Unsupported { .. }));
    }

    #[test]
    fn parses_grammars_in_both_layouts() {
        let v2 = "(synth-fun f ((x Int)) Int ((I Int)) ((I Int (0 x (+ I I)))))";
        let v1 = "(synth-fun f ((x Int)) Int ((I Int (0 x (+ I I)))))";
        let a = parse_problem(v2).unwrap();
        let b = parse_problem(v1).unwrap();
        assert_eq!(a, b);
        let g = a.synth_funs[0].grammar.as_ref().unwrap();
        assert_eq!(g.rules("I").len(), 3);
        assert!(g.validate().is_ok());
    }

    #[test]
    fn nullary_functions_apply_without_parentheses() {
        let p = parse_problem("(synth-fun f () Int)(constraint (= f 0))").unwrap();
        assert_eq!(
            p.constraints[0],
            Expr::eq(Expr::synth_app("f", Sort::Int, vec![]), Expr::int(0))
        );
    }
}
