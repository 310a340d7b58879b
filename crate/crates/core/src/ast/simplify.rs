//! Constant folding and identity elimination.
//!
//! The rewrite set is deliberately small: folding of arithmetic and
//! comparisons over literals (and over syntactically identical operands),
//! unit/zero elimination for the connectives, flattening of nested `and`/`or`,
//! and double-negation removal. Every rule preserves the truth value under all
//! valuations, and the result is a fixed point of `simplify`.

use super::expr::{Expr, Op};

pub fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Int(_) | Expr::Bool(_) | Expr::Var(..) => e.clone(),
        Expr::App(op, args) => {
            let args: Vec<Expr> = args.iter().map(simplify).collect();
            mk_app(*op, args)
        }
        Expr::Select(a, i) => Expr::Select(Box::new(simplify(a)), Box::new(simplify(i))),
        Expr::Store(a, i, v) => Expr::Store(
            Box::new(simplify(a)),
            Box::new(simplify(i)),
            Box::new(simplify(v)),
        ),
        Expr::Quant(k, bs, body) => {
            let body = simplify(body);
            match body {
                Expr::Bool(b) => Expr::Bool(b),
                body => Expr::Quant(*k, bs.clone(), Box::new(body)),
            }
        }
        Expr::SynthApp(n, s, args) => Expr::SynthApp(n.clone(), *s, args.iter().map(simplify).collect()),
    }
}

/// Build `op(args)` from already-simplified arguments, returning a simplified node.
pub fn mk_app(op: Op, args: Vec<Expr>) -> Expr {
    match op {
        Op::Add => mk_add(args),
        Op::Sub => {
            let [a, b]: [Expr; 2] = args.try_into().expect("binary -");
            match (&a, &b) {
                (Expr::Int(x), Expr::Int(y)) => Expr::Int(x.wrapping_sub(*y)),
                (_, Expr::Int(0)) => a,
                _ => Expr::App(Op::Sub, vec![a, b]),
            }
        }
        Op::Neg => {
            let [a]: [Expr; 1] = args.try_into().expect("unary -");
            match a {
                Expr::Int(x) => Expr::Int(x.wrapping_neg()),
                Expr::App(Op::Neg, mut inner) => inner.pop().unwrap(),
                a => Expr::App(Op::Neg, vec![a]),
            }
        }
        Op::MulConst => {
            let [k, t]: [Expr; 2] = args.try_into().expect("binary *");
            match (&k, &t) {
                (Expr::Int(x), Expr::Int(y)) => Expr::Int(x.wrapping_mul(*y)),
                (Expr::Int(0), _) => Expr::Int(0),
                (Expr::Int(1), _) => t,
                _ => Expr::App(Op::MulConst, vec![k, t]),
            }
        }
        Op::Le | Op::Lt | Op::Ge | Op::Gt => {
            let [a, b]: [Expr; 2] = args.try_into().expect("binary comparison");
            if let (Expr::Int(x), Expr::Int(y)) = (&a, &b) {
                return Expr::Bool(match op {
                    Op::Le => x <= y,
                    Op::Lt => x < y,
                    Op::Ge => x >= y,
                    _ => x > y,
                });
            }
            if a == b {
                return Expr::Bool(matches!(op, Op::Le | Op::Ge));
            }
            Expr::App(op, vec![a, b])
        }
        Op::Eq | Op::Neq => {
            let [a, b]: [Expr; 2] = args.try_into().expect("binary equality");
            let same = match (&a, &b) {
                (Expr::Int(x), Expr::Int(y)) => Some(x == y),
                (Expr::Bool(x), Expr::Bool(y)) => Some(x == y),
                _ if a == b => Some(true),
                _ => None,
            };
            match same {
                Some(s) => Expr::Bool(if op == Op::Eq { s } else { !s }),
                None => Expr::App(op, vec![a, b]),
            }
        }
        Op::And => mk_junction(Op::And, args),
        Op::Or => mk_junction(Op::Or, args),
        Op::Not => {
            let [a]: [Expr; 1] = args.try_into().expect("unary not");
            mk_not(a)
        }
        Op::Implies => {
            let [a, b]: [Expr; 2] = args.try_into().expect("binary =>");
            match (&a, &b) {
                (Expr::Bool(true), _) => b,
                (Expr::Bool(false), _) | (_, Expr::Bool(true)) => Expr::Bool(true),
                (_, Expr::Bool(false)) => mk_not(a),
                _ => Expr::App(Op::Implies, vec![a, b]),
            }
        }
        Op::Ite => {
            let [c, t, e]: [Expr; 3] = args.try_into().expect("ternary ite");
            match c {
                Expr::Bool(true) => t,
                Expr::Bool(false) => e,
                _ if t == e => t,
                c =>Expr::App(Op::Ite, vec![c, t, e]),
            }
        }
    }
}

fn mk_add(args: Vec<Expr>) -> Expr {
    let mut konst: i64 = 0;
    let mut rest = Vec::with_capacity(args.len());
    for a in args {
        match a {
            Expr::Int(v) => konst = konst.wrapping_add(v),
            a => rest.push(a),
        }
    }
    if konst != 0 || rest.is_empty() {
        rest.push(Expr::Int(konst));
    }
    if rest.len() == 1 {
        rest.pop().unwrap()
    } else {
        Expr::App(Op::Add, rest)
    }
}

fn mk_junction(op: Op, args: Vec<Expr>) -> Expr {
    // unit: true for and, false for or; the absorbing element is its negation
    let unit = op == Op::And;
    let mut out = Vec::with_capacity(args.len());
    for a in args {
        match a {
            Expr::Bool(b) if b == unit => {}
            Expr::Bool(b) => return Expr::Bool(b),
            Expr::App(inner, xs) if inner == op => out.extend(xs),
            a => out.push(a),
        }
    }
    match out.len() {
        0 => Expr::Bool(unit),
        1 => out.pop().unwrap(),
        _ => Expr::App(op, out),
    }
}

fn mk_not(a: Expr) -> Expr {
    match a {
        Expr::Bool(b) => Expr::Bool(!b),
        Expr::App(Op::Not, mut inner) => inner.pop().unwrap(),
        a => Expr::App(Op::Not, vec![a]),
    }
}
