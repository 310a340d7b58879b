//! Matching predicates and the syntactic reintroduction of quantifiers.
//!
//! Two predicates match when they differ only in integer literals, the
//! differing array-read indices all shift by one common amount `d`, and any
//! other differing literal shifts by `d` as well. Replacing each differing
//! literal `c` by `z + (c - base)` then yields one template `phi(z)` with
//! `phi(base) = phi1` and `phi(base + d) = phi2`, where `base` is the
//! smallest replaced read index of `phi1`. Matching is decided up to
//! renaming of bound variables.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::ast::{all_symbols, mk_app, substitute, Expr, FreshNames, Op, Quantifier, Symbol};

/// Placeholder for the template variable; never produced by the parser or
/// by `FreshNames`.
const HOLE: &str = "z!_";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchWitness {
    pub fresh_var: Symbol,
    /// Array and offset of each replaced read, in template order.
    pub read_offsets: Vec<(String, i64)>,
    /// Offsets of replaced literals outside array reads.
    pub const_offsets: Vec<i64>,
    /// The values of `fresh_var` that reproduce each matched predicate.
    pub base_indices: BTreeSet<i64>,
    /// The shared predicate over `fresh_var`.
    pub template: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum DiffKind {
    Read(String),
    Const,
}

#[derive(Debug, Clone)]
struct Diff {
    path: Vec<usize>,
    c1: i64,
    c2: i64,
    kind: DiffKind,
}

#[derive(Default)]
struct Scan {
    diffs: Vec<Diff>,
    /// Literal read indices equal on both sides.
    same_reads: Vec<(Vec<usize>, i64, String)>,
}

/// Bound-variable correspondence between the two sides of a comparison.
type Env = Vec<(Symbol, Symbol)>;

fn same_var(env: &Env, a: &str, b: &str) -> bool {
    let ia = env.iter().rposition(|(x, _)| x == a);
    let ib = env.iter().rposition(|(_, y)| y == b);
    match (ia, ib) {
        (None, None) => a == b,
        (Some(i), Some(j)) => i == j,
        _ => false,
    }
}

fn array_key(a: &Expr) -> String {
    a.to_string()
}

fn scan(a: &Expr, b: &Expr, path: &mut Vec<usize>, env: &mut Env, in_index: bool, out: &mut Scan) -> bool {
    match (a, b) {
        (Expr::Int(x), Expr::Int(y)) => {
            if x == y {
                true
            } else if in_index {
                false
            } else {
                out.diffs.push(Diff {
                    path: path.clone(),
                    c1: *x,
                    c2: *y,
                    kind: DiffKind::Const,
                });
                true
            }
        }
        (Expr::Bool(x), Expr::Bool(y)) => x == y,
        (Expr::Var(x, s), Expr::Var(y, t)) => s == t && same_var(env, x, y),
        (Expr::App(o1, xs), Expr::App(o2, ys)) => {
            if o1 != o2 || xs.len() != ys.len() {
                return false;
            }
            if *o1 == Op::MulConst && xs[0] != ys[0] {
                return false;
            }
            scan_children(xs.iter().zip(ys), path, env, in_index, out)
        }
        (Expr::SynthApp(f, s, xs), Expr::SynthApp(g, t, ys)) => {
            f == g && s == t && xs.len() == ys.len() && scan_children(xs.iter().zip(ys), path, env, in_index, out)
        }
        (Expr::Select(a1, i1), Expr::Select(a2, i2)) => {
            path.push(0);
            let ok = scan(a1, a2, path, env, in_index, out);
            path.pop();
            if !ok {
                return false;
            }
            path.push(1);
            let ok = match (i1.as_ref(), i2.as_ref()) {
                (Expr::Int(x), Expr::Int(y)) if !in_index => {
                    if x == y {
                        out.same_reads.push((path.clone(), *x, array_key(a1)));
                    } else {
                        out.diffs.push(Diff {
                            path: path.clone(),
                            c1: *x,
                            c2: *y,
                            kind: DiffKind::Read(array_key(a1)),
                        });
                    }
                    true
                }
                _ => scan(i1, i2, path, env, true, out),
            };
            path.pop();
            ok
        }
        (Expr::Store(a1, i1, v1), Expr::Store(a2, i2, v2)) => {
            let parts = [(a1, a2, in_index), (i1, i2, true), (v1, v2, in_index)];
            parts.iter().enumerate().all(|(n, (x, y, idx))| {
                path.push(n);
                let ok = scan(x, y, path, env, *idx, out);
                path.pop();
                ok
            })
        }
        (Expr::Quant(k1, bs1, body1), Expr::Quant(k2, bs2, body2)) => {
            if k1 != k2 || bs1.len() != bs2.len() {
                return false;
            }
            let len = env.len();
            env.extend(bs1.iter().cloned().zip(bs2.iter().cloned()));
            path.push(0);
            let ok = scan(body1, body2, path, env, in_index, out);
            path.pop();
            env.truncate(len);
            ok
        }
        _ => false,
    }
}

fn scan_children<'a>(
    pairs: impl Iterator<Item = (&'a Expr, &'a Expr)>,
    path: &mut Vec<usize>,
    env: &mut Env,
    in_index: bool,
    out: &mut Scan,
) -> bool {
    for (n, (x, y)) in pairs.enumerate() {
        path.push(n);
        let ok = scan(x, y, path, env, in_index, out);
        path.pop();
        if !ok {
            return false;
        }
    }
    true
}

fn z_term(offset: i64) -> Expr {
    mk_app(Op::Add, vec![Expr::int_var(HOLE), Expr::Int(offset)])
}

/// Offset `k` if `e` is `z` or `z + k`.
fn z_offset(e: &Expr) -> Option<i64> {
    match e {
        Expr::Var(n, _) if n == HOLE => Some(0),
        Expr::App(Op::Add, xs) if xs.len() == 2 => match (&xs[0], &xs[1]) {
            (Expr::Var(n, _), Expr::Int(k)) if n == HOLE => Some(*k),
            _ => None,
        },
        _ => None,
    }
}

fn replace_at(e: &Expr, path: &mut Vec<usize>, repl: &BTreeMap<Vec<usize>, Expr>) -> Expr {
    if let Some(r) = repl.get(path.as_slice()) {
        return r.clone();
    }
    if !repl.keys().any(|k| k.starts_with(path)) {
        return e.clone();
    }
    let mut n = 0;
    e.map_children::<()>(|c| {
        path.push(n);
        let out = replace_at(c, path, repl);
        path.pop();
        n += 1;
        Ok(out)
    })
    .unwrap()
}

/// Template over the placeholder with the two bases it reproduces.
struct PairMatch {
    template: Expr,
    base1: i64,
    base2: i64,
}

fn match_pair(phi1: &Expr, phi2: &Expr) -> Option<PairMatch> {
    let mut s = Scan::default();
    if !scan(phi1, phi2, &mut Vec::new(), &mut Vec::new(), false, &mut s) {
        return None;
    }
    let reads: Vec<&Diff> = s.diffs.iter().filter(|d| d.kind != DiffKind::Const).collect();
    let (delta, replaced): (i64, Vec<(Vec<usize>, i64)>) = if reads.is_empty() {
        if !s.diffs.is_empty() || s.same_reads.is_empty() {
            return None;
        }
        (0, s.same_reads.iter().map(|(p, c, _)| (p.clone(), *c)).collect())
    } else {
        let delta = reads[0].c2.checked_sub(reads[0].c1)?;
        if s.diffs.iter().any(|d| d.c2.checked_sub(d.c1) != Some(delta)) {
            return None;
        }
        (delta, s.diffs.iter().map(|d| (d.path.clone(), d.c1)).collect())
    };
    let read_paths: BTreeSet<&Vec<usize>> = reads
        .iter()
        .map(|d| &d.path)
        .chain(s.same_reads.iter().filter(|_| delta == 0).map(|(p, _, _)| p))
        .collect();
    let base1 = replaced
        .iter()
        .filter(|(p, _)| read_paths.contains(p))
        .map(|(_, c)| *c)
        .min()?;
    let repl: BTreeMap<Vec<usize>, Expr> = replaced
        .iter()
        .map(|(p, c)| (p.clone(), z_term(c - base1)))
        .collect();
    Some(PairMatch {
        template: replace_at(phi1, &mut Vec::new(), &repl),
        base1,
        base2: base1.checked_add(delta)?,
    })
}

/// Value of the placeholder under which `template` becomes `phi`.
fn align(template: &Expr, phi: &Expr, env: &mut Env, base: &mut Option<i64>) -> bool {
    if let Some(k) = z_offset(template) {
        let Expr::Int(c) = phi else { return false };
        let Some(b) = c.checked_sub(k) else { return false };
        return match base {
            Some(prev) => *prev == b,
            None => {
                *base = Some(b);
                true
            }
        };
    }
    match (template, phi) {
        (Expr::Int(x), Expr::Int(y)) => x == y,
        (Expr::Bool(x), Expr::Bool(y)) => x == y,
        (Expr::Var(x, s), Expr::Var(y, t)) => s == t && x != HOLE && same_var(env, x, y),
        (Expr::App(o1, xs), Expr::App(o2, ys)) => {
            o1 == o2 && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| align(x, y, env, base))
        }
        (Expr::SynthApp(f, s, xs), Expr::SynthApp(g, t, ys)) => {
            f == g && s == t && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| align(x, y, env, base))
        }
        (Expr::Select(a1, i1), Expr::Select(a2, i2)) => align(a1, a2, env, base) && align(i1, i2, env, base),
        (Expr::Store(a1, i1, v1), Expr::Store(a2, i2, v2)) => {
            align(a1, a2, env, base) && align(i1, i2, env, base) && align(v1, v2, env, base)
        }
        (Expr::Quant(k1, bs1, b1), Expr::Quant(k2, bs2, b2)) => {
            if k1 != k2 || bs1.len() != bs2.len() {
                return false;
            }
            let len = env.len();
            env.extend(bs1.iter().cloned().zip(bs2.iter().cloned()));
            let ok = align(b1, b2, env, base);
            env.truncate(len);
            ok
        }
        _ => false,
    }
}

/// Offsets of the placeholder in read and in other positions.
fn offsets(template: &Expr) -> (Vec<(String, i64)>, Vec<i64>) {
    fn walk(e: &Expr, reads: &mut Vec<(String, i64)>, consts: &mut Vec<i64>) {
        if let Some(k) = z_offset(e) {
            consts.push(k);
            return;
        }
        if let Expr::Select(a, i) = e {
            if let Some(k) = z_offset(i) {
                reads.push((array_key(a), k));
                walk(a, reads, consts);
                return;
            }
        }
        for c in e.children() {
            walk(c, reads, consts);
        }
    }
    let (mut reads, mut consts) = (Vec::new(), Vec::new());
    walk(template, &mut reads, &mut consts);
    (reads, consts)
}

fn instantiate(template: &Expr, var: &str) -> Expr {
    substitute(template, HOLE, &Expr::int_var(var)).expect("placeholder is Int")
}

/// Witness that `phi1` and `phi2` match, with the fresh variable named `z`.
pub fn matching(phi1: &Expr, phi2: &Expr) -> Option<MatchWitness> {
    let m = match_pair(phi1, phi2)?;
    let mut avoid = all_symbols(phi1);
    avoid.extend(all_symbols(phi2));
    let mut name = "z".to_string();
    while avoid.contains(&name) {
        name.push('\'');
    }
    Some(witness(&m.template, &name, [m.base1, m.base2].into_iter().collect()))
}

fn witness(template: &Expr, var: &str, bases: BTreeSet<i64>) -> MatchWitness {
    let (read_offsets, const_offsets) = offsets(template);
    MatchWitness {
        fresh_var: var.to_string(),
        read_offsets,
        const_offsets,
        base_indices: bases,
        template: instantiate(template, var),
    }
}

/// One partition class of the operands of a conjunction or disjunction.
#[derive(Debug, Clone, Serialize)]
pub struct MatchSet {
    pub connective: &'static str,
    pub members: Vec<Expr>,
    pub witness: Option<MatchWitness>,
    pub spanning: bool,
    /// Replacement, when the set was generalized.
    pub quantified: Option<Expr>,
}

struct Class {
    members: Vec<Expr>,
    template: Option<Expr>,
    bases: Vec<i64>,
}

impl Class {
    fn try_add(&mut self, phi: &Expr) -> bool {
        match &self.template {
            None => {
                let Some(m) = match_pair(&self.members[0], phi) else {
                    return false;
                };
                self.template = Some(m.template);
                self.bases = vec![m.base1, m.base2];
            }
            Some(t) => {
                let mut base = None;
                if !align(t, phi, &mut Vec::new(), &mut base) {
                    return false;
                }
                self.bases.push(base.expect("templates mention the placeholder"));
            }
        }
        self.members.push(phi.clone());
        true
    }

    /// Bases cover exactly the placeholder values whose reads stay in `0..b`,
    /// or exactly `0..b` itself when some read has a positive offset.
    fn spans(&self, b: usize) -> bool {
        let Some(t) = &self.template else { return false };
        let (reads, _) = offsets(t);
        let max_off = reads.iter().map(|(_, k)| *k).max().unwrap_or(0);
        let top = b as i64 - 1 - max_off;
        let have: BTreeSet<i64> = self.bases.iter().copied().collect();
        (top >= 0 && have == (0..=top).collect()) || have == (0..b as i64).collect()
    }
}

/// Bottom-up replacement of matching, spanning operand sets of `and`/`or`
/// nodes by `forall`/`exists` over a fresh variable.
pub fn syntactic_generalize(e: &Expr, b: usize) -> Expr {
    syntactic_generalize_traced(e, b, &mut |_| {})
}

/// As `syntactic_generalize`, reporting every operand set with two or more
/// members to `trace`.
pub fn syntactic_generalize_traced(e: &Expr, b: usize, trace: &mut dyn FnMut(&MatchSet)) -> Expr {
    let avoid = all_symbols(e);
    let mut g = Generalizer {
        b,
        fresh: FreshNames::starting_at(1),
        avoid,
        trace,
    };
    g.run(e)
}

struct Generalizer<'t> {
    b: usize,
    fresh: FreshNames,
    avoid: BTreeSet<Symbol>,
    trace: &'t mut dyn FnMut(&MatchSet),
}

impl Generalizer<'_> {
    fn run(&mut self, e: &Expr) -> Expr {
        let e = e.map_children::<()>(|c| Ok(self.run(c))).unwrap();
        let op = match &e {
            Expr::App(op @ (Op::And | Op::Or), _) => *op,
            _ => return e,
        };
        let mut operands = Vec::new();
        flatten(&e, op, &mut operands);
        let mut classes: Vec<Class> = Vec::new();
        for phi in operands {
            if !classes.iter_mut().any(|c| c.try_add(&phi)) {
                classes.push(Class {
                    members: vec![phi],
                    template: None,
                    bases: Vec::new(),
                });
            }
        }
        let (kind, name) = match op {
            Op::And => (Quantifier::Forall, "and"),
            _ => (Quantifier::Exists, "or"),
        };
        let mut out = Vec::new();
        let mut changed = false;
        for c in classes {
            let spanning = c.members.len() > 1 && c.spans(self.b);
            let mut quantified = None;
            if spanning {
                let z = self.fresh.next_avoiding(&self.avoid);
                let body = instantiate(c.template.as_ref().unwrap(), &z);
                quantified = Some(Expr::quant(kind, vec![z], body));
            }
            if c.members.len() > 1 {
                let bases = c.bases.iter().copied().collect();
                let witness = c.template.as_ref().map(|t| witness(t, "z", bases));
                (self.trace)(&MatchSet {
                    connective: name,
                    members: c.members.clone(),
                    witness,
                    spanning,
                    quantified: quantified.clone(),
                });
            }
            match quantified {
                Some(q) => {
                    changed = true;
                    out.push(q);
                }
                None => out.extend(c.members),
            }
        }
        if !changed {
            return e;
        }
        match op {
            Op::And => Expr::and(out),
            _ => Expr::or(out),
        }
    }
}

fn flatten(e: &Expr, op: Op, out: &mut Vec<Expr>) {
    match e {
        Expr::App(o, xs) if *o == op => xs.iter().for_each(|x| flatten(x, op, out)),
        _ => out.push(e.clone()),
    }
}
