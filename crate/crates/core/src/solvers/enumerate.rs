//! Bottom-up enumeration of grammar terms inside a counterexample-guided
//! loop.
//!
//! Terms are built in nondecreasing derivation size, where each production
//! application counts one whatever its template. Each nonterminal keeps one term per
//! observable behaviour, where the behaviour is the vector of values the
//! term takes at the argument tuples the constraints pass to the function
//! under the current inputs. A start term that satisfies the constraints on
//! every input is searched for a counterexample over a finite window; a
//! counterexample becomes a new input and enumeration restarts.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rustc_hash::FxHashSet;
use serde::Serialize;

use super::space::ValuationSpace;
use super::SynthOutcome;
use crate::ast::{Expr, Grammar, Op, Problem, Sort, Symbol, SynthFun, FRESH_PREFIX};
use crate::eval::{call_sites, CallHandler, EvalError, Evaluator, Interp, NoCalls, Valuation, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EnumLimits {
    /// Maximum number of production applications in a derivation.
    pub max_size: usize,
    pub max_candidates: usize,
    pub timeout: Duration,
}

impl Default for EnumLimits {
    fn default() -> Self {
        EnumLimits {
            max_size: 15,
            max_candidates: 100_000,
            timeout: Duration::from_secs(60),
        }
    }
}

/// The finite model in which candidates are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CegisConfig {
    /// Explicit cells at `0..array_len`. Quantifiers range over the explicit
    /// cells and the values of the Int variables.
    pub array_len: usize,
    /// Inclusive value window for scalars and array elements.
    pub window: (i64, i64),
    /// Explicit cells below index 0, also quantified over.
    pub negative_cells: usize,
    /// Let elements outside the explicit cells range over the window.
    pub vary_default: bool,
    /// Valuations searched exhaustively, in layer order, per candidate.
    pub exhaustive: usize,
    /// Further random valuations when the space exceeds `exhaustive`.
    pub samples: usize,
    pub seed: u64,
}

impl Default for CegisConfig {
    fn default() -> Self {
        CegisConfig {
            array_len: 2,
            window: (-3, 3),
            negative_cells: 0,
            vary_default: false,
            exhaustive: 50_000,
            samples: 2_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EnumStats {
    /// Start terms that held on every input and went to the finite search.
    pub candidates: usize,
    pub counterexamples: usize,
}

/// Enumerate `grammar` against the constraints of `p`, which must have
/// exactly one synthesis function.
pub fn enumerate_candidates(p: &Problem, grammar: &Grammar, limits: &EnumLimits, cfg: &CegisConfig) -> SynthOutcome {
    enumerate_with(p, grammar, limits, cfg, &mut |_| true).0
}

/// As `enumerate_candidates`, with `accept` as a final filter on candidates
/// that survive the finite search.
pub fn enumerate_with(
    p: &Problem,
    grammar: &Grammar,
    limits: &EnumLimits,
    cfg: &CegisConfig,
    accept: &mut dyn FnMut(&Expr) -> bool,
) -> (SynthOutcome, EnumStats) {
    let [f] = p.synth_funs.as_slice() else {
        return (SynthOutcome::Unknown, EnumStats::default());
    };
    if grammar.validate().is_err() || grammar.start_sort() != Some(f.return_sort) {
        return (SynthOutcome::Unknown, EnumStats::default());
    }
    let mut stats = EnumStats::default();
    let out = Enumerator::new(p, f, grammar, limits, cfg).run(&mut stats, accept);
    (out, stats)
}

struct Production {
    /// The rule with its holes renamed to `holes[k].0`, so that every hole
    /// is distinct.
    shape: Expr,
    /// Positional name and nonterminal index of each hole, in pre-order.
    holes: Vec<(Symbol, usize)>,
    /// Set when the shape is this operator applied to the holes in order,
    /// so its value follows from the hole values alone.
    direct: Option<Op>,
    /// Two holes of one nonterminal whose order does not matter.
    symmetric: bool,
}

impl Production {
    fn new(rule: &Expr, index: &dyn Fn(&str) -> Option<usize>) -> Self {
        let mut holes = Vec::new();
        let shape = rename_holes(rule, index, &mut holes);
        let direct = match &shape {
            Expr::App(op, args)
                if args.len() == holes.len()
                    && args.iter().zip(&holes).all(|(a, (h, _))| matches!(a, Expr::Var(n, _) if n == h)) =>
            {
                Some(*op)
            }
            _ => None,
        };
        let symmetric = matches!(direct, Some(Op::And | Op::Or | Op::Eq | Op::Neq | Op::Add))
            && holes.len() == 2
            && holes[0].1 == holes[1].1;
        Production {
            shape,
            holes,
            direct,
            symmetric,
        }
    }

    /// Value at point `j` given the argument entries.
    fn value_at(&self, ev: &Evaluator, j: usize, args: &[&Entry], locals: &mut Vec<(Symbol, Value)>) -> Option<Value> {
        if let Some(op) = self.direct {
            if let Some(v) = apply(op, args, j) {
                return Some(v);
            }
        }
        for (slot, e) in locals.iter_mut().zip(args) {
            slot.1 = e.sig[j].clone();
        }
        ev.eval_in(&self.shape, locals).ok()
    }

    fn instantiate(&self, args: &[&Entry]) -> Expr {
        let map: BTreeMap<Symbol, Expr> = self
            .holes
            .iter()
            .zip(args)
            .map(|((h, _), e)| (h.clone(), e.term.clone()))
            .collect();
        fill(&self.shape, &map)
    }
}

/// A term with its values at the current points.
struct Entry {
    term: Expr,
    sig: Vec<Value>,
}

enum Step {
    Found(Expr),
    Counterexample(Valuation),
    Exhausted,
    OutOfBudget,
}

struct Enumerator<'a> {
    f: &'a SynthFun,
    constraints: &'a [Expr],
    nts: Vec<(Symbol, Sort)>,
    start: usize,
    prods: Vec<Vec<Production>>,
    limits: &'a EnumLimits,
    cfg: &'a CegisConfig,
    space: ValuationSpace,
    deadline: Instant,
    quantifier_free: bool,
    inputs: Vec<Valuation>,
    /// Parameter valuations of the call sites seen on `inputs`, each with
    /// the quantifier domain of its input.
    points: Vec<(Valuation, Vec<i64>)>,
}

impl<'a> Enumerator<'a> {
    fn new(p: &'a Problem, f: &'a SynthFun, g: &'a Grammar, limits: &'a EnumLimits, cfg: &'a CegisConfig) -> Self {
        let nts = g.nonterminals.clone();
        let index = |n: &str| nts.iter().position(|(m, _)| m == n);
        let prods = nts
            .iter()
            .map(|(nt, _)| g.rules(nt).iter().map(|t| Production::new(t, &index)).collect())
            .collect();
        let space = ValuationSpace::new(p.declared_vars.clone(), cfg.array_len, cfg.window)
            .negative_cells(cfg.negative_cells)
            .vary_default(cfg.vary_default);
        Enumerator {
            f,
            constraints: &p.constraints,
            start: index(&g.start).unwrap_or(0),
            nts,
            prods,
            limits,
            cfg,
            space,
            deadline: Instant::now() + limits.timeout,
            quantifier_free: p.constraints.iter().all(Expr::is_quantifier_free),
            inputs: Vec::new(),
            points: Vec::new(),
        }
    }

    fn run(&mut self, stats: &mut EnumStats, accept: &mut dyn FnMut(&Expr) -> bool) -> SynthOutcome {
        let zero = self.space.iter().next().unwrap_or_default();
        if self.infeasible_at(&zero) {
            return SynthOutcome::Infeasible;
        }
        self.add_input(zero);
        loop {
            match self.round(stats, accept) {
                Step::Found(body) => {
                    return SynthOutcome::Solved(BTreeMap::from([(self.f.name.clone(), body)]));
                }
                Step::Counterexample(v) => {
                    stats.counterexamples += 1;
                    if self.infeasible_at(&v) {
                        return SynthOutcome::Infeasible;
                    }
                    self.add_input(v);
                }
                Step::Exhausted | Step::OutOfBudget => return SynthOutcome::TimedOut,
            }
        }
    }

    fn add_input(&mut self, v: Valuation) {
        let domain = self.space.domain_for(&v);
        for c in self.constraints {
            for (name, args) in call_sites(c, &v, &domain) {
                if name != self.f.name {
                    continue;
                }
                let point: Valuation = self.f.params.iter().map(|(n, _)| n.clone()).zip(args).collect();
                let point = (point, domain.clone());
                if !self.points.contains(&point) {
                    self.points.push(point);
                }
            }
        }
        self.inputs.push(v);
    }

    fn out_of_time(&self) -> bool {
        Instant::now() >= self.deadline
    }

    /// One pass of enumeration under the current inputs.
    fn round(&self, stats: &mut EnumStats, accept: &mut dyn FnMut(&Expr) -> bool) -> Step {
        let n = self.nts.len();
        let evs: Vec<Evaluator> = self.points.iter().map(|(v, d)| Evaluator::new(v, &NoCalls, d)).collect();
        let mut banks: Vec<Vec<Vec<Entry>>> = (0..n).map(|_| vec![Vec::new()]).collect();
        let mut seen: Vec<FxHashSet<Vec<Value>>> = vec![FxHashSet::default(); n];
        let mut steps = 0usize;
        for size in 1..=self.limits.max_size {
            for bank in banks.iter_mut() {
                bank.push(Vec::new());
            }
            for nt in 0..n {
                let mut level = Vec::new();
                for prod in &self.prods[nt] {
                    let k = prod.holes.len();
                    if k > size - 1 {
                        continue;
                    }
                    let mut locals: Vec<(Symbol, Value)> = prod.holes.iter().map(|(h, _)| (h.clone(), Value::Int(0))).collect();
                    let mut out_of_time = false;
                    let mut sizes = vec![0; k];
                    let visit = &mut |args: &[&Entry]| {
                        steps += 1;
                        if steps.is_multiple_of(4096) && self.out_of_time() {
                            out_of_time = true;
                            return false;
                        }
                        let mut sig = Vec::with_capacity(evs.len());
                        for (j, ev) in evs.iter().enumerate() {
                            match prod.value_at(ev, j, args, &mut locals) {
                                Some(v) => sig.push(v),
                                None => return true,
                            }
                        }
                        if !seen[nt].contains(&sig) {
                            seen[nt].insert(sig.clone());
                            level.push(Entry {
                                term: prod.instantiate(args),
                                sig,
                            });
                        }
                        true
                    };
                    if k == 0 {
                        if size == 1 {
                            visit(&[]);
                        }
                    } else {
                        let holes: Vec<usize> = prod.holes.iter().map(|(_, nt)| *nt).collect();
                        compositions(size - 1, &mut sizes, 0, &mut |sizes| {
                            if prod.symmetric && sizes[0] > sizes[1] {
                                return true;
                            }
                            tuples(sizes, &holes, &banks, prod.symmetric, visit)
                        });
                    }
                    if out_of_time {
                        return Step::OutOfBudget;
                    }
                }
                if nt == self.start {
                    for e in &level {
                        if let Some(step) = self.check(stats, &e.term, accept) {
                            return step;
                        }
                    }
                }
                banks[nt][size] = level;
                if self.out_of_time() {
                    return Step::OutOfBudget;
                }
            }
        }
        Step::Exhausted
    }

    fn holds(&self, interp: &Interp, v: &Valuation) -> bool {
        let domain = self.space.domain_for(v);
        let ev = Evaluator::new(v, interp, &domain);
        self.constraints.iter().all(|c| ev.eval_bool(c) == Ok(true))
    }

    /// `None` to keep enumerating.
    fn check(&self, stats: &mut EnumStats, term: &Expr, accept: &mut dyn FnMut(&Expr) -> bool) -> Option<Step> {
        let interp = Interp::new().with(self.f.name.clone(), self.f.params.clone(), term.clone());
        if !self.inputs.iter().all(|v| self.holds(&interp, v)) {
            return None;
        }
        stats.candidates += 1;
        if stats.candidates > self.limits.max_candidates {
            return Some(Step::OutOfBudget);
        }
        let order = self.space.search_order(self.cfg.exhaustive, self.cfg.samples, self.cfg.seed);
        for (n, v) in order.enumerate() {
            if n % 1024 == 1023 && self.out_of_time() {
                return Some(Step::OutOfBudget);
            }
            if !self.holds(&interp, &v) {
                return Some(Step::Counterexample(v));
            }
        }
        accept(term).then(|| Step::Found(term.clone()))
    }

    fn infeasible_at(&self, v: &Valuation) -> bool {
        self.quantifier_free && infeasible_at(self.constraints, self.f, v, &self.space.domain_for(v))
    }
}

/// `op` applied to the values of `args` at point `j`, for the operators
/// whose arguments are all holes.
fn apply(op: Op, args: &[&Entry], j: usize) -> Option<Value> {
    let int = |k: usize| args[k].sig[j].as_int();
    let boolean = |k: usize| args[k].sig[j].as_bool();
    Some(match op {
        Op::Add => Value::Int(args.iter().try_fold(0i64, |s, a| Some(s.wrapping_add(a.sig[j].as_int()?)))?),
        Op::Sub => Value::Int(int(0)?.wrapping_sub(int(1)?)),
        Op::Neg => Value::Int(int(0)?.wrapping_neg()),
        Op::Le => Value::Bool(int(0)? <= int(1)?),
        Op::Lt => Value::Bool(int(0)? < int(1)?),
        Op::Ge => Value::Bool(int(0)? >= int(1)?),
        Op::Gt => Value::Bool(int(0)? > int(1)?),
        Op::Eq => Value::Bool(args[0].sig[j] == args[1].sig[j]),
        Op::Neq => Value::Bool(args[0].sig[j] != args[1].sig[j]),
        Op::And => Value::Bool(args.iter().try_fold(true, |s, a| Some(s && a.sig[j].as_bool()?))?),
        Op::Or => Value::Bool(args.iter().try_fold(false, |s, a| Some(s || a.sig[j].as_bool()?))?),
        Op::Not => Value::Bool(!boolean(0)?),
        Op::Implies => Value::Bool(!boolean(0)? || boolean(1)?),
        Op::Ite => args[if boolean(0)? { 1 } else { 2 }].sig[j].clone(),
        Op::MulConst => return None,
    })
}

fn rename_holes(e: &Expr, index: &dyn Fn(&str) -> Option<usize>, holes: &mut Vec<(Symbol, usize)>) -> Expr {
    if let Expr::Var(n, sort) = e {
        if let Some(i) = index(n) {
            let name = format!("{FRESH_PREFIX}h{}", holes.len());
            holes.push((name.clone(), i));
            return Expr::var(name, *sort);
        }
        return e.clone();
    }
    e.map_children::<()>(|c| Ok(rename_holes(c, index, holes))).unwrap()
}

fn fill(e: &Expr, args: &BTreeMap<Symbol, Expr>) -> Expr {
    match e {
        Expr::Var(n, _) if args.contains_key(n) => args[n].clone(),
        _ => e.map_children::<()>(|c| Ok(fill(c, args))).unwrap(),
    }
}

/// Calls `visit` with every choice of one entry per hole, where hole `j`
/// draws from size `sizes[j]` of its nonterminal's bank. A `symmetric` pair
/// drawing from one list gets each unordered pair once. False when `visit`
/// stopped early.
fn tuples(
    sizes: &[usize],
    holes: &[usize],
    banks: &[Vec<Vec<Entry>>],
    symmetric: bool,
    visit: &mut dyn FnMut(&[&Entry]) -> bool,
) -> bool {
    let lists: Vec<&Vec<Entry>> = sizes.iter().zip(holes).map(|(&s, &nt)| &banks[nt][s]).collect();
    if lists.iter().any(|l| l.is_empty()) {
        return true;
    }
    if symmetric && sizes[0] == sizes[1] {
        let l = lists[0];
        for j in 0..l.len() {
            for i in 0..=j {
                if !visit(&[&l[i], &l[j]]) {
                    return false;
                }
            }
        }
        return true;
    }
    let k = lists.len();
    let mut pick = vec![0usize; k];
    let mut args: Vec<&Entry> = lists.iter().map(|l| &l[0]).collect();
    loop {
        if !visit(&args) {
            return false;
        }
        let mut j = 0;
        while j < k {
            pick[j] += 1;
            if pick[j] < lists[j].len() {
                args[j] = &lists[j][pick[j]];
                break;
            }
            pick[j] = 0;
            args[j] = &lists[j][0];
            j += 1;
        }
        if j == k {
            return true;
        }
    }
}

/// Calls `f` with every split of `total` into `sizes.len()` positive parts;
/// stops early when `f` returns false.
fn compositions(total: usize, sizes: &mut [usize], at: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    let left = sizes.len() - at;
    if left == 1 {
        if total == 0 {
            return true;
        }
        sizes[at] = total;
        return f(sizes);
    }
    for first in 1..=total.saturating_sub(left - 1) {
        sizes[at] = first;
        if !compositions(total - first, sizes, at + 1, f) {
            return false;
        }
    }
    true
}

/// Assigns call-site values from a table; unlisted sites get defaults.
struct TableCalls<'t> {
    table: &'t [(Vec<Value>, Value)],
}

impl CallHandler for TableCalls<'_> {
    fn call(&self, _: &str, ret: Sort, args: &[Value], _: &[i64]) -> Result<Value, EvalError> {
        Ok(self
            .table
            .iter()
            .find(|(a, _)| a.as_slice() == args)
            .map_or_else(|| Value::default_of(ret), |(_, v)| v.clone()))
    }
}

/// Assignments to call sites tried before giving up on proving infeasibility.
const INFEASIBILITY_CAP: u128 = 100_000;

/// Sound check that no function satisfies the quantifier-free `constraints`
/// at the input `v`.
///
/// Every call site becomes an unknown. Bool unknowns are enumerated. Int
/// unknowns are handled only when each call is an argument-free-of-calls
/// operand of a comparison whose other operand is a call or free of calls:
/// then truth depends only on the order of the unknowns among the constants
/// they are compared with, and with `k` unknowns every realizable order is
/// realized within distance `k` of some constant.
pub fn infeasible_at(constraints: &[Expr], f: &SynthFun, v: &Valuation, domain: &[i64]) -> bool {
    if f.return_sort == Sort::Array || !constraints.iter().all(|c| c.is_quantifier_free()) {
        return false;
    }
    let mut consts = Vec::new();
    for c in constraints {
        if !order_only(c, f, v, domain, &mut consts) {
            return false;
        }
    }
    let mut sites: Vec<Vec<Value>> = Vec::new();
    for c in constraints {
        for (name, args) in call_sites(c, v, domain) {
            if name == f.name && !sites.contains(&args) {
                sites.push(args);
            }
        }
    }
    let k = sites.len() as i64;
    let choices: Vec<Value> = match f.return_sort {
        Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
        _ => {
            if consts.is_empty() {
                consts.push(0);
            }
            let mut vals: Vec<i64> = consts
                .iter()
                .flat_map(|&c| (c.saturating_sub(k)..=c.saturating_add(k)).collect::<Vec<_>>())
                .collect();
            vals.sort_unstable();
            vals.dedup();
            vals.into_iter().map(Value::Int).collect()
        }
    };
    let total = (choices.len() as u128).checked_pow(sites.len() as u32);
    if total.is_none_or(|t| t > INFEASIBILITY_CAP) {
        return false;
    }
    let mut pick = vec![0usize; sites.len()];
    loop {
        let table: Vec<(Vec<Value>, Value)> = sites
            .iter()
            .zip(&pick)
            .map(|(a, &i)| (a.clone(), choices[i].clone()))
            .collect();
        let handler = TableCalls { table: &table };
        let ev = Evaluator::new(v, &handler, domain);
        match constraints.iter().map(|c| ev.eval_bool(c)).collect::<Result<Vec<bool>, _>>() {
            Ok(r) if r.iter().all(|&b| b) => return false,
            Ok(_) => {}
            Err(_) => return false,
        }
        let mut j = 0;
        while j < pick.len() {
            pick[j] += 1;
            if pick[j] < choices.len() {
                break;
            }
            pick[j] = 0;
            j += 1;
        }
        if j == pick.len() {
            return true;
        }
    }
}

/// Checks the call-placement condition of `infeasible_at` and collects the
/// values of call-free comparison operands facing a call.
fn order_only(e: &Expr, f: &SynthFun, v: &Valuation, domain: &[i64], consts: &mut Vec<i64>) -> bool {
    let is_call = |x: &Expr| matches!(x, Expr::SynthApp(n, _, args) if *n == f.name && !args.iter().any(Expr::contains_synth_app));
    match e {
        Expr::SynthApp(_, Sort::Bool, _) if is_call(e) => true,
        Expr::SynthApp(..) => false,
        Expr::App(op, xs)
            if matches!(op, Op::Eq | Op::Neq | Op::Le | Op::Lt | Op::Ge | Op::Gt)
                && xs.iter().any(|x| x.sort() == Sort::Int && x.contains_synth_app()) =>
        {
            for (x, other) in [(&xs[0], &xs[1]), (&xs[1], &xs[0])] {
                if !x.contains_synth_app() {
                    continue;
                }
                if !is_call(x) {
                    return false;
                }
                if !other.contains_synth_app() {
                    match Evaluator::new(v, &NoCalls, domain).eval(other) {
                        Ok(Value::Int(c)) => consts.push(c),
                        _ => return false,
                    }
                } else if !is_call(other) {
                    return false;
                }
            }
            true
        }
        _ => e.children().into_iter().all(|c| order_only(c, f, v, domain, consts)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unary(ret: Sort) -> SynthFun {
        SynthFun::new("f", vec![("x".into(), Sort::Int)], ret)
    }

    fn plus_grammar() -> Grammar {
        let mut g = Grammar::new(vec![("I".into(), Sort::Int)]);
        for p in [Expr::int(0), Expr::int(1), Expr::int_var("x"), Expr::add(Expr::int_var("I"), Expr::int_var("I"))] {
            g.add("I", p);
        }
        g
    }

    fn problem(f: SynthFun, constraints: Vec<Expr>) -> Problem {
        Problem {
            declared_vars: vec![("x".into(), Sort::Int)],
            synth_funs: vec![f],
            constraints,
            ..Problem::default()
        }
    }

    fn fx() -> Expr {
        Expr::synth_app("f", Sort::Int, vec![Expr::int_var("x")])
    }

    /// Every term of `plus_grammar` with at most `size` nodes, which for this
    /// grammar is also the derivation size.
    fn all_terms(size: usize) -> Vec<Expr> {
        let mut out = vec![Expr::int(0), Expr::int(1), Expr::int_var("x")];
        if size >= 3 {
            let smaller = all_terms(size - 2);
            for a in &smaller {
                for b in &smaller {
                    let t = Expr::add(a.clone(), b.clone());
                    if t.size() <= size {
                        out.push(t);
                    }
                }
            }
        }
        out
    }

    fn value_at(t: &Expr, x: i64) -> i64 {
        let vals = Valuation::from([("x".to_string(), Value::Int(x))]);
        Evaluator::new(&vals, &NoCalls, &[]).eval(t).unwrap().as_int().unwrap()
    }

    /// Size of the smallest grammar term meeting `pred` at every `x` in `xs`.
    fn smallest(xs: std::ops::RangeInclusive<i64>, pred: impl Fn(i64, i64) -> bool) -> usize {
        all_terms(5)
            .into_iter()
            .filter(|t| xs.clone().all(|x| pred(x, value_at(t, x))))
            .map(|t| t.size())
            .min()
            .unwrap()
    }

    #[test]
    fn finds_a_smallest_term_on_the_window() {
        // Over all integers no term of this grammar bounds both x and 1, so
        // the answer is only meaningful on the search window.
        let spec = Expr::and(vec![Expr::ge(fx(), Expr::int_var("x")), Expr::ge(fx(), Expr::int(1))]);
        let p = problem(unary(Sort::Int), vec![spec]);
        let SynthOutcome::Solved(b) = enumerate_candidates(&p, &plus_grammar(), &EnumLimits::default(), &CegisConfig::default()) else {
            panic!("not solved")
        };
        let meets = |x: i64, v: i64| v >= x && v >= 1;
        assert!((-3..=3).all(|x| meets(x, value_at(&b["f"], x))));
        assert_eq!(b["f"].size(), smallest(-3..=3, meets));
    }

    #[test]
    fn finds_the_successor_on_naturals() {
        let x = Expr::int_var("x");
        let spec = Expr::implies(
            Expr::ge(x.clone(), Expr::int(0)),
            Expr::and(vec![Expr::ge(fx(), x), Expr::ge(fx(), Expr::int(1))]),
        );
        let p = problem(unary(Sort::Int), vec![spec]);
        let SynthOutcome::Solved(b) = enumerate_candidates(&p, &plus_grammar(), &EnumLimits::default(), &CegisConfig::default()) else {
            panic!("not solved")
        };
        let meets = |x: i64, v: i64| v >= x && v >= 1;
        assert_eq!(smallest(0..=3, meets), 3);
        assert_eq!(b["f"].size(), 3);
        assert!((0..=50).all(|x| value_at(&b["f"], x) == x + 1), "{}", b["f"]);
    }

    #[test]
    fn trivial_spec_takes_the_first_term() {
        let p = problem(unary(Sort::Int), vec![Expr::bool(true)]);
        let out = enumerate_candidates(&p, &plus_grammar(), &EnumLimits::default(), &CegisConfig::default());
        assert_eq!(out, SynthOutcome::Solved(BTreeMap::from([("f".to_string(), Expr::int(0))])));
    }

    #[test]
    fn contradictory_spec_is_infeasible() {
        let f = SynthFun::new("f", vec![], Sort::Int);
        let call = Expr::synth_app("f", Sort::Int, vec![]);
        let p = Problem {
            synth_funs: vec![f],
            constraints: vec![Expr::eq(call.clone(), Expr::int(0)), Expr::eq(call, Expr::int(1))],
            ..Problem::default()
        };
        let mut g = Grammar::new(vec![("I".into(), Sort::Int)]);
        g.add("I", Expr::int(0));
        let out = enumerate_candidates(&p, &g, &EnumLimits::default(), &CegisConfig::default());
        assert_eq!(out, SynthOutcome::Infeasible);
        let p = problem(unary(Sort::Int), vec![Expr::bool(false)]);
        assert_eq!(
            enumerate_candidates(&p, &plus_grammar(), &EnumLimits::default(), &CegisConfig::default()),
            SynthOutcome::Infeasible
        );
    }

    #[test]
    fn infeasibility_needs_every_order() {
        // f(x) > x and f(x) < x + 2 force f(x) = x + 1, which exists.
        let x = Expr::int_var("x");
        let cs = vec![Expr::gt(fx(), x.clone()), Expr::lt(fx(), Expr::add(x, Expr::int(2)))];
        let v = Valuation::from([("x".to_string(), Value::Int(0))]);
        assert!(!infeasible_at(&cs, &unary(Sort::Int), &v, &[]));
        // arithmetic on a call is outside the decided shape
        let cs = vec![Expr::eq(Expr::add(fx(), Expr::int(1)), Expr::int(0)), Expr::bool(false)];
        assert!(!infeasible_at(&cs, &unary(Sort::Int), &v, &[]));
    }

    #[test]
    fn exhausted_limits_time_out() {
        let spec = Expr::eq(fx(), Expr::int(100));
        let p = problem(unary(Sort::Int), vec![spec]);
        let limits = EnumLimits {
            max_size: 5,
            ..EnumLimits::default()
        };
        assert_eq!(enumerate_candidates(&p, &plus_grammar(), &limits, &CegisConfig::default()), SynthOutcome::TimedOut);
    }
}
