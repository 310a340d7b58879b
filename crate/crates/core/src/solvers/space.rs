//! Finite valuation spaces and the brute-force satisfiability oracle.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ast::{free_variables, Expr, Sort, Symbol};
use crate::eval::{index_domain, ArrayValue, CallHandler, Evaluator, NoCalls, Valuation, Value};

/// Default ceiling on the number of valuations `finite_check` will visit.
pub const ORACLE_CEILING: u128 = 5_000_000;

/// Indices added on each side of a valuation's quantifier domain.
pub const DOMAIN_MARGIN: i64 = 2;

/// All valuations of `vars` with scalars in a window and arrays of a fixed
/// length over the same window.
#[derive(Debug, Clone)]
pub struct ValuationSpace {
    vars: Vec<(Symbol, Sort)>,
    array_len: usize,
    /// Explicit cells below index 0.
    negative: usize,
    /// Window values, nearest to zero first.
    values: Vec<i64>,
    /// Whether array elements outside `0..array_len` also range over the
    /// window instead of being fixed to 0.
    vary_default: bool,
}

impl ValuationSpace {
    pub fn new(vars: Vec<(Symbol, Sort)>, array_len: usize, window: (i64, i64)) -> Self {
        let mut values: Vec<i64> = (window.0..=window.1).collect();
        values.sort_by_key(|v| (v.unsigned_abs(), *v > 0));
        ValuationSpace {
            vars,
            array_len,
            negative: 0,
            values,
            vary_default: false,
        }
    }

    /// Also give the `n` cells below index 0 explicit values.
    pub fn negative_cells(mut self, n: usize) -> Self {
        self.negative = n;
        self
    }

    /// Indices with explicit values.
    pub fn indices(&self) -> Vec<i64> {
        (-(self.negative as i64)..self.array_len as i64).collect()
    }

    /// Quantifier domain for `v`: the hull of the explicit cells and the
    /// Int values, widened by `DOMAIN_MARGIN` on each side. Arrays are
    /// constant outside their cells, so a body reading at offsets below the
    /// margin takes no value outside this domain that it misses inside it.
    pub fn domain_for(&self, v: &Valuation) -> Vec<i64> {
        let ints = v.values().filter_map(Value::as_int);
        let (lo, hi) = self
            .indices()
            .into_iter()
            .chain(ints)
            .fold((0, 0), |(lo, hi), x| (lo.min(x), hi.max(x)));
        (lo - DOMAIN_MARGIN..=hi + DOMAIN_MARGIN).collect()
    }

    fn cells(&self) -> usize {
        self.negative + self.array_len
    }

    pub fn vary_default(mut self, yes: bool) -> Self {
        self.vary_default = yes;
        self
    }

    pub fn array_len(&self) -> usize {
        self.array_len
    }

    pub fn vars(&self) -> &[(Symbol, Sort)] {
        &self.vars
    }

    fn radices(&self) -> Vec<usize> {
        let n = self.values.len().max(1);
        let mut out = Vec::new();
        for (_, s) in &self.vars {
            match s {
                Sort::Bool => out.push(2),
                Sort::Int => out.push(n),
                Sort::Array => {
                    out.extend(std::iter::repeat_n(n, self.cells()));
                    if self.vary_default {
                        out.push(n);
                    }
                }
            }
        }
        out
    }

    /// Number of valuations, saturating.
    pub fn size(&self) -> u128 {
        self.radices()
            .iter()
            .fold(1u128, |acc, &r| acc.saturating_mul(r as u128))
    }

    fn decode(&self, digits: &[usize]) -> Valuation {
        let mut it = digits.iter();
        let mut val = Valuation::new();
        let value = |d: &usize| self.values.get(*d).copied().unwrap_or(0);
        for (name, s) in &self.vars {
            let v = match s {
                Sort::Bool => Value::Bool(*it.next().unwrap() == 1),
                Sort::Int => Value::Int(value(it.next().unwrap())),
                Sort::Array => {
                    let elems: Vec<i64> = it.by_ref().take(self.cells()).map(value).collect();
                    let default = if self.vary_default { value(it.next().unwrap()) } else { 0 };
                    let mut a = ArrayValue::constant(default);
                    for (i, v) in self.indices().into_iter().zip(elems) {
                        a.set_in_place(i, v);
                    }
                    Value::array(a)
                }
            };
            val.insert(name.clone(), v);
        }
        val
    }

    /// Every valuation, in layers of growing distance from zero: first the
    /// all-zero valuation, then those using only the two nearest values, and
    /// so on.
    pub fn iter(&self) -> impl Iterator<Item = Valuation> + '_ {
        let radices = self.radices();
        let top = radices.iter().copied().max().unwrap_or(1);
        (0..top).flat_map(move |k| Layer::new(radices.clone(), k).map(|d| self.decode(&d)))
    }

    /// Up to `exhaustive` valuations in layer order, then `samples` uniform
    /// ones drawn from a generator seeded with `seed`.
    pub fn search_order(&self, exhaustive: usize, samples: usize, seed: u64) -> impl Iterator<Item = Valuation> + '_ {
        let complete = self.size() <= exhaustive as u128;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let radices = self.radices();
        let random = (0..if complete { 0 } else { samples }).map(move |_| {
            let digits: Vec<usize> = radices.iter().map(|&r| rng.gen_range(0..r)).collect();
            self.decode(&digits)
        });
        self.iter().take(exhaustive).chain(random)
    }
}

/// Digit vectors with every digit at most `k` and at least one equal to `k`.
struct Layer {
    radices: Vec<usize>,
    k: usize,
    digits: Option<Vec<usize>>,
}

impl Layer {
    fn new(radices: Vec<usize>, k: usize) -> Self {
        let digits = Some(vec![0; radices.len()]);
        Layer { radices, k, digits }
    }

    fn advance(&mut self) {
        let Some(d) = self.digits.as_mut() else { return };
        for (i, x) in d.iter_mut().enumerate() {
            let cap = self.k.min(self.radices[i] - 1);
            if *x < cap {
                *x += 1;
                return;
            }
            *x = 0;
        }
        self.digits = None;
    }
}

impl Iterator for Layer {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        loop {
            let d = self.digits.clone()?;
            self.advance();
            let hits = d.contains(&self.k);
            if hits || (self.k == 0 && d.is_empty()) {
                return Some(d);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FiniteResult {
    Sat(Valuation),
    UnsatWithinWindow,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("search space of {size} valuations exceeds the ceiling of {ceiling}")]
pub struct OracleTooLarge {
    pub size: u128,
    pub ceiling: u128,
}

/// Exhaustive search for a valuation of the free variables of `e` making it
/// true. Arrays have `array_len` elements and default 0; quantifiers range
/// over `0..array_len`.
pub fn finite_check(e: &Expr, array_len: usize, window: (i64, i64)) -> Result<FiniteResult, OracleTooLarge> {
    finite_check_with(e, array_len, window, &NoCalls, ORACLE_CEILING)
}

pub fn finite_check_with(
    e: &Expr,
    array_len: usize,
    window: (i64, i64),
    calls: &dyn CallHandler,
    ceiling: u128,
) -> Result<FiniteResult, OracleTooLarge> {
    let vars: Vec<(Symbol, Sort)> = free_variables(e).into_iter().collect();
    let space = ValuationSpace::new(vars, array_len, window);
    let size = space.size();
    if size > ceiling {
        return Err(OracleTooLarge { size, ceiling });
    }
    let domain = index_domain(array_len);
    for v in space.iter() {
        if Evaluator::new(&v, calls, &domain).eval_bool(e) == Ok(true) {
            return Ok(FiniteResult::Sat(v));
        }
    }
    Ok(FiniteResult::UnsatWithinWindow)
}

/// Whether `a` and `b` agree on every valuation of their free variables.
pub fn finite_equivalent(a: &Expr, b: &Expr, array_len: usize, window: (i64, i64)) -> Result<bool, OracleTooLarge> {
    let diff = Expr::neq(a.clone(), b.clone());
    Ok(finite_check(&diff, array_len, window)? == FiniteResult::UnsatWithinWindow)
}

/// Declared names a set of expressions mentions, for building spaces.
pub fn vars_of(exprs: &[Expr]) -> Vec<(Symbol, Sort)> {
    let mut out = BTreeSet::new();
    for e in exprs {
        out.extend(free_variables(e));
    }
    out.into_iter().collect()
}
