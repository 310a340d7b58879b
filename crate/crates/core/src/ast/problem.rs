//! Synthesis problems, synthesis-function signatures and grammars.

use std::collections::BTreeMap;

use super::expr::{Expr, Sort, Symbol};
use super::subst::free_variables;

/// A production rule template; leaves that name a nonterminal are placeholders.
pub type Production = Expr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    /// Nonterminals in declaration order. The first one is the start symbol.
    pub nonterminals: Vec<(Symbol, Sort)>,
    pub start: Symbol,
    pub productions: BTreeMap<Symbol, Vec<Production>>,
}

impl Grammar {
    pub fn new(nonterminals: Vec<(Symbol, Sort)>) -> Self {
        let start = nonterminals
            .first()
            .map(|(n, _)| n.clone())
            .unwrap_or_default();
        let productions = nonterminals
            .iter()
            .map(|(n, _)| (n.clone(), Vec::new()))
            .collect();
        Grammar {
            nonterminals,
            start,
            productions,
        }
    }

    pub fn add(&mut self, nonterminal: &str, production: Production) {
        let rules = self
            .productions
            .get_mut(nonterminal)
            .expect("production for undeclared nonterminal");
        if !rules.contains(&production) {
            rules.push(production);
        }
    }

    pub fn sort_of(&self, nonterminal: &str) -> Option<Sort> {
        self.nonterminals
            .iter()
            .find(|(n, _)| n == nonterminal)
            .map(|(_, s)| *s)
    }

    pub fn start_sort(&self) -> Option<Sort> {
        self.sort_of(&self.start)
    }

    pub fn rules(&self, nonterminal: &str) -> &[Production] {
        self.productions
            .get(nonterminal)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn is_nonterminal(&self, name: &str) -> bool {
        self.sort_of(name).is_some()
    }

    /// Check that placeholders name declared nonterminals at the right sort
    /// and that every production has its nonterminal's sort.
    pub fn validate(&self) -> Result<(), String> {
        if self.sort_of(&self.start).is_none() {
            return Err(format!("start symbol `{}` is not declared", self.start));
        }
        for (nt, sort) in &self.nonterminals {
            for p in self.rules(nt) {
                let ps = p.typecheck().map_err(|e| e.to_string())?;
                if ps != *sort {
                    return Err(format!("production `{p}` of `{nt}` has sort {ps}, expected {sort}"));
                }
                for (v, s) in free_variables(p) {
                    if let Some(ns) = self.sort_of(&v) {
                        if ns != s {
                            return Err(format!("placeholder `{v}` used at sort {s}"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthFun {
    pub name: Symbol,
    pub params: Vec<(Symbol, Sort)>,
    pub return_sort: Sort,
    pub grammar: Option<Grammar>,
}

impl SynthFun {
    pub fn new(name: impl Into<Symbol>, params: Vec<(Symbol, Sort)>, return_sort: Sort) -> Self {
        SynthFun {
            name: name.into(),
            params,
            return_sort,
            grammar: None,
        }
    }

    pub fn array_params(&self) -> impl Iterator<Item = &Symbol> {
        self.params
            .iter()
            .filter(|(_, s)| *s == Sort::Array)
            .map(|(n, _)| n)
    }

    pub fn scalar_params(&self, sort: Sort) -> impl Iterator<Item = &Symbol> {
        self.params
            .iter()
            .filter(move |(_, s)| *s == sort)
            .map(|(n, _)| n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub logic: Symbol,
    pub declared_vars: Vec<(Symbol, Sort)>,
    pub synth_funs: Vec<SynthFun>,
    pub constraints: Vec<Expr>,
}

impl Default for Problem {
    fn default() -> Self {
        Problem {
            logic: "ALL".to_string(),
            declared_vars: Vec::new(),
            synth_funs: Vec::new(),
            constraints: Vec::new(),
        }
    }
}

impl Problem {
    pub fn synth_fun(&self, name: &str) -> Option<&SynthFun> {
        self.synth_funs.iter().find(|f| f.name == name)
    }

    pub fn var_sort(&self, name: &str) -> Option<Sort> {
        self.declared_vars
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| *s)
    }

    /// The conjunction of all constraints.
    pub fn conjunction(&self) -> Expr {
        Expr::and(self.constraints.clone())
    }

    /// Check that every free symbol of every constraint is declared.
    pub fn check_closed(&self) -> Result<(), String> {
        for c in &self.constraints {
            for (v, s) in free_variables(c) {
                match self.var_sort(&v) {
                    Some(ds) if ds == s => {}
                    Some(ds) => return Err(format!("variable `{v}` declared {ds} but used as {s}")),
                    None => return Err(format!("undeclared variable `{v}`")),
                }
            }
            let mut bad = None;
            c.visit(&mut |e| {
                if let Expr::SynthApp(f, _, _) = e {
                    if self.synth_fun(f).is_none() && bad.is_none() {
                        bad = Some(f.clone());
                    }
                }
            });
            if let Some(f) = bad {
                return Err(format!("undeclared function `{f}`"));
            }
        }
        Ok(())
    }
}
