//! Formula syntax: terms, atoms, literals, clause and prenex types, the text
//! parser, a printer, and free-variable computation.
//!
//! Formulae are kept in negation normal form by construction: negation exists
//! only as the `positive` flag on [`Literal`], never as a tree node.

mod parse;
mod prenex;
mod print;

pub(crate) use parse::{lex, Parser, SpannedTok, Tok};
pub use parse::{parse_formula, ParseError};
pub use prenex::{flatten, match_prenex_dep, ShapeError};

use serde::Serialize;
use std::collections::BTreeSet;

/// Reserved constant naming the least element of every structure.
pub const ZERO: &str = "0";
/// Reserved constant naming the greatest element of every structure.
pub const MAX: &str = "max";
/// Reserved binary relation pairing each element with its successor.
pub const SUCC: &str = "succ";

/// A first-order term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Term {
    Var(String),
    /// Only `0` and `max` are constructible from the surface grammar.
    Const(String),
    /// Function application; arity is fixed per name within one formula.
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn zero() -> Term {
        Term::Const(ZERO.to_string())
    }

    pub fn max() -> Term {
        Term::Const(MAX.to_string())
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(name.into(), args)
    }

    /// Collects variable names occurring in the term.
    pub fn vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::App(_, args) => {
                for a in args {
                    a.vars_into(out);
                }
            }
        }
    }

    /// The variable name, if the term is a bare variable.
    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    /// True for the constant `0`.
    pub fn is_zero(&self) -> bool {
        matches!(self, Term::Const(c) if c == ZERO)
    }
}

/// An atomic formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Atom {
    /// `t1 = t2`.
    Eq(Term, Term),
    /// `R(t1, .., tn)`; arity is fixed per name within one formula.
    Rel(String, Vec<Term>),
    /// `=(t1, .., tn)`: the last term is determined by the others.
    /// An empty determinant list is the constancy atom `=(t)`.
    Dep(Vec<Term>, Term),
}

impl Atom {
    /// All terms of the atom, determinants before the determined term.
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Eq(l, r) => vec![l, r],
            Atom::Rel(_, args) => args.iter().collect(),
            Atom::Dep(dets, det) => {
                let mut v: Vec<&Term> = dets.iter().collect();
                v.push(det);
                v
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for t in self.terms() {
            t.vars_into(&mut out);
        }
        out
    }

    pub fn is_dep(&self) -> bool {
        matches!(self, Atom::Dep(..))
    }
}

/// An atom with a polarity. Negation never nests deeper than this.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Literal {
        Literal { atom, positive: true }
    }

    pub fn neg(atom: Atom) -> Literal {
        Literal { atom, positive: false }
    }
}

/// A formula in negation normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Formula {
    Lit(Literal),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn lit(atom: Atom) -> Formula {
        Formula::Lit(Literal::pos(atom))
    }

    pub fn nlit(atom: Atom) -> Formula {
        Formula::Lit(Literal::neg(atom))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn exists(v: impl Into<String>, f: Formula) -> Formula {
        Formula::Exists(v.into(), Box::new(f))
    }

    pub fn forall(v: impl Into<String>, f: Formula) -> Formula {
        Formula::Forall(v.into(), Box::new(f))
    }

    /// Conjunction of all formulae in `parts`; `0 = 0` when empty.
    pub fn conjoin(parts: Vec<Formula>) -> Formula {
        let mut it = parts.into_iter();
        match it.next() {
            None => Formula::lit(Atom::Eq(Term::zero(), Term::zero())),
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Disjunction of all formulae in `parts`; `!(0 = 0)` when empty.
    pub fn disjoin(parts: Vec<Formula>) -> Formula {
        let mut it = parts.into_iter();
        match it.next() {
            None => Formula::nlit(Atom::Eq(Term::zero(), Term::zero())),
            Some(first) => it.fold(first, Formula::or),
        }
    }

    /// The maximal conjunction at the root, flattened left to right.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::And(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    /// The maximal disjunction at the root, flattened left to right.
    pub fn disjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::Or(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    /// True when no dependence atom occurs anywhere in the formula.
    pub fn is_first_order(&self) -> bool {
        match self {
            Formula::Lit(l) => !l.atom.is_dep(),
            Formula::And(l, r) | Formula::Or(l, r) => l.is_first_order() && r.is_first_order(),
            Formula::Exists(_, f) | Formula::Forall(_, f) => f.is_first_order(),
        }
    }
}

/// Free variables of a formula. Dependence atoms contribute the variables of
/// all their terms, determinants and determined alike.
pub fn free_vars(f: &Formula) -> BTreeSet<String> {
    match f {
        Formula::Lit(l) => l.atom.vars(),
        Formula::And(l, r) | Formula::Or(l, r) => {
            let mut s = free_vars(l);
            s.extend(free_vars(r));
            s
        }
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let mut s = free_vars(g);
            s.remove(v);
            s
        }
    }
}

/// A disjunction of first-order literals. The empty clause denotes falsity.
///
/// Invariant: no literal is a dependence atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Clause {
    pub literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Clause {
        debug_assert!(literals.iter().all(|l| !l.atom.is_dep()));
        Clause { literals }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for l in &self.literals {
            out.extend(l.atom.vars());
        }
        out
    }
}

/// One existentially quantified variable together with the variables its
/// value is a function of.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Existential {
    pub var: String,
    /// Subsequence of free variables (sorted) followed by universals, in that
    /// canonical order, with no duplicates.
    pub deps: Vec<String>,
}

/// A formula decomposed into universal prefix, existential block with
/// dependency tuples, and a clause matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PrenexDepForm {
    pub universals: Vec<String>,
    pub existentials: Vec<Existential>,
    pub matrix: Vec<Clause>,
}

impl PrenexDepForm {
    /// Free variables of the decomposed formula, sorted.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let bound: BTreeSet<&str> = self
            .universals
            .iter()
            .map(String::as_str)
            .chain(self.existentials.iter().map(|e| e.var.as_str()))
            .collect();
        let mut out = BTreeSet::new();
        for e in &self.existentials {
            for d in &e.deps {
                if !bound.contains(d.as_str()) {
                    out.insert(d.clone());
                }
            }
        }
        for c in &self.matrix {
            for v in c.vars() {
                if !bound.contains(v.as_str()) {
                    out.insert(v);
                }
            }
        }
        out
    }
}

/// `pretty_print` renders a formula such that parsing the output yields a
/// structurally identical tree.
pub fn pretty_print(f: &Formula) -> String {
    f.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Term {
        Term::var("x")
    }

    fn y() -> Term {
        Term::var("y")
    }

    #[test]
    fn free_vars_of_dep_atom_covers_all_terms() {
        let f = Formula::lit(Atom::Dep(vec![x()], y()));
        let fv = free_vars(&f);
        assert_eq!(fv.into_iter().collect::<Vec<_>>(), vec!["x", "y"]);
    }

    #[test]
    fn free_vars_of_sentence_is_empty() {
        let f = Formula::forall("x", Formula::exists("y", Formula::lit(Atom::Dep(vec![x()], y()))));
        assert!(free_vars(&f).is_empty());
    }

    #[test]
    fn free_vars_under_partial_binding() {
        // forall x. (z = x | =(x,y)) leaves z and y free.
        let f = Formula::forall(
            "x",
            Formula::or(
                Formula::lit(Atom::Eq(Term::var("z"), x())),
                Formula::lit(Atom::Dep(vec![x()], y())),
            ),
        );
        let fv = free_vars(&f);
        assert_eq!(fv.into_iter().collect::<Vec<_>>(), vec!["y", "z"]);
    }

    #[test]
    fn conjuncts_flatten_nested_ands() {
        let a = Formula::lit(Atom::Eq(x(), Term::zero()));
        let b = Formula::lit(Atom::Eq(y(), Term::zero()));
        let c = Formula::lit(Atom::Eq(x(), y()));
        let f = Formula::and(Formula::and(a.clone(), b.clone()), c.clone());
        assert_eq!(f.conjuncts(), vec![&a, &b, &c]);
        let g = Formula::and(a.clone(), Formula::and(b.clone(), c.clone()));
        assert_eq!(g.conjuncts(), vec![&a, &b, &c]);
    }

    #[test]
    fn first_order_detection() {
        let fo = Formula::forall("x", Formula::lit(Atom::Eq(x(), Term::zero())));
        assert!(fo.is_first_order());
        let dep = Formula::exists("y", Formula::lit(Atom::Dep(vec![], y())));
        assert!(!dep.is_first_order());
    }
}
