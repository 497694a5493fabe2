//! Structural matching of a formula into [`PrenexDepForm`] and the inverse
//! flattening back to a plain formula.
//!
//! Matching is purely syntactic: the formula must already have the shape
//! universal prefix, existential prefix, then a conjunction of dependence
//! atoms and first-order clauses. No normalization beyond two local rewrites
//! is attempted: reflexive equalities `t = t` act as truth (a positive one
//! absorbs its clause, a negative one is dropped from its clause), and
//! dependency tuples are brought into a canonical order.

use super::{free_vars, Atom, Clause, Existential, Formula, Literal, PrenexDepForm, Term};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShapeError {
    #[error("quantifier prefix is not universals-then-existentials: {0}")]
    Prefix(String),
    #[error("variable '{0}' is bound twice in the prefix")]
    DuplicateVar(String),
    #[error("ill-placed dependence atom: {0}")]
    DepAtom(String),
    #[error("matrix is not a conjunction of first-order clauses: {0}")]
    Matrix(String),
}

/// Decomposes `f` into prenex dependence form.
///
/// Existential variables without a dependence atom receive the full default
/// dependency tuple: all free variables (sorted) followed by all universals.
/// Explicit dependency tuples are deduplicated and reordered into that same
/// canonical order, which permutes arguments of the witnessing function
/// tables but never changes satisfaction.
pub fn match_prenex_dep(f: &Formula) -> Result<PrenexDepForm, ShapeError> {
    let frees: Vec<String> = free_vars(f).into_iter().collect();

    let mut universals: Vec<String> = Vec::new();
    let mut cur = f;
    while let Formula::Forall(x, body) = cur {
        universals.push(x.clone());
        cur = body;
    }
    let mut evars: Vec<String> = Vec::new();
    while let Formula::Exists(y, body) = cur {
        evars.push(y.clone());
        cur = body;
    }
    if matches!(cur, Formula::Forall(..)) {
        return Err(ShapeError::Prefix(
            "a universal quantifier occurs after an existential one".into(),
        ));
    }

    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for v in universals.iter().chain(evars.iter()) {
        if !seen.insert(v) {
            return Err(ShapeError::DuplicateVar(v.clone()));
        }
    }

    // Canonical determinant order: sorted free variables, then universals in
    // binder order. Free and bound names cannot overlap in a prenex formula.
    let canon: Vec<String> = frees.iter().chain(universals.iter()).cloned().collect();
    let canon_idx: HashMap<&str, usize> =
        canon.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let eset: BTreeSet<&str> = evars.iter().map(String::as_str).collect();

    let mut deps: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut matrix: Vec<Clause> = Vec::new();

    for conj in cur.conjuncts() {
        match conj {
            Formula::Lit(Literal { atom: Atom::Dep(dets, det), positive }) => {
                if !positive {
                    return Err(ShapeError::DepAtom(
                        "a negated dependence atom cannot appear in the matrix".into(),
                    ));
                }
                let y = match det.as_var() {
                    Some(v) if eset.contains(v) => v,
                    Some(v) => {
                        return Err(ShapeError::DepAtom(format!(
                            "determined variable '{v}' is not existentially quantified"
                        )))
                    }
                    None => {
                        return Err(ShapeError::DepAtom(format!(
                            "determined term '{det}' is not a variable"
                        )))
                    }
                };
                let mut idxs: BTreeSet<usize> = BTreeSet::new();
                for d in dets {
                    let v = d.as_var().ok_or_else(|| {
                        ShapeError::DepAtom(format!("determinant '{d}' is not a variable"))
                    })?;
                    let i = canon_idx.get(v).ok_or_else(|| {
                        ShapeError::DepAtom(format!(
                            "determinant '{v}' is neither universal nor free"
                        ))
                    })?;
                    idxs.insert(*i);
                }
                let tuple: Vec<String> = idxs.into_iter().map(|i| canon[i].clone()).collect();
                if deps.insert(y.to_string(), tuple).is_some() {
                    return Err(ShapeError::DepAtom(format!(
                        "variable '{y}' has more than one dependence atom"
                    )));
                }
            }
            other => {
                if let Some(clause) = clause_of(other)? {
                    matrix.push(clause);
                }
            }
        }
    }

    let existentials = evars
        .into_iter()
        .map(|y| {
            let deps = deps.remove(&y).unwrap_or_else(|| canon.clone());
            Existential { var: y, deps }
        })
        .collect();

    Ok(PrenexDepForm { universals, existentials, matrix })
}

/// Converts one conjunct into a clause, or `None` when it is trivially true.
fn clause_of(f: &Formula) -> Result<Option<Clause>, ShapeError> {
    let mut literals = Vec::new();
    let mut tautology = false;
    for d in f.disjuncts() {
        match d {
            Formula::Lit(l) => {
                if l.atom.is_dep() {
                    return Err(ShapeError::DepAtom(
                        "a dependence atom cannot appear inside a clause".into(),
                    ));
                }
                if let Atom::Eq(a, b) = &l.atom {
                    if a == b {
                        if l.positive {
                            tautology = true;
                        }
                        // A negative reflexive equality is false; drop it.
                        continue;
                    }
                }
                literals.push(l.clone());
            }
            Formula::And(..) => {
                return Err(ShapeError::Matrix("a conjunction occurs under a disjunction".into()))
            }
            Formula::Exists(..) | Formula::Forall(..) => {
                return Err(ShapeError::Matrix("a quantifier occurs inside the matrix".into()))
            }
            Formula::Or(..) => unreachable!("disjuncts() flattens all disjunctions"),
        }
    }
    Ok(if tautology { None } else { Some(Clause::new(literals)) })
}

/// Rebuilds a formula from a decomposition. Every dependency tuple is emitted
/// as an explicit dependence atom, so `match_prenex_dep(flatten(p)) == p`.
pub fn flatten(p: &PrenexDepForm) -> Formula {
    let mut parts: Vec<Formula> = Vec::new();
    for e in &p.existentials {
        let dets = e.deps.iter().map(Term::var).collect();
        parts.push(Formula::lit(Atom::Dep(dets, Term::var(&e.var))));
    }
    for c in &p.matrix {
        parts.push(Formula::disjoin(c.literals.iter().cloned().map(Formula::Lit).collect()));
    }
    let mut body = Formula::conjoin(parts);
    for e in p.existentials.iter().rev() {
        body = Formula::exists(&e.var, body);
    }
    for x in p.universals.iter().rev() {
        body = Formula::forall(x, body);
    }
    body
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn matched(src: &str) -> PrenexDepForm {
        match_prenex_dep(&parse_formula(src).unwrap()).unwrap()
    }

    #[test]
    fn direct_match_with_explicit_dep() {
        let p = matched("forall x. exists y. =(x,y) & y = 0");
        assert_eq!(p.universals, vec!["x"]);
        assert_eq!(p.existentials.len(), 1);
        assert_eq!(p.existentials[0].var, "y");
        assert_eq!(p.existentials[0].deps, vec!["x"]);
        assert_eq!(p.matrix.len(), 1);
        assert_eq!(p.matrix[0].literals.len(), 1);
    }

    #[test]
    fn empty_universe_of_universals_gives_empty_default_deps() {
        let p = matched("exists y1 y2. !(y1 = y2)");
        assert!(p.universals.is_empty());
        assert_eq!(p.existentials[0].deps, Vec::<String>::new());
        assert_eq!(p.existentials[1].deps, Vec::<String>::new());
        assert_eq!(p.matrix.len(), 1);
    }

    #[test]
    fn default_deps_cover_frees_and_universals() {
        // z is free; the unconstrained existential depends on z then x.
        let p = matched("forall x. exists y. z = x | y = 0");
        assert_eq!(p.existentials[0].deps, vec!["z", "x"]);
    }

    #[test]
    fn explicit_deps_are_canonicalized() {
        let p = matched("forall x1 x2. exists y. =(x2,x1,x2,y) & y = 0");
        assert_eq!(p.existentials[0].deps, vec!["x1", "x2"]);
    }

    #[test]
    fn non_prenex_is_rejected() {
        let f = parse_formula("forall x. (P(x) | (exists y. Q(y)))").unwrap();
        assert!(matches!(match_prenex_dep(&f), Err(ShapeError::Matrix(_))));
        let g = parse_formula("exists y. forall x. x = y").unwrap();
        assert!(matches!(match_prenex_dep(&g), Err(ShapeError::Prefix(_))));
    }

    #[test]
    fn misplaced_dependence_atoms_are_rejected() {
        for src in [
            "forall x. exists y. !=(x,y)",
            "forall x. exists y. =(x,y) | y = 0",
            "forall x. exists y. =(x,y) & =(x,y) & y = 0",
            "forall x. exists y. =(y,x) & y = 0",
            "forall x. exists y1 y2. =(y1,y2) & y1 = 0",
        ] {
            let f = parse_formula(src).unwrap();
            assert!(
                matches!(match_prenex_dep(&f), Err(ShapeError::DepAtom(_))),
                "{src} should be rejected"
            );
        }
    }

    #[test]
    fn duplicate_binders_are_rejected() {
        let f = parse_formula("forall x x. x = 0").unwrap();
        assert!(matches!(match_prenex_dep(&f), Err(ShapeError::DuplicateVar(_))));
    }

    #[test]
    fn reflexive_equalities_normalize() {
        // Positive t = t absorbs its clause; negative t = t vanishes.
        let p = matched("forall x. exists y. (y = y | x = 0) & (!(x = x) | y = 0)");
        assert_eq!(p.matrix.len(), 1);
        assert_eq!(p.matrix[0].literals.len(), 1);
        // An all-reflexive negative clause leaves the empty clause, falsity.
        let q = matched("forall x. !(x = x)");
        assert_eq!(q.matrix.len(), 1);
        assert!(q.matrix[0].literals.is_empty());
    }

    #[test]
    fn rematch_is_stable() {
        for src in [
            "forall x. exists y. =(x,y) & y = 0",
            "exists y1 y2. !(y1 = y2)",
            "forall x1 x2. exists y. z = x1 | y = 0",
            "forall x. exists y. (y = y | x = 0) & (!(x = x) | y = 0)",
            "forall x. exists y. =(y) & (y = 0 | !(x = max)) & E(x,x)",
            "x = 0",
            "0 = 0",
        ] {
            let f = parse_formula(src).unwrap();
            let p = match_prenex_dep(&f).unwrap();
            let p2 = match_prenex_dep(&flatten(&p)).unwrap();
            assert_eq!(p, p2, "rematch of {src}");
        }
    }

    #[test]
    fn flatten_of_empty_decomposition_is_truth() {
        let p = matched("0 = 0");
        assert!(p.matrix.is_empty());
        assert_eq!(flatten(&p).to_string(), "0 = 0");
    }

    #[test]
    fn prenex_free_vars_match_formula_free_vars() {
        let f = parse_formula("forall x. exists y. =(z,y) & (y = 0 | w = x)").unwrap();
        let p = match_prenex_dep(&f).unwrap();
        assert_eq!(
            p.free_vars().into_iter().collect::<Vec<_>>(),
            vec!["w".to_string(), "z".to_string()]
        );
    }
}
