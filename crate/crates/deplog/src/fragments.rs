//! Fragment recognition.
//!
//! `classify` reports which syntactic fragments a formula falls into:
//!
//! * prenex dependence shape: universals, then existentials each governed by
//!   one dependence atom, then a conjunction of clauses;
//! * the equality-restricted shape, where existential variables occur only in
//!   equalities with 0 or with other existential variables;
//! * the Horn shape, where each clause has at most one positive literal that
//!   contains an existential variable;
//! * the intersection of the last two, which is what the polynomial
//!   evaluation pipeline accepts.
//!
//! Every failed membership comes with witnesses naming the offending clause.

use crate::syntax::{match_prenex_dep, Atom, Clause, Formula, Literal, PrenexDepForm, Term};
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// Matrix clause index, when the problem is clause-local.
    pub clause: Option<usize>,
    pub condition: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FragmentReport {
    /// No dependence atoms anywhere.
    pub first_order: bool,
    /// Matches the prenex dependence shape.
    pub prenex_dependence: bool,
    /// Existential variables occur only as `y = 0` or `y = y'`.
    pub dstar: bool,
    /// At most one positive existential-bearing literal per clause.
    pub dhorn: bool,
    /// Both restrictions at once.
    pub bdhorn: bool,
    pub witnesses: Vec<Witness>,
}

/// Indices of clauses with two or more positive literals selected by
/// `marked`.
pub fn horn_violations(clauses: &[Clause], marked: impl Fn(&Literal) -> bool) -> Vec<usize> {
    clauses
        .iter()
        .enumerate()
        .filter(|(_, c)| c.literals.iter().filter(|l| marked(l)).count() > 1)
        .map(|(i, _)| i)
        .collect()
}

pub fn classify(f: &Formula) -> FragmentReport {
    let first_order = f.is_first_order();
    match match_prenex_dep(f) {
        Ok(p) => FragmentReport { first_order, ..classify_prenex(&p) },
        Err(e) => FragmentReport {
            first_order,
            prenex_dependence: false,
            dstar: false,
            dhorn: false,
            bdhorn: false,
            witnesses: vec![Witness { clause: None, condition: e.to_string() }],
        },
    }
}

/// Classifies an already-matched prenex decomposition.
pub fn classify_prenex(p: &PrenexDepForm) -> FragmentReport {
    let eset: BTreeSet<&str> = p.existentials.iter().map(|e| e.var.as_str()).collect();
    let mut witnesses = Vec::new();
    let mut dstar = true;
    for (i, clause) in p.matrix.iter().enumerate() {
        for lit in &clause.literals {
            if let Some(bad) = existential_misuse(&lit.atom, &eset) {
                dstar = false;
                witnesses.push(Witness { clause: Some(i), condition: bad });
            }
        }
    }
    let marked =
        |l: &Literal| l.positive && l.atom.vars().iter().any(|v| eset.contains(v.as_str()));
    let horn_bad = horn_violations(&p.matrix, marked);
    let dhorn = horn_bad.is_empty();
    for i in horn_bad {
        witnesses.push(Witness {
            clause: Some(i),
            condition: "more than one positive literal contains an existential variable".into(),
        });
    }
    FragmentReport {
        first_order: eset.is_empty(),
        prenex_dependence: true,
        dstar,
        dhorn,
        bdhorn: dstar && dhorn,
        witnesses,
    }
}

fn is_existential_var(t: &Term, eset: &BTreeSet<&str>) -> bool {
    matches!(t, Term::Var(v) if eset.contains(v.as_str()))
}

/// Explains why an atom breaks the equality restriction, if it does.
fn existential_misuse(atom: &Atom, eset: &BTreeSet<&str>) -> Option<String> {
    let offenders: Vec<String> =
        atom.vars().into_iter().filter(|v| eset.contains(v.as_str())).collect();
    if offenders.is_empty() {
        return None;
    }
    if let Atom::Eq(l, r) = atom {
        let fine = (is_existential_var(l, eset) && is_existential_var(r, eset))
            || (is_existential_var(l, eset) && r.is_zero())
            || (l.is_zero() && is_existential_var(r, eset));
        if fine {
            return None;
        }
    }
    Some(format!(
        "existential {} {} occur{} in '{atom}' rather than an equality with 0 or another existential variable",
        if offenders.len() == 1 { "variable" } else { "variables" },
        offenders.join(", "),
        if offenders.len() == 1 { "s" } else { "" },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn report(src: &str) -> FragmentReport {
        classify(&parse_formula(src).unwrap())
    }

    #[test]
    fn accepts_a_fully_restricted_sentence() {
        let r = report(
            "forall x1 x2. exists y1 y2. =(x1,y1) & =(x2,y2) & (x1 = x2 -> y1 = y2) & y2 = 0",
        );
        assert!(r.prenex_dependence && r.dstar && r.dhorn && r.bdhorn);
        assert!(!r.first_order);
        assert!(r.witnesses.is_empty());
    }

    #[test]
    fn zero_can_sit_on_either_side() {
        let r = report("forall x. exists y. =(x,y) & 0 = y");
        assert!(r.dstar && r.bdhorn);
    }

    #[test]
    fn equality_with_a_universal_breaks_the_restriction() {
        let r = report("forall x. exists y. =(x,y) & y = x");
        assert!(!r.dstar && r.dhorn && !r.bdhorn);
        assert!(r.witnesses.iter().any(|w| w.condition.contains("'y = x'")));
    }

    #[test]
    fn equality_with_max_breaks_the_restriction() {
        let r = report("forall x. exists y. =(x,y) & y = max");
        assert!(!r.dstar);
    }

    #[test]
    fn relation_atoms_over_existentials_break_the_restriction() {
        let r = report(
            "forall x0 x1 x2. exists y0 y1 y2. =(x0,y0) & =(x1,y1) & =(x2,y2) \
             & (x1 = x2 -> y1 = y2) & (y1 = y2 -> x1 = x2) & E(x0,y0) & (y0 = x1 -> P(y1))",
        );
        assert!(r.prenex_dependence);
        assert!(r.dhorn, "every clause has at most one positive existential literal");
        assert!(!r.dstar && !r.bdhorn);
        assert!(r.witnesses.iter().any(|w| w.condition.contains("E(x0,y0)")));
        assert!(r.witnesses.iter().any(|w| w.condition.contains("P(y1)")));
    }

    #[test]
    fn two_positive_existential_literals_break_horn() {
        let r = report("forall x. exists y1 y2. =(x,y1) & =(x,y2) & (y1 = 0 | y2 = 0)");
        assert!(r.dstar && !r.dhorn && !r.bdhorn);
        assert_eq!(r.witnesses.len(), 1);
        assert_eq!(r.witnesses[0].clause, Some(0));
    }

    #[test]
    fn positive_universal_literals_do_not_count_against_horn() {
        let r = report("forall x1 x2. exists y. =(y) & (x1 = x2 | y = 0 | x1 = 0)");
        assert!(r.dhorn && r.dstar && r.bdhorn);
    }

    #[test]
    fn non_prenex_shapes_are_reported() {
        let r = report("exists y. forall x. x = y");
        assert!(!r.prenex_dependence && !r.dstar && !r.dhorn && !r.bdhorn);
        assert!(r.first_order);
        assert_eq!(r.witnesses.len(), 1);
        assert_eq!(r.witnesses[0].clause, None);
    }

    #[test]
    fn first_order_universal_horn_is_trivially_inside() {
        let r = report("forall x. x = 0 | succ(x,max)");
        assert!(r.first_order && r.prenex_dependence && r.bdhorn);
    }

    #[test]
    fn misplaced_dependence_atom_is_not_prenex() {
        let r = report("forall x. exists y. =(x,y) | y = 0");
        assert!(!r.prenex_dependence);
        assert!(!r.first_order);
    }
}
