//! Grounding second-order Horn sentences to propositional Horn formulae,
//! the linear-time Horn solver, and the polynomial evaluation pipeline for
//! the restricted dependence fragment.
//!
//! `eval_poly` chains the pieces: translate the sentence to agreement
//! relations, instantiate the universal prefix over the whole universe,
//! unit-propagate, and search for a value assignment realizing the
//! propagated agreement pattern. Propositional satisfiability alone does
//! not finish the job: agreement atoms assert equalities between function
//! values, and a clause set can be propositionally consistent while
//! needing more distinct values than the universe has. The realization
//! search in [`realize`] closes that gap.

mod realize;

use crate::fragments::{classify, classify_prenex, Witness};
use crate::structure::{
    eval_fo_atom, eval_term, Assignment, Structure, StructureError, Team, TermError,
};
use crate::syntax::{match_prenex_dep, Atom, Formula, PrenexDepForm, MAX, SUCC, ZERO};
use crate::teamsem::{skolem_eval, EvalError, EvalLimits};
use crate::translate::{bdhorn_to_esohorn, openize, EsoError, EsoHornSentence, TranslateError};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// A propositional variable: one declared relation applied to one value
/// tuple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct GroundAtom {
    pub relation: String,
    pub tuple: Vec<usize>,
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.relation)?;
        for (i, v) in self.tuple.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// One grounded Horn clause: negative atom ids, at most one positive atom
/// id, and the index of the clause it was instantiated from. Ids are
/// 1-based indexes into the owning formula's atom table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroundClause {
    pub neg: Vec<usize>,
    pub pos: Option<usize>,
    pub src: usize,
}

impl GroundClause {
    /// Builds a clause with the negative ids sorted and deduplicated.
    pub fn new(mut neg: Vec<usize>, pos: Option<usize>, src: usize) -> GroundClause {
        neg.sort_unstable();
        neg.dedup();
        GroundClause { neg, pos, src }
    }
}

/// A propositional Horn formula together with the dictionary naming each
/// atom id. Atoms are sorted, so id order is (relation, tuple) order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropHornFormula {
    /// `atoms[i]` is the atom with id `i + 1`.
    pub atoms: Vec<GroundAtom>,
    pub clauses: Vec<GroundClause>,
}

impl PropHornFormula {
    pub fn atom(&self, id: usize) -> &GroundAtom {
        &self.atoms[id - 1]
    }

    pub fn id_of(&self, a: &GroundAtom) -> Option<usize> {
        self.atoms.binary_search(a).ok().map(|i| i + 1)
    }

    /// Human-readable form of one clause, for reports.
    pub fn show_clause(&self, idx: usize) -> String {
        let c = &self.clauses[idx];
        let mut parts: Vec<String> = c.neg.iter().map(|&i| format!("!{}", self.atom(i))).collect();
        if let Some(p) = c.pos {
            parts.push(self.atom(p).to_string());
        }
        if parts.is_empty() {
            "false".to_string()
        } else {
            parts.join(" | ")
        }
    }

    /// DIMACS CNF with a comment line naming every atom. Clause lines are
    /// sorted, so the output does not depend on construction order.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        for (i, a) in self.atoms.iter().enumerate() {
            out.push_str(&format!("c atom {} {}\n", i + 1, a));
        }
        out.push_str(&format!("p cnf {} {}\n", self.atoms.len(), self.clauses.len()));
        let mut lines: Vec<Vec<i64>> = self
            .clauses
            .iter()
            .map(|c| {
                let mut lits: Vec<i64> = c.neg.iter().map(|&a| -(a as i64)).collect();
                if let Some(p) = c.pos {
                    lits.push(p as i64);
                }
                lits
            })
            .collect();
        lines.sort_unstable();
        for line in lines {
            for lit in line {
                out.push_str(&format!("{lit} "));
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Outcome of the Horn solver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HornResult {
    pub satisfiable: bool,
    /// Least model, present exactly when satisfiable.
    pub minimal_model: Option<BTreeSet<usize>>,
    /// Index of a violated clause, present exactly when unsatisfiable.
    pub contradiction_witness: Option<usize>,
}

impl HornResult {
    fn sat(model: BTreeSet<usize>) -> HornResult {
        HornResult { satisfiable: true, minimal_model: Some(model), contradiction_witness: None }
    }

    fn unsat(clause: usize) -> HornResult {
        HornResult { satisfiable: false, minimal_model: None, contradiction_witness: Some(clause) }
    }
}

#[derive(Debug, Error)]
pub enum GroundError {
    #[error(transparent)]
    Sentence(#[from] EsoError),
    #[error(transparent)]
    Term(#[from] TermError),
}

/// Advances a little-endian odometer over `{0,..,n-1}^len`; false on wrap.
fn advance(tuple: &mut [usize], n: usize) -> bool {
    for slot in tuple.iter_mut() {
        *slot += 1;
        if *slot < n {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Instantiates the universal prefix over the whole universe and reduces
/// each clause instance: a true first-order literal satisfies the instance
/// and drops it, false first-order literals are deleted, and atoms over
/// declared relations become propositional variables. An instance reduced
/// to nothing is kept as the empty clause, which forces unsatisfiability.
pub fn ground(e: &EsoHornSentence, s: &Structure) -> Result<PropHornFormula, GroundError> {
    e.validate()?;
    let so: BTreeSet<&str> = e.so_rels.iter().map(|r| r.name.as_str()).collect();
    struct Raw {
        neg: Vec<GroundAtom>,
        pos: Option<GroundAtom>,
        src: usize,
    }
    let mut raws: Vec<Raw> = Vec::new();
    let mut atoms: BTreeSet<GroundAtom> = BTreeSet::new();
    for (ci, clause) in e.clauses.iter().enumerate() {
        let mut tuple = vec![0usize; e.universals.len()];
        loop {
            let mut asg = Assignment::new();
            for (v, &a) in e.universals.iter().zip(&tuple) {
                asg.insert(v.clone(), a);
            }
            let mut neg = Vec::new();
            let mut pos = None;
            let mut dropped = false;
            for lit in &clause.literals {
                let declared = match &lit.atom {
                    Atom::Rel(name, args) if so.contains(name.as_str()) => {
                        let mut vals = Vec::with_capacity(args.len());
                        for t in args {
                            vals.push(eval_term(s, &asg, t)?);
                        }
                        Some(GroundAtom { relation: name.clone(), tuple: vals })
                    }
                    _ => None,
                };
                match declared {
                    Some(a) => {
                        if lit.positive {
                            debug_assert!(pos.is_none(), "validated clause has one positive");
                            pos = Some(a);
                        } else {
                            neg.push(a);
                        }
                    }
                    None => {
                        if eval_fo_atom(s, &asg, &lit.atom)? == lit.positive {
                            dropped = true;
                            break;
                        }
                    }
                }
            }
            if !dropped {
                atoms.extend(neg.iter().cloned());
                atoms.extend(pos.clone());
                raws.push(Raw { neg, pos, src: ci });
            }
            if !advance(&mut tuple, s.size) {
                break;
            }
        }
    }
    let ids: BTreeMap<&GroundAtom, usize> = atoms.iter().zip(1..).collect();
    let clauses = raws
        .iter()
        .map(|r| {
            GroundClause::new(
                r.neg.iter().map(|a| ids[a]).collect(),
                r.pos.as_ref().map(|a| ids[a]),
                r.src,
            )
        })
        .collect();
    Ok(PropHornFormula { atoms: atoms.into_iter().collect(), clauses })
}

/// Satisfiability and least model of a propositional Horn formula by
/// counter-based unit propagation, linear in the total number of literal
/// occurrences.
pub fn horn_sat(h: &PropHornFormula) -> HornResult {
    let m = h.atoms.len();
    let mut watch: Vec<Vec<usize>> = vec![Vec::new(); m + 1];
    let mut pending: Vec<usize> = Vec::with_capacity(h.clauses.len());
    let mut truth = vec![false; m + 1];
    let mut queue: Vec<usize> = Vec::new();
    for (ci, c) in h.clauses.iter().enumerate() {
        debug_assert!(c.neg.iter().chain(&c.pos).all(|&a| a >= 1 && a <= m));
        pending.push(c.neg.len());
        for &a in &c.neg {
            watch[a].push(ci);
        }
        if c.neg.is_empty() {
            match c.pos {
                None => return HornResult::unsat(ci),
                Some(p) => {
                    if !truth[p] {
                        truth[p] = true;
                        queue.push(p);
                    }
                }
            }
        }
    }
    let mut qi = 0;
    while qi < queue.len() {
        let p = queue[qi];
        qi += 1;
        for &ci in &watch[p] {
            pending[ci] -= 1;
            if pending[ci] == 0 {
                match h.clauses[ci].pos {
                    None => return HornResult::unsat(ci),
                    Some(q) => {
                        if !truth[q] {
                            truth[q] = true;
                            queue.push(q);
                        }
                    }
                }
            }
        }
    }
    HornResult::sat((1..=m).filter(|&i| truth[i]).collect())
}

/// Grounds the sentence and solves. For genuinely second-order semantics
/// the least model settles truth, so no realization step is needed here.
pub fn eval_esohorn(s: &Structure, e: &EsoHornSentence) -> Result<bool, GroundError> {
    Ok(horn_sat(&ground(e, s)?).satisfiable)
}

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("not in the evaluable fragment")]
    NotBdhorn { witnesses: Vec<Witness> },
    #[error("formula has free variables ({}) and needs a team over them", .0.join(", "))]
    TeamRequired(Vec<String>),
    #[error("team domain is missing free variable '{0}'")]
    TeamDomain(String),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// What the polynomial evaluator did, with the propositional instance when
/// the grounding path was taken.
#[derive(Debug, Clone, Serialize)]
pub struct PolyRun {
    pub value: bool,
    /// True when the small-structure guard diverted to the Skolem search.
    pub used_fallback: bool,
    pub ground: Option<PropHornFormula>,
    pub horn: Option<HornResult>,
}

/// Evaluates a sentence or open formula of the restricted fragment in time
/// polynomial in the structure. Sentences go through translate, ground and
/// unit-propagate, then a realization search over the propagated agreement
/// pattern; structures with at most as many elements as there are
/// existential variables take the Skolem search instead, since agreement
/// relations cannot count that tightly. Open formulae adjoin the team as a
/// relation, guard every clause with it, and reduce to the sentence case.
pub fn eval_poly(
    s: &Structure,
    f: &Formula,
    x: Option<&Team>,
    limits: &EvalLimits,
) -> Result<bool, PolyError> {
    Ok(eval_poly_detailed(s, f, x, limits)?.value)
}

/// As [`eval_poly`], but reports the path taken and the intermediate
/// propositional formula.
pub fn eval_poly_detailed(
    s: &Structure,
    f: &Formula,
    x: Option<&Team>,
    limits: &EvalLimits,
) -> Result<PolyRun, PolyError> {
    let p = match match_prenex_dep(f) {
        Ok(p) => p,
        Err(_) => return Err(PolyError::NotBdhorn { witnesses: classify(f).witnesses }),
    };
    let report = classify_prenex(&p);
    if !report.bdhorn {
        return Err(PolyError::NotBdhorn { witnesses: report.witnesses });
    }
    if let Some(t) = x {
        // The empty team satisfies every formula.
        if t.is_empty() {
            return Ok(PolyRun { value: true, used_fallback: false, ground: None, horn: None });
        }
    }
    let frees = p.free_vars();
    if frees.is_empty() {
        return run_sentence(s, &p, limits);
    }
    let t = x.ok_or_else(|| PolyError::TeamRequired(frees.iter().cloned().collect()))?;
    for v in &frees {
        if !t.domain.iter().any(|d| d == v) {
            return Err(PolyError::TeamDomain(v.clone()));
        }
    }
    let cols: Vec<String> = frees.iter().cloned().collect();
    let rel = fresh_rel_name(s, &p);
    let extended = s.clone().with_relation(rel.clone(), t.tuples_in(&cols))?;
    run_sentence(&extended, &openize(&p, &rel), limits)
}

fn run_sentence(
    s: &Structure,
    p: &PrenexDepForm,
    limits: &EvalLimits,
) -> Result<PolyRun, PolyError> {
    let k = p.existentials.len();
    if s.size < k + 1 {
        let value = skolem_eval(s, p, limits)?;
        return Ok(PolyRun { value, used_fallback: true, ground: None, horn: None });
    }
    let (e, image) = bdhorn_to_esohorn(p)?;
    let mut instances: u64 = 1;
    for _ in &e.universals {
        instances = instances
            .checked_mul(s.size as u64)
            .ok_or_else(|| EvalError::Resource("grounding budget exceeded".into()))?;
    }
    if instances > limits.max_nodes {
        return Err(EvalError::Resource("grounding budget exceeded".into()).into());
    }
    let h = ground(&e, s)?;
    let r = horn_sat(&h);
    let value = if r.satisfiable { realize::realize(&h, &image, s.size, limits)? } else { false };
    Ok(PolyRun { value, used_fallback: false, ground: Some(h), horn: Some(r) })
}

/// A relation name unused by both the structure and the formula.
fn fresh_rel_name(s: &Structure, p: &PrenexDepForm) -> String {
    let mut used: BTreeSet<String> = s.relations.keys().cloned().collect();
    used.extend([ZERO.to_string(), MAX.to_string(), SUCC.to_string()]);
    for c in &p.matrix {
        for lit in &c.literals {
            if let Atom::Rel(name, _) = &lit.atom {
                used.insert(name.clone());
            }
            for t in lit.atom.terms() {
                collect_app_names(t, &mut used);
            }
        }
    }
    for i in 0.. {
        let cand = if i == 0 { "R".to_string() } else { format!("R{i}") };
        if !used.contains(&cand) {
            return cand;
        }
    }
    unreachable!()
}

fn collect_app_names(t: &crate::syntax::Term, used: &mut BTreeSet<String>) {
    if let crate::syntax::Term::App(name, args) = t {
        used.insert(name.clone());
        for a in args {
            collect_app_names(a, used);
        }
    }
}
