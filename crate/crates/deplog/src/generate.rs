//! Seeded generators for structures, teams and formulae, used by the
//! property and acceptance suites. Every generator takes its rng
//! explicitly, so a failing case replays from the seed that produced it.
//!
//! The sentence grammar stays inside the evaluable fragment by
//! construction: existential variables appear only in dependence atoms, in
//! equalities with 0 or with each other, and each clause carries at most
//! one positive literal over them. The two mutation helpers each break one
//! of those guarantees in a single step.

use crate::structure::{Structure, Team};
use crate::syntax::{flatten, match_prenex_dep, Atom, Clause, Formula, Literal, Term, SUCC};
use crate::translate::{EsoHornSentence, EsoRel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A structure of size `n` with each named relation filled independently
/// tuple by tuple at density one half.
pub fn gen_structure<R: Rng>(rng: &mut R, n: usize, rels: &[(&str, usize)]) -> Structure {
    let mut s = Structure::new(n).expect("nonempty universe");
    for &(name, arity) in rels {
        let mut tuples = Vec::new();
        for idx in 0..n.pow(arity as u32) {
            if rng.gen_bool(0.5) {
                let mut t = Vec::with_capacity(arity);
                let mut rest = idx;
                for _ in 0..arity {
                    t.push(rest % n);
                    rest /= n;
                }
                tuples.push(t);
            }
        }
        s = s.with_relation(name, tuples).expect("fresh relation name");
    }
    s
}

/// A team over the given columns with at most `max_rows` random rows.
pub fn gen_team<R: Rng>(rng: &mut R, domain: &[&str], n: usize, max_rows: usize) -> Team {
    let want = rng.gen_range(0..=max_rows);
    let mut tuples: BTreeSet<Vec<usize>> = BTreeSet::new();
    for _ in 0..want {
        tuples.insert((0..domain.len()).map(|_| rng.gen_range(0..n)).collect());
    }
    Team::from_relation(domain.iter().map(|d| d.to_string()).collect(), &tuples)
}

fn fo_term<R: Rng>(rng: &mut R, pool: &[String]) -> Term {
    let k = rng.gen_range(0..5);
    if k < 3 && !pool.is_empty() {
        Term::var(&pool[rng.gen_range(0..pool.len())])
    } else if k == 3 {
        Term::zero()
    } else {
        Term::max()
    }
}

fn fo_literal<R: Rng>(rng: &mut R, pool: &[String]) -> Literal {
    let atom = match rng.gen_range(0..3) {
        0 => Atom::Eq(fo_term(rng, pool), fo_term(rng, pool)),
        1 => Atom::Rel("E".into(), vec![fo_term(rng, pool), fo_term(rng, pool)]),
        _ => Atom::Rel(SUCC.into(), vec![fo_term(rng, pool), fo_term(rng, pool)]),
    };
    if rng.gen_bool(0.5) {
        Literal::pos(atom)
    } else {
        Literal::neg(atom)
    }
}

/// An equality of the shapes existential variables may take part in.
fn ex_atom<R: Rng>(rng: &mut R, exs: &[String]) -> Atom {
    if exs.len() >= 2 && rng.gen_bool(0.5) {
        let i = rng.gen_range(0..exs.len());
        let mut j = rng.gen_range(0..exs.len() - 1);
        if j >= i {
            j += 1;
        }
        Atom::Eq(Term::var(&exs[i]), Term::var(&exs[j]))
    } else {
        let y = Term::var(&exs[rng.gen_range(0..exs.len())]);
        if rng.gen_bool(0.5) {
            Atom::Eq(y, Term::zero())
        } else {
            Atom::Eq(Term::zero(), y)
        }
    }
}

fn gen_fragment_clause<R: Rng>(
    rng: &mut R,
    pool: &[String],
    exs: &[String],
    force_positive: bool,
) -> Formula {
    let mut lits: Vec<Formula> = Vec::new();
    if force_positive || rng.gen_bool(0.6) {
        lits.push(Formula::lit(ex_atom(rng, exs)));
    }
    for _ in 0..rng.gen_range(0..=2) {
        if rng.gen_bool(0.4) {
            lits.push(Formula::nlit(ex_atom(rng, exs)));
        } else {
            lits.push(Formula::Lit(fo_literal(rng, pool)));
        }
    }
    if lits.is_empty() {
        lits.push(Formula::Lit(fo_literal(rng, pool)));
    }
    Formula::disjoin(lits)
}

fn gen_fragment(rng: &mut impl Rng, free_count: usize) -> Formula {
    let frees: Vec<String> = (1..=free_count).map(|i| format!("z{i}")).collect();
    let unis: Vec<String> = (1..=rng.gen_range(0..=2)).map(|i| format!("x{i}")).collect();
    let exs: Vec<String> = (1..=rng.gen_range(1..=3)).map(|i| format!("y{i}")).collect();
    let dets: Vec<String> = frees.iter().chain(&unis).cloned().collect();
    let mut parts: Vec<Formula> = Vec::new();
    for (i, y) in exs.iter().enumerate() {
        // The first determinant tuple keeps every free variable so that
        // open requests really produce open formulae.
        let mut args: Vec<Term> = dets
            .iter()
            .filter(|d| (i == 0 && frees.iter().any(|z| z == *d)) || rng.gen_bool(0.5))
            .map(Term::var)
            .collect();
        if rng.gen_bool(0.2) && (i != 0 || frees.is_empty()) {
            args.clear();
        }
        parts.push(Formula::lit(Atom::Dep(args, Term::var(y))));
    }
    let clause_count = rng.gen_range(1..=4);
    for ci in 0..clause_count {
        parts.push(gen_fragment_clause(rng, &dets, &exs, ci == 0));
    }
    let mut f = Formula::conjoin(parts);
    for y in exs.iter().rev() {
        f = Formula::exists(y.clone(), f);
    }
    for x in unis.iter().rev() {
        f = Formula::forall(x.clone(), f);
    }
    f
}

/// A random sentence of the evaluable fragment: at most 2 universal and 3
/// existential variables and 4 clauses, over the vocabulary `{E, succ}`.
pub fn gen_bdhorn_sentence<R: Rng>(rng: &mut R) -> Formula {
    gen_fragment(rng, 0)
}

/// As [`gen_bdhorn_sentence`], with 1 or 2 free variables.
pub fn gen_open_bdhorn<R: Rng>(rng: &mut R) -> Formula {
    let frees = rng.gen_range(1..=2);
    gen_fragment(rng, frees)
}

/// Plants an existential variable inside a relation atom, which no formula
/// of the restricted shape may contain.
pub fn break_dstar<R: Rng>(rng: &mut R, f: &Formula) -> Formula {
    let mut p = match_prenex_dep(f).expect("mutation input stays prenex");
    let y = p.existentials.first().expect("generator emits an existential").var.clone();
    let mut spots: Vec<(usize, usize)> = Vec::new();
    for (ci, c) in p.matrix.iter().enumerate() {
        for (li, l) in c.literals.iter().enumerate() {
            if matches!(&l.atom, Atom::Rel(_, args) if !args.is_empty()) {
                spots.push((ci, li));
            }
        }
    }
    if spots.is_empty() {
        let lit = Literal::neg(Atom::Rel("E".into(), vec![Term::var(&y), Term::zero()]));
        if p.matrix.is_empty() {
            p.matrix.push(Clause::new(vec![lit]));
        } else {
            let ci = rng.gen_range(0..p.matrix.len());
            p.matrix[ci].literals.push(lit);
        }
    } else {
        let (ci, li) = spots[rng.gen_range(0..spots.len())];
        if let Atom::Rel(_, args) = &mut p.matrix[ci].literals[li].atom {
            let slot = rng.gen_range(0..args.len());
            args[slot] = Term::var(&y);
        }
    }
    flatten(&p)
}

/// Gives some clause a second positive literal over an existential
/// variable, breaking the one-positive restriction.
pub fn break_dhorn<R: Rng>(rng: &mut R, f: &Formula) -> Formula {
    let mut p = match_prenex_dep(f).expect("mutation input stays prenex");
    let y = p.existentials.first().expect("generator emits an existential").var.clone();
    let enames: BTreeSet<String> = p.existentials.iter().map(|e| e.var.clone()).collect();
    let targets: Vec<usize> = p
        .matrix
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            c.literals
                .iter()
                .any(|l| l.positive && l.atom.vars().iter().any(|v| enames.contains(v)))
        })
        .map(|(ci, _)| ci)
        .collect();
    let extra = Literal::pos(Atom::Eq(Term::var(&y), Term::zero()));
    match targets.first() {
        Some(_) => {
            let ci = targets[rng.gen_range(0..targets.len())];
            p.matrix[ci].literals.push(extra);
        }
        None => {
            // No clause carries a positive existential literal yet, so one
            // insertion cannot break the bound; plant a clause with two.
            let pair = vec![extra.clone(), extra];
            p.matrix.push(Clause::new(pair));
        }
    }
    flatten(&p)
}

fn so_atom<R: Rng>(rng: &mut R, rels: &[EsoRel], pool: &[String]) -> Atom {
    let r = &rels[rng.gen_range(0..rels.len())];
    Atom::Rel(r.name.clone(), (0..r.arity).map(|_| fo_term(rng, pool)).collect())
}

/// A random second-order Horn sentence: one or two declared relations of
/// arity at most 2, at most 2 universal variables, at most 3 clauses.
/// Constant and repeated arguments come up on purpose, to exercise the
/// flattening done by the reverse translation.
pub fn gen_esohorn<R: Rng>(rng: &mut R) -> EsoHornSentence {
    let mut so_rels = vec![EsoRel { name: "P".into(), arity: rng.gen_range(1..=2) }];
    if rng.gen_bool(0.5) {
        so_rels.push(EsoRel { name: "Q".into(), arity: rng.gen_range(1..=2) });
    }
    let universals: Vec<String> = (1..=rng.gen_range(0..=2)).map(|i| format!("x{i}")).collect();
    let mut clauses = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let mut lits: Vec<Literal> = Vec::new();
        if rng.gen_bool(0.6) {
            lits.push(Literal::pos(so_atom(rng, &so_rels, &universals)));
        }
        for _ in 0..rng.gen_range(0..=2) {
            if rng.gen_bool(0.5) {
                lits.push(Literal::neg(so_atom(rng, &so_rels, &universals)));
            } else {
                let a = Atom::Eq(fo_term(rng, &universals), fo_term(rng, &universals));
                lits.push(if rng.gen_bool(0.5) { Literal::pos(a) } else { Literal::neg(a) });
            }
        }
        if lits.is_empty() {
            lits.push(Literal::neg(so_atom(rng, &so_rels, &universals)));
        }
        clauses.push(Clause::new(lits));
    }
    EsoHornSentence { so_rels, universals, clauses }
}

/// A second-order Horn sentence mentioning one extra undeclared relation
/// `T` in negative positions only. Returns the sentence, the relation name
/// and its arity.
pub fn gen_r_negative_esohorn<R: Rng>(rng: &mut R) -> (EsoHornSentence, String, usize) {
    let mut e = gen_esohorn(rng);
    let arity = rng.gen_range(1..=2);
    for _ in 0..rng.gen_range(1..=2) {
        let ci = rng.gen_range(0..e.clauses.len());
        let args = (0..arity).map(|_| fo_term(rng, &e.universals)).collect();
        e.clauses[ci].literals.push(Literal::neg(Atom::Rel("T".into(), args)));
    }
    (e, "T".into(), arity)
}

fn gen_leaf<R: Rng>(rng: &mut R, pool: &[String], allow_deps: bool) -> Literal {
    let atom = match rng.gen_range(0..4) {
        0 => Atom::Eq(fo_term(rng, pool), fo_term(rng, pool)),
        1 => Atom::Rel("E".into(), vec![fo_term(rng, pool), fo_term(rng, pool)]),
        2 => Atom::Rel(SUCC.into(), vec![fo_term(rng, pool), fo_term(rng, pool)]),
        _ if allow_deps && !pool.is_empty() => {
            let count = rng.gen_range(0..=2.min(pool.len()));
            let dets = (0..count).map(|_| Term::var(&pool[rng.gen_range(0..pool.len())])).collect();
            Atom::Dep(dets, Term::var(&pool[rng.gen_range(0..pool.len())]))
        }
        _ => Atom::Eq(fo_term(rng, pool), fo_term(rng, pool)),
    };
    if rng.gen_bool(0.5) {
        Literal::pos(atom)
    } else {
        Literal::neg(atom)
    }
}

/// An arbitrary formula in negation normal form over the pooled variables,
/// for the semantic property suites. `quantifiers` caps the total number
/// of quantifiers so the brute evaluator stays affordable; `allow_deps`
/// turned off keeps the formula first-order.
pub fn gen_formula<R: Rng>(
    rng: &mut R,
    pool: &[String],
    depth: usize,
    quantifiers: &mut usize,
    allow_deps: bool,
) -> Formula {
    if depth == 0 || rng.gen_bool(0.35) {
        return Formula::Lit(gen_leaf(rng, pool, allow_deps));
    }
    match rng.gen_range(0..5) {
        0 | 1 => Formula::and(
            gen_formula(rng, pool, depth - 1, quantifiers, allow_deps),
            gen_formula(rng, pool, depth - 1, quantifiers, allow_deps),
        ),
        2 | 3 => Formula::or(
            gen_formula(rng, pool, depth - 1, quantifiers, allow_deps),
            gen_formula(rng, pool, depth - 1, quantifiers, allow_deps),
        ),
        _ => {
            if *quantifiers == 0 {
                return Formula::Lit(gen_leaf(rng, pool, allow_deps));
            }
            *quantifiers -= 1;
            let name = if pool.is_empty() || rng.gen_bool(0.7) {
                format!("w{}", *quantifiers + 1)
            } else {
                // Deliberate shadowing of an outer variable.
                pool[rng.gen_range(0..pool.len())].clone()
            };
            let mut inner: Vec<String> = pool.to_vec();
            if !inner.contains(&name) {
                inner.push(name.clone());
            }
            let body = gen_formula(rng, &inner, depth - 1, quantifiers, allow_deps);
            if rng.gen_bool(0.5) {
                Formula::exists(name, body)
            } else {
                Formula::forall(name, body)
            }
        }
    }
}
