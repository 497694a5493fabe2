//! Translations between the restricted dependence fragment and existential
//! second-order Horn sentences.
//!
//! The forward direction replaces equalities among existential variables by
//! agreement relations over their determinant tuples. Each relation is
//! addressed by the determinant values of the two sides it links, with index
//! 0 standing for the constant 0, so one relation atom speaks about one pair
//! of value cells. Transitivity clauses over shared middle cells are added
//! for components that link two existentials directly; they are sound but
//! deliberately partial, and downstream consumers never rely on them being
//! complete.
//!
//! The reverse direction turns declared relations into characteristic
//! functions pinned to the value 0, flattens argument tuples to distinct
//! fresh variables, splits symbols that occur with several argument tuples
//! and bridges the copies, and finally renders each function as an
//! existential variable with the tuple as its dependence set. It is
//! truth-preserving on structures with at least two elements; a one-element
//! universe cannot separate membership from non-membership by a function
//! value.

use crate::fragments::{classify_prenex, Witness};
use crate::syntax::{
    lex, match_prenex_dep, Atom, Clause, Existential, Formula, Literal, ParseError, Parser,
    PrenexDepForm, Term, Tok, MAX, SUCC, ZERO,
};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EsoRel {
    pub name: String,
    pub arity: usize,
}

/// A second-order Horn sentence: declared relations, a universal prefix, and
/// clauses in which at most one positive literal mentions a declared
/// relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EsoHornSentence {
    pub so_rels: Vec<EsoRel>,
    pub universals: Vec<String>,
    pub clauses: Vec<Clause>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EsoError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("{0}")]
    Shape(String),
    #[error("clause {clause}: more than one positive literal over a declared relation")]
    NotHorn { clause: usize },
    #[error("clause {clause}: variable '{var}' is not bound by the universal prefix")]
    UnboundVar { clause: usize, var: String },
    #[error("relation '{name}' is used with arity {got} but declared with arity {expected}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("'{0}' is declared more than once")]
    DuplicateRel(String),
    #[error("'{0}' is bound more than once by the prefix")]
    DuplicateVar(String),
    #[error("'{0}' is a reserved name")]
    Reserved(String),
    #[error("declared relation '{0}' is also used as a function")]
    RelAsFunction(String),
    #[error("clause {0}: dependence atoms cannot appear here")]
    DepAtom(usize),
}

impl EsoHornSentence {
    pub fn so_arity(&self, name: &str) -> Option<usize> {
        self.so_rels.iter().find(|r| r.name == name).map(|r| r.arity)
    }

    pub fn validate(&self) -> Result<(), EsoError> {
        let mut so: BTreeMap<&str, usize> = BTreeMap::new();
        for r in &self.so_rels {
            if r.name == ZERO || r.name == MAX || r.name == SUCC {
                return Err(EsoError::Reserved(r.name.clone()));
            }
            if so.insert(&r.name, r.arity).is_some() {
                return Err(EsoError::DuplicateRel(r.name.clone()));
            }
        }
        let mut bound: BTreeSet<&str> = BTreeSet::new();
        for v in &self.universals {
            if !bound.insert(v) {
                return Err(EsoError::DuplicateVar(v.clone()));
            }
        }
        for (ci, clause) in self.clauses.iter().enumerate() {
            let mut positives = 0usize;
            for lit in &clause.literals {
                if lit.atom.is_dep() {
                    return Err(EsoError::DepAtom(ci));
                }
                if let Atom::Rel(name, args) = &lit.atom {
                    if let Some(&arity) = so.get(name.as_str()) {
                        if args.len() != arity {
                            return Err(EsoError::Arity {
                                name: name.clone(),
                                expected: arity,
                                got: args.len(),
                            });
                        }
                        if lit.positive {
                            positives += 1;
                        }
                    }
                }
                for t in lit.atom.terms() {
                    if let Some(name) = app_with_so_name(t, &so) {
                        return Err(EsoError::RelAsFunction(name));
                    }
                }
                for v in lit.atom.vars() {
                    if !bound.contains(v.as_str()) {
                        return Err(EsoError::UnboundVar { clause: ci, var: v });
                    }
                }
            }
            if positives > 1 {
                return Err(EsoError::NotHorn { clause: ci });
            }
        }
        Ok(())
    }
}

fn app_with_so_name(t: &Term, so: &BTreeMap<&str, usize>) -> Option<String> {
    match t {
        Term::App(name, args) => {
            if so.contains_key(name.as_str()) {
                return Some(name.clone());
            }
            args.iter().find_map(|a| app_with_so_name(a, so))
        }
        _ => None,
    }
}

impl fmt::Display for EsoHornSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exists-rel")?;
        for r in &self.so_rels {
            write!(f, " {}/{}", r.name, r.arity)?;
        }
        writeln!(f, ".")?;
        let body = Formula::conjoin(
            self.clauses
                .iter()
                .map(|c| {
                    Formula::disjoin(c.literals.iter().map(|l| Formula::Lit(l.clone())).collect())
                })
                .collect(),
        );
        let mut g = body;
        for v in self.universals.iter().rev() {
            g = Formula::forall(v.clone(), g);
        }
        write!(f, "{g}")
    }
}

/// Parses the second-order surface syntax: an `exists-rel` header listing
/// `name/arity` declarations, then an optionally quantified clause
/// conjunction.
pub fn parse_esohorn(text: &str) -> Result<EsoHornSentence, EsoError> {
    let toks = lex(text)?;
    let mut pos = 0usize;
    let expect_msg = |t: &crate::syntax::SpannedTok, msg: &str| {
        EsoError::Syntax(ParseError { line: t.line, col: t.col, msg: msg.to_string() })
    };
    match &toks[pos].tok {
        Tok::ExistsRel => pos += 1,
        _ => return Err(expect_msg(&toks[pos], "expected 'exists-rel' header")),
    }
    let mut so_rels = Vec::new();
    loop {
        match toks[pos].tok.clone() {
            Tok::Dot => {
                pos += 1;
                break;
            }
            Tok::Ident(name) => {
                pos += 1;
                match &toks[pos].tok {
                    Tok::Slash => pos += 1,
                    _ => return Err(expect_msg(&toks[pos], "expected '/' after relation name")),
                }
                match toks[pos].tok {
                    Tok::Num(n) => {
                        pos += 1;
                        so_rels.push(EsoRel { name, arity: n as usize });
                    }
                    _ => return Err(expect_msg(&toks[pos], "expected an arity after '/'")),
                }
            }
            _ => {
                return Err(expect_msg(
                    &toks[pos],
                    "expected a relation declaration or '.' closing the header",
                ))
            }
        }
    }
    let mut parser = Parser::new(toks[pos..].to_vec());
    let body = parser.formula()?;
    parser.expect_eof()?;
    let p = match_prenex_dep(&body).map_err(|e| EsoError::Shape(e.to_string()))?;
    if let Some(e) = p.existentials.first() {
        return Err(EsoError::Shape(format!(
            "existential quantifier over '{}' is not allowed in this syntax",
            e.var
        )));
    }
    let out = EsoHornSentence { so_rels, universals: p.universals, clauses: p.matrix };
    out.validate()?;
    Ok(out)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error("not in the evaluable fragment")]
    NotBdhorn { witnesses: Vec<Witness> },
    #[error("expected a sentence, found free variables: {}", .0.join(", "))]
    OpenFormula(Vec<String>),
    #[error(transparent)]
    Eso(#[from] EsoError),
    #[error("relation '{0}' does not occur in the sentence")]
    MissingRelation(String),
    #[error("relation '{rel}' occurs positively in clause {clause}")]
    PositiveOccurrence { rel: String, clause: usize },
    #[error("relation '{0}' is declared existentially, expected a free relation")]
    DeclaredRelation(String),
}

/// How the agreement relations of a translated sentence map back to value
/// cells. Existential indices are 1-based, index 0 is the constant 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BdhornImage {
    /// Determinant tuple length of each existential, in prefix order.
    pub dep_arities: Vec<usize>,
    /// Relation name -> the pair of indices it links, lower index first.
    pub pairs: BTreeMap<String, (usize, usize)>,
}

/// Translates a restricted sentence into a second-order Horn sentence over
/// agreement relations.
pub fn bdhorn_to_esohorn(
    p: &PrenexDepForm,
) -> Result<(EsoHornSentence, BdhornImage), TranslateError> {
    let frees = p.free_vars();
    if !frees.is_empty() {
        return Err(TranslateError::OpenFormula(frees.into_iter().collect()));
    }
    let report = classify_prenex(p);
    if !report.bdhorn {
        return Err(TranslateError::NotBdhorn { witnesses: report.witnesses });
    }
    let m = p.existentials.len();
    let eidx: HashMap<&str, usize> =
        p.existentials.iter().enumerate().map(|(i, e)| (e.var.as_str(), i + 1)).collect();
    let deps: Vec<&[String]> = p.existentials.iter().map(|e| e.deps.as_slice()).collect();
    let cell_index = |t: &Term| -> Option<usize> {
        if t.is_zero() {
            return Some(0);
        }
        t.as_var().and_then(|v| eidx.get(v).copied())
    };

    let mut occurring: BTreeSet<(usize, usize)> = BTreeSet::new();
    for clause in &p.matrix {
        for lit in &clause.literals {
            if let Atom::Eq(l, r) = &lit.atom {
                let le = matches!(l.as_var(), Some(v) if eidx.contains_key(v));
                let re = matches!(r.as_var(), Some(v) if eidx.contains_key(v));
                if le || re {
                    let (a, b) = (cell_index(l).unwrap(), cell_index(r).unwrap());
                    occurring.insert((a.min(b), a.max(b)));
                }
            }
        }
    }
    // Close under composition through a shared index.
    let mut closed = occurring;
    loop {
        let snapshot: Vec<(usize, usize)> = closed.iter().copied().collect();
        let mut grew = false;
        for &(a, b) in &snapshot {
            for &(c, d) in &snapshot {
                for (x, y) in [(a, b), (b, a)] {
                    for (u, v) in [(c, d), (d, c)] {
                        if y == u && x != v && closed.insert((x.min(v), x.max(v))) {
                            grew = true;
                        }
                    }
                }
            }
        }
        if !grew {
            break;
        }
    }

    // A name stem no first-order relation in the matrix shares a prefix with.
    let fo_names: BTreeSet<&str> = p
        .matrix
        .iter()
        .flat_map(|c| &c.literals)
        .filter_map(|l| match &l.atom {
            Atom::Rel(name, _) => Some(name.as_str()),
            _ => None,
        })
        .collect();
    let mut base = "Eq".to_string();
    while fo_names.iter().any(|n| n.starts_with(base.as_str())) {
        base.push('q');
    }

    let tuple_of = |i: usize| -> Vec<Term> {
        if i == 0 {
            Vec::new()
        } else {
            deps[i - 1].iter().map(Term::var).collect()
        }
    };
    let name_of = |r: usize, s: usize| format!("{base}{}_{}", r.min(s), r.max(s));
    let pair_atom = |r: usize, s: usize| -> Atom {
        let (a, b) = (r.min(s), r.max(s));
        let mut args = tuple_of(a);
        args.extend(tuple_of(b));
        Atom::Rel(name_of(a, b), args)
    };

    let mut clauses = Vec::with_capacity(p.matrix.len());
    for clause in &p.matrix {
        let lits = clause
            .literals
            .iter()
            .map(|lit| match &lit.atom {
                Atom::Eq(l, r)
                    if matches!(l.as_var(), Some(v) if eidx.contains_key(v))
                        || matches!(r.as_var(), Some(v) if eidx.contains_key(v)) =>
                {
                    let atom = pair_atom(cell_index(l).unwrap(), cell_index(r).unwrap());
                    Literal { atom, positive: lit.positive }
                }
                _ => lit.clone(),
            })
            .collect();
        clauses.push(Clause::new(lits));
    }

    // Chained-agreement clauses for components with a direct link between two
    // existentials. Shared middle variables keep them sound; they are not
    // meant to be complete.
    let comp = components(m, &closed);
    let mut mixed: BTreeSet<usize> = BTreeSet::new();
    for &(a, b) in &closed {
        if a >= 1 && b >= 1 {
            mixed.insert(comp[a]);
        }
    }
    for (r, cr) in comp.iter().enumerate() {
        for t in (r + 1)..=m {
            if !closed.contains(&(r, t)) || !mixed.contains(cr) {
                continue;
            }
            for s in 0..=m {
                if s == r || s == t {
                    continue;
                }
                let rs = (r.min(s), r.max(s));
                let st = (s.min(t), s.max(t));
                if closed.contains(&rs) && closed.contains(&st) {
                    clauses.push(Clause::new(vec![
                        Literal::neg(pair_atom(r, s)),
                        Literal::neg(pair_atom(s, t)),
                        Literal::pos(pair_atom(r, t)),
                    ]));
                }
            }
        }
    }

    let mut so_rels = Vec::new();
    let mut pairs = BTreeMap::new();
    for &(a, b) in &closed {
        let arity = (if a == 0 { 0 } else { deps[a - 1].len() })
            + (if b == 0 { 0 } else { deps[b - 1].len() });
        let name = name_of(a, b);
        pairs.insert(name.clone(), (a, b));
        so_rels.push(EsoRel { name, arity });
    }

    let sentence = EsoHornSentence { so_rels, universals: p.universals.clone(), clauses };
    debug_assert_eq!(sentence.validate(), Ok(()));
    let image =
        BdhornImage { dep_arities: p.existentials.iter().map(|e| e.deps.len()).collect(), pairs };
    Ok((sentence, image))
}

/// Connected components of the pair graph over indices `0..=m`; returns a
/// representative index per vertex.
fn components(m: usize, edges: &BTreeSet<(usize, usize)>) -> Vec<usize> {
    let mut rep: Vec<usize> = (0..=m).collect();
    fn find(rep: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while rep[i] != i {
            rep[i] = rep[rep[i]];
            i = rep[i];
        }
        i
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut rep, a), find(&mut rep, b));
        if ra != rb {
            rep[ra.max(rb)] = ra.min(rb);
        }
    }
    (0..=m).map(|i| find(&mut rep, i)).collect()
}

/// Deterministic fresh-name source that avoids a reserved set.
struct NamePool {
    used: BTreeSet<String>,
}

impl NamePool {
    fn new() -> NamePool {
        let mut used = BTreeSet::new();
        for n in [ZERO, MAX, SUCC] {
            used.insert(n.to_string());
        }
        NamePool { used }
    }

    fn reserve<'a>(&mut self, names: impl IntoIterator<Item = &'a String>) {
        for n in names {
            self.used.insert(n.clone());
        }
    }

    fn fresh(&mut self, prefix: &str) -> String {
        let mut i = 1usize;
        loop {
            let cand = format!("{prefix}{i}");
            if self.used.insert(cand.clone()) {
                return cand;
            }
            i += 1;
        }
    }
}

/// One working literal of the reverse translation.
#[derive(Clone)]
enum MidLit {
    Fo(Literal),
    /// `sym(args) = 0`, signed.
    SymZero {
        sym: usize,
        args: Vec<String>,
        positive: bool,
    },
    /// `sym_a(its tuple) = sym_b(its tuple)`, always positive; used by
    /// bridge clauses.
    SymPair {
        a: usize,
        b: usize,
    },
}

struct WorkClause {
    lits: Vec<MidLit>,
    guards: Vec<Literal>,
}

/// Translates a second-order Horn sentence into a restricted dependence
/// sentence. Faithful on universes with at least two elements.
pub fn esohorn_to_bdhorn(e: &EsoHornSentence) -> Result<PrenexDepForm, TranslateError> {
    e.validate()?;
    let so: BTreeMap<&str, usize> = e.so_rels.iter().map(|r| (r.name.as_str(), r.arity)).collect();
    let sym_id: HashMap<&str, usize> =
        e.so_rels.iter().enumerate().map(|(i, r)| (r.name.as_str(), i)).collect();

    let mut pool = NamePool::new();
    pool.reserve(&e.universals);
    pool.reserve(e.so_rels.iter().map(|r| &r.name));
    let mut names_in_terms: BTreeSet<String> = BTreeSet::new();
    for clause in &e.clauses {
        for lit in &clause.literals {
            if let Atom::Rel(name, _) = &lit.atom {
                names_in_terms.insert(name.clone());
            }
            for t in lit.atom.terms() {
                collect_app_names(t, &mut names_in_terms);
            }
            for v in lit.atom.vars() {
                names_in_terms.insert(v);
            }
        }
    }
    pool.reserve(&names_in_terms);

    let mut fresh_universals: Vec<String> = Vec::new();
    let fresh_w = |pool: &mut NamePool, fresh_universals: &mut Vec<String>| {
        let w = pool.fresh("w");
        fresh_universals.push(w.clone());
        w
    };

    // Flatten argument tuples to distinct variables, clause by clause.
    let mut work: Vec<WorkClause> = Vec::new();
    for clause in &e.clauses {
        let mut lits = Vec::new();
        let mut guards = Vec::new();
        let mut memo: HashMap<Term, Vec<String>> = HashMap::new();
        for lit in &clause.literals {
            let is_so_atom =
                matches!(&lit.atom, Atom::Rel(name, _) if so.contains_key(name.as_str()));
            if !is_so_atom {
                lits.push(MidLit::Fo(lit.clone()));
                continue;
            }
            let (name, args) = match &lit.atom {
                Atom::Rel(name, args) => (name, args),
                _ => unreachable!(),
            };
            let mut used: BTreeSet<String> = BTreeSet::new();
            let mut flat: Vec<String> = Vec::with_capacity(args.len());
            for t in args {
                if let Some(v) = t.as_var() {
                    if used.insert(v.to_string()) {
                        flat.push(v.to_string());
                        continue;
                    }
                }
                let slots = memo.entry(t.clone()).or_default();
                let w = match slots.iter().find(|w| !used.contains(*w)) {
                    Some(w) => w.clone(),
                    None => {
                        let w = fresh_w(&mut pool, &mut fresh_universals);
                        guards.push(Literal::neg(Atom::Eq(Term::var(&w), t.clone())));
                        slots.push(w.clone());
                        w
                    }
                };
                used.insert(w.clone());
                flat.push(w);
            }
            lits.push(MidLit::SymZero {
                sym: sym_id[name.as_str()],
                args: flat,
                positive: lit.positive,
            });
        }
        work.push(WorkClause { lits, guards });
    }

    // First argument tuple of each symbol becomes its canonical tuple.
    let mut canonical: HashMap<usize, Vec<String>> = HashMap::new();
    for wc in &work {
        for lit in &wc.lits {
            if let MidLit::SymZero { sym, args, .. } = lit {
                canonical.entry(*sym).or_insert_with(|| args.clone());
            }
        }
    }

    // Split symbols used with other tuples and bridge the copies. Tuples
    // sharing variables with the canonical tuple are freshened first; the
    // bridge clause only pins the copy to the original where the tuples are
    // variable-disjoint.
    let mut next_sym = e.so_rels.len();
    let mut sym_order: Vec<usize> =
        canonical.keys().copied().collect::<BTreeSet<usize>>().into_iter().collect();
    let mut alias: HashMap<(usize, Vec<String>), usize> = HashMap::new();
    let mut bridges: Vec<WorkClause> = Vec::new();
    for wc in &mut work {
        for li in 0..wc.lits.len() {
            let (sym, args) = match &wc.lits[li] {
                MidLit::SymZero { sym, args, .. } => (*sym, args.clone()),
                _ => continue,
            };
            let canon = canonical[&sym].clone();
            if args == canon {
                continue;
            }
            let canon_vars: BTreeSet<&String> = canon.iter().collect();
            let mut args = args;
            for slot in args.iter_mut() {
                if canon_vars.contains(slot) {
                    let w = fresh_w(&mut pool, &mut fresh_universals);
                    wc.guards.push(Literal::neg(Atom::Eq(Term::var(&w), Term::var(slot.as_str()))));
                    *slot = w;
                }
            }
            let target = *alias.entry((sym, args.clone())).or_insert_with(|| {
                let id = next_sym;
                next_sym += 1;
                canonical.insert(id, args.clone());
                sym_order.push(id);
                let guards = args
                    .iter()
                    .zip(&canon)
                    .map(|(a, c)| Literal::neg(Atom::Eq(Term::var(a), Term::var(c))))
                    .collect();
                bridges.push(WorkClause { lits: vec![MidLit::SymPair { a: sym, b: id }], guards });
                id
            });
            if let MidLit::SymZero { sym, args: slot_args, .. } = &mut wc.lits[li] {
                *sym = target;
                *slot_args = args;
            }
        }
    }
    work.extend(bridges);

    // Each surviving symbol becomes an existential variable depending on its
    // canonical tuple.
    let universals: Vec<String> = e.universals.iter().cloned().chain(fresh_universals).collect();
    let mut yvar: HashMap<usize, String> = HashMap::new();
    let mut existentials = Vec::new();
    for &sym in &sym_order {
        let tuple = &canonical[&sym];
        let y = pool.fresh("y");
        let tset: BTreeSet<&String> = tuple.iter().collect();
        let deps: Vec<String> = universals.iter().filter(|u| tset.contains(u)).cloned().collect();
        debug_assert_eq!(deps.len(), tuple.len(), "canonical tuples hold distinct universals");
        existentials.push(Existential { var: y.clone(), deps });
        yvar.insert(sym, y);
    }

    let matrix = work
        .into_iter()
        .map(|wc| {
            let mut lits: Vec<Literal> = wc
                .lits
                .into_iter()
                .map(|ml| match ml {
                    MidLit::Fo(l) => l,
                    MidLit::SymZero { sym, positive, .. } => {
                        Literal { atom: Atom::Eq(Term::var(&yvar[&sym]), Term::zero()), positive }
                    }
                    MidLit::SymPair { a, b } => {
                        Literal::pos(Atom::Eq(Term::var(&yvar[&a]), Term::var(&yvar[&b])))
                    }
                })
                .collect();
            lits.extend(wc.guards);
            Clause::new(lits)
        })
        .collect();

    Ok(PrenexDepForm { universals, existentials, matrix })
}

fn collect_app_names(t: &Term, out: &mut BTreeSet<String>) {
    if let Term::App(name, args) = t {
        out.insert(name.clone());
        for a in args {
            collect_app_names(a, out);
        }
    }
}

/// Turns an open formula into a sentence relative to a team relation: the
/// free variables become outermost universals and every clause is guarded by
/// membership of their tuple in `rel`.
pub fn openize(p: &PrenexDepForm, rel: &str) -> PrenexDepForm {
    let frees: Vec<String> = p.free_vars().into_iter().collect();
    let guard_args: Vec<Term> = frees.iter().map(Term::var).collect();
    let universals: Vec<String> =
        frees.iter().cloned().chain(p.universals.iter().cloned()).collect();
    let matrix = p
        .matrix
        .iter()
        .map(|c| {
            let mut lits = vec![Literal::neg(Atom::Rel(rel.to_string(), guard_args.clone()))];
            lits.extend(c.literals.iter().cloned());
            Clause::new(lits)
        })
        .collect();
    PrenexDepForm { universals, existentials: p.existentials.clone(), matrix }
}

/// Translates a Horn sentence in which `rel` occurs only negatively into an
/// open restricted formula whose free variables carry the interpretation of
/// `rel` as a team. Returns the formula and the free variables in the
/// argument order of `rel`.
pub fn negative_esohorn_to_open_bdhorn(
    e: &EsoHornSentence,
    rel: &str,
) -> Result<(PrenexDepForm, Vec<String>), TranslateError> {
    e.validate().map_err(TranslateError::Eso)?;
    if e.so_arity(rel).is_some() {
        return Err(TranslateError::DeclaredRelation(rel.to_string()));
    }
    let mut arity = None;
    for (ci, clause) in e.clauses.iter().enumerate() {
        for lit in &clause.literals {
            if let Atom::Rel(name, args) = &lit.atom {
                if name == rel {
                    if lit.positive {
                        return Err(TranslateError::PositiveOccurrence {
                            rel: rel.to_string(),
                            clause: ci,
                        });
                    }
                    arity = Some(args.len());
                }
            }
        }
    }
    let arity = arity.ok_or_else(|| TranslateError::MissingRelation(rel.to_string()))?;

    // A copy of `rel` that is existentially quantified and contains it; the
    // sentence only inspects `rel` negatively, so truth is unchanged.
    let mut pool = NamePool::new();
    pool.reserve(&e.universals);
    pool.reserve(e.so_rels.iter().map(|r| &r.name));
    pool.reserve([&rel.to_string()]);
    for clause in &e.clauses {
        for lit in &clause.literals {
            if let Atom::Rel(name, _) = &lit.atom {
                pool.reserve([name]);
            }
            for v in lit.atom.vars() {
                pool.reserve([&v]);
            }
        }
    }
    let shadow = pool.fresh(rel);
    let ws: Vec<String> = (0..arity).map(|_| pool.fresh("w")).collect();
    let mut so_rels = e.so_rels.clone();
    so_rels.push(EsoRel { name: shadow.clone(), arity });
    let mut clauses: Vec<Clause> = e
        .clauses
        .iter()
        .map(|c| {
            Clause::new(
                c.literals
                    .iter()
                    .map(|l| match &l.atom {
                        Atom::Rel(name, args) if name == rel => Literal {
                            atom: Atom::Rel(shadow.clone(), args.clone()),
                            positive: l.positive,
                        },
                        _ => l.clone(),
                    })
                    .collect(),
            )
        })
        .collect();
    let w_terms: Vec<Term> = ws.iter().map(Term::var).collect();
    clauses.push(Clause::new(vec![
        Literal::neg(Atom::Rel(rel.to_string(), w_terms.clone())),
        Literal::pos(Atom::Rel(shadow, w_terms)),
    ]));
    let universals: Vec<String> = e.universals.iter().cloned().chain(ws.iter().cloned()).collect();
    let merged = EsoHornSentence { so_rels, universals, clauses };
    let p = esohorn_to_bdhorn(&merged)?;

    // Replace the remaining negative occurrence of `rel` by disagreement
    // with fresh free variables; a team over them plays the role of `rel`.
    let mut out_pool = NamePool::new();
    out_pool.reserve(&p.universals);
    out_pool.reserve(p.existentials.iter().map(|e| &e.var));
    for clause in &p.matrix {
        for v in clause.vars() {
            out_pool.reserve([&v]);
        }
    }
    let zs: Vec<String> = (0..arity).map(|_| out_pool.fresh("z")).collect();
    let matrix = p
        .matrix
        .into_iter()
        .map(|c| {
            let mut lits = Vec::with_capacity(c.literals.len() + arity);
            for lit in c.literals {
                match &lit.atom {
                    Atom::Rel(name, args) if name == rel => {
                        debug_assert!(!lit.positive);
                        for (z, t) in zs.iter().zip(args) {
                            lits.push(Literal::neg(Atom::Eq(Term::var(z), t.clone())));
                        }
                    }
                    _ => lits.push(lit),
                }
            }
            Clause::new(lits)
        })
        .collect();
    Ok((PrenexDepForm { universals: p.universals, existentials: p.existentials, matrix }, zs))
}
