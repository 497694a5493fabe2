//! Team-semantics evaluation.
//!
//! `satisfies_brute` follows the compositional team-semantics clauses
//! directly and is exponential in the team size. `satisfies` routes prenex
//! dependence formulas through a Skolem-function search over value cells,
//! which prunes far better, and falls back to brute force for everything
//! else. Both report against a step budget so runaway instances fail with a
//! resource error instead of hanging.

use crate::structure::{eval_fo_atom, eval_term, Assignment, Structure, Team, TermError};
use crate::syntax::{free_vars, match_prenex_dep, Atom, Formula, PrenexDepForm};
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalLimits {
    /// Largest team the brute-force split/witness search accepts.
    pub max_team: usize,
    /// Step budget for one evaluation call.
    pub max_nodes: u64,
}

impl Default for EvalLimits {
    fn default() -> EvalLimits {
        EvalLimits { max_team: 16, max_nodes: 100_000_000 }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("team domain is missing free variable '{0}'")]
    Domain(String),
    #[error("evaluation limit exceeded: {0}")]
    Resource(String),
}

/// Team satisfaction by direct recursion over the formula.
pub fn satisfies_brute(
    s: &Structure,
    x: &Team,
    f: &Formula,
    limits: &EvalLimits,
) -> Result<bool, EvalError> {
    let mut b = Brute { s, limits, nodes: 0, memo: HashMap::new() };
    b.eval(x, f)
}

struct Brute<'a> {
    s: &'a Structure,
    limits: &'a EvalLimits,
    nodes: u64,
    memo: HashMap<(usize, Team), bool>,
}

impl Brute<'_> {
    fn tick(&mut self) -> Result<(), EvalError> {
        self.nodes += 1;
        if self.nodes > self.limits.max_nodes {
            return Err(EvalError::Resource(format!(
                "step budget of {} exhausted",
                self.limits.max_nodes
            )));
        }
        Ok(())
    }

    fn team_cap(&self, len: usize) -> Result<(), EvalError> {
        if len > self.limits.max_team.min(62) {
            return Err(EvalError::Resource(format!(
                "team of {len} rows exceeds the brute-force cap of {}",
                self.limits.max_team.min(62)
            )));
        }
        Ok(())
    }

    fn eval(&mut self, x: &Team, f: &Formula) -> Result<bool, EvalError> {
        self.tick()?;
        let key = (f as *const Formula as usize, x.clone());
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let out = self.eval_inner(x, f)?;
        self.memo.insert(key, out);
        Ok(out)
    }

    fn eval_inner(&mut self, x: &Team, f: &Formula) -> Result<bool, EvalError> {
        match f {
            Formula::Lit(lit) => match (&lit.atom, lit.positive) {
                (Atom::Dep(dets, val), true) => {
                    // Rows agreeing on the determinants must agree on the
                    // determined term.
                    let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
                    for r in &x.rows {
                        let key = dets.iter().map(|t| eval_term(self.s, r, t)).collect::<Result<
                            Vec<usize>,
                            TermError,
                        >>(
                        )?;
                        let v = eval_term(self.s, r, val)?;
                        if *seen.entry(key).or_insert(v) != v {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                }
                (Atom::Dep(..), false) => Ok(x.is_empty()),
                (atom, positive) => {
                    for r in &x.rows {
                        if eval_fo_atom(self.s, r, atom)? != positive {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                }
            },
            Formula::And(l, r) => Ok(self.eval(x, l)? && self.eval(x, r)?),
            Formula::Or(l, r) => {
                // Disjoint splits suffice: the logic is downward closed, so
                // any overlapping cover can be shrunk to a partition.
                let rows: Vec<&Assignment> = x.rows.iter().collect();
                let k = rows.len();
                self.team_cap(k)?;
                for mask in 0u64..(1u64 << k) {
                    self.tick()?;
                    let mut left = BTreeSet::new();
                    let mut right = BTreeSet::new();
                    for (i, row) in rows.iter().enumerate() {
                        if mask & (1 << i) != 0 {
                            left.insert((*row).clone());
                        } else {
                            right.insert((*row).clone());
                        }
                    }
                    let lt = Team { domain: x.domain.clone(), rows: left };
                    let rt = Team { domain: x.domain.clone(), rows: right };
                    if self.eval(&lt, l)? && self.eval(&rt, r)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Exists(v, body) => {
                let rows: Vec<&Assignment> = x.rows.iter().collect();
                let k = rows.len();
                self.team_cap(k)?;
                let n = self.s.size;
                let mut domain = x.domain.clone();
                if !domain.iter().any(|d| d == v) {
                    domain.push(v.clone());
                }
                let mut vals = vec![0usize; k];
                loop {
                    self.tick()?;
                    let mut extended = BTreeSet::new();
                    for (row, &val) in rows.iter().zip(&vals) {
                        let mut r2 = (*row).clone();
                        r2.insert(v.clone(), val);
                        extended.insert(r2);
                    }
                    let team = Team { domain: domain.clone(), rows: extended };
                    if self.eval(&team, body)? {
                        return Ok(true);
                    }
                    let mut i = 0;
                    loop {
                        if i == k {
                            return Ok(false);
                        }
                        vals[i] += 1;
                        if vals[i] < n {
                            break;
                        }
                        vals[i] = 0;
                        i += 1;
                    }
                }
            }
            Formula::Forall(v, body) => {
                let team = x.extend_universal(v, self.s.size);
                self.eval(&team, body)
            }
        }
    }
}

/// Team satisfaction with a fast path: prenex dependence formulas go through
/// the Skolem search restricted to their free variables, everything else
/// falls back to `satisfies_brute`. Always agrees with the brute evaluator.
pub fn satisfies(
    s: &Structure,
    x: &Team,
    f: &Formula,
    limits: &EvalLimits,
) -> Result<bool, EvalError> {
    let frees = free_vars(f);
    for v in &frees {
        if !x.domain.iter().any(|d| d == v) {
            return Err(EvalError::Domain(v.clone()));
        }
    }
    match match_prenex_dep(f) {
        Ok(p) => skolem_eval_team(s, &x.restrict(&frees), &p, limits),
        Err(_) => satisfies_brute(s, x, f, limits),
    }
}

/// Sentence satisfaction over the team holding one empty assignment.
pub fn satisfies_sentence(
    s: &Structure,
    f: &Formula,
    limits: &EvalLimits,
) -> Result<bool, EvalError> {
    if let Some(v) = free_vars(f).into_iter().next() {
        return Err(EvalError::Domain(v));
    }
    satisfies(s, &Team::unit(), f, limits)
}

/// Skolem search for a prenex dependence sentence.
pub fn skolem_eval(
    s: &Structure,
    p: &PrenexDepForm,
    limits: &EvalLimits,
) -> Result<bool, EvalError> {
    if let Some(v) = p.free_vars().into_iter().next() {
        return Err(EvalError::Domain(v));
    }
    skolem_eval_team(s, &Team::unit(), p, limits)
}

/// Skolem search for a prenex dependence formula over a team.
///
/// The team satisfies the formula exactly when there are functions, one per
/// existential and reading only its determinants, that make every matrix
/// clause true at every point of `rows x universe^universals`. The search
/// walks the points depth-first, jointly assigning the value cells a point
/// reads that are still open, and backtracks on clause failure.
pub fn skolem_eval_team(
    s: &Structure,
    x: &Team,
    p: &PrenexDepForm,
    limits: &EvalLimits,
) -> Result<bool, EvalError> {
    for v in p.free_vars() {
        if !x.domain.iter().any(|d| d == &v) {
            return Err(EvalError::Domain(v));
        }
    }
    let n = s.size as u64;
    let mut block = 1u64;
    for _ in &p.universals {
        block = block
            .checked_mul(n)
            .filter(|&c| c <= limits.max_nodes)
            .ok_or_else(|| EvalError::Resource("too many evaluation points".into()))?;
    }
    let total = (x.rows.len() as u64)
        .checked_mul(block)
        .filter(|&c| c <= limits.max_nodes)
        .ok_or_else(|| EvalError::Resource("too many evaluation points".into()))?;
    let rows: Vec<Assignment> = x.rows.iter().cloned().collect();
    let mut search = Search {
        s,
        p,
        limits,
        nodes: 0,
        rows,
        block: block as usize,
        total: total as usize,
        table: HashMap::new(),
    };
    search.run()
}

struct Search<'a> {
    s: &'a Structure,
    p: &'a PrenexDepForm,
    limits: &'a EvalLimits,
    nodes: u64,
    rows: Vec<Assignment>,
    /// Universal tuples per row, so point i is row i / block at tuple
    /// i % block.
    block: usize,
    total: usize,
    /// Assigned value cells: (existential index, determinant values) -> value.
    table: HashMap<(usize, Vec<usize>), usize>,
}

/// One evaluation point of the search, with the joint enumeration state of
/// the value cells it was the first to read.
struct Frame {
    idx: usize,
    pt: Assignment,
    cells: Vec<(usize, Vec<usize>)>,
    /// Positions in `cells` this frame assigns; the others were fixed by
    /// earlier points.
    open: Vec<usize>,
    vals: Vec<usize>,
    started: bool,
}

impl Search<'_> {
    fn tick(&mut self) -> Result<(), EvalError> {
        self.nodes += 1;
        if self.nodes > self.limits.max_nodes {
            return Err(EvalError::Resource(format!(
                "step budget of {} exhausted",
                self.limits.max_nodes
            )));
        }
        Ok(())
    }

    fn make_frame(&self, idx: usize) -> Result<Frame, EvalError> {
        let mut pt = self.rows[idx / self.block].clone();
        let mut rem = idx % self.block;
        for xv in &self.p.universals {
            pt.insert(xv.clone(), rem % self.s.size);
            rem /= self.s.size;
        }
        let mut cells = Vec::with_capacity(self.p.existentials.len());
        for (i, e) in self.p.existentials.iter().enumerate() {
            let key: Result<Vec<usize>, EvalError> = e
                .deps
                .iter()
                .map(|d| {
                    pt.get(d)
                        .copied()
                        .ok_or_else(|| EvalError::Term(TermError::UnboundVar(d.clone())))
                })
                .collect();
            cells.push((i, key?));
        }
        let open: Vec<usize> =
            (0..cells.len()).filter(|&i| !self.table.contains_key(&cells[i])).collect();
        let vals = vec![0usize; open.len()];
        Ok(Frame { idx, pt, cells, open, vals, started: false })
    }

    /// Depth-first over the points with an explicit frame stack, so the
    /// recursion depth never tracks the point count.
    fn run(&mut self) -> Result<bool, EvalError> {
        if self.total == 0 {
            return Ok(true);
        }
        let n = self.s.size;
        let mut stack = vec![self.make_frame(0)?];
        loop {
            let top = stack.last_mut().expect("loop exits before emptying the stack");
            if top.started {
                for &cell_idx in &top.open {
                    self.table.remove(&top.cells[cell_idx]);
                }
                let mut i = 0;
                loop {
                    if i == top.open.len() {
                        break;
                    }
                    top.vals[i] += 1;
                    if top.vals[i] < n {
                        break;
                    }
                    top.vals[i] = 0;
                    i += 1;
                }
                if i == top.open.len() {
                    stack.pop();
                    if stack.is_empty() {
                        return Ok(false);
                    }
                    continue;
                }
            } else {
                top.started = true;
            }
            self.tick()?;
            for (slot, &cell_idx) in top.open.iter().enumerate() {
                self.table.insert(top.cells[cell_idx].clone(), top.vals[slot]);
            }
            if self.point_holds(&top.pt, &top.cells)? {
                let next = top.idx + 1;
                if next == self.total {
                    return Ok(true);
                }
                let frame = self.make_frame(next)?;
                stack.push(frame);
            }
        }
    }

    fn point_holds(
        &self,
        pt: &Assignment,
        cells: &[(usize, Vec<usize>)],
    ) -> Result<bool, EvalError> {
        let mut full = pt.clone();
        for (i, e) in self.p.existentials.iter().enumerate() {
            let v = *self.table.get(&cells[i]).expect("cell assigned");
            full.insert(e.var.clone(), v);
        }
        for clause in &self.p.matrix {
            let mut holds = false;
            for lit in &clause.literals {
                if eval_fo_atom(self.s, &full, &lit.atom)? == lit.positive {
                    holds = true;
                    break;
                }
            }
            if !holds {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::load_structure;
    use crate::syntax::parse_formula;

    fn team(cols: &[&str], rows: &[&[usize]]) -> Team {
        let domain: Vec<String> = cols.iter().map(|c| c.to_string()).collect();
        let rows = rows
            .iter()
            .map(|r| {
                assert_eq!(r.len(), domain.len());
                domain.iter().cloned().zip(r.iter().copied()).collect()
            })
            .collect();
        Team { domain, rows }
    }

    fn brute(n: usize, x: &Team, src: &str) -> bool {
        let s = load_structure(&format!(r#"{{"universe":{n}}}"#)).unwrap();
        satisfies_brute(&s, x, &parse_formula(src).unwrap(), &EvalLimits::default()).unwrap()
    }

    fn fast(n: usize, x: &Team, src: &str) -> bool {
        let s = load_structure(&format!(r#"{{"universe":{n}}}"#)).unwrap();
        satisfies(&s, x, &parse_formula(src).unwrap(), &EvalLimits::default()).unwrap()
    }

    #[test]
    fn dependence_atom_requires_functionality() {
        let good = team(&["x", "y"], &[&[0, 0], &[1, 1], &[2, 1]]);
        let bad = team(&["x", "y"], &[&[0, 0], &[0, 1]]);
        assert!(brute(3, &good, "=(x,y)"));
        assert!(!brute(3, &bad, "=(x,y)"));
    }

    #[test]
    fn negated_dependence_needs_the_empty_team() {
        assert!(brute(2, &Team::empty(vec!["x".into(), "y".into()]), "!=(x,y)"));
        assert!(!brute(2, &team(&["x", "y"], &[&[0, 0]]), "!=(x,y)"));
    }

    #[test]
    fn constancy_atom() {
        assert!(brute(3, &team(&["y"], &[&[2], &[2]]), "=(y)"));
        assert!(!brute(3, &team(&["y"], &[&[0], &[2]]), "=(y)"));
    }

    #[test]
    fn disjunction_splits_the_team() {
        assert!(brute(3, &team(&["x"], &[&[0], &[1], &[2]]), "x = 0 | !(x = 0)"));
        // Two constancy disjuncts cover at most two distinct values.
        assert!(brute(3, &team(&["y"], &[&[0], &[1]]), "=(y) | =(y)"));
        assert!(!brute(3, &team(&["y"], &[&[0], &[1], &[2]]), "=(y) | =(y)"));
    }

    #[test]
    fn exists_picks_rowwise_witnesses() {
        assert!(brute(3, &team(&["x"], &[&[0], &[1]]), "exists y. succ(x,y)"));
        assert!(!brute(3, &team(&["x"], &[&[0], &[1], &[2]]), "exists y. succ(x,y)"));
    }

    #[test]
    fn exists_with_constancy_forces_one_value() {
        let x = team(&["x"], &[&[0], &[1]]);
        assert!(!brute(2, &x, "exists y. =(y) & y = x"));
        assert!(brute(2, &x, "exists y. y = x"));
    }

    #[test]
    fn sentence_evaluation_uses_the_skolem_path() {
        let s = load_structure(r#"{"universe":3}"#).unwrap();
        let f = parse_formula("forall x. exists y. x = max | succ(x,y)").unwrap();
        assert!(satisfies_sentence(&s, &f, &EvalLimits::default()).unwrap());
        let g = parse_formula("forall x. exists y. succ(x,y)").unwrap();
        assert!(!satisfies_sentence(&s, &g, &EvalLimits::default()).unwrap());
    }

    type PrenexCase<'a> = (&'a str, &'a [&'a str], &'a [&'a [usize]]);

    #[test]
    fn skolem_and_brute_agree_on_prenex_cases() {
        let cases: &[PrenexCase] = &[
            ("exists y. =(x,y) & succ(x,y)", &["x"], &[&[0], &[1]]),
            ("exists y. =(x,y) & succ(x,y)", &["x"], &[&[0], &[2]]),
            ("forall u. exists y. =(u,y) & (u = max | succ(u,y))", &["x"], &[&[0]]),
            ("=(x,y)", &["x", "y"], &[&[0, 1], &[1, 1]]),
            ("exists y. =(y) & y = x", &["x"], &[&[1], &[1]]),
            ("exists y. =(y) & y = x", &["x"], &[&[0], &[1]]),
        ];
        for (src, cols, rows) in cases {
            let x = team(cols, rows);
            assert_eq!(brute(3, &x, src), fast(3, &x, src), "{src}");
        }
    }

    #[test]
    fn empty_team_satisfies_everything_sampled() {
        for src in ["x = 0", "!=(x,y)", "exists z. x = z & =(z)", "x = 0 & !(x = 0)"] {
            let x = Team::empty(vec!["x".into(), "y".into()]);
            assert!(brute(2, &x, src), "{src}");
            assert!(fast(2, &x, src), "{src}");
        }
    }

    #[test]
    fn downward_closure_spot_check() {
        let full = team(&["y"], &[&[0], &[1]]);
        let sub = team(&["y"], &[&[1]]);
        assert!(brute(3, &full, "=(y) | =(y)"));
        assert!(brute(3, &sub, "=(y) | =(y)"));
    }

    #[test]
    fn quantifier_overwrites_an_existing_column() {
        let x = team(&["x"], &[&[1]]);
        assert!(brute(2, &x, "exists x. x = 0"));
        assert!(!brute(2, &x, "forall x. x = 0"));
    }

    #[test]
    fn resource_budget_is_enforced() {
        let s = load_structure(r#"{"universe":4}"#).unwrap();
        let x = team(&["x"], &[&[0], &[1], &[2], &[3]]);
        let f = parse_formula("exists y. exists z. y = z & succ(x,y) & succ(y,z)").unwrap();
        let limits = EvalLimits { max_team: 16, max_nodes: 5 };
        assert!(matches!(satisfies_brute(&s, &x, &f, &limits), Err(EvalError::Resource(_))));
    }

    #[test]
    fn team_cap_is_enforced() {
        let s = load_structure(r#"{"universe":2}"#).unwrap();
        let rows: Vec<Vec<usize>> = (0..6).map(|i| vec![i / 2, i % 2, i % 3]).collect();
        let row_refs: Vec<&[usize]> = rows.iter().map(|r| r.as_slice()).collect();
        let x = team(&["x", "y", "z"], &row_refs);
        let f = parse_formula("x = y | y = z").unwrap();
        let limits = EvalLimits { max_team: 3, max_nodes: 1_000_000 };
        assert!(matches!(satisfies_brute(&s, &x, &f, &limits), Err(EvalError::Resource(_))));
    }

    #[test]
    fn dispatch_requires_free_variable_columns() {
        let s = load_structure(r#"{"universe":2}"#).unwrap();
        let f = parse_formula("x = y").unwrap();
        let x = team(&["x"], &[&[0]]);
        assert!(matches!(
            satisfies(&s, &x, &f, &EvalLimits::default()),
            Err(EvalError::Domain(v)) if v == "y"
        ));
    }

    #[test]
    fn extra_team_columns_do_not_change_the_verdict() {
        let x = team(&["x", "w"], &[&[0, 1], &[1, 0]]);
        let src = "exists y. =(x,y) & succ(x,y)";
        assert_eq!(brute(3, &x, src), fast(3, &x, src));
        assert!(fast(3, &x, src));
    }
}
