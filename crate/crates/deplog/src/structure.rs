//! Finite successor structures, assignments, and teams.
//!
//! A structure has universe `{0, .., n-1}` and always interprets the constant
//! `0` as 0, the constant `max` as `n-1`, and the binary relation `succ` as
//! `{(i, i+1) | i < n-1}`. User relations, constants, and total functions sit
//! on top. Teams are sets of assignments over a shared variable domain.

use crate::syntax::{Atom, Term, MAX, SUCC, ZERO};
use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("universe must have at least one element")]
    EmptyUniverse,
    #[error("'{0}' is a reserved name and cannot be redefined")]
    Reserved(String),
    #[error("relation '{name}': {problem}")]
    Relation { name: String, problem: String },
    #[error("constant '{name}': {problem}")]
    Constant { name: String, problem: String },
    #[error("function '{name}': {problem}")]
    Function { name: String, problem: String },
    #[error("team row {row}: {problem}")]
    TeamRow { row: usize, problem: String },
}

/// Errors raised while evaluating terms or atoms against a structure.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("variable '{0}' is not bound by the assignment")]
    UnboundVar(String),
    #[error("unknown {kind} '{name}'")]
    UnknownSymbol { kind: &'static str, name: String },
    #[error("{kind} '{name}' expects arity {expected}, got {got}")]
    Arity { kind: &'static str, name: String, expected: usize, got: usize },
    #[error("a dependence atom has no single-row truth value")]
    DepAtomRowEval,
}

/// A total function table over `{0,..,n-1}^arity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Function {
    pub arity: usize,
    pub table: BTreeMap<Vec<usize>, usize>,
}

/// A finite successor structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    pub size: usize,
    pub relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
    pub constants: BTreeMap<String, usize>,
    pub functions: BTreeMap<String, Function>,
}

impl Structure {
    /// A bare structure of the given size with only the built-ins.
    pub fn new(size: usize) -> Result<Structure, StructureError> {
        if size == 0 {
            return Err(StructureError::EmptyUniverse);
        }
        let succ: BTreeSet<Vec<usize>> =
            (0..size.saturating_sub(1)).map(|i| vec![i, i + 1]).collect();
        let mut relations = BTreeMap::new();
        relations.insert(SUCC.to_string(), succ);
        let mut constants = BTreeMap::new();
        constants.insert(ZERO.to_string(), 0);
        constants.insert(MAX.to_string(), size - 1);
        Ok(Structure { size, relations, constants, functions: BTreeMap::new() })
    }

    /// Adds a user relation, validating range and arity consistency.
    pub fn with_relation(
        mut self,
        name: impl Into<String>,
        tuples: impl IntoIterator<Item = Vec<usize>>,
    ) -> Result<Structure, StructureError> {
        let name = name.into();
        if name == SUCC || name == ZERO || name == MAX {
            return Err(StructureError::Reserved(name));
        }
        let mut set = BTreeSet::new();
        let mut arity: Option<usize> = None;
        for t in tuples {
            match arity {
                None => arity = Some(t.len()),
                Some(a) if a != t.len() => {
                    return Err(StructureError::Relation {
                        name,
                        problem: format!("tuples of mixed arity {} and {}", a, t.len()),
                    })
                }
                _ => {}
            }
            if let Some(&v) = t.iter().find(|&&v| v >= self.size) {
                return Err(StructureError::Relation {
                    name,
                    problem: format!("component {v} is outside the universe of size {}", self.size),
                });
            }
            set.insert(t);
        }
        self.relations.insert(name, set);
        Ok(self)
    }

    pub fn rel(&self, name: &str) -> Option<&BTreeSet<Vec<usize>>> {
        self.relations.get(name)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionJson {
    arity: usize,
    table: BTreeMap<String, usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureJson {
    universe: usize,
    #[serde(default)]
    relations: BTreeMap<String, Vec<Vec<usize>>>,
    #[serde(default)]
    constants: BTreeMap<String, usize>,
    #[serde(default)]
    functions: BTreeMap<String, FunctionJson>,
}

/// Loads a structure from its JSON encoding, injecting the built-ins.
pub fn load_structure(json: &str) -> Result<Structure, StructureError> {
    let raw: StructureJson =
        serde_json::from_str(json).map_err(|e| StructureError::Json(e.to_string()))?;
    let mut s = Structure::new(raw.universe)?;
    for (name, tuples) in raw.relations {
        s = s.with_relation(name, tuples)?;
    }
    for (name, value) in raw.constants {
        if name == ZERO || name == MAX || name == SUCC {
            return Err(StructureError::Reserved(name));
        }
        if value >= s.size {
            return Err(StructureError::Constant {
                name,
                problem: format!("value {value} is outside the universe of size {}", s.size),
            });
        }
        s.constants.insert(name, value);
    }
    for (name, f) in raw.functions {
        if name == ZERO || name == MAX || name == SUCC {
            return Err(StructureError::Reserved(name));
        }
        if f.arity == 0 {
            return Err(StructureError::Function {
                name,
                problem: "arity must be at least 1".into(),
            });
        }
        let mut table = BTreeMap::new();
        for (key, value) in &f.table {
            let tuple: Result<Vec<usize>, _> =
                key.split(',').map(|p| p.trim().parse::<usize>()).collect();
            let tuple = tuple.map_err(|_| StructureError::Function {
                name: name.clone(),
                problem: format!("malformed table key '{key}'"),
            })?;
            if tuple.len() != f.arity {
                return Err(StructureError::Function {
                    name,
                    problem: format!("table key '{key}' does not have arity {}", f.arity),
                });
            }
            if tuple.iter().any(|&v| v >= s.size) || *value >= s.size {
                return Err(StructureError::Function {
                    name,
                    problem: format!("entry '{key}' -> {value} leaves the universe"),
                });
            }
            table.insert(tuple, *value);
        }
        let expected = s.size.checked_pow(f.arity as u32).ok_or_else(|| {
            StructureError::Function { name: name.clone(), problem: "domain too large".into() }
        })?;
        if table.len() != expected {
            return Err(StructureError::Function {
                name,
                problem: format!(
                    "table has {} entries, a total table needs {expected}",
                    table.len()
                ),
            });
        }
        s.functions.insert(name, Function { arity: f.arity, table });
    }
    Ok(s)
}

/// A variable assignment.
pub type Assignment = BTreeMap<String, usize>;

/// A set of assignments over a common domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Team {
    /// Domain in a fixed order; `team_rel` tuples follow this order.
    pub domain: Vec<String>,
    pub rows: BTreeSet<Assignment>,
}

impl Team {
    pub fn new(domain: Vec<String>, rows: impl IntoIterator<Item = Assignment>) -> Team {
        let rows: BTreeSet<Assignment> = rows.into_iter().collect();
        for r in &rows {
            debug_assert_eq!(
                r.keys().cloned().collect::<Vec<_>>(),
                {
                    let mut d = domain.clone();
                    d.sort();
                    d
                },
                "row domain mismatch"
            );
        }
        Team { domain, rows }
    }

    /// The team containing exactly the empty assignment.
    pub fn unit() -> Team {
        let mut rows = BTreeSet::new();
        rows.insert(Assignment::new());
        Team { domain: Vec::new(), rows }
    }

    /// The empty team over a domain.
    pub fn empty(domain: Vec<String>) -> Team {
        Team { domain, rows: BTreeSet::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Builds a team from a relation, pairing tuple components with `domain`
    /// in order.
    pub fn from_relation(domain: Vec<String>, tuples: &BTreeSet<Vec<usize>>) -> Team {
        let rows = tuples
            .iter()
            .map(|t| {
                assert_eq!(t.len(), domain.len(), "tuple arity mismatch");
                domain.iter().cloned().zip(t.iter().copied()).collect::<Assignment>()
            })
            .collect();
        Team { domain: domain.clone(), rows }
    }

    /// `rel(X)`: the set of value tuples in domain order.
    pub fn rel(&self) -> BTreeSet<Vec<usize>> {
        self.tuples_in(&self.domain)
    }

    /// Value tuples under an explicit variable order; `order` must be a
    /// subset of the domain.
    pub fn tuples_in(&self, order: &[String]) -> BTreeSet<Vec<usize>> {
        self.rows
            .iter()
            .map(|r| order.iter().map(|v| *r.get(v).expect("variable in domain")).collect())
            .collect()
    }

    /// `X(F/x)`: extends or overwrites `x` in every row by a function of the
    /// row.
    pub fn extend_by_function(&self, x: &str, f: impl Fn(&Assignment) -> usize) -> Team {
        let mut domain = self.domain.clone();
        if !domain.iter().any(|v| v == x) {
            domain.push(x.to_string());
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut r2 = r.clone();
                let val = f(r);
                r2.insert(x.to_string(), val);
                r2
            })
            .collect();
        Team { domain, rows }
    }

    /// `X(A/x)`: the cross product with the universe at `x`.
    pub fn extend_universal(&self, x: &str, size: usize) -> Team {
        let mut domain = self.domain.clone();
        if !domain.iter().any(|v| v == x) {
            domain.push(x.to_string());
        }
        let mut rows = BTreeSet::new();
        for r in &self.rows {
            for a in 0..size {
                let mut r2 = r.clone();
                r2.insert(x.to_string(), a);
                rows.insert(r2);
            }
        }
        Team { domain, rows }
    }

    /// `X restricted to V`: projects rows to the variables in `v`, merging
    /// duplicates. `v` must be a subset of the domain.
    pub fn restrict(&self, v: &BTreeSet<String>) -> Team {
        assert!(v.iter().all(|x| self.domain.contains(x)), "restriction outside the team domain");
        let domain: Vec<String> = self.domain.iter().filter(|x| v.contains(*x)).cloned().collect();
        let rows = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .filter(|(k, _)| v.contains(*k))
                    .map(|(k, val)| (k.clone(), *val))
                    .collect::<Assignment>()
            })
            .collect();
        Team { domain, rows }
    }
}

/// Loads a team from JSON: a list of flat objects variable -> element. Rows
/// must carry exactly `domain` and values must fit inside a universe of
/// `size` elements.
pub fn load_team(json: &str, domain: &[String], size: usize) -> Result<Team, StructureError> {
    let raw: Vec<BTreeMap<String, usize>> =
        serde_json::from_str(json).map_err(|e| StructureError::Json(e.to_string()))?;
    let expected: BTreeSet<&String> = domain.iter().collect();
    let mut rows = BTreeSet::new();
    for (i, row) in raw.into_iter().enumerate() {
        let got: BTreeSet<&String> = row.keys().collect();
        if got != expected {
            let want: Vec<&str> = domain.iter().map(String::as_str).collect();
            let have: Vec<&str> = row.keys().map(String::as_str).collect();
            return Err(StructureError::TeamRow {
                row: i,
                problem: format!("domain is {have:?}, expected exactly {want:?}"),
            });
        }
        if let Some((k, &v)) = row.iter().find(|(_, &v)| v >= size) {
            return Err(StructureError::TeamRow {
                row: i,
                problem: format!("{k} = {v} is outside the universe of size {size}"),
            });
        }
        rows.insert(row);
    }
    Ok(Team { domain: domain.to_vec(), rows })
}

/// Evaluates a term bottom-up under an assignment.
pub fn eval_term(s: &Structure, a: &Assignment, t: &Term) -> Result<usize, TermError> {
    match t {
        Term::Var(v) => a.get(v).copied().ok_or_else(|| TermError::UnboundVar(v.clone())),
        Term::Const(c) => s
            .constants
            .get(c)
            .copied()
            .ok_or_else(|| TermError::UnknownSymbol { kind: "constant", name: c.clone() }),
        Term::App(name, args) => {
            let f = s
                .functions
                .get(name)
                .ok_or_else(|| TermError::UnknownSymbol { kind: "function", name: name.clone() })?;
            if args.len() != f.arity {
                return Err(TermError::Arity {
                    kind: "function",
                    name: name.clone(),
                    expected: f.arity,
                    got: args.len(),
                });
            }
            let vals: Result<Vec<usize>, TermError> =
                args.iter().map(|t| eval_term(s, a, t)).collect();
            let vals = vals?;
            f.table.get(&vals).copied().ok_or_else(|| TermError::UnknownSymbol {
                kind: "function entry",
                name: name.clone(),
            })
        }
    }
}

/// Truth of a first-order atom in one row. Dependence atoms are not
/// row-evaluable and yield an error.
pub fn eval_fo_atom(s: &Structure, a: &Assignment, atom: &Atom) -> Result<bool, TermError> {
    match atom {
        Atom::Eq(l, r) => Ok(eval_term(s, a, l)? == eval_term(s, a, r)?),
        Atom::Rel(name, args) => {
            let rel = s
                .relations
                .get(name)
                .ok_or_else(|| TermError::UnknownSymbol { kind: "relation", name: name.clone() })?;
            let vals: Result<Vec<usize>, TermError> =
                args.iter().map(|t| eval_term(s, a, t)).collect();
            let vals = vals?;
            if let Some(first) = rel.iter().next() {
                if first.len() != vals.len() {
                    return Err(TermError::Arity {
                        kind: "relation",
                        name: name.clone(),
                        expected: first.len(),
                        got: vals.len(),
                    });
                }
            }
            Ok(rel.contains(&vals))
        }
        Atom::Dep(..) => Err(TermError::DepAtomRowEval),
    }
}
