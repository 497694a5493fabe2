//! Searching for a value assignment that realizes a propagated agreement
//! pattern.
//!
//! Grounded clauses speak about agreement atoms, each naming two value
//! cells: a cell is one existential variable paired with one determinant
//! tuple, and the reserved index 0 is the constant 0. The clauses are
//! satisfied by an actual family of choice functions exactly when some
//! assignment of universe elements to cells makes every clause true, with
//! an atom reading as "these two cells carry the same element". Treating
//! the atoms as free propositions misses two facts: equality is transitive
//! across cells, and only `n` distinct elements exist.
//!
//! The search below works over a union-find whose nodes are the occurring
//! cells plus one node per universe element; giving a cell class the value
//! `v` is merging it with the element node `v`. Cells are visited in a
//! fixed order, each still-unvalued cell tries 0, every value already in
//! use, and one fresh value, and after each choice the clauses are
//! propagated to a fixpoint: a clause whose premises all hold merges its
//! conclusion cells or, lacking a conclusion, refutes the branch. Nonzero
//! elements are interchangeable here, since clauses only compare cells, so
//! capping fresh values at one keeps the candidate list short without
//! losing completeness.

use super::PropHornFormula;
use crate::teamsem::{EvalError, EvalLimits};
use crate::translate::BdhornImage;
use std::collections::{BTreeMap, BTreeSet};

struct RClause {
    premises: Vec<(usize, usize)>,
    head: Option<(usize, usize)>,
}

/// Union-find with value tags, sized unions, and an undo trail. Lookups
/// skip path compression so that undoing a union is a constant-time reset.
struct Uf {
    parent: Vec<usize>,
    size: Vec<u32>,
    /// Meaningful at roots; `Some(v)` means the class contains element `v`.
    value: Vec<Option<u32>>,
    trail: Vec<(usize, usize, Option<u32>)>,
}

impl Uf {
    fn new(nodes: usize, n: usize) -> Uf {
        Uf {
            parent: (0..nodes).collect(),
            size: vec![1; nodes],
            value: (0..nodes).map(|i| if i < n { Some(i as u32) } else { None }).collect(),
            trail: Vec::new(),
        }
    }

    fn find(&self, mut a: usize) -> usize {
        while self.parent[a] != a {
            a = self.parent[a];
        }
        a
    }

    /// Merges the classes of `a` and `b`. `Ok(true)` on a real merge,
    /// `Ok(false)` when already joined, `Err(())` when the classes carry
    /// distinct values.
    fn union(&mut self, a: usize, b: usize) -> Result<bool, ()> {
        let mut ra = self.find(a);
        let mut rb = self.find(b);
        if ra == rb {
            return Ok(false);
        }
        match (self.value[ra], self.value[rb]) {
            (Some(x), Some(y)) if x != y => return Err(()),
            _ => {}
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.trail.push((rb, ra, self.value[ra]));
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        if self.value[ra].is_none() {
            self.value[ra] = self.value[rb];
        }
        Ok(true)
    }

    fn mark(&self) -> usize {
        self.trail.len()
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (child, root, old) = self.trail.pop().unwrap();
            self.parent[child] = child;
            self.size[root] -= self.size[child];
            self.value[root] = old;
        }
    }

    fn value_of(&self, a: usize) -> Option<u32> {
        self.value[self.find(a)]
    }
}

struct Search<'a> {
    uf: Uf,
    clauses: &'a [RClause],
    cells: &'a [usize],
    n: usize,
    steps: u64,
    budget: u64,
}

impl Search<'_> {
    fn tick(&mut self) -> Result<(), EvalError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(EvalError::Resource("realization step budget exceeded".into()));
        }
        Ok(())
    }

    /// Fires every clause whose premises hold until nothing changes.
    /// `Ok(false)` reports a refuted branch.
    fn propagate(&mut self) -> Result<bool, EvalError> {
        loop {
            let mut changed = false;
            for c in self.clauses {
                self.tick()?;
                if c.premises.iter().any(|&(a, b)| self.uf.find(a) != self.uf.find(b)) {
                    continue;
                }
                match c.head {
                    None => return Ok(false),
                    Some((a, b)) => match self.uf.union(a, b) {
                        Err(()) => return Ok(false),
                        Ok(merged) => changed |= merged,
                    },
                }
            }
            if !changed {
                return Ok(true);
            }
        }
    }

    /// Assigns the remaining unvalued cells from `pos` on, with `used` the
    /// largest nonzero value taken so far on this branch.
    fn dfs(&mut self, mut pos: usize, used: u32) -> Result<bool, EvalError> {
        while pos < self.cells.len() && self.uf.value_of(self.cells[pos]).is_some() {
            pos += 1;
        }
        let Some(&node) = self.cells.get(pos) else {
            return Ok(true);
        };
        let cap = (used + 1).min(self.n as u32 - 1);
        for v in 0..=cap {
            self.tick()?;
            let mark = self.uf.mark();
            if self.uf.union(node, v as usize).is_ok()
                && self.propagate()?
                && self.dfs(pos + 1, used.max(v))?
            {
                return Ok(true);
            }
            self.uf.undo_to(mark);
        }
        Ok(false)
    }
}

/// Decides whether some assignment of universe elements to cells satisfies
/// every grounded clause.
pub(crate) fn realize(
    h: &PropHornFormula,
    image: &BdhornImage,
    n: usize,
    limits: &EvalLimits,
) -> Result<bool, EvalError> {
    let arity = |idx: usize| if idx == 0 { 0 } else { image.dep_arities[idx - 1] };
    let mut keys: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    let mut split = Vec::with_capacity(h.atoms.len());
    for a in &h.atoms {
        let &(r, s) =
            image.pairs.get(&a.relation).expect("ground atom names a relation outside the image");
        let cut = arity(r);
        debug_assert_eq!(a.tuple.len(), cut + arity(s));
        let left = (r, a.tuple[..cut].to_vec());
        let right = (s, a.tuple[cut..].to_vec());
        keys.insert(left.clone());
        keys.insert(right.clone());
        split.push((left, right));
    }
    keys.remove(&(0, Vec::new()));
    let ids: BTreeMap<&(usize, Vec<usize>), usize> =
        keys.iter().enumerate().map(|(i, k)| (k, n + i)).collect();
    let node = |key: &(usize, Vec<usize>)| if key.0 == 0 { 0 } else { ids[key] };
    let atom_nodes: Vec<(usize, usize)> = split.iter().map(|(l, r)| (node(l), node(r))).collect();
    let clauses: Vec<RClause> = h
        .clauses
        .iter()
        .map(|c| RClause {
            premises: c.neg.iter().map(|&i| atom_nodes[i - 1]).collect(),
            head: c.pos.map(|i| atom_nodes[i - 1]),
        })
        .collect();
    let cells: Vec<usize> = (n..n + keys.len()).collect();
    let mut search = Search {
        uf: Uf::new(n + keys.len(), n),
        clauses: &clauses,
        cells: &cells,
        n,
        steps: 0,
        budget: limits.max_nodes,
    };
    if !search.propagate()? {
        return Ok(false);
    }
    search.dfs(0, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::{GroundAtom, GroundClause};

    fn constancy_image(m: usize) -> BdhornImage {
        let mut pairs = BTreeMap::new();
        for r in 0..=m {
            for s in r + 1..=m {
                pairs.insert(format!("Eq{r}_{s}"), (r, s));
            }
        }
        BdhornImage { dep_arities: vec![0; m], pairs }
    }

    fn formula(atom_names: &[&str], clauses: Vec<GroundClause>) -> PropHornFormula {
        let mut atoms: Vec<GroundAtom> =
            atom_names.iter().map(|&r| GroundAtom { relation: r.into(), tuple: vec![] }).collect();
        let sorted = {
            let mut s = atoms.clone();
            s.sort();
            s
        };
        assert_eq!(atoms, sorted, "test atoms must come pre-sorted");
        atoms.dedup();
        PropHornFormula { atoms, clauses }
    }

    #[test]
    fn distinct_nonzero_constants_need_enough_elements() {
        // Three constants, pairwise distinct and nonzero.
        let h = formula(
            &["Eq0_1", "Eq0_2", "Eq0_3", "Eq1_2", "Eq1_3", "Eq2_3"],
            (1..=6).map(|i| GroundClause::new(vec![i], None, 0)).collect(),
        );
        let image = constancy_image(3);
        let limits = EvalLimits::default();
        assert!(!realize(&h, &image, 3, &limits).unwrap());
        assert!(realize(&h, &image, 4, &limits).unwrap());
    }

    #[test]
    fn congruence_closes_through_shared_cells() {
        // Forced: c1 = 0 and c1 = c2, forbidden: c2 = 0. No propositional
        // contradiction, but transitivity refutes it at every size.
        let h = formula(
            &["Eq0_1", "Eq0_2", "Eq1_2"],
            vec![
                GroundClause::new(vec![], Some(1), 0),
                GroundClause::new(vec![], Some(3), 1),
                GroundClause::new(vec![2], None, 2),
            ],
        );
        let image = constancy_image(2);
        let limits = EvalLimits::default();
        for n in 2..=5 {
            assert!(!realize(&h, &image, n, &limits).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn conditional_heads_fire_only_when_premises_join() {
        // c1 = c2 implies c1 = 0; nothing forces the premise, so any size
        // with a second element realizes the pattern.
        let h = formula(&["Eq0_1", "Eq1_2"], vec![GroundClause::new(vec![2], Some(1), 0)]);
        let image = constancy_image(2);
        assert!(realize(&h, &image, 2, &EvalLimits::default()).unwrap());
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let h = formula(&["Eq0_1", "Eq0_2", "Eq1_2"], vec![GroundClause::new(vec![1], None, 0)]);
        let image = constancy_image(2);
        let limits = EvalLimits { max_team: 16, max_nodes: 2 };
        assert!(matches!(realize(&h, &image, 4, &limits), Err(EvalError::Resource(_))));
    }
}
