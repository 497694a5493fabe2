//! Semantic laws of team satisfaction, checked on random structures, teams,
//! and formulae. Evaluations that exceed the step budget are skipped and the
//! loops insist on a minimum number of completed checks.

use std::collections::BTreeSet;

use deplog::generate::{gen_bdhorn_sentence, gen_formula, gen_structure, gen_team, seeded};
use deplog::structure::{Structure, Team};
use deplog::syntax::{flatten, free_vars, match_prenex_dep, Formula};
use deplog::teamsem::{satisfies, satisfies_brute, skolem_eval, EvalError, EvalLimits};
use rand::Rng;

fn limits() -> EvalLimits {
    EvalLimits { max_team: 16, max_nodes: 400_000 }
}

fn sample_formula<R: Rng>(rng: &mut R, deps: bool) -> (Structure, Formula, usize) {
    let n = rng.gen_range(2..=3);
    let s = gen_structure(rng, n, &[("E", 2)]);
    let pool: Vec<String> = ["x", "y", "z"].iter().map(|v| v.to_string()).collect();
    let mut quota = 2;
    let f = gen_formula(rng, &pool, 3, &mut quota, deps);
    (s, f, n)
}

fn free_list(f: &Formula) -> Vec<String> {
    free_vars(f).into_iter().collect()
}

#[test]
fn satisfaction_is_closed_downward() {
    let mut rng = seeded(21);
    let lim = limits();
    let mut positives = 0;
    for _ in 0..4000 {
        if positives >= 150 {
            break;
        }
        let (s, f, n) = sample_formula(&mut rng, true);
        let frees = free_list(&f);
        let refs: Vec<&str> = frees.iter().map(|v| v.as_str()).collect();
        let x = gen_team(&mut rng, &refs, n, 4);
        match satisfies(&s, &x, &f, &lim) {
            Ok(true) => {}
            _ => continue,
        }
        positives += 1;
        let sub: BTreeSet<Vec<usize>> = x.rel().into_iter().filter(|_| rng.gen_bool(0.6)).collect();
        let y = Team::from_relation(x.domain.clone(), &sub);
        match satisfies(&s, &y, &f, &lim) {
            Ok(v) => assert!(v, "a subteam broke satisfaction of {f}"),
            Err(EvalError::Resource(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }
    assert!(positives >= 100, "only {positives} positive samples");
}

#[test]
fn satisfaction_only_reads_the_free_columns() {
    let mut rng = seeded(22);
    let lim = limits();
    let mut checked = 0;
    for _ in 0..2000 {
        if checked >= 200 {
            break;
        }
        let (s, f, n) = sample_formula(&mut rng, true);
        let fv = free_vars(&f);
        let mut cols: Vec<String> = fv.iter().cloned().collect();
        cols.push("pad1".into());
        cols.push("pad2".into());
        let refs: Vec<&str> = cols.iter().map(|v| v.as_str()).collect();
        let x = gen_team(&mut rng, &refs, n, 4);
        let wide = satisfies(&s, &x, &f, &lim);
        let narrow = satisfies(&s, &x.restrict(&fv), &f, &lim);
        match (wide, narrow) {
            (Ok(a), Ok(b)) => {
                assert_eq!(a, b, "extra columns changed the verdict of {f}");
                checked += 1;
            }
            (Err(EvalError::Resource(_)), _) | (_, Err(EvalError::Resource(_))) => {}
            (Err(e), _) | (_, Err(e)) => panic!("{e}"),
        }
    }
    assert!(checked >= 150, "only {checked} samples evaluated");
}

#[test]
fn first_order_satisfaction_is_row_by_row() {
    let mut rng = seeded(23);
    let lim = limits();
    let mut checked = 0;
    for _ in 0..2000 {
        if checked >= 200 {
            break;
        }
        let (s, f, n) = sample_formula(&mut rng, false);
        let frees = free_list(&f);
        let refs: Vec<&str> = frees.iter().map(|v| v.as_str()).collect();
        let x = gen_team(&mut rng, &refs, n, 4);
        let whole = match satisfies(&s, &x, &f, &lim) {
            Ok(v) => v,
            Err(EvalError::Resource(_)) => continue,
            Err(e) => panic!("{e}"),
        };
        let mut rows = true;
        let mut skipped = false;
        for t in x.rel() {
            let one = Team::from_relation(x.domain.clone(), &BTreeSet::from([t]));
            match satisfies(&s, &one, &f, &lim) {
                Ok(v) => rows &= v,
                Err(EvalError::Resource(_)) => skipped = true,
                Err(e) => panic!("{e}"),
            }
        }
        if skipped {
            continue;
        }
        assert_eq!(whole, rows, "row-wise verdicts disagree on {f}");
        checked += 1;
    }
    assert!(checked >= 150, "only {checked} samples evaluated");
}

#[test]
fn the_empty_team_satisfies_everything() {
    let mut rng = seeded(24);
    let lim = limits();
    for _ in 0..300 {
        let (s, f, _) = sample_formula(&mut rng, true);
        let empty = Team::from_relation(free_list(&f), &BTreeSet::new());
        assert!(satisfies(&s, &empty, &f, &lim).unwrap(), "empty team failed {f}");
    }
}

#[test]
fn the_skolem_search_matches_the_compositional_evaluator() {
    let mut rng = seeded(25);
    let lim = limits();
    let mut checked = 0;
    for _ in 0..3000 {
        if checked >= 120 {
            break;
        }
        let f = gen_bdhorn_sentence(&mut rng);
        let p = match_prenex_dep(&f).unwrap();
        let n = if p.universals.len() >= 2 { 2 } else { rng.gen_range(2..=3) };
        let s = gen_structure(&mut rng, n, &[("E", 2)]);
        let a = match skolem_eval(&s, &p, &lim) {
            Ok(v) => v,
            Err(EvalError::Resource(_)) => continue,
            Err(e) => panic!("{e}"),
        };
        let b = match satisfies_brute(&s, &Team::unit(), &flatten(&p), &lim) {
            Ok(v) => v,
            Err(EvalError::Resource(_)) => continue,
            Err(e) => panic!("{e}"),
        };
        assert_eq!(a, b, "oracles disagree on {f} at n = {n}");
        checked += 1;
    }
    assert!(checked >= 100, "only {checked} samples evaluated");
}
