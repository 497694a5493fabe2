//! End-to-end checks of the polynomial evaluation path against the Skolem
//! search, plus size and minimality facts about the grounding.

use std::collections::BTreeSet;

use deplog::generate::{
    gen_bdhorn_sentence, gen_esohorn, gen_open_bdhorn, gen_structure, gen_team, seeded,
};
use deplog::ground::{eval_poly, ground, horn_sat, GroundClause};
use deplog::structure::{Structure, Team};
use deplog::syntax::{free_vars, match_prenex_dep};
use deplog::teamsem::{skolem_eval, EvalLimits};
use deplog::translate::bdhorn_to_esohorn;
use rand::Rng;

#[test]
fn the_pipeline_agrees_with_the_skolem_search() {
    let mut rng = seeded(31);
    let lim = EvalLimits { max_team: 16, max_nodes: 5_000_000 };
    let mut checked = 0;
    for _ in 0..2000 {
        if checked >= 150 {
            break;
        }
        let f = gen_bdhorn_sentence(&mut rng);
        let p = match_prenex_dep(&f).unwrap();
        let n = rng.gen_range(2..=6);
        if n < p.existentials.len() + 1 {
            continue;
        }
        let s = gen_structure(&mut rng, n, &[("E", 2)]);
        let want = match skolem_eval(&s, &p, &lim) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let got = eval_poly(&s, &f, None, &lim).unwrap();
        assert_eq!(got, want, "pipeline disagrees with the search on {f} at n = {n}");
        checked += 1;
    }
    assert!(checked >= 140, "only {checked} samples evaluated");
}

#[test]
fn ground_clause_counts_respect_the_instance_bound() {
    let mut rng = seeded(32);
    for _ in 0..60 {
        let e = gen_esohorn(&mut rng);
        let n = rng.gen_range(2..=6);
        let s = gen_structure(&mut rng, n, &[("E", 2)]);
        let g = ground(&e, &s).unwrap();
        let bound = e.clauses.len() * n.pow(e.universals.len() as u32);
        assert!(g.clauses.len() <= bound, "{} instances exceed {bound}", g.clauses.len());
    }
}

#[test]
fn grounding_growth_flattens_against_the_squared_prefix() {
    let mut rng = seeded(33);
    let mut used = 0;
    for _ in 0..60 {
        if used >= 12 {
            break;
        }
        let f = gen_bdhorn_sentence(&mut rng);
        let p = match_prenex_dep(&f).unwrap();
        let k = p.universals.len();
        if k == 0 {
            continue;
        }
        used += 1;
        let (e, _) = bdhorn_to_esohorn(&p).unwrap();
        let mut prev = f64::INFINITY;
        for n in 4..=12 {
            let s =
                Structure::new(n).unwrap().with_relation("E", Vec::<Vec<usize>>::new()).unwrap();
            let g = ground(&e, &s).unwrap();
            let ratio = g.clauses.len() as f64 / (n as f64).powi(2 * k as i32);
            assert!(
                ratio <= prev * 1.000001,
                "ratio grew from {prev} to {ratio} at n = {n} for {f}"
            );
            prev = ratio;
        }
    }
    assert!(used >= 10, "only {used} sentences had a universal prefix");
}

#[test]
fn propagation_forces_exactly_the_minimal_model() {
    let mut rng = seeded(34);
    let mut sat_seen = 0;
    for _ in 0..80 {
        let e = gen_esohorn(&mut rng);
        let n = rng.gen_range(2..=4);
        let s = gen_structure(&mut rng, n, &[("E", 2)]);
        let g = ground(&e, &s).unwrap();
        let r = horn_sat(&g);
        let Some(model) = r.minimal_model else { continue };
        sat_seen += 1;
        for id in 1..=g.atoms.len() {
            let mut banned = g.clone();
            banned.clauses.push(GroundClause::new(vec![id], None, banned.clauses.len()));
            let r2 = horn_sat(&banned);
            assert_eq!(
                r2.satisfiable,
                !model.contains(&id),
                "banning atom {} gave the wrong verdict",
                g.atom(id)
            );
        }
    }
    assert!(sat_seen >= 20, "only {sat_seen} satisfiable groundings");
}

#[test]
fn open_formula_verdicts_are_closed_downward() {
    let mut rng = seeded(35);
    let lim = EvalLimits::default();
    let mut positives = 0;
    for _ in 0..800 {
        if positives >= 40 {
            break;
        }
        let f = gen_open_bdhorn(&mut rng);
        let frees: Vec<String> = free_vars(&f).into_iter().collect();
        let refs: Vec<&str> = frees.iter().map(|v| v.as_str()).collect();
        let n = rng.gen_range(4..=5);
        let s = gen_structure(&mut rng, n, &[("E", 2)]);
        let x = gen_team(&mut rng, &refs, n, 5);
        if x.is_empty() || !eval_poly(&s, &f, Some(&x), &lim).unwrap() {
            continue;
        }
        positives += 1;
        let sub: BTreeSet<Vec<usize>> = x.rel().into_iter().filter(|_| rng.gen_bool(0.5)).collect();
        let y = Team::from_relation(x.domain.clone(), &sub);
        assert!(eval_poly(&s, &f, Some(&y), &lim).unwrap(), "a subteam broke the verdict of {f}");
    }
    assert!(positives >= 30, "only {positives} positive samples");
}
