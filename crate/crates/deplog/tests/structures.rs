//! Loaded structures keep the successor built-ins consistent, and teams
//! convert to and from relations without loss.

use std::collections::BTreeSet;

use deplog::generate::{gen_team, seeded};
use deplog::structure::{load_structure, Team};
use rand::Rng;

#[test]
fn built_ins_follow_the_universe_size() {
    for n in 1..10 {
        let s = load_structure(&format!("{{\"universe\": {n}}}")).unwrap();
        let succ = s.rel("succ").unwrap();
        assert_eq!(succ.len(), n - 1);
        assert!(succ.iter().all(|pair| pair[1] == pair[0] + 1));
        assert_eq!(s.constants["max"], n - 1);
        assert_eq!(s.constants["0"], 0);
    }
}

#[test]
fn teams_and_relations_convert_both_ways() {
    let mut rng = seeded(11);
    for _ in 0..60 {
        let n = rng.gen_range(1..=5);
        let x = gen_team(&mut rng, &["x", "y", "z"], n, 6);
        let r = x.rel();
        let back = Team::from_relation(x.domain.clone(), &r);
        assert_eq!(back, x);
        assert_eq!(back.rel(), r);
    }
}

#[test]
fn restriction_is_idempotent_and_monotone() {
    let mut rng = seeded(12);
    for _ in 0..60 {
        let n = rng.gen_range(1..=5);
        let x = gen_team(&mut rng, &["x", "y", "z"], n, 6);
        let v: BTreeSet<String> =
            ["x", "z"].iter().filter(|_| rng.gen_bool(0.7)).map(|s| s.to_string()).collect();
        let once = x.restrict(&v);
        assert_eq!(once.restrict(&v), once);

        let sub: BTreeSet<Vec<usize>> = x.rel().into_iter().filter(|_| rng.gen_bool(0.5)).collect();
        let y = Team::from_relation(x.domain.clone(), &sub);
        assert!(y.restrict(&v).rel().is_subset(&once.rel()));
    }
}

#[test]
fn reserved_names_cannot_be_redefined() {
    for bad in [
        "{\"universe\": 3, \"relations\": {\"succ\": [[0,1]]}}",
        "{\"universe\": 3, \"constants\": {\"max\": 0}}",
        "{\"universe\": 3, \"constants\": {\"0\": 1}}",
    ] {
        assert!(load_structure(bad).is_err());
    }
}
