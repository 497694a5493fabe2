//! Structural and extensional facts about the fragment translations: image
//! well-formedness, minimality of the linked pair set, truth preservation
//! where the semantics grants it, and the shape of the team guard.

use std::collections::{BTreeMap, BTreeSet};

use deplog::fragments::classify_prenex;
use deplog::generate::{
    gen_bdhorn_sentence, gen_esohorn, gen_open_bdhorn, gen_r_negative_esohorn, gen_structure,
    gen_team, seeded,
};
use deplog::ground::eval_esohorn;
use deplog::syntax::{flatten, match_prenex_dep, Atom, Term};
use deplog::teamsem::{satisfies, skolem_eval, EvalError, EvalLimits};
use deplog::translate::{
    bdhorn_to_esohorn, esohorn_to_bdhorn, negative_esohorn_to_open_bdhorn, openize,
};
use rand::Rng;

#[test]
fn every_image_is_a_wellformed_horn_sentence() {
    let mut rng = seeded(41);
    for _ in 0..200 {
        let f = gen_bdhorn_sentence(&mut rng);
        let p = match_prenex_dep(&f).unwrap();
        let (e, img) = bdhorn_to_esohorn(&p).unwrap();
        e.validate().unwrap();
        assert_eq!(img.dep_arities.len(), p.existentials.len());
    }
}

#[test]
fn the_pair_set_is_the_least_composition_closure() {
    let mut rng = seeded(42);
    let closed = |set: &BTreeSet<(usize, usize)>| -> bool {
        for &(a, b) in set {
            for &(c, d) in set {
                for (x, y, u, v) in [(a, b, c, d), (a, b, d, c), (b, a, c, d), (b, a, d, c)] {
                    if y == u && x != v && !set.contains(&(x.min(v), x.max(v))) {
                        return false;
                    }
                }
            }
        }
        true
    };
    for _ in 0..300 {
        let f = gen_bdhorn_sentence(&mut rng);
        let p = match_prenex_dep(&f).unwrap();
        let (_, img) = bdhorn_to_esohorn(&p).unwrap();
        let pairs: BTreeSet<(usize, usize)> = img.pairs.values().copied().collect();

        let idx: BTreeMap<&str, usize> =
            p.existentials.iter().enumerate().map(|(i, e)| (e.var.as_str(), i + 1)).collect();
        let cell = |t: &Term| -> Option<usize> {
            if *t == Term::zero() {
                Some(0)
            } else {
                t.as_var().and_then(|v| idx.get(v).copied())
            }
        };
        let mut base = BTreeSet::new();
        for c in &p.matrix {
            for l in &c.literals {
                if let Atom::Eq(a, b) = &l.atom {
                    if let (Some(u), Some(v)) = (cell(a), cell(b)) {
                        if u > 0 || v > 0 {
                            base.insert((u.min(v), u.max(v)));
                        }
                    }
                }
            }
        }

        assert!(base.is_subset(&pairs));
        assert!(closed(&pairs));
        for extra in pairs.difference(&base) {
            let mut without = pairs.clone();
            without.remove(extra);
            assert!(!closed(&without), "pair {extra:?} is not forced by composition");
        }
    }
}

#[test]
fn a_true_sentence_grounds_to_a_satisfiable_image() {
    let mut rng = seeded(43);
    let lim = EvalLimits::default();
    let mut trues = 0;
    for _ in 0..600 {
        if trues >= 60 {
            break;
        }
        let f = gen_bdhorn_sentence(&mut rng);
        let p = match_prenex_dep(&f).unwrap();
        let n = rng.gen_range(2..=5);
        if n < p.existentials.len() + 1 {
            continue;
        }
        let s = gen_structure(&mut rng, n, &[("E", 2)]);
        if !skolem_eval(&s, &p, &lim).unwrap() {
            continue;
        }
        trues += 1;
        let (e, _) = bdhorn_to_esohorn(&p).unwrap();
        assert!(eval_esohorn(&s, &e).unwrap(), "image unsatisfiable for true {f}");
    }
    assert!(trues >= 50, "only {trues} true samples");
}

#[test]
fn second_order_truth_survives_the_fragment_translation() {
    let mut rng = seeded(44);
    let lim = EvalLimits::default();
    for _ in 0..40 {
        let e = gen_esohorn(&mut rng);
        let b = esohorn_to_bdhorn(&e).unwrap();
        assert!(classify_prenex(&b).bdhorn);
        for n in 2..=3 {
            let s = gen_structure(&mut rng, n, &[("E", 2)]);
            let want = eval_esohorn(&s, &e).unwrap();
            let got = skolem_eval(&s, &b, &lim).unwrap();
            assert_eq!(got, want, "translation flipped the verdict of {e} at n = {n}");
        }
    }
}

#[test]
fn the_team_guard_only_occurs_negatively() {
    let mut rng = seeded(45);
    for _ in 0..200 {
        let f = gen_open_bdhorn(&mut rng);
        let p = match_prenex_dep(&f).unwrap();
        let o = openize(&p, "R");
        assert!(o.free_vars().is_empty());
        let mut guards = 0;
        for c in &o.matrix {
            for l in &c.literals {
                if let Atom::Rel(name, _) = &l.atom {
                    if name == "R" {
                        assert!(!l.positive, "positive guard in {f}");
                        guards += 1;
                    }
                }
            }
        }
        assert_eq!(guards, o.matrix.len(), "expected one guard per clause in {f}");
    }
}

#[test]
fn negative_occurrences_translate_to_team_satisfaction() {
    let mut rng = seeded(46);
    let lim = EvalLimits { max_team: 16, max_nodes: 3_000_000 };
    let mut checked = 0;
    for _ in 0..400 {
        if checked >= 25 {
            break;
        }
        let (e, rel, arity) = gen_r_negative_esohorn(&mut rng);
        let (form, zs) = negative_esohorn_to_open_bdhorn(&e, &rel).unwrap();
        assert_eq!(zs.len(), arity);
        let n = if form.universals.len() <= 6 { rng.gen_range(2..=3) } else { 2 };
        let s = gen_structure(&mut rng, n, &[("E", 2)]);
        let refs: Vec<&str> = zs.iter().map(|z| z.as_str()).collect();
        let x = gen_team(&mut rng, &refs, n, 3);
        if x.is_empty() {
            continue;
        }
        let with_team = s.clone().with_relation(rel.clone(), x.tuples_in(&zs)).unwrap();
        let want = eval_esohorn(&with_team, &e).unwrap();
        let got = match satisfies(&s, &x, &flatten(&form), &lim) {
            Ok(v) => v,
            Err(EvalError::Resource(_)) => continue,
            Err(e) => panic!("{e}"),
        };
        assert_eq!(got, want, "open translation disagrees on {e}");
        checked += 1;
    }
    assert!(checked >= 20, "only {checked} samples evaluated");
}
