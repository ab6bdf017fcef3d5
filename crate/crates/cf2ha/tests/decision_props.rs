mod common;

use std::collections::BTreeSet;

use cf2ha::automata::Automaton;
use cf2ha::decision::{bounded_language, is_empty, mark_states, preprocess, Recognizer};
use cf2ha::hedge::{enumerate_hedges, Hedge, Symbol};
use common::{random_automaton, raw_language, sym};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn letters() -> Vec<Symbol> {
    vec![sym("a"), sym("b")]
}

fn accepted(a: &Automaton, max: usize) -> BTreeSet<Hedge> {
    let mut rec = Recognizer::new(a);
    enumerate_hedges(&letters(), max)
        .into_iter()
        .filter(|x| rec.accepts(x).unwrap())
        .collect()
}

fn automata(seed: u64, count: usize) -> Vec<Automaton> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_automaton(&mut rng, 5, 8)).collect()
}

#[test]
fn membership_agrees_with_unoptimized_reverse_search() {
    let mut complete_runs = 0;
    for (i, a) in automata(7, 100).iter().enumerate() {
        let dp = accepted(a, 5);
        let raw = raw_language(a, 5, 4, 150_000);
        // Everything the raw search finds is accepted.
        assert!(raw.hedges.is_subset(&dp), "automaton {i}: missing {:?}", raw.hedges.difference(&dp).collect::<Vec<_>>());
        if raw.complete {
            complete_runs += 1;
        }
        // Everything accepted has a replayable reduction on the original rules.
        let mut rec = Recognizer::new(a);
        for x in &dp {
            let t = rec.trace(x).unwrap().expect("accepted hedges have traces");
            assert!(t.validate(a), "automaton {i}, hedge {x:?}\n{t}");
        }
    }
    assert!(complete_runs >= 50, "only {complete_runs} exhaustive reverse searches");
}

#[test]
fn emptiness_agrees_with_enumeration() {
    for (i, a) in automata(11, 100).iter().enumerate() {
        let m = mark_states(a);
        assert!(m.iterations <= 2 * a.states.len(), "automaton {i}");
        let nonempty_by_enumeration = !accepted(a, 6).is_empty();
        assert_eq!(is_empty(a), !nonempty_by_enumeration, "automaton {i}");
    }
}

#[test]
fn marks_match_small_witnesses() {
    for (i, a) in automata(13, 100).iter().enumerate() {
        let m = mark_states(a);
        let mut rec = Recognizer::new(a);
        let mut reached = BTreeSet::new();
        for x in enumerate_hedges(&letters(), 6) {
            reached.extend(rec.reachable_states(&x).unwrap());
        }
        for &q in &a.states {
            assert_eq!(m.get(q).h, reached.contains(&q), "automaton {i}, state {q}");
        }
    }
}

#[test]
fn preprocessing_preserves_membership() {
    for a in automata(17, 100) {
        assert_eq!(accepted(&a, 5), accepted(&preprocess(&a), 5));
    }
}

#[test]
fn bounded_language_matches_enumeration() {
    for a in automata(19, 100) {
        let got: BTreeSet<Hedge> = bounded_language(&a, 5).into_iter().collect();
        assert_eq!(got, accepted(&a, 5));
    }
}
