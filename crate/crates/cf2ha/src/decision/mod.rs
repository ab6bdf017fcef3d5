//! Membership, emptiness, marking and cleaning for CF²HA.

mod generate;
mod marking;
mod member;
mod preprocess;
mod rewrite;

use thiserror::Error;

use crate::automata::{Automaton, StateId};
use crate::hedge::Hedge;

pub use generate::bounded_language;
pub use marking::{clean, is_empty, mark_states, Marking, Marks};
pub use member::Recognizer;
pub use preprocess::preprocess;
pub use rewrite::{render_config, successors, Configuration, Step, Trace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecisionError {
    #[error("symbol `{0}` is not in the alphabet")]
    SymbolNotInAlphabet(String),
}

/// Whether `h` reduces to a final state of `a`.
pub fn is_member(a: &Automaton, h: &Hedge) -> Result<bool, DecisionError> {
    Recognizer::new(a).accepts(h)
}

/// A reduction of `h` to a final state, citing original transitions.
pub fn witness_trace(a: &Automaton, h: &Hedge) -> Result<Option<Trace>, DecisionError> {
    Recognizer::new(a).trace(h)
}

/// The automaton accepting L(a, q).
pub fn state_language(a: &Automaton, q: StateId) -> Automaton {
    a.with_finals([q])
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::automata::{parse_automaton, Arg, HTransition, Label, VTransition};
    use crate::hedge::{enumerate_hedges, parse_hedge, Symbol};

    fn aut(text: &str) -> Automaton {
        parse_automaton(text).unwrap()
    }

    fn example2() -> Automaton {
        aut(include_str!("../../fixtures/example2.aut"))
    }

    fn h(s: &str) -> Hedge {
        parse_hedge(s).unwrap()
    }

    fn q(name: &str) -> StateId {
        StateId::new(name).unwrap()
    }

    #[test]
    fn tpattern_membership() {
        let a = example2();
        assert!(is_member(&a, &h("a b c")).unwrap());
        assert!(is_member(&a, &h("a a b(b) c c")).unwrap());
        assert!(!is_member(&a, &h("a b(b) c c")).unwrap());
        assert!(!is_member(&a, &h("")).unwrap());
        assert!(matches!(
            is_member(&a, &h("a z c")),
            Err(DecisionError::SymbolNotInAlphabet(_))
        ));
    }

    #[test]
    fn example4_with_empty_constants() {
        let a = aut(include_str!("../../fixtures/example4.aut"));
        assert!(is_member(&a, &h("h(h(g(a(a) b(b))))")).unwrap());
        assert!(is_member(&a, &h("g")).unwrap());
        assert!(!is_member(&a, &h("h(g(a(a) b(b)))")).unwrap());
    }

    #[test]
    fn trace_for_abc_has_three_steps() {
        let a = example2();
        let t = witness_trace(&a, &h("a b c")).unwrap().unwrap();
        assert_eq!(t.steps.len(), 3);
        assert!(t.validate(&a));
        let text = t.to_string();
        assert_eq!(
            text,
            "1. a b c —[b($1) -> q0($1)]→ a q0 c\n\
             2. a q0 c —[a q0($2) -> q1($2)]→ q1 c\n\
             3. q1 c —[q1($1) c -> q2($1)]→ q2\n"
        );
        assert!(witness_trace(&a, &h("a b")).unwrap().is_none());
    }

    #[test]
    fn traces_replay_on_example2() {
        let a = example2();
        let mut rec = Recognizer::new(&a);
        let alphabet: Vec<Symbol> = a.alphabet.iter().copied().collect();
        for x in enumerate_hedges(&alphabet, 7) {
            if let Some(t) = rec.trace(&x).unwrap() {
                assert!(t.validate(&a), "{x}");
            }
        }
    }

    #[test]
    fn marking_examples() {
        let a = aut("alphabet: a\nstates: q\ntrans: -> q\n");
        assert!(mark_states(&a).get(q("q")).h);
        let m = mark_states(&example2());
        for name in ["q0", "q1", "q2"] {
            assert!(m.get(q(name)).h, "{name}");
        }
        let e = aut(include_str!("../../fixtures/empty.aut"));
        assert!(!mark_states(&e).get(q("q2")).h);
        assert!(is_empty(&e));
        assert!(!is_empty(&example2()));
        assert!(is_empty(&aut("alphabet: a\nstates: q\ntrans: a -> q\n")));
    }

    #[test]
    fn vertical_over_states_built_from_nothing() {
        // e(e) → f needs e inserted under an inserted e.
        let a = aut("alphabet: a\nstates: e f\nfinal: f\ntrans: -> e\ntrans: e(e) -> f\n");
        assert!(!is_empty(&a));
        assert!(is_member(&a, &Hedge::empty()).unwrap());
        let t = witness_trace(&a, &Hedge::empty()).unwrap().unwrap();
        assert!(t.validate(&a));
    }

    #[test]
    fn preprocess_adds_nullable_variant() {
        let mut a = Automaton::new([Symbol::new("a").unwrap()]);
        a.add_horizontal(HTransition::epsilon(q("p")));
        a.add_horizontal(HTransition::new(
            vec![(Label::State(q("p")), Arg::Eps), (Label::Sym(Symbol::new("a").unwrap()), Arg::Var)],
            q("q"),
        ));
        a.add_final(q("q"));
        let p = preprocess(&a);
        let variant = HTransition::unit(Symbol::new("a").unwrap(), Arg::Var, q("q"));
        assert!(p.horizontals.contains(&variant));
        assert!(is_member(&a, &h("a")).unwrap());
        assert!(is_member(&p, &h("a")).unwrap());
        assert!(!is_member(&a, &h("a(a)")).unwrap());
        let t = witness_trace(&a, &h("a")).unwrap().unwrap();
        assert!(t.validate(&a));
        assert_eq!(t.steps.len(), 2);
    }

    #[test]
    fn preprocess_without_units_or_eps_is_identity() {
        let a = example2();
        assert_eq!(preprocess(&a), a);
    }

    #[test]
    fn unit_chains_and_eps_units() {
        // a(x) → p(x); p(x) → r(x); r(ε) → s; s final: only "a" is accepted.
        let a = aut(
            "alphabet: a\nstates: p r s\nfinal: s\ntrans: a($1) -> p($1)\ntrans: p($1) -> r($1)\ntrans: r -> s\n",
        );
        let pre = preprocess(&a);
        assert!(pre.horizontals.iter().all(|t| !t.is_unit()));
        assert!(is_member(&a, &h("a")).unwrap());
        assert!(!is_member(&a, &h("a(a)")).unwrap());
        let t = witness_trace(&a, &h("a")).unwrap().unwrap();
        assert_eq!(t.steps.len(), 3);
        assert!(t.validate(&a));
    }

    #[test]
    fn clean_removes_junk_and_is_idempotent() {
        let mut a = example2();
        a.add_vertical(VTransition::new(Symbol::new("a").unwrap(), q("junk"), Arg::Eps, q("junk2")));
        a.states.insert(q("junk"));
        let c = clean(&a);
        assert!(!c.states.contains(&q("junk")));
        assert!(!c.states.contains(&q("junk2")));
        assert_eq!(clean(&c), c);
        assert_eq!(clean(&example2()), example2());
        let alphabet: Vec<Symbol> = a.alphabet.iter().copied().collect();
        for &state in &c.states {
            let mut before = Recognizer::new(&state_language(&a, state));
            let mut after = Recognizer::new(&state_language(&c, state));
            for x in enumerate_hedges(&alphabet, 4) {
                assert_eq!(before.accepts(&x).unwrap(), after.accepts(&x).unwrap());
            }
        }
    }

    #[test]
    fn bounded_language_of_example2() {
        let a = example2();
        let got: BTreeSet<Hedge> = bounded_language(&a, 6).into_iter().collect();
        let alphabet: Vec<Symbol> = a.alphabet.iter().copied().collect();
        let mut rec = Recognizer::new(&a);
        let want: BTreeSet<Hedge> = enumerate_hedges(&alphabet, 6)
            .into_iter()
            .filter(|x| rec.accepts(x).unwrap())
            .collect();
        assert_eq!(got, want);
        assert!(got.contains(&h("a a b(b) c c")));
        let nine = bounded_language(&a, 9);
        assert!(nine.contains(&h("a a a b(b(b)) c c c")));
        assert!(nine.iter().all(|x| rec.accepts(x).unwrap()));
    }
}
