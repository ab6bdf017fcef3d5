//! Emptiness by state marking, and cleaning.

use std::collections::{BTreeMap, BTreeSet};

use crate::automata::{Arg, Automaton, Label, StateId};

/// Marks of a single state.
///
/// `h`: some ground hedge reduces to `q(ε)`. `v`: every ground hedge `g`
/// occurs as an argument, i.e. some ground hedge reduces to `q(g)`; this
/// implies `h`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Marks {
    pub h: bool,
    pub v: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Marking {
    pub marks: BTreeMap<StateId, Marks>,
    /// Passes of the h/v fixpoint that added at least one mark.
    pub iterations: usize,
}

impl Marking {
    pub fn get(&self, q: StateId) -> Marks {
        self.marks.get(&q).copied().unwrap_or_default()
    }

    pub fn is_marked(&self, q: StateId) -> bool {
        self.get(q).h
    }
}

/// States `q` with `ε →* q`: the configuration `q` can be built from nothing.
pub(crate) fn nullable_states(a: &Automaton) -> BTreeSet<StateId> {
    let mut n = BTreeSet::new();
    let in_n = |n: &BTreeSet<StateId>, l: Label| l.as_state().is_some_and(|q| n.contains(&q));
    loop {
        let before = n.len();
        for t in &a.horizontals {
            if t.labels().all(|l| in_n(&n, l)) {
                n.insert(t.rhs);
            }
        }
        for t in &a.verticals {
            if in_n(&n, t.outer) && in_n(&n, t.inner) {
                n.insert(t.rhs);
            }
        }
        if n.len() == before {
            return n;
        }
    }
}

/// Computes the h/v marking as a least fixpoint.
///
/// A symbol behaves like a state marked v. A horizontal rule fires when all
/// its states are marked h; its target gets v when some variable position is
/// universal. A vertical `p₁(p₂(δ)) → q` fires when p₁ is universal and p₂ is
/// marked, or when p₁ is marked h and p₂ can be built from nothing (then the
/// only argument available under p₁ is ε).
pub fn mark_states(a: &Automaton) -> Marking {
    let nullable = nullable_states(a);
    let mut marks: BTreeMap<StateId, Marks> = a.states.iter().map(|&q| (q, Marks::default())).collect();
    let get = |m: &BTreeMap<StateId, Marks>, l: Label| match l {
        Label::Sym(_) => Marks { h: true, v: true },
        Label::State(q) => m.get(&q).copied().unwrap_or_default(),
    };
    let mut iterations = 0;
    loop {
        let mut changed = false;
        let mut raise = |m: &mut BTreeMap<StateId, Marks>, q: StateId, h: bool, v: bool| {
            let e = m.entry(q).or_default();
            if (h && !e.h) || (v && !e.v) {
                e.h |= h || v;
                e.v |= v;
                changed = true;
            }
        };
        for t in &a.horizontals {
            if t.labels().all(|l| get(&marks, l).h) {
                let universal = t.lhs.iter().any(|&(l, arg)| arg == Arg::Var && get(&marks, l).v);
                raise(&mut marks, t.rhs, true, universal);
            }
        }
        for t in &a.verticals {
            let outer = get(&marks, t.outer);
            let inner = get(&marks, t.inner);
            if outer.v && inner.h {
                raise(&mut marks, t.rhs, true, t.arg == Arg::Var && inner.v);
            } else if outer.h && t.inner.as_state().is_some_and(|p| nullable.contains(&p)) {
                raise(&mut marks, t.rhs, true, false);
            }
        }
        if !changed {
            break;
        }
        iterations += 1;
    }
    Marking { marks, iterations }
}

/// True iff no final state is marked.
pub fn is_empty(a: &Automaton) -> bool {
    let m = mark_states(a);
    !a.finals.iter().any(|&q| m.is_marked(q))
}

/// Drops unmarked states and every transition mentioning one.
pub fn clean(a: &Automaton) -> Automaton {
    let m = mark_states(a);
    let keep: BTreeSet<StateId> = a.states.iter().copied().filter(|&q| m.is_marked(q)).collect();
    a.restrict_states(&keep)
}
