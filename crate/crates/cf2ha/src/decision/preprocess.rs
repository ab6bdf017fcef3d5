//! Nullable and unit elimination.
//!
//! Every rule of the preprocessed automaton remembers how it was derived from
//! the original transitions, so that reductions found with it can be replayed
//! step by step on the original automaton.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::automata::{Arg, Automaton, HTransition, Label, StateId, Transition, VTransition};

/// Unit-chain target state to the stage-1 indices along the chain.
type UnitPaths = BTreeMap<StateId, Vec<usize>>;

/// How a state is built from nothing.
#[derive(Clone, Debug)]
pub(crate) enum NullWitness {
    Eps(HTransition),
    /// A horizontal rule whose positions are all nullable states.
    Horizontal(HTransition),
    /// A vertical rule with nullable outer and inner states.
    Vertical(VTransition),
}

/// A rule after nullable elimination, with its origin.
#[derive(Clone, Debug)]
pub(crate) struct Stage1 {
    pub trans: Transition,
    pub origin: Origin,
}

#[derive(Clone, Debug)]
pub(crate) enum Origin {
    /// An original horizontal rule with some nullable positions removed
    /// (`dropped` lists original position indices and their states).
    Horizontal { rule: HTransition, dropped: Vec<(usize, StateId)> },
    Vertical(VTransition),
    /// `p₁(ε) → q` obtained from `p₁(p₂(δ)) → q(δ)` with p₂ nullable.
    VerticalEmptied(VTransition),
}

/// A rule of the preprocessed automaton: a stage-one producer followed by a
/// chain of stage-one unit rules.
#[derive(Clone, Debug)]
pub(crate) struct Prepared {
    pub trans: Transition,
    pub producer: usize,
    pub chain: Vec<usize>,
}

#[derive(Clone, Debug)]
pub(crate) struct Preprocessed {
    pub source: Automaton,
    pub nullable: BTreeMap<StateId, NullWitness>,
    pub stage1: Vec<Stage1>,
    pub rules: Vec<Prepared>,
}

impl Preprocessed {
    /// The preprocessed automaton: prepared rules plus `ε → q` for nullable q.
    pub fn automaton(&self) -> Automaton {
        let mut out = Automaton::new(self.source.alphabet.iter().copied());
        out.states = self.source.states.clone();
        out.finals = self.source.finals.clone();
        for r in &self.rules {
            match &r.trans {
                Transition::H(t) => {
                    out.horizontals.insert(t.clone());
                }
                Transition::V(t) => {
                    out.verticals.insert(t.clone());
                }
            }
        }
        for &q in self.nullable.keys() {
            out.horizontals.insert(HTransition::epsilon(q));
        }
        out
    }
}

fn nullable_witnesses(a: &Automaton) -> BTreeMap<StateId, NullWitness> {
    let mut n: BTreeMap<StateId, NullWitness> = BTreeMap::new();
    let in_n = |n: &BTreeMap<StateId, NullWitness>, l: Label| l.as_state().is_some_and(|q| n.contains_key(&q));
    loop {
        let mut changed = false;
        for t in &a.horizontals {
            if !n.contains_key(&t.rhs) && t.labels().all(|l| in_n(&n, l)) {
                let w = if t.lhs.is_empty() {
                    NullWitness::Eps(t.clone())
                } else {
                    NullWitness::Horizontal(t.clone())
                };
                n.insert(t.rhs, w);
                changed = true;
            }
        }
        for t in &a.verticals {
            if !n.contains_key(&t.rhs) && in_n(&n, t.outer) && in_n(&n, t.inner) {
                n.insert(t.rhs, NullWitness::Vertical(t.clone()));
                changed = true;
            }
        }
        if !changed {
            return n;
        }
    }
}

fn eliminate_nullable(a: &Automaton, nullable: &BTreeMap<StateId, NullWitness>) -> Vec<Stage1> {
    let mut seen: BTreeSet<Transition> = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |trans: Transition, origin: Origin, out: &mut Vec<Stage1>| {
        if seen.insert(trans.clone()) {
            out.push(Stage1 { trans, origin });
        }
    };
    for t in &a.horizontals {
        if t.lhs.is_empty() {
            continue;
        }
        let droppable: Vec<usize> = (0..t.lhs.len())
            .filter(|&i| t.lhs[i].0.as_state().is_some_and(|q| nullable.contains_key(&q)))
            .collect();
        // Every subset of droppable positions except "all positions".
        for mask in 0u64..(1u64 << droppable.len()) {
            let dropped: Vec<usize> = droppable
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask & (1 << bit) != 0)
                .map(|(_, &i)| i)
                .collect();
            if dropped.len() == t.lhs.len() {
                continue;
            }
            let lhs = (0..t.lhs.len()).filter(|i| !dropped.contains(i)).map(|i| t.lhs[i]).collect();
            let dropped = dropped
                .iter()
                .map(|&i| (i, t.lhs[i].0.as_state().expect("droppable positions are states")))
                .collect();
            push(
                Transition::H(HTransition::new(lhs, t.rhs)),
                Origin::Horizontal {
                    rule: t.clone(),
                    dropped,
                },
                &mut out,
            );
        }
    }
    for t in &a.verticals {
        push(Transition::V(t.clone()), Origin::Vertical(t.clone()), &mut out);
        if t.inner.as_state().is_some_and(|q| nullable.contains_key(&q)) {
            push(
                Transition::H(HTransition::unit(t.outer, Arg::Eps, t.rhs)),
                Origin::VerticalEmptied(t.clone()),
                &mut out,
            );
        }
    }
    out
}

/// Shortest unit chains from `start`, as stage-one rule indices.
fn unit_closure(
    start: StateId,
    units: &BTreeMap<StateId, Vec<(usize, Arg, StateId)>>,
    with_eps: bool,
) -> BTreeMap<StateId, Vec<usize>> {
    let mut paths: BTreeMap<StateId, Vec<usize>> = BTreeMap::new();
    paths.insert(start, Vec::new());
    let mut queue = VecDeque::from([start]);
    while let Some(p) = queue.pop_front() {
        for &(idx, arg, r) in units.get(&p).into_iter().flatten() {
            if (arg == Arg::Var || with_eps) && !paths.contains_key(&r) {
                let mut path = paths[&p].clone();
                path.push(idx);
                paths.insert(r, path);
                queue.push_back(r);
            }
        }
    }
    paths
}

fn force_eps(t: &Transition) -> Transition {
    match t {
        Transition::H(h) => Transition::H(HTransition::new(h.lhs.iter().map(|&(l, _)| (l, Arg::Eps)).collect(), h.rhs)),
        Transition::V(v) => Transition::V(VTransition::new(v.outer, v.inner, Arg::Eps, v.rhs)),
    }
}

fn with_rhs(t: &Transition, q: StateId) -> Transition {
    match t {
        Transition::H(h) => Transition::H(HTransition::new(h.lhs.clone(), q)),
        Transition::V(v) => Transition::V(VTransition::new(v.outer, v.inner, v.arg, q)),
    }
}

fn rhs_of(t: &Transition) -> StateId {
    match t {
        Transition::H(h) => h.rhs,
        Transition::V(v) => v.rhs,
    }
}

pub(crate) fn preprocess_with_origins(a: &Automaton) -> Preprocessed {
    let nullable = nullable_witnesses(a);
    let stage1 = eliminate_nullable(a, &nullable);

    let mut units: BTreeMap<StateId, Vec<(usize, Arg, StateId)>> = BTreeMap::new();
    for (idx, s) in stage1.iter().enumerate() {
        if let Transition::H(t) = &s.trans {
            if t.is_unit() {
                let p = t.lhs[0].0.as_state().expect("unit rules read a state");
                units.entry(p).or_default().push((idx, t.lhs[0].1, t.rhs));
            }
        }
    }

    let mut seen: BTreeSet<Transition> = BTreeSet::new();
    let mut rules = Vec::new();
    let mut closures: BTreeMap<StateId, (UnitPaths, UnitPaths)> = BTreeMap::new();
    for (idx, s) in stage1.iter().enumerate() {
        if matches!(&s.trans, Transition::H(t) if t.is_unit()) {
            continue;
        }
        let q = rhs_of(&s.trans);
        let (var_paths, eps_paths) = closures
            .entry(q)
            .or_insert_with(|| (unit_closure(q, &units, false), unit_closure(q, &units, true)));
        for (&r, chain) in var_paths.iter() {
            let trans = with_rhs(&s.trans, r);
            if seen.insert(trans.clone()) {
                rules.push(Prepared {
                    trans,
                    producer: idx,
                    chain: chain.clone(),
                });
            }
        }
        for (&r, chain) in eps_paths.iter() {
            if var_paths.contains_key(&r) {
                continue;
            }
            let trans = with_rhs(&force_eps(&s.trans), r);
            if seen.insert(trans.clone()) {
                rules.push(Prepared {
                    trans,
                    producer: idx,
                    chain: chain.clone(),
                });
            }
        }
    }
    Preprocessed {
        source: a.clone(),
        nullable,
        stage1,
        rules,
    }
}

/// Equivalent automaton without unit rules and whose only ε-rules are
/// `ε → q` for nullable q (needed only to accept the empty hedge).
///
/// Nullable positions get variants that omit them (a dropped variable is
/// bound to ε); unit chains `q₁(δ) → q₂(δ)` are folded into the rules that
/// produce q₁. Chains made possible only by an ε argument yield variants of
/// the producer with every argument forced to ε.
pub fn preprocess(a: &Automaton) -> Automaton {
    preprocess_with_origins(a).automaton()
}
