//! Forward closure under update rules.
//!
//! Pipeline: collapse renaming cycles ([`hat`]), merge the parameter HA with
//! the input CFHA, normalize and clean the merge, build the initial automaton
//! over push/pop stacked states ([`build_initial`]), then saturate it with
//! one transition family per rule and stacked state ([`complete`]).
//!
//! A push state `q^{a1…an}` stands for the tree that started as an
//! `a1`-node and is now labelled `an`; the pop state `q_{a1…an}` stands for
//! that node's children. Trees created by `ap(a, b)` where `b` has rules of
//! its own get the same machinery under a wrapper base (see [`complete`]).

mod rules;

use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::{is_cyclic_directed, tarjan_scc};
use petgraph::graphmap::DiGraphMap;
use thiserror::Error;

use crate::automata::{
    classify_fragment, normalize_cfha, relabel, Arg, Automaton, AutomatonError, EntryMap, Fragment,
    HTransition, Label, StateId, VTransition,
};
use crate::decision::clean;
use crate::hedge::Symbol;

pub use rules::{lift_literal, parse_phrs, parse_update_rule, ParseOptions, Phrs, UpdateError, UpdateRule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClosureError {
    #[error("the {role} automaton must be in the {expected} fragment, found {found}")]
    Fragment {
        role: &'static str,
        expected: &'static str,
        found: Fragment,
    },
    #[error("state `{0}` occurs in both the parameter automaton and the input automaton")]
    StateCollision(String),
    #[error("the rule system has a renaming cycle; apply hat first")]
    NotLoopFree,
    #[error("parent insertion can nest without bound through {}; the wrapper construction would not terminate", .0.iter().map(|s| s.name()).collect::<Vec<_>>().join(" -> "))]
    UnboundedWrapping(Vec<Symbol>),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

/// Symbol → successor graph of the `ren` rules.
fn ren_graph(rules: &BTreeSet<UpdateRule>) -> DiGraphMap<Symbol, ()> {
    let mut g = DiGraphMap::new();
    for r in rules {
        if let UpdateRule::Ren { at, to } = r {
            g.add_edge(*at, *to, ());
        }
    }
    g
}

/// No renaming cycle `a1 → … → an = a1`; a self-renaming counts as a cycle.
pub fn is_loopfree(r: &Phrs) -> bool {
    !is_cyclic_directed(&ren_graph(&r.rules))
}

/// Result of collapsing renaming cycles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hat {
    pub phrs: Phrs,
    pub automata: Vec<Automaton>,
    /// Every symbol to the smallest symbol of its renaming component.
    pub map: BTreeMap<Symbol, Symbol>,
}

/// Replaces every symbol by the representative of its strongly connected
/// component in the `ren` graph, relabels rules and automata, and drops
/// rules whose two sides become equal.
pub fn hat(r: &Phrs, others: &[Automaton]) -> Hat {
    let mut g = ren_graph(&r.rules);
    for a in r.alphabet().into_iter().chain(others.iter().flat_map(|a| a.alphabet.iter().copied())) {
        g.add_node(a);
    }
    let mut map = BTreeMap::new();
    for component in tarjan_scc(&g) {
        let rep = *component.iter().min().expect("components are nonempty");
        for s in component {
            map.insert(s, rep);
        }
    }
    let rules = r
        .rules
        .iter()
        .map(|rule| rule.relabel(&map))
        .filter(|rule| !is_identity(rule))
        .collect();
    Hat {
        phrs: Phrs {
            rules,
            param: relabel(&r.param, &map),
        },
        automata: others.iter().map(|a| relabel(a, &map)).collect(),
        map,
    }
}

fn is_identity(rule: &UpdateRule) -> bool {
    match rule {
        UpdateRule::Ren { at, to } => at == to,
        UpdateRule::Ac { before, after, .. } | UpdateRule::As { before, after, .. } => {
            before.is_empty() && after.is_empty()
        }
        _ => false,
    }
}

/// Push (tree) or pop (children) mode of a stacked state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Push,
    Pop,
}

/// What a stacked state stands for.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Stacked {
    /// A state of the merged automaton, or the push state wrapped by a parent
    /// inserted with `ap` (see [`Stacked::wrapper`]).
    pub base: StateId,
    pub chain: Vec<Symbol>,
    pub mode: Mode,
    /// True when `base` is a wrapped push state rather than a state of B.
    pub wrapper: bool,
}

/// Output of [`build_initial`].
#[derive(Clone, Debug)]
pub struct Initial {
    /// Clean normalized merge of the parameter and input automata.
    pub b: Automaton,
    /// Entry states of `b` that survived cleaning.
    pub entries: EntryMap,
    /// Every path of the renaming graph, including single symbols.
    pub chains: Vec<Vec<Symbol>>,
    /// Stacked states of A₀ (entries included as pop states of length one).
    pub stacked: BTreeMap<StateId, Stacked>,
    pub a0: Automaton,
}

impl Initial {
    /// |P| + the stacked states the chain formula predicts: one push state
    /// per (base, chain) and one pop state per (base, chain) of length ≥ 2,
    /// for every non-entry state `q` and chain `a1…an` with `q_{a1}` alive.
    pub fn predicted_state_count(&self) -> usize {
        let entry_states: BTreeSet<StateId> = self.entries.values().copied().collect();
        let mut count = self.b.states.len();
        for &q in self.b.states.difference(&entry_states) {
            for chain in &self.chains {
                if self.entries.contains_key(&(chain[0], q)) {
                    count += if chain.len() >= 2 { 2 } else { 1 };
                }
            }
        }
        count
    }
}

/// Options for the completion.
#[derive(Clone, Copy, Debug)]
pub struct UpdateOptions {
    /// Give parents inserted by `ap(a, b)` their own stacked states when `b`
    /// has rules. When false, only the single transition `b(q^…) → q^…` is
    /// added, which misses rewrites of the inserted node.
    pub wrap_ap_targets: bool,
}

impl Default for UpdateOptions {
    fn default() -> Self {
        UpdateOptions { wrap_ap_targets: true }
    }
}

/// All paths of the renaming DAG that start at `start`.
fn chains_from(start: Symbol, g: &DiGraphMap<Symbol, ()>) -> Vec<Vec<Symbol>> {
    let mut out = Vec::new();
    let mut stack = vec![vec![start]];
    while let Some(path) = stack.pop() {
        let last = *path.last().expect("paths are nonempty");
        if g.contains_node(last) {
            let mut next: Vec<Symbol> = g.neighbors(last).collect();
            next.sort();
            for b in next.into_iter().rev() {
                let mut p = path.clone();
                p.push(b);
                stack.push(p);
            }
        }
        out.push(path);
    }
    out.sort();
    out
}

fn chain_name(chain: &[Symbol]) -> String {
    chain.iter().map(|s| s.name()).collect::<Vec<_>>().join(".")
}

/// Merges, normalizes and cleans, then builds A₀.
pub fn build_initial(param: &Automaton, a_l: &Automaton, r: &Phrs) -> Result<Initial, ClosureError> {
    if !is_loopfree(r) {
        return Err(ClosureError::NotLoopFree);
    }
    let fp = classify_fragment(param);
    if fp != Fragment::HA {
        return Err(ClosureError::Fragment {
            role: "parameter",
            expected: "HA",
            found: fp,
        });
    }
    let fl = classify_fragment(a_l);
    if fl == Fragment::CF2HA {
        return Err(ClosureError::Fragment {
            role: "input",
            expected: "CFHA",
            found: fl,
        });
    }
    if let Some(q) = param.states.intersection(&a_l.states).next() {
        return Err(ClosureError::StateCollision(q.to_string()));
    }
    let mut alphabet: BTreeSet<Symbol> = param.alphabet.union(&a_l.alphabet).copied().collect();
    alphabet.extend(r.alphabet());
    let mut merged = Automaton::new(alphabet.iter().copied());
    merged.states = param.states.union(&a_l.states).copied().collect();
    merged.finals = a_l.finals.clone();
    merged.horizontals = param.horizontals.union(&a_l.horizontals).cloned().collect();
    merged.verticals = param.verticals.union(&a_l.verticals).cloned().collect();
    merged.validate()?;
    let (normalized, entries) = normalize_cfha(&merged)?;
    let b = clean(&normalized);
    let entries: EntryMap = entries.into_iter().filter(|(_, e)| b.states.contains(e)).collect();

    let g = ren_graph(&r.rules);
    let chains: Vec<Vec<Symbol>> = alphabet.iter().flat_map(|&a| chains_from(a, &g)).collect();
    let entry_states: BTreeSet<StateId> = entries.values().copied().collect();

    let mut taken: BTreeSet<String> = b
        .states
        .iter()
        .map(|q| q.name().to_owned())
        .chain(alphabet.iter().map(|s| s.name().to_owned()))
        .collect();
    let mut a0 = Automaton::new(alphabet.iter().copied());
    a0.states = b.states.clone();
    a0.finals = b.finals.clone();
    a0.horizontals = b.horizontals.clone();
    let mut stacked = BTreeMap::new();
    for (&(a, q), &e) in &entries {
        stacked.insert(
            e,
            Stacked {
                base: q,
                chain: vec![a],
                mode: Mode::Pop,
                wrapper: false,
            },
        );
    }
    for &q in b.states.difference(&entry_states) {
        for chain in &chains {
            let Some(&entry) = entries.get(&(chain[0], q)) else {
                continue;
            };
            let name = chain_name(chain);
            let push = crate::automata::fresh_state(&format!("push:{q}:{name}"), |n| taken.contains(n));
            taken.insert(push.name().to_owned());
            let pop = if chain.len() == 1 {
                entry
            } else {
                let pop = crate::automata::fresh_state(&format!("pop:{q}:{name}"), |n| taken.contains(n));
                taken.insert(pop.name().to_owned());
                stacked.insert(
                    pop,
                    Stacked {
                        base: q,
                        chain: chain.clone(),
                        mode: Mode::Pop,
                        wrapper: false,
                    },
                );
                pop
            };
            stacked.insert(
                push,
                Stacked {
                    base: q,
                    chain: chain.clone(),
                    mode: Mode::Push,
                    wrapper: false,
                },
            );
            a0.states.insert(push);
            a0.states.insert(pop);
            let last = *chain.last().expect("chains are nonempty");
            a0.add_vertical(VTransition::new(last, pop, Arg::Eps, push));
            if chain.len() == 1 {
                a0.add_horizontal(HTransition::unit(push, Arg::Eps, q));
            }
        }
    }
    Ok(Initial {
        b,
        entries,
        chains,
        stacked,
        a0,
    })
}

/// Output of [`complete`].
#[derive(Clone, Debug)]
pub struct Completion {
    /// A′: A₀ saturated by the completion rows.
    pub automaton: Automaton,
    /// All stacked states, including those of wrapper bases.
    pub stacked: BTreeMap<StateId, Stacked>,
    /// Transitions added by the completion rows (excluding wrapper set-up).
    pub rows_added: usize,
    /// Transitions added to set up wrapper bases.
    pub wrapper_rows: usize,
    /// Number of passes over the rule list until nothing changed.
    pub rounds: usize,
}

impl Completion {
    /// Stacked states created for parents inserted by `ap`.
    pub fn wrapper_state_count(&self) -> usize {
        self.stacked.values().filter(|s| s.wrapper).count()
    }
}

/// Whether a parent `parent` inserted above a tree labelled `label` needs its
/// own stacked states. It does not when it has no rules, nor when it carries
/// the same label and its rules (`as`, `ap`, `rpl` only) act on it exactly as
/// they act on the wrapped tree, so that `parent(q^…) → q^…` is exact.
fn needs_wrapper(rules: &[UpdateRule], label: Symbol, parent: Symbol) -> bool {
    let mut own = rules.iter().filter(|r| r.at() == parent).peekable();
    if own.peek().is_none() {
        return false;
    }
    let tree_level_only = own.all(|r| matches!(r, UpdateRule::As { .. } | UpdateRule::Ap { .. } | UpdateRule::Rpl { .. }));
    !(label == parent && tree_level_only)
}

/// A cycle of `b → e` edges, where a wrapper labelled `b` (or a renaming of
/// it) can receive a parent `e` that needs a wrapper again.
fn wrapping_cycle(rules: &[UpdateRule], g: &DiGraphMap<Symbol, ()>) -> Option<Vec<Symbol>> {
    let has_rules: BTreeSet<Symbol> = rules.iter().map(UpdateRule::at).collect();
    let mut wg: DiGraphMap<Symbol, ()> = DiGraphMap::new();
    for &b in &has_rules {
        wg.add_node(b);
        let reach: BTreeSet<Symbol> = chains_from(b, g).into_iter().flatten().collect();
        for r in rules {
            if let UpdateRule::Ap { at, parent } = r {
                if reach.contains(at) && needs_wrapper(rules, *at, *parent) {
                    wg.add_edge(b, *parent, ());
                }
            }
        }
    }
    tarjan_scc(&wg).into_iter().find_map(|mut c| {
        if c.len() > 1 || wg.contains_edge(c[0], c[0]) {
            c.sort();
            let first = c[0];
            c.push(first);
            Some(c)
        } else {
            None
        }
    })
}

struct Completer<'a> {
    a: Automaton,
    stacked: BTreeMap<StateId, Stacked>,
    index: BTreeMap<(StateId, Vec<Symbol>, Mode), StateId>,
    taken: BTreeSet<String>,
    live: &'a BTreeSet<StateId>,
    g: DiGraphMap<Symbol, ()>,
    rules: Vec<UpdateRule>,
    options: UpdateOptions,
    wrapped: BTreeSet<(StateId, Symbol)>,
    rows: usize,
    wrapper_rows: usize,
}

impl Completer<'_> {
    fn add_h(&mut self, t: HTransition, setup: bool) -> bool {
        if self.a.horizontals.contains(&t) {
            return false;
        }
        self.a.add_horizontal(t);
        self.count(setup);
        true
    }

    fn add_v(&mut self, t: VTransition, setup: bool) -> bool {
        if self.a.verticals.contains(&t) {
            return false;
        }
        self.a.add_vertical(t);
        self.count(setup);
        true
    }

    fn count(&mut self, setup: bool) {
        if setup {
            self.wrapper_rows += 1;
        } else {
            self.rows += 1;
        }
    }

    fn find(&self, base: StateId, chain: &[Symbol], mode: Mode) -> Option<StateId> {
        self.index.get(&(base, chain.to_vec(), mode)).copied()
    }

    fn states_ending_in(&self, at: Symbol, mode: Mode) -> Vec<(StateId, Stacked)> {
        self.stacked
            .iter()
            .filter(|(_, s)| s.mode == mode && s.chain.last() == Some(&at))
            .map(|(q, s)| (*q, s.clone()))
            .collect()
    }

    fn seq(states: &[StateId]) -> Vec<(Label, Arg)> {
        states.iter().map(|&q| (Label::State(q), Arg::Eps)).collect()
    }

    fn usable(&self, states: &[StateId]) -> bool {
        states.iter().all(|q| self.live.contains(q))
    }

    /// Adds the rows of one rule for every current stacked state.
    fn apply(&mut self, rule: &UpdateRule) -> bool {
        let mut changed = false;
        match rule {
            UpdateRule::Ren { at, to } => {
                for (q, s) in self.states_ending_in(*at, Mode::Pop) {
                    let mut longer = s.chain.clone();
                    longer.push(*to);
                    if let Some(t) = self.find(s.base, &longer, Mode::Pop) {
                        changed |= self.add_h(HTransition::unit(q, Arg::Eps, t), false);
                    }
                }
                for (q, s) in self.states_ending_in(*to, Mode::Push) {
                    let n = s.chain.len();
                    if n >= 2 && s.chain[n - 2] == *at {
                        if let Some(t) = self.find(s.base, &s.chain[..n - 1], Mode::Push) {
                            changed |= self.add_h(HTransition::unit(q, Arg::Eps, t), false);
                        }
                    }
                }
            }
            UpdateRule::Ac { at, before, after } | UpdateRule::As { at, before, after } => {
                if is_identity(rule) || !self.usable(before) || !self.usable(after) {
                    return false;
                }
                let mode = if matches!(rule, UpdateRule::Ac { .. }) { Mode::Pop } else { Mode::Push };
                for (q, _) in self.states_ending_in(*at, mode) {
                    let mut lhs = Self::seq(before);
                    lhs.push((Label::State(q), Arg::Eps));
                    lhs.extend(Self::seq(after));
                    changed |= self.add_h(HTransition::new(lhs, q), false);
                }
            }
            UpdateRule::Ap { at, parent } => {
                for (q, _) in self.states_ending_in(*at, Mode::Push) {
                    if self.options.wrap_ap_targets && needs_wrapper(&self.rules, *at, *parent) {
                        changed |= self.wrap(q, *parent);
                    } else {
                        changed |= self.add_v(VTransition::new(*parent, q, Arg::Eps, q), false);
                    }
                }
            }
            UpdateRule::Rpl { at, with } => {
                if !self.usable(with) {
                    return false;
                }
                for (q, _) in self.states_ending_in(*at, Mode::Push) {
                    changed |= self.add_h(HTransition::new(Self::seq(with), q), false);
                }
            }
            UpdateRule::Del { at } => {
                for (q, s) in self.states_ending_in(*at, Mode::Pop) {
                    if let Some(t) = self.find(s.base, &s.chain, Mode::Push) {
                        changed |= self.add_h(HTransition::unit(q, Arg::Eps, t), false);
                    }
                }
            }
        }
        changed
    }

    /// Stacked states for a parent `b` inserted above the tree `wrapped`:
    /// its children start as that tree (`wrapped → pop(b)`), it runs through
    /// every renaming chain from `b`, and once closed it stands where the
    /// wrapped tree stood (`push(b) → wrapped`).
    fn wrap(&mut self, wrapped: StateId, b: Symbol) -> bool {
        if !self.wrapped.insert((wrapped, b)) {
            return false;
        }
        for chain in chains_from(b, &self.g) {
            let name = chain_name(&chain);
            let mint = |this: &mut Self, mode: Mode| {
                let prefix = if mode == Mode::Push { "push" } else { "pop" };
                let q = crate::automata::fresh_state(&format!("{prefix}:wrap:{wrapped}:{name}"), |n| {
                    this.taken.contains(n)
                });
                this.taken.insert(q.name().to_owned());
                let s = Stacked {
                    base: wrapped,
                    chain: chain.clone(),
                    mode,
                    wrapper: true,
                };
                this.index.insert((wrapped, chain.clone(), mode), q);
                this.stacked.insert(q, s);
                this.a.states.insert(q);
                q
            };
            let push = mint(self, Mode::Push);
            let pop = mint(self, Mode::Pop);
            let last = *chain.last().expect("chains are nonempty");
            self.add_v(VTransition::new(last, pop, Arg::Eps, push), true);
            if chain.len() == 1 {
                self.add_h(HTransition::unit(wrapped, Arg::Eps, pop), true);
                self.add_h(HTransition::unit(push, Arg::Eps, wrapped), true);
            }
        }
        true
    }
}

/// Saturates A₀ with the completion rows, processing `rules` in the given
/// order: each round applies the first rule that adds something, until no
/// rule does.
///
/// | rule          | rows added, for every matching stacked state        |
/// |---------------|-----------------------------------------------------|
/// | `ren(an, b)`  | `q_{a1…an} → q_{a1…an b}`, `q^{a1…an b} → q^{a1…an}` |
/// | `ac(an,u,v)`  | `u q_{a1…an} v → q_{a1…an}`                          |
/// | `as(an,u,v)`  | `u q^{a1…an} v → q^{a1…an}`                          |
/// | `ap(an, b)`   | `b(q^{a1…an}) → q^{a1…an}`                           |
/// | `rpl(an, u)`  | `u → q^{a1…an}`                                      |
/// | `del(an)`     | `q_{a1…an} → q^{a1…an}`                              |
///
/// With [`UpdateOptions::wrap_ap_targets`], `ap(an, b)` where `b` has rules
/// that the row above cannot account for instead gives the new parent its
/// own push/pop states (based on the wrapped push state), which the other
/// rows then extend like any other node.
pub fn complete(init: &Initial, rules: &[UpdateRule], options: UpdateOptions) -> Result<Completion, ClosureError> {
    let rule_set: BTreeSet<UpdateRule> = rules.iter().cloned().collect();
    let g = ren_graph(&rule_set);
    if is_cyclic_directed(&g) {
        return Err(ClosureError::NotLoopFree);
    }
    if options.wrap_ap_targets {
        if let Some(cycle) = wrapping_cycle(rules, &g) {
            return Err(ClosureError::UnboundedWrapping(cycle));
        }
    }
    let index = init
        .stacked
        .iter()
        .map(|(&q, s)| ((s.base, s.chain.clone(), s.mode), q))
        .collect();
    let taken = init
        .a0
        .states
        .iter()
        .map(|q| q.name().to_owned())
        .chain(init.a0.alphabet.iter().map(|s| s.name().to_owned()))
        .collect();
    let mut c = Completer {
        a: init.a0.clone(),
        stacked: init.stacked.clone(),
        index,
        taken,
        live: &init.b.states,
        g,
        rules: rules.to_vec(),
        options,
        wrapped: BTreeSet::new(),
        rows: 0,
        wrapper_rows: 0,
    };
    let mut rounds = 0;
    loop {
        rounds += 1;
        if !rules.iter().any(|r| c.apply(r)) {
            break;
        }
    }
    Ok(Completion {
        automaton: c.a,
        stacked: c.stacked,
        rows_added: c.rows,
        wrapper_rows: c.wrapper_rows,
        rounds,
    })
}

/// Output of [`post_star_update`].
#[derive(Clone, Debug)]
pub struct UpdateClosure {
    /// CFHA recognizing post* of the (hat-mapped) input language.
    pub automaton: Automaton,
    /// Symbol representatives; queries must be mapped through it first.
    /// Identity when the rule system was already loop-free.
    pub map: BTreeMap<Symbol, Symbol>,
    pub initial: Initial,
    pub completion: Completion,
}

impl UpdateClosure {
    /// Maps a hedge through the representative map.
    pub fn map_hedge(&self, h: &crate::hedge::Hedge) -> crate::hedge::Hedge {
        h.map_labels(&mut |s: &Symbol| *self.map.get(s).unwrap_or(s))
    }
}

/// post* of L(a_l) under the update rules of `r`, parameterized by `r.param`.
pub fn post_star_update(a_l: &Automaton, r: &Phrs, options: UpdateOptions) -> Result<UpdateClosure, ClosureError> {
    let hatted = hat(r, std::slice::from_ref(a_l));
    let a_l = &hatted.automata[0];
    let r = &hatted.phrs;
    let initial = build_initial(&r.param, a_l, r)?;
    let rules: Vec<UpdateRule> = r.rules.iter().cloned().collect();
    let completion = complete(&initial, &rules, options)?;
    Ok(UpdateClosure {
        automaton: completion.automaton.clone(),
        map: hatted.map,
        initial,
        completion,
    })
}
