//! The CF²HA model: horizontal and vertical transitions over Σ ∪ Q, fragment
//! classification into HA / CFHA / CF²HA, union, CFHA normalization and
//! alphabet relabeling.

mod format;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::hedge::Symbol;
use crate::intern;

pub use format::{parse_automaton, render_automaton};

/// An interned automaton state name.
///
/// Generated states encode their role in the name: `entry:q:a` is the entry
/// state q_a of a normalized automaton, `push:q:a.b` and `pop:q:a.b` are the
/// stacked states of the update closure.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateId(u32);

/// Role of a state, recovered from its name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StateKind {
    Plain,
    Entry { base: String, symbol: String },
    Push { base: String, chain: Vec<String> },
    Pop { base: String, chain: Vec<String> },
}

pub(crate) fn is_state_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b"_:.'^@+!~|".contains(&b))
}

impl StateId {
    pub fn new(name: &str) -> Result<StateId, AutomatonError> {
        if is_state_name(name) {
            Ok(StateId(intern::intern(name)))
        } else {
            Err(AutomatonError::InvalidStateName(name.to_owned()))
        }
    }

    /// Interns a name produced by this crate's constructions.
    pub(crate) fn generated(name: &str) -> StateId {
        debug_assert!(is_state_name(name), "{name}");
        StateId(intern::intern(name))
    }

    pub fn name(self) -> &'static str {
        intern::lookup(self.0)
    }

    pub fn kind(self) -> StateKind {
        let name = self.name();
        let split = |rest: &str| rest.rsplit_once(':').map(|(b, s)| (b.to_owned(), s.to_owned()));
        if let Some((base, symbol)) = name.strip_prefix("entry:").and_then(split) {
            return StateKind::Entry { base, symbol };
        }
        let chain = |s: String| s.split('.').map(str::to_owned).collect();
        if let Some((base, c)) = name.strip_prefix("push:").and_then(split) {
            return StateKind::Push { base, chain: chain(c) };
        }
        if let Some((base, c)) = name.strip_prefix("pop:").and_then(split) {
            return StateKind::Pop { base, chain: chain(c) };
        }
        StateKind::Plain
    }
}

impl PartialOrd for StateId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for StateId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if self.0 == other.0 {
            std::cmp::Ordering::Equal
        } else {
            self.name().cmp(other.name())
        }
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Debug for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A node label in transitions and configurations: a symbol or a state.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Sym(Symbol),
    State(StateId),
}

impl Label {
    pub fn as_state(self) -> Option<StateId> {
        match self {
            Label::State(q) => Some(q),
            Label::Sym(_) => None,
        }
    }

    pub fn as_symbol(self) -> Option<Symbol> {
        match self {
            Label::Sym(a) => Some(a),
            Label::State(_) => None,
        }
    }

    pub fn is_state(self) -> bool {
        matches!(self, Label::State(_))
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Sym(a) => a.name(),
            Label::State(q) => q.name(),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<Symbol> for Label {
    fn from(a: Symbol) -> Self {
        Label::Sym(a)
    }
}

impl From<StateId> for Label {
    fn from(q: StateId) -> Self {
        Label::State(q)
    }
}

/// Argument slot of a transition position: a variable or the empty hedge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arg {
    Eps,
    Var,
}

/// `p₁(δ₁) … pₙ(δₙ) → q(δ₁ … δₙ)`; with n = 0 this is `ε → q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HTransition {
    pub lhs: Vec<(Label, Arg)>,
    pub rhs: StateId,
}

impl HTransition {
    pub fn new(lhs: Vec<(Label, Arg)>, rhs: StateId) -> Self {
        HTransition { lhs, rhs }
    }

    pub fn epsilon(rhs: StateId) -> Self {
        HTransition { lhs: Vec::new(), rhs }
    }

    /// The unit rule `p(δ) → q(δ)`.
    pub fn unit(p: impl Into<Label>, arg: Arg, q: StateId) -> Self {
        HTransition {
            lhs: vec![(p.into(), arg)],
            rhs: q,
        }
    }

    /// A variable-free rule `p₁ … pₙ → q`.
    pub fn plain(lhs: impl IntoIterator<Item = Label>, q: StateId) -> Self {
        HTransition {
            lhs: lhs.into_iter().map(|l| (l, Arg::Eps)).collect(),
            rhs: q,
        }
    }

    pub fn is_unit(&self) -> bool {
        self.lhs.len() == 1 && self.lhs[0].0.is_state()
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.lhs.iter().map(|&(l, _)| l)
    }
}

/// `p₁(p₂(δ)) → q(δ)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VTransition {
    pub outer: Label,
    pub inner: Label,
    pub arg: Arg,
    pub rhs: StateId,
}

impl VTransition {
    pub fn new(outer: impl Into<Label>, inner: impl Into<Label>, arg: Arg, rhs: StateId) -> Self {
        VTransition {
            outer: outer.into(),
            inner: inner.into(),
            arg,
            rhs,
        }
    }
}

/// Either kind of transition, used when citing a rule in traces.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Transition {
    H(HTransition),
    V(VTransition),
}

fn write_position(f: &mut fmt::Formatter<'_>, label: Label, arg: Arg, var: usize) -> fmt::Result {
    match arg {
        Arg::Eps => write!(f, "{label}"),
        Arg::Var => write!(f, "{label}(${var})"),
    }
}

impl fmt::Display for HTransition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lhs.is_empty() {
            f.write_str("ε")?;
        }
        let mut vars = Vec::new();
        for (i, &(label, arg)) in self.lhs.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write_position(f, label, arg, i + 1)?;
            if arg == Arg::Var {
                vars.push(format!("${}", i + 1));
            }
        }
        write!(f, " -> {}", self.rhs)?;
        if !vars.is_empty() {
            write!(f, "({})", vars.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Display for VTransition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.outer)?;
        write_position(f, self.inner, self.arg, 1)?;
        write!(f, ") -> {}", self.rhs)?;
        if self.arg == Arg::Var {
            f.write_str("($1)")?;
        }
        Ok(())
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transition::H(t) => t.fmt(f),
            Transition::V(t) => t.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid state name `{0}`")]
    InvalidStateName(String),
    #[error("label `{0}` is neither an alphabet symbol nor a state")]
    UnknownLabel(String),
    #[error("`{0}` is both an alphabet symbol and a state")]
    NameClash(String),
    #[error("final state `{0}` is not a state")]
    FinalNotState(String),
    #[error("symbol `{0}` is not in the alphabet")]
    SymbolNotInAlphabet(String),
    #[error("alphabets differ")]
    AlphabetMismatch,
    #[error("expected a {expected} automaton, found {found}")]
    WrongFragment { expected: &'static str, found: Fragment },
    #[error("state `{0}` occurs in both automata")]
    StateCollision(String),
}

/// ⟨Σ, Q, Q^f, Δ⟩ with Δ split into horizontal and vertical transitions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Automaton {
    pub alphabet: BTreeSet<Symbol>,
    pub states: BTreeSet<StateId>,
    pub finals: BTreeSet<StateId>,
    pub horizontals: BTreeSet<HTransition>,
    pub verticals: BTreeSet<VTransition>,
}

impl Automaton {
    pub fn new(alphabet: impl IntoIterator<Item = Symbol>) -> Self {
        Automaton {
            alphabet: alphabet.into_iter().collect(),
            ..Automaton::default()
        }
    }

    /// Adds a horizontal transition, registering its states.
    pub fn add_horizontal(&mut self, t: HTransition) {
        self.register(t.labels().chain([Label::State(t.rhs)]));
        self.horizontals.insert(t);
    }

    /// Adds a vertical transition, registering its states.
    pub fn add_vertical(&mut self, t: VTransition) {
        self.register([t.outer, t.inner, Label::State(t.rhs)]);
        self.verticals.insert(t);
    }

    pub fn add_final(&mut self, q: StateId) {
        self.states.insert(q);
        self.finals.insert(q);
    }

    fn register(&mut self, labels: impl IntoIterator<Item = Label>) {
        for l in labels {
            match l {
                Label::State(q) => {
                    self.states.insert(q);
                }
                Label::Sym(a) => {
                    self.alphabet.insert(a);
                }
            }
        }
    }

    /// The same automaton with a different set of final states.
    pub fn with_finals(&self, finals: impl IntoIterator<Item = StateId>) -> Automaton {
        Automaton {
            finals: finals.into_iter().collect(),
            ..self.clone()
        }
    }

    pub fn transitions(&self) -> impl Iterator<Item = Transition> + '_ {
        self.horizontals
            .iter()
            .cloned()
            .map(Transition::H)
            .chain(self.verticals.iter().cloned().map(Transition::V))
    }

    pub fn transition_count(&self) -> usize {
        self.horizontals.len() + self.verticals.len()
    }

    pub fn has_label(&self, l: Label) -> bool {
        match l {
            Label::Sym(a) => self.alphabet.contains(&a),
            Label::State(q) => self.states.contains(&q),
        }
    }

    /// Checks finals ⊆ Q, Σ ∩ Q = ∅ (by name) and that every transition
    /// label belongs to Σ ∪ Q.
    pub fn validate(&self) -> Result<(), AutomatonError> {
        for q in &self.finals {
            if !self.states.contains(q) {
                return Err(AutomatonError::FinalNotState(q.to_string()));
            }
        }
        for q in &self.states {
            if self.alphabet.iter().any(|a| a.name() == q.name()) {
                return Err(AutomatonError::NameClash(q.to_string()));
            }
        }
        let check = |l: Label| {
            if self.has_label(l) {
                Ok(())
            } else {
                Err(AutomatonError::UnknownLabel(l.to_string()))
            }
        };
        for t in &self.horizontals {
            t.labels().try_for_each(check)?;
            check(Label::State(t.rhs))?;
        }
        for t in &self.verticals {
            check(t.outer)?;
            check(t.inner)?;
            check(Label::State(t.rhs))?;
        }
        Ok(())
    }

    /// Removes every state outside `keep` together with the transitions
    /// mentioning it.
    pub fn restrict_states(&self, keep: &BTreeSet<StateId>) -> Automaton {
        let ok = |l: Label| l.as_state().is_none_or(|q| keep.contains(&q));
        Automaton {
            alphabet: self.alphabet.clone(),
            states: self.states.intersection(keep).copied().collect(),
            finals: self.finals.intersection(keep).copied().collect(),
            horizontals: self
                .horizontals
                .iter()
                .filter(|t| keep.contains(&t.rhs) && t.labels().all(ok))
                .cloned()
                .collect(),
            verticals: self
                .verticals
                .iter()
                .filter(|t| keep.contains(&t.rhs) && ok(t.outer) && ok(t.inner))
                .cloned()
                .collect(),
        }
    }

    /// Renames states through `m` (states missing from `m` keep their name).
    pub fn rename_states(&self, m: &BTreeMap<StateId, StateId>) -> Automaton {
        let s = |q: &StateId| *m.get(q).unwrap_or(q);
        let l = |x: Label| match x {
            Label::State(q) => Label::State(s(&q)),
            other => other,
        };
        Automaton {
            alphabet: self.alphabet.clone(),
            states: self.states.iter().map(s).collect(),
            finals: self.finals.iter().map(s).collect(),
            horizontals: self
                .horizontals
                .iter()
                .map(|t| HTransition::new(t.lhs.iter().map(|&(x, a)| (l(x), a)).collect(), s(&t.rhs)))
                .collect(),
            verticals: self
                .verticals
                .iter()
                .map(|t| VTransition::new(l(t.outer), l(t.inner), t.arg, s(&t.rhs)))
                .collect(),
        }
    }
}

/// Returns `base` if unused, otherwise the first `base~N` that is unused.
pub(crate) fn fresh_state(base: &str, taken: impl Fn(&str) -> bool) -> StateId {
    if !taken(base) {
        return StateId::generated(base);
    }
    (1..)
        .map(|n| format!("{base}~{n}"))
        .find(|name| !taken(name))
        .map(|name| StateId::generated(&name))
        .expect("unbounded search")
}

/// Syntactic class of an automaton presentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fragment {
    HA,
    CFHA,
    CF2HA,
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fragment::HA => "HA",
            Fragment::CFHA => "CFHA",
            Fragment::CF2HA => "CF2HA",
        })
    }
}

/// Smallest syntactic fragment the automaton's transitions fit in.
pub fn classify_fragment(a: &Automaton) -> Fragment {
    let variable_free = a.horizontals.iter().all(|t| t.lhs.iter().all(|&(_, arg)| arg == Arg::Eps))
        && a.verticals
            .iter()
            .all(|t| t.arg == Arg::Eps && matches!((t.outer, t.inner), (Label::Sym(_), Label::State(_))));
    if !variable_free {
        return Fragment::CF2HA;
    }
    if ha_coloring(a).is_some() {
        Fragment::HA
    } else {
        Fragment::CFHA
    }
}

/// Hedge-level (`h`) or tree-level (`v`) role of a state in an HA presentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Color {
    H,
    V,
}

/// Splits Q into Q_h ⊎ Q_v so that every transition has one of the shapes
/// `ε → q_h`, `q_h q_v → q′_h`, `a(q_h) → q_v`. Every occurrence forces the
/// color of its state, so propagation is just conflict detection. States
/// that occur nowhere are put in Q_h.
pub fn ha_coloring(a: &Automaton) -> Option<BTreeMap<StateId, Color>> {
    let mut color: BTreeMap<StateId, Color> = BTreeMap::new();
    let mut force = |q: StateId, c: Color| match color.insert(q, c) {
        Some(old) => old == c,
        None => true,
    };
    for t in &a.horizontals {
        let ok = match t.lhs.as_slice() {
            [] => force(t.rhs, Color::H),
            [(Label::State(p1), Arg::Eps), (Label::State(p2), Arg::Eps)] => {
                force(*p1, Color::H) && force(*p2, Color::V) && force(t.rhs, Color::H)
            }
            _ => false,
        };
        if !ok {
            return None;
        }
    }
    for t in &a.verticals {
        let ok = match (t.outer, t.inner, t.arg) {
            (Label::Sym(_), Label::State(p), Arg::Eps) => force(p, Color::H) && force(t.rhs, Color::V),
            _ => false,
        };
        if !ok {
            return None;
        }
    }
    for &q in &a.states {
        color.entry(q).or_insert(Color::H);
    }
    Some(color)
}

/// Disjoint union. States of `a2` that clash with states of `a1` are renamed.
pub fn union(a1: &Automaton, a2: &Automaton) -> Result<Automaton, AutomatonError> {
    if a1.alphabet != a2.alphabet {
        return Err(AutomatonError::AlphabetMismatch);
    }
    let mut taken: BTreeSet<String> = a1
        .states
        .iter()
        .chain(&a2.states)
        .map(|q| q.name().to_owned())
        .chain(a1.alphabet.iter().map(|s| s.name().to_owned()))
        .collect();
    let mut renaming = BTreeMap::new();
    for &q in &a2.states {
        if a1.states.contains(&q) {
            let fresh = fresh_state(q.name(), |n| taken.contains(n));
            taken.insert(fresh.name().to_owned());
            renaming.insert(q, fresh);
        }
    }
    let b = a2.rename_states(&renaming);
    let mut out = a1.clone();
    out.states.extend(b.states);
    out.finals.extend(b.finals);
    out.horizontals.extend(b.horizontals);
    out.verticals.extend(b.verticals);
    Ok(out)
}

/// Entry state map of a normalized automaton: (a, q) ↦ q_a.
pub type EntryMap = BTreeMap<(Symbol, StateId), StateId>;

/// Normalizes a CFHA so that for every symbol a and state q there is a unique
/// entry state q_a whose only use is `a(q_a) → q`.
///
/// Every vertical `a(p) → q` becomes the unit `p → q_a` plus `a(q_a) → q`.
/// Alphabet symbols occurring directly in horizontal left-hand sides are
/// first lifted to states `leaf:a` (with `a(leaf:ε) → leaf:a`, `ε → leaf:ε`),
/// so that afterwards every Σ-node is read by an entry vertical.
pub fn normalize_cfha(a: &Automaton) -> Result<(Automaton, EntryMap), AutomatonError> {
    let fragment = classify_fragment(a);
    if fragment == Fragment::CF2HA {
        return Err(AutomatonError::WrongFragment {
            expected: "CFHA",
            found: fragment,
        });
    }
    let lifted = lift_horizontal_symbols(a);
    let mut taken: BTreeSet<String> = lifted
        .states
        .iter()
        .map(|q| q.name().to_owned())
        .chain(lifted.alphabet.iter().map(|s| s.name().to_owned()))
        .collect();
    let mut entries = EntryMap::new();
    for &q in &lifted.states {
        for &sym in &lifted.alphabet {
            let e = fresh_state(&format!("entry:{q}:{sym}"), |n| taken.contains(n));
            taken.insert(e.name().to_owned());
            entries.insert((sym, q), e);
        }
    }
    let mut out = Automaton::new(lifted.alphabet.iter().copied());
    out.states = lifted.states.clone();
    out.states.extend(entries.values().copied());
    out.finals = lifted.finals.clone();
    out.horizontals = lifted.horizontals.clone();
    for t in &lifted.verticals {
        let (Label::Sym(sym), Label::State(p)) = (t.outer, t.inner) else {
            unreachable!("CFHA verticals read a symbol over a state")
        };
        out.horizontals.insert(HTransition::unit(p, Arg::Eps, entries[&(sym, t.rhs)]));
    }
    for (&(sym, q), &e) in &entries {
        out.verticals.insert(VTransition::new(sym, e, Arg::Eps, q));
    }
    Ok((out, entries))
}

fn lift_horizontal_symbols(a: &Automaton) -> Automaton {
    let used: BTreeSet<Symbol> = a
        .horizontals
        .iter()
        .flat_map(|t| t.labels().filter_map(Label::as_symbol))
        .collect();
    if used.is_empty() {
        return a.clone();
    }
    let mut taken: BTreeSet<String> = a
        .states
        .iter()
        .map(|q| q.name().to_owned())
        .chain(a.alphabet.iter().map(|s| s.name().to_owned()))
        .collect();
    let mut mint = |base: String| {
        let q = fresh_state(&base, |n| taken.contains(n));
        taken.insert(q.name().to_owned());
        q
    };
    let empty = mint("leaf:eps".to_owned());
    let leaves: BTreeMap<Symbol, StateId> = used.iter().map(|&s| (s, mint(format!("leaf:{s}")))).collect();
    let mut out = a.clone();
    out.horizontals = a
        .horizontals
        .iter()
        .map(|t| {
            let lhs = t
                .lhs
                .iter()
                .map(|&(l, arg)| match l {
                    Label::Sym(s) => (Label::State(leaves[&s]), arg),
                    other => (other, arg),
                })
                .collect();
            HTransition::new(lhs, t.rhs)
        })
        .collect();
    out.add_horizontal(HTransition::epsilon(empty));
    for (&s, &leaf) in &leaves {
        out.add_vertical(VTransition::new(s, empty, Arg::Eps, leaf));
    }
    out
}

/// Applies a symbol map to the alphabet and to every Σ-label of Δ.
pub fn relabel(a: &Automaton, m: &BTreeMap<Symbol, Symbol>) -> Automaton {
    let s = |x: &Symbol| *m.get(x).unwrap_or(x);
    let l = |x: Label| match x {
        Label::Sym(sym) => Label::Sym(s(&sym)),
        other => other,
    };
    Automaton {
        alphabet: a.alphabet.iter().map(s).collect(),
        states: a.states.clone(),
        finals: a.finals.clone(),
        horizontals: a
            .horizontals
            .iter()
            .map(|t| HTransition::new(t.lhs.iter().map(|&(x, arg)| (l(x), arg)).collect(), t.rhs))
            .collect(),
        verticals: a
            .verticals
            .iter()
            .map(|t| VTransition::new(l(t.outer), l(t.inner), t.arg, t.rhs))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(name: &str) -> StateId {
        StateId::new(name).unwrap()
    }

    fn s(name: &str) -> Symbol {
        Symbol::new(name).unwrap()
    }

    #[test]
    fn state_kinds_follow_names() {
        assert_eq!(q("q0").kind(), StateKind::Plain);
        assert_eq!(
            q("entry:q1:a").kind(),
            StateKind::Entry {
                base: "q1".into(),
                symbol: "a".into()
            }
        );
        assert_eq!(
            q("pop:q:a.b").kind(),
            StateKind::Pop {
                base: "q".into(),
                chain: vec!["a".into(), "b".into()]
            }
        );
        assert!(StateId::new("bad name").is_err());
        assert!(StateId::new("a->b").is_err());
    }

    #[test]
    fn epsilon_only_is_ha() {
        let mut a = Automaton::new([s("a")]);
        a.add_horizontal(HTransition::epsilon(q("e")));
        assert_eq!(classify_fragment(&a), Fragment::HA);
    }

    #[test]
    fn variable_transition_is_cf2ha() {
        let mut a = Automaton::new([s("a")]);
        a.add_horizontal(HTransition::epsilon(q("e")));
        a.add_vertical(VTransition::new(q("e"), s("a"), Arg::Var, q("e")));
        assert_eq!(classify_fragment(&a), Fragment::CF2HA);
    }

    #[test]
    fn coloring_conflict_gives_cfha() {
        let mut a = Automaton::new([s("a")]);
        a.add_horizontal(HTransition::epsilon(q("h")));
        a.add_vertical(VTransition::new(s("a"), q("h"), Arg::Eps, q("v")));
        a.add_horizontal(HTransition::plain([Label::State(q("h")), Label::State(q("v"))], q("h")));
        assert_eq!(classify_fragment(&a), Fragment::HA);
        // v used as a hedge-level state breaks the type discipline.
        a.add_horizontal(HTransition::plain([Label::State(q("v")), Label::State(q("v"))], q("h")));
        assert_eq!(classify_fragment(&a), Fragment::CFHA);
    }

    #[test]
    fn union_renames_clashing_states() {
        let mut a = Automaton::new([s("a")]);
        a.add_vertical(VTransition::new(s("a"), q("e"), Arg::Eps, q("f")));
        a.add_horizontal(HTransition::epsilon(q("e")));
        a.add_final(q("f"));
        let u = union(&a, &a).unwrap();
        assert_eq!(u.states.len(), 4);
        assert_eq!(u.finals.len(), 2);
        let other = Automaton::new([s("b")]);
        assert_eq!(union(&a, &other), Err(AutomatonError::AlphabetMismatch));
    }

    #[test]
    fn normalization_counts_entries() {
        let mut a = Automaton::new([s("a"), s("b")]);
        a.add_horizontal(HTransition::epsilon(q("p")));
        a.add_vertical(VTransition::new(s("a"), q("p"), Arg::Eps, q("r")));
        a.add_final(q("r"));
        let (n, entries) = normalize_cfha(&a).unwrap();
        assert_eq!(n.states.len(), 2 + 2 * 2);
        assert_eq!(entries.len(), 4);
        let e = entries[&(s("a"), q("r"))];
        assert!(n.horizontals.contains(&HTransition::unit(q("p"), Arg::Eps, e)));
        assert!(n.verticals.contains(&VTransition::new(s("a"), e, Arg::Eps, q("r"))));
        // Entries never occur in a horizontal lhs or a vertical rhs.
        let entry_set: BTreeSet<StateId> = entries.values().copied().collect();
        assert!(n.horizontals.iter().all(|t| t.labels().all(|l| l.as_state().is_none_or(|x| !entry_set.contains(&x)))));
        assert!(n.verticals.iter().all(|t| !entry_set.contains(&t.rhs)));
    }

    #[test]
    fn normalization_rejects_cf2ha() {
        let mut a = Automaton::new([s("a")]);
        a.add_horizontal(HTransition::unit(s("a"), Arg::Var, q("p")));
        assert!(matches!(normalize_cfha(&a), Err(AutomatonError::WrongFragment { .. })));
    }

    #[test]
    fn relabel_identity_is_identity() {
        let mut a = Automaton::new([s("a"), s("b")]);
        a.add_vertical(VTransition::new(s("a"), q("p"), Arg::Eps, q("r")));
        assert_eq!(relabel(&a, &BTreeMap::new()), a);
        let m: BTreeMap<_, _> = [(s("a"), s("a")), (s("b"), s("a"))].into();
        let r = relabel(&a, &m);
        assert_eq!(r.alphabet, [s("a")].into());
    }

    #[test]
    fn validation_catches_bad_labels() {
        let mut a = Automaton::new([s("a")]);
        a.horizontals.insert(HTransition::unit(s("zz"), Arg::Eps, q("p")));
        a.states.insert(q("p"));
        assert!(matches!(a.validate(), Err(AutomatonError::UnknownLabel(_))));
        let mut b = Automaton::new([s("a")]);
        b.finals.insert(q("p"));
        assert!(matches!(b.validate(), Err(AutomatonError::FinalNotState(_))));
    }
}
