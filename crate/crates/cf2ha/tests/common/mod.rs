//! Shared oracles and generators for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::path::PathBuf;

use cf2ha::automata::{parse_automaton, Arg, Automaton, HTransition, Label, StateId, VTransition};
use cf2ha::hedge::{parse_hedge, Hedge, Symbol, Tree};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture(name: &str) -> Automaton {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture exists");
    parse_automaton(&text).expect("fixture parses")
}

pub fn h(s: &str) -> Hedge {
    parse_hedge(s).unwrap()
}

pub fn sym(s: &str) -> Symbol {
    Symbol::new(s).unwrap()
}

pub fn st(s: &str) -> StateId {
    StateId::new(s).unwrap()
}

/// A random automaton over {a, b} with at most `max_states` states and at
/// most `max_trans` transitions of every shape.
pub fn random_automaton(rng: &mut ChaCha8Rng, max_states: usize, max_trans: usize) -> Automaton {
    let letters = [sym("a"), sym("b")];
    let n_states = rng.gen_range(1..=max_states);
    let states: Vec<StateId> = (0..n_states).map(|i| st(&format!("s{i}"))).collect();
    let mut a = Automaton::new(letters);
    a.states.extend(states.iter().copied());
    let label = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.4) {
            Label::Sym(letters[rng.gen_range(0..2)])
        } else {
            Label::State(states[rng.gen_range(0..n_states)])
        }
    };
    let arg = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { Arg::Var } else { Arg::Eps };
    let n_trans = rng.gen_range(1..=max_trans);
    for _ in 0..n_trans {
        let rhs = states[rng.gen_range(0..n_states)];
        if rng.gen_bool(0.3) {
            let outer = label(rng);
            let inner = label(rng);
            let x = arg(rng);
            a.verticals.insert(VTransition::new(outer, inner, x, rhs));
        } else {
            let n = [0, 1, 1, 2, 2, 2, 3][rng.gen_range(0..7)];
            let lhs = (0..n).map(|_| (label(rng), arg(rng))).collect();
            a.horizontals.insert(HTransition::new(lhs, rhs));
        }
    }
    for &q in &states {
        if rng.gen_bool(0.4) {
            a.finals.insert(q);
        }
    }
    if a.finals.is_empty() {
        a.finals.insert(states[0]);
    }
    a
}

type LTree = Tree<Label>;

fn size(list: &[LTree]) -> usize {
    list.iter().map(Tree::size).sum()
}

/// Result of the unoptimized reverse search.
pub struct RawLanguage {
    pub hedges: BTreeSet<Hedge>,
    /// False when the configuration budget ran out before the fixpoint.
    pub complete: bool,
}

/// Hedges of size ≤ `max_size` that reduce to a final state, found by
/// running every transition backwards at every node, in every order, over
/// configurations of at most `max_size + slack` nodes. Uses nothing from
/// the library except the data types.
pub fn raw_language(a: &Automaton, max_size: usize, slack: usize, budget: usize) -> RawLanguage {
    let bound = max_size + slack;
    let mut seen: HashSet<Vec<LTree>> = HashSet::new();
    let mut queue = VecDeque::new();
    for &q in &a.finals {
        let c = vec![Tree::leaf(Label::State(q))];
        seen.insert(c.clone());
        queue.push_back(c);
    }
    let mut hedges = BTreeSet::new();
    while let Some(c) = queue.pop_front() {
        if let Some(g) = ground(&c) {
            if size(&c) <= max_size {
                hedges.insert(g);
            }
        }
        for next in predecessors(a, &c) {
            if size(&next) <= bound && !seen.contains(&next) {
                if seen.len() >= budget {
                    return RawLanguage { hedges, complete: false };
                }
                seen.insert(next.clone());
                queue.push_back(next);
            }
        }
    }
    RawLanguage { hedges, complete: true }
}

fn ground(list: &[LTree]) -> Option<Hedge> {
    list.iter()
        .map(|t| match t.label {
            Label::Sym(s) => Some(Tree::new(s, ground(t.children.trees())?)),
            Label::State(_) => None,
        })
        .collect()
}

fn splits(m: usize, k: usize) -> Vec<Vec<(usize, usize)>> {
    if k == 0 {
        return if m == 0 { vec![vec![]] } else { vec![] };
    }
    if k == 1 {
        return vec![vec![(0, m)]];
    }
    let mut out = Vec::new();
    for end in 0..=m {
        for mut rest in splits(m - end, k - 1) {
            for r in &mut rest {
                r.0 += end;
                r.1 += end;
            }
            rest.insert(0, (0, end));
            out.push(rest);
        }
    }
    out
}

/// All configurations c′ with c′ → c in one step.
fn predecessors(a: &Automaton, list: &[LTree]) -> Vec<Vec<LTree>> {
    let mut out = Vec::new();
    for (i, node) in list.iter().enumerate() {
        if let Label::State(q) = node.label {
            let arg = node.children.trees();
            for t in a.horizontals.iter().filter(|t| t.rhs == q) {
                let vars = t.lhs.iter().filter(|(_, x)| *x == Arg::Var).count();
                for cuts in splits(arg.len(), vars) {
                    let mut parts = cuts.into_iter();
                    let mut v = list[..i].to_vec();
                    for &(l, x) in &t.lhs {
                        let children = match x {
                            Arg::Eps => Hedge::empty(),
                            Arg::Var => {
                                let (s, e) = parts.next().unwrap();
                                Hedge::from_trees(arg[s..e].to_vec())
                            }
                        };
                        v.push(Tree::new(l, children));
                    }
                    v.extend_from_slice(&list[i + 1..]);
                    out.push(v);
                }
            }
            for t in a.verticals.iter().filter(|t| t.rhs == q) {
                if t.arg == Arg::Eps && !arg.is_empty() {
                    continue;
                }
                let inner = Tree::new(t.inner, Hedge::from_trees(arg.to_vec()));
                let mut v = list.to_vec();
                v[i] = Tree::new(t.outer, Hedge::single(inner));
                out.push(v);
            }
        }
        for sub in predecessors(a, node.children.trees()) {
            let mut v = list.to_vec();
            v[i] = Tree::new(node.label, Hedge::from_trees(sub));
            out.push(v);
        }
    }
    out
}

/// A uniformly shaped random hedge with exactly `size` nodes.
pub fn random_hedge(rng: &mut ChaCha8Rng, letters: &[Symbol], size: usize) -> Hedge {
    let mut trees = Vec::new();
    let mut left = size;
    while left > 0 {
        let k = rng.gen_range(1..=left);
        let label = letters[rng.gen_range(0..letters.len())];
        trees.push(Tree::new(label, random_hedge(rng, letters, k - 1)));
        left -= k;
    }
    Hedge::from_trees(trees)
}

fn leaf_count(h: &Hedge) -> usize {
    h.trees()
        .iter()
        .map(|t| if t.children.is_empty() { 1 } else { leaf_count(&t.children) })
        .sum()
}

/// `h` with the hole attached as the only child of its `k`-th leaf.
fn hole_under_leaf(h: &Hedge, k: &mut usize) -> Hedge {
    let trees = h
        .trees()
        .iter()
        .map(|t| {
            if t.children.is_empty() {
                let hit = *k == 0;
                *k = k.wrapping_sub(1);
                if hit {
                    return Tree::new(t.label, Hedge::leaf(Symbol::hole()));
                }
                t.clone()
            } else {
                Tree::new(t.label, hole_under_leaf(&t.children, k))
            }
        })
        .collect();
    Hedge::from_trees(trees)
}

/// A random linear, inverse-monadic, 1-childvar right-hand side with
/// 1..=`max_nodes` symbol nodes; the variable is the only child of a leaf.
pub fn random_childvar_rhs(rng: &mut ChaCha8Rng, letters: &[Symbol], max_nodes: usize) -> Hedge {
    let n = rng.gen_range(1..=max_nodes);
    let g = random_hedge(rng, letters, n);
    let mut k = rng.gen_range(0..leaf_count(&g));
    hole_under_leaf(&g, &mut k)
}

/// A hedge automaton (HA shapes only) in which state `name` accepts exactly
/// the listed hedges. Auxiliary states are `{prefix}N`.
pub fn finite_ha(prefix: &str, alphabet: &[Symbol], languages: &[(&str, Vec<Hedge>)], finals: &[&str]) -> Automaton {
    struct B<'p> {
        a: Automaton,
        prefix: &'p str,
        hedges: std::collections::BTreeMap<Hedge, StateId>,
        trees: std::collections::BTreeMap<Tree, StateId>,
    }
    impl B<'_> {
        fn fresh(&mut self) -> StateId {
            let q = st(&format!("{}{}", self.prefix, self.a.states.len()));
            self.a.states.insert(q);
            q
        }
        fn hedge(&mut self, h: &Hedge) -> StateId {
            if let Some(&q) = self.hedges.get(h) {
                return q;
            }
            let q = self.fresh();
            self.hedges.insert(h.clone(), q);
            if h.is_empty() {
                self.a.add_horizontal(HTransition::epsilon(q));
            } else {
                let (init, last) = self.split(h);
                self.a.add_horizontal(HTransition::plain([Label::State(init), Label::State(last)], q));
            }
            q
        }
        fn split(&mut self, h: &Hedge) -> (StateId, StateId) {
            let n = h.len();
            (self.hedge(&h.slice(0..n - 1)), self.tree(&h.trees()[n - 1]))
        }
        fn tree(&mut self, t: &Tree) -> StateId {
            if let Some(&q) = self.trees.get(t) {
                return q;
            }
            let q = self.fresh();
            self.trees.insert(t.clone(), q);
            let inner = self.hedge(&t.children);
            self.a.add_vertical(VTransition::new(t.label, inner, Arg::Eps, q));
            q
        }
    }
    let mut b = B {
        a: Automaton::new(alphabet.iter().copied()),
        prefix,
        hedges: Default::default(),
        trees: Default::default(),
    };
    for (name, hedges) in languages {
        let p = st(name);
        b.a.states.insert(p);
        for h in hedges {
            if h.is_empty() {
                b.a.add_horizontal(HTransition::epsilon(p));
            } else {
                let (init, last) = b.split(h);
                b.a.add_horizontal(HTransition::plain([Label::State(init), Label::State(last)], p));
            }
        }
    }
    for f in finals {
        b.a.add_final(st(f));
    }
    b.a
}
