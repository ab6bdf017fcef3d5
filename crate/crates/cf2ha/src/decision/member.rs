//! Membership by memoized bottom-up reduction over preprocessed rules.
//!
//! For a ground hedge g, `R(g)` is the set of pairs (ℓ, G) such that g
//! reduces to the single node ℓ(G) with G ground. After preprocessing every
//! rule consumes at least one node, and any reduction can be reordered so
//! that each node is created over an already ground argument. Hence R(g) is
//! determined by R of the contiguous segments of g (horizontal rules with
//! n ≥ 2 split g into n nonempty segments), by R(g) itself (rules with n = 1
//! and the outer part of verticals) and by R of the arguments of pairs
//! already in R(g) (inner part of verticals). Arguments are strictly smaller
//! than g, so the recursion is well founded.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use super::preprocess::{preprocess_with_origins, NullWitness, Origin, Preprocessed};
use super::rewrite::{Step, Trace};
use super::DecisionError;
use crate::automata::{Arg, Automaton, HTransition, Label, StateId, Transition, VTransition};
use crate::hedge::{Hedge, Tree};

type Pair = (Label, Hedge);

#[derive(Clone, Debug)]
enum Prov {
    /// The hedge is the single tree a(G).
    Base,
    /// A horizontal rule over segments ending at the given indices.
    Horizontal { rule: usize, parts: Vec<(usize, Pair)> },
    /// A vertical rule: outer pair in R(g), inner pair in R(outer argument).
    Vertical { rule: usize, outer: Pair, inner: Pair },
}

#[derive(Default, Debug)]
struct Reductions {
    order: Vec<Pair>,
    prov: HashMap<Pair, Prov>,
    by_label: HashMap<Label, Vec<Hedge>>,
}

impl Reductions {
    fn add(&mut self, pair: Pair, prov: Prov) -> bool {
        if self.prov.contains_key(&pair) {
            return false;
        }
        self.by_label.entry(pair.0).or_default().push(pair.1.clone());
        self.prov.insert(pair.clone(), prov);
        self.order.push(pair);
        true
    }

    fn has(&self, label: Label, arg_eps: bool) -> bool {
        self.by_label
            .get(&label)
            .is_some_and(|gs| !arg_eps || gs.iter().any(Hedge::is_empty))
    }
}

/// A membership engine for one automaton. Results are memoized across
/// queries, so checking many hedges with one recognizer is much faster than
/// repeated calls to [`super::is_member`].
pub struct Recognizer {
    pre: Preprocessed,
    unary: HashMap<Label, Vec<usize>>,
    multi: Vec<usize>,
    vertical: HashMap<Label, Vec<usize>>,
    memo: HashMap<Hedge, Rc<Reductions>>,
}

impl Recognizer {
    pub fn new(a: &Automaton) -> Recognizer {
        let pre = preprocess_with_origins(a);
        let mut unary: HashMap<Label, Vec<usize>> = HashMap::new();
        let mut multi = Vec::new();
        let mut vertical: HashMap<Label, Vec<usize>> = HashMap::new();
        for (i, r) in pre.rules.iter().enumerate() {
            match &r.trans {
                Transition::H(t) if t.lhs.len() == 1 => unary.entry(t.lhs[0].0).or_default().push(i),
                Transition::H(_) => multi.push(i),
                Transition::V(t) => vertical.entry(t.outer).or_default().push(i),
            }
        }
        Recognizer {
            pre,
            unary,
            multi,
            vertical,
            memo: HashMap::new(),
        }
    }

    pub fn automaton(&self) -> &Automaton {
        &self.pre.source
    }

    fn check_alphabet(&self, h: &Hedge) -> Result<(), DecisionError> {
        for s in h.labels() {
            if !self.pre.source.alphabet.contains(s) {
                return Err(DecisionError::SymbolNotInAlphabet(s.to_string()));
            }
        }
        Ok(())
    }

    /// Whether `h` reduces to a final state.
    pub fn accepts(&mut self, h: &Hedge) -> Result<bool, DecisionError> {
        self.check_alphabet(h)?;
        Ok(self.accepting_state(h).is_some())
    }

    /// Set of states q such that `h →* q`.
    pub fn reachable_states(&mut self, h: &Hedge) -> Result<BTreeSet<StateId>, DecisionError> {
        self.check_alphabet(h)?;
        if h.is_empty() {
            return Ok(self.pre.nullable.keys().copied().collect());
        }
        let r = self.reduce(h);
        Ok(r
            .prov
            .keys()
            .filter(|(l, g)| l.is_state() && g.is_empty())
            .filter_map(|(l, _)| l.as_state())
            .collect())
    }

    fn accepting_state(&mut self, h: &Hedge) -> Option<StateId> {
        let finals = self.pre.source.finals.clone();
        if h.is_empty() {
            return finals.into_iter().find(|q| self.pre.nullable.contains_key(q));
        }
        let r = self.reduce(h);
        finals
            .into_iter()
            .find(|&q| r.prov.contains_key(&(Label::State(q), Hedge::empty())))
    }

    fn reduce(&mut self, g: &Hedge) -> Rc<Reductions> {
        if let Some(r) = self.memo.get(g) {
            return Rc::clone(r);
        }
        let mut red = Reductions::default();
        let m = g.len();
        if m == 1 {
            let t = &g.trees()[0];
            red.add((Label::Sym(t.label), t.children.clone()), Prov::Base);
        } else {
            for k in 0..self.multi.len() {
                let idx = self.multi[k];
                let Transition::H(t) = self.pre.rules[idx].trans.clone() else {
                    unreachable!()
                };
                if t.lhs.len() > m {
                    continue;
                }
                let mut parts = Vec::new();
                self.match_segments(g, &t, 0, 0, &mut parts, idx, &mut red);
            }
        }
        let mut next = 0;
        while next < red.order.len() {
            let (label, arg) = red.order[next].clone();
            next += 1;
            for &idx in self.unary.get(&label).into_iter().flatten() {
                let Transition::H(t) = &self.pre.rules[idx].trans else {
                    unreachable!()
                };
                if t.lhs[0].1 == Arg::Eps && !arg.is_empty() {
                    continue;
                }
                let out = if t.lhs[0].1 == Arg::Var { arg.clone() } else { Hedge::empty() };
                red.add(
                    (Label::State(t.rhs), out),
                    Prov::Horizontal {
                        rule: idx,
                        parts: vec![(m, (label, arg.clone()))],
                    },
                );
            }
            let verticals = self.vertical.get(&label).cloned().unwrap_or_default();
            if verticals.is_empty() || arg.is_empty() {
                continue;
            }
            let inner = self.reduce(&arg);
            for idx in verticals {
                let Transition::V(t) = &self.pre.rules[idx].trans else {
                    unreachable!()
                };
                for g2 in inner.by_label.get(&t.inner).into_iter().flatten() {
                    if t.arg == Arg::Eps && !g2.is_empty() {
                        continue;
                    }
                    red.add(
                        (Label::State(t.rhs), g2.clone()),
                        Prov::Vertical {
                            rule: idx,
                            outer: (label, arg.clone()),
                            inner: (t.inner, g2.clone()),
                        },
                    );
                }
            }
        }
        let red = Rc::new(red);
        self.memo.insert(g.clone(), Rc::clone(&red));
        red
    }

    /// Enumerates splits of `g[start..]` into the remaining positions of `t`.
    #[allow(clippy::too_many_arguments)]
    fn match_segments(
        &mut self,
        g: &Hedge,
        t: &HTransition,
        pos: usize,
        start: usize,
        parts: &mut Vec<(usize, Pair)>,
        rule: usize,
        red: &mut Reductions,
    ) {
        let n = t.lhs.len();
        let m = g.len();
        if pos == n {
            if start == m {
                let args: Vec<Tree> = parts
                    .iter()
                    .zip(&t.lhs)
                    .filter(|(_, (_, a))| *a == Arg::Var)
                    .flat_map(|((_, (_, g)), _)| g.trees().to_vec())
                    .collect();
                red.add(
                    (Label::State(t.rhs), Hedge::from_trees(args)),
                    Prov::Horizontal {
                        rule,
                        parts: parts.clone(),
                    },
                );
            }
            return;
        }
        let (label, arg) = t.lhs[pos];
        let remaining = n - pos - 1;
        for end in start + 1..=m - remaining {
            let seg = g.slice(start..end);
            let sub = self.reduce(&seg);
            if !sub.has(label, arg == Arg::Eps) {
                continue;
            }
            let options: Vec<Hedge> = sub.by_label[&label]
                .iter()
                .filter(|x| arg == Arg::Var || x.is_empty())
                .cloned()
                .collect();
            for x in options {
                parts.push((end, (label, x)));
                self.match_segments(g, t, pos + 1, end, parts, rule, red);
                parts.pop();
            }
        }
    }

    /// A step-by-step reduction of `h` to a final state using the original
    /// transitions, or `None` when `h` is rejected.
    pub fn trace(&mut self, h: &Hedge) -> Result<Option<Trace>, DecisionError> {
        self.check_alphabet(h)?;
        let Some(q) = self.accepting_state(h) else {
            return Ok(None);
        };
        let mut b = TraceBuilder {
            rec: self,
            config: to_nodes(h),
            steps: Vec::new(),
        };
        if h.is_empty() {
            b.emit_nullable(q, &[], 0);
        } else {
            b.emit_pair(&[], 0, h, &(Label::State(q), Hedge::empty()));
        }
        Ok(Some(Trace {
            input: h.map_labels(&mut |s| Label::Sym(*s)),
            steps: b.steps,
        }))
    }
}

#[derive(Clone)]
struct Node {
    label: Label,
    children: Vec<Node>,
}

fn to_nodes(h: &Hedge) -> Vec<Node> {
    h.trees()
        .iter()
        .map(|t| Node {
            label: Label::Sym(t.label),
            children: to_nodes(&t.children),
        })
        .collect()
}

fn to_config(nodes: &[Node]) -> Hedge<Label> {
    nodes
        .iter()
        .map(|n| Tree::new(n.label, to_config(&n.children)))
        .collect()
}

struct TraceBuilder<'a> {
    rec: &'a mut Recognizer,
    config: Vec<Node>,
    steps: Vec<Step>,
}

impl TraceBuilder<'_> {
    fn list(&mut self, path: &[usize]) -> &mut Vec<Node> {
        let mut list = &mut self.config;
        for &i in path {
            list = &mut list[i].children;
        }
        list
    }

    fn record(&mut self, before: Hedge<Label>, rule: Transition) {
        let after = to_config(&self.config);
        debug_assert_ne!(before, after, "a rewrite step changes the configuration");
        self.steps.push(Step { before, rule, after });
    }

    /// Reduces the segment `g`, which starts at `start` of the list at
    /// `path`, to the single node of `pair`.
    fn emit_pair(&mut self, path: &[usize], start: usize, g: &Hedge, pair: &Pair) {
        let red = self.rec.reduce(g);
        let prov = red.prov.get(pair).cloned().expect("pair recorded with provenance");
        match prov {
            Prov::Base => {}
            Prov::Horizontal { rule, parts } => {
                let mut seg_start = 0;
                for (k, (end, sub)) in parts.iter().enumerate() {
                    let seg = g.slice(seg_start..*end);
                    self.emit_pair(path, start + k, &seg, sub);
                    seg_start = *end;
                }
                self.apply_prepared(rule, path, start);
            }
            Prov::Vertical { rule, outer, inner } => {
                self.emit_pair(path, start, g, &outer);
                let mut inner_path = path.to_vec();
                inner_path.push(start);
                self.emit_pair(&inner_path, 0, &outer.1, &inner);
                self.apply_prepared(rule, path, start);
            }
        }
    }

    fn apply_prepared(&mut self, rule: usize, path: &[usize], start: usize) {
        let prepared = self.rec.pre.rules[rule].clone();
        self.apply_stage1(prepared.producer, path, start);
        for unit in prepared.chain {
            self.apply_stage1(unit, path, start);
        }
    }

    fn apply_stage1(&mut self, idx: usize, path: &[usize], start: usize) {
        match self.rec.pre.stage1[idx].origin.clone() {
            Origin::Horizontal { rule, dropped } => {
                for &(i, q) in &dropped {
                    self.emit_nullable(q, path, start + i);
                }
                self.apply_horizontal(&rule, path, start);
            }
            Origin::Vertical(rule) => self.apply_vertical(&rule, path, start),
            Origin::VerticalEmptied(rule) => {
                let inner = rule.inner.as_state().expect("emptied inner label is a state");
                let mut inner_path = path.to_vec();
                inner_path.push(start);
                self.emit_nullable(inner, &inner_path, 0);
                self.apply_vertical(&rule, path, start);
            }
        }
    }

    /// Builds the node `q` at `index` of the list at `path` from nothing.
    fn emit_nullable(&mut self, q: StateId, path: &[usize], index: usize) {
        let witness = self.rec.pre.nullable[&q].clone();
        match witness {
            NullWitness::Eps(rule) => {
                let before = to_config(&self.config);
                self.list(path).insert(
                    index,
                    Node {
                        label: Label::State(q),
                        children: Vec::new(),
                    },
                );
                self.record(before, Transition::H(rule));
            }
            NullWitness::Horizontal(rule) => {
                for (i, &(l, _)) in rule.lhs.iter().enumerate() {
                    let p = l.as_state().expect("nullable rules read states");
                    self.emit_nullable(p, path, index + i);
                }
                self.apply_horizontal(&rule, path, index);
            }
            NullWitness::Vertical(rule) => {
                let outer = rule.outer.as_state().expect("nullable rules read states");
                let inner = rule.inner.as_state().expect("nullable rules read states");
                self.emit_nullable(outer, path, index);
                let mut inner_path = path.to_vec();
                inner_path.push(index);
                self.emit_nullable(inner, &inner_path, 0);
                self.apply_vertical(&rule, path, index);
            }
        }
    }

    fn apply_horizontal(&mut self, rule: &HTransition, path: &[usize], start: usize) {
        let before = to_config(&self.config);
        let n = rule.lhs.len();
        let list = self.list(path);
        let taken: Vec<Node> = list.drain(start..start + n).collect();
        let mut children = Vec::new();
        for (node, &(label, arg)) in taken.into_iter().zip(&rule.lhs) {
            debug_assert_eq!(node.label, label);
            match arg {
                Arg::Var => children.extend(node.children),
                Arg::Eps => debug_assert!(node.children.is_empty()),
            }
        }
        list.insert(
            start,
            Node {
                label: Label::State(rule.rhs),
                children,
            },
        );
        self.record(before, Transition::H(rule.clone()));
    }

    fn apply_vertical(&mut self, rule: &VTransition, path: &[usize], index: usize) {
        let before = to_config(&self.config);
        let list = self.list(path);
        let node = &mut list[index];
        debug_assert_eq!(node.label, rule.outer);
        debug_assert_eq!(node.children.len(), 1);
        let inner = node.children.pop().expect("vertical needs one child");
        debug_assert_eq!(inner.label, rule.inner);
        *node = Node {
            label: Label::State(rule.rhs),
            children: inner.children,
        };
        self.record(before, Transition::V(rule.clone()));
    }
}
