//! Size-bounded enumeration of an automaton's language.
//!
//! Runs reductions of the preprocessed automaton backwards from the final
//! states. At each step the first state node (in preorder) whose argument is
//! ground is expanded, which is complete because every accepted hedge has a
//! reduction that creates each node over a ground argument. Every expansion
//! adds a node or turns a state into a symbol, and every state node yields at
//! least one node of the final hedge, so the node count of a configuration
//! never exceeds the size of what it generates.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::marking::mark_states;
use crate::automata::{Arg, Automaton, Label, StateId, Transition};
use crate::hedge::{Hedge, Symbol, Tree};

use super::preprocess::preprocess_with_origins;

type LTree = Tree<Label>;

/// All hedges of size ≤ `max_size` accepted by `a`, in (size, lexicographic) order.
pub fn bounded_language(a: &Automaton, max_size: usize) -> Vec<Hedge> {
    let pre = preprocess_with_origins(a);
    let marking = mark_states(a);
    let live = |l: Label| l.as_state().is_none_or(|q| marking.is_marked(q));
    let mut by_rhs: BTreeMap<StateId, Vec<Transition>> = BTreeMap::new();
    for r in &pre.rules {
        let ok = match &r.trans {
            Transition::H(t) => t.labels().all(live),
            Transition::V(t) => live(t.outer) && live(t.inner),
        };
        if ok {
            let q = match &r.trans {
                Transition::H(t) => t.rhs,
                Transition::V(t) => t.rhs,
            };
            by_rhs.entry(q).or_default().push(r.trans.clone());
        }
    }

    let mut found: BTreeSet<Hedge> = BTreeSet::new();
    if a.finals.iter().any(|q| pre.nullable.contains_key(q)) {
        found.insert(Hedge::empty());
    }
    let mut seen: HashSet<Vec<LTree>> = HashSet::new();
    let mut stack: Vec<Vec<LTree>> = Vec::new();
    if max_size > 0 {
        for &q in &a.finals {
            let start = vec![Tree::leaf(Label::State(q))];
            if seen.insert(start.clone()) {
                stack.push(start);
            }
        }
    }
    while let Some(config) = stack.pop() {
        let Some(path) = first_expandable(&config) else {
            found.insert(to_ground(&config));
            continue;
        };
        let size = list_size(&config);
        let node = node_at(&config, &path).clone();
        let q = node.label.as_state().expect("expandable nodes are states");
        let arg = node.children.trees();
        for rule in by_rhs.get(&q).into_iter().flatten() {
            for replacement in expansions(rule, arg) {
                let new_size = size - node.size() + list_size(&replacement);
                if new_size > max_size {
                    continue;
                }
                let next = replace_at(&config, &path, replacement);
                if seen.insert(next.clone()) {
                    stack.push(next);
                }
            }
        }
    }
    let mut out: Vec<Hedge> = found.into_iter().collect();
    crate::hedge::sort_size_lex(&mut out);
    out
}

/// Ways of undoing `rule` on a node whose ground argument is `arg`, as the
/// trees replacing that node.
fn expansions(rule: &Transition, arg: &[LTree]) -> Vec<Vec<LTree>> {
    match rule {
        Transition::V(t) => {
            if t.arg == Arg::Eps && !arg.is_empty() {
                return Vec::new();
            }
            let inner = Tree::new(t.inner, Hedge::from_trees(arg.to_vec()));
            vec![vec![Tree::new(t.outer, Hedge::single(inner))]]
        }
        Transition::H(t) => {
            let vars = t.lhs.iter().filter(|(_, a)| *a == Arg::Var).count();
            if vars == 0 && !arg.is_empty() {
                return Vec::new();
            }
            let mut out = Vec::new();
            for cuts in compositions(arg.len(), vars) {
                let mut parts = cuts.into_iter();
                let trees = t
                    .lhs
                    .iter()
                    .map(|&(label, a)| match a {
                        Arg::Eps => Tree::leaf(label),
                        Arg::Var => {
                            let (from, to) = parts.next().expect("one part per variable");
                            Tree::new(label, Hedge::from_trees(arg[from..to].to_vec()))
                        }
                    })
                    .collect();
                out.push(trees);
            }
            out
        }
    }
}

/// Splits `0..m` into `k` consecutive, possibly empty ranges.
fn compositions(m: usize, k: usize) -> Vec<Vec<(usize, usize)>> {
    if k == 0 {
        return if m == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, m: usize, left: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if left == 1 {
            cur.push((start, m));
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for end in start..=m {
            cur.push((start, end));
            go(end, m, left - 1, cur, out);
            cur.pop();
        }
    }
    go(0, m, k, &mut cur, &mut out);
    out
}

fn list_size(list: &[LTree]) -> usize {
    list.iter().map(Tree::size).sum()
}

fn is_ground(list: &[LTree]) -> bool {
    list.iter()
        .all(|t| matches!(t.label, Label::Sym(_)) && is_ground(t.children.trees()))
}

fn first_expandable(list: &[LTree]) -> Option<Vec<usize>> {
    for (i, t) in list.iter().enumerate() {
        if t.label.is_state() && is_ground(t.children.trees()) {
            return Some(vec![i]);
        }
        if let Some(mut rest) = first_expandable(t.children.trees()) {
            rest.insert(0, i);
            return Some(rest);
        }
    }
    None
}

fn node_at<'a>(list: &'a [LTree], path: &[usize]) -> &'a LTree {
    let node = &list[path[0]];
    if path.len() == 1 {
        node
    } else {
        node_at(node.children.trees(), &path[1..])
    }
}

fn replace_at(list: &[LTree], path: &[usize], replacement: Vec<LTree>) -> Vec<LTree> {
    let i = path[0];
    let mut out = list[..i].to_vec();
    if path.len() == 1 {
        out.extend(replacement);
    } else {
        let node = &list[i];
        let children = replace_at(node.children.trees(), &path[1..], replacement);
        out.push(Tree::new(node.label, Hedge::from_trees(children)));
    }
    out.extend_from_slice(&list[i + 1..]);
    out
}

fn to_ground(list: &[LTree]) -> Hedge {
    list.iter()
        .map(|t| {
            let Label::Sym(s) = t.label else {
                unreachable!("ground configuration")
            };
            Tree::<Symbol>::new(s, to_ground(t.children.trees()))
        })
        .collect()
}
