//! The raw one-step rewrite relation of an automaton on configurations, and
//! traces built from it.

use std::fmt;

use crate::automata::{Arg, Automaton, HTransition, Label, Transition, VTransition};
use crate::hedge::{Hedge, Tree};

/// A mixed hedge over Σ ∪ Q; state nodes carry their argument as children.
pub type Configuration = Hedge<Label>;

pub fn render_config(c: &Configuration) -> String {
    if c.is_empty() {
        "ε".to_owned()
    } else {
        c.to_string()
    }
}

/// One rewrite step `before →[rule] after`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub before: Configuration,
    pub rule: Transition,
    pub after: Configuration,
}

/// A reduction of an input hedge to a final state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub input: Configuration,
    pub steps: Vec<Step>,
}

impl Trace {
    pub fn result(&self) -> &Configuration {
        self.steps.last().map_or(&self.input, |s| &s.after)
    }

    /// Checks that the steps chain up, start at the input, end in a single
    /// final state and that every step is a legal rewrite of `a`.
    pub fn validate(&self, a: &Automaton) -> bool {
        let mut current = &self.input;
        for s in &self.steps {
            if &s.before != current {
                return false;
            }
            if !successors(a, &s.before).into_iter().any(|(t, c)| t == s.rule && c == s.after) {
                return false;
            }
            current = &s.after;
        }
        match current.trees() {
            [t] => t.children.is_empty() && t.label.as_state().is_some_and(|q| a.finals.contains(&q)),
            _ => false,
        }
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(
                f,
                "{}. {} —[{}]→ {}",
                i + 1,
                render_config(&s.before),
                s.rule,
                render_config(&s.after)
            )?;
        }
        Ok(())
    }
}

/// Every configuration reachable from `c` in one step, with the rule used.
///
/// Horizontal rules rewrite a contiguous run of siblings anywhere, ε-rules
/// insert a state leaf at any position, verticals rewrite a node whose only
/// child matches the inner label.
pub fn successors(a: &Automaton, c: &Configuration) -> Vec<(Transition, Configuration)> {
    list_successors(a, c.trees())
        .into_iter()
        .map(|(t, trees)| (t, Hedge::from_trees(trees)))
        .collect()
}

type LTree = Tree<Label>;

fn list_successors(a: &Automaton, list: &[LTree]) -> Vec<(Transition, Vec<LTree>)> {
    let mut out = Vec::new();
    for t in &a.horizontals {
        let n = t.lhs.len();
        if n == 0 {
            for i in 0..=list.len() {
                let mut v = list.to_vec();
                v.insert(i, Tree::leaf(Label::State(t.rhs)));
                out.push((Transition::H(t.clone()), v));
            }
            continue;
        }
        if n > list.len() {
            continue;
        }
        for i in 0..=list.len() - n {
            if let Some(node) = match_horizontal(t, &list[i..i + n]) {
                let mut v = list[..i].to_vec();
                v.push(node);
                v.extend_from_slice(&list[i + n..]);
                out.push((Transition::H(t.clone()), v));
            }
        }
    }
    for (i, node) in list.iter().enumerate() {
        for t in &a.verticals {
            if let Some(new) = match_vertical(t, node) {
                let mut v = list.to_vec();
                v[i] = new;
                out.push((Transition::V(t.clone()), v));
            }
        }
        for (rule, children) in list_successors(a, node.children.trees()) {
            let mut v = list.to_vec();
            v[i] = Tree::new(node.label, Hedge::from_trees(children));
            out.push((rule, v));
        }
    }
    out
}

fn match_horizontal(t: &HTransition, run: &[LTree]) -> Option<LTree> {
    let mut args = Vec::new();
    for (node, &(label, arg)) in run.iter().zip(&t.lhs) {
        if node.label != label {
            return None;
        }
        match arg {
            Arg::Eps if !node.children.is_empty() => return None,
            Arg::Eps => {}
            Arg::Var => args.extend_from_slice(node.children.trees()),
        }
    }
    Some(Tree::new(Label::State(t.rhs), Hedge::from_trees(args)))
}

fn match_vertical(t: &VTransition, node: &LTree) -> Option<LTree> {
    if node.label != t.outer {
        return None;
    }
    let [child] = node.children.trees() else {
        return None;
    };
    if child.label != t.inner || (t.arg == Arg::Eps && !child.children.is_empty()) {
        return None;
    }
    Some(Tree::new(Label::State(t.rhs), child.children.clone()))
}
