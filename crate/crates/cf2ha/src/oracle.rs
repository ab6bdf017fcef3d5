//! Brute-force hedge rewriting: the reference semantics for both closures.
//!
//! Rules have a left-hand side `a(x)`; the right-hand side is a hedge in
//! which the hole symbol stands for `x`. Applying a rule at an `a`-node
//! replaces that node by the right-hand side with the node's children
//! spliced in for the hole.

use std::collections::{BTreeMap, BTreeSet};

use crate::automata::StateId;
use crate::closure_update::{Phrs, UpdateRule};
use crate::decision::Recognizer;
use crate::hedge::{enumerate_hedges, sort_size_lex, Hedge, Symbol, Tree};

/// `symbol(x) → rhs`, the hole in `rhs` standing for `x`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundRule {
    pub symbol: Symbol,
    pub rhs: Hedge,
}

impl GroundRule {
    pub fn new(symbol: Symbol, rhs: Hedge) -> GroundRule {
        GroundRule { symbol, rhs }
    }

    /// Whether one application never shrinks a hedge: `x` is kept and the
    /// node is replaced by at least one node.
    pub fn is_size_nondecreasing(&self) -> bool {
        self.rhs.hole_count() == 1 && self.rhs.size() >= 2
    }
}

impl std::fmt::Display for GroundRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rhs = self.rhs.to_string().replace(crate::hedge::HOLE_NAME, "$x");
        write!(f, "{}($x) -> {}", self.symbol, rhs)
    }
}

pub type GroundRuleSet = BTreeSet<GroundRule>;

/// Every hedge reachable from `h` in exactly one rewrite step.
pub fn one_step(rules: &GroundRuleSet, h: &Hedge) -> BTreeSet<Hedge> {
    one_step_all(rules, h).into_iter().collect()
}

/// One successor per (node, matching rule) pair, duplicates included.
pub fn one_step_all(rules: &GroundRuleSet, h: &Hedge) -> Vec<Hedge> {
    let mut by_symbol: BTreeMap<Symbol, Vec<&Hedge>> = BTreeMap::new();
    for r in rules {
        by_symbol.entry(r.symbol).or_default().push(&r.rhs);
    }
    let mut out = Vec::new();
    rewrite_list(&by_symbol, h.trees(), &mut |trees| out.push(Hedge::from_trees(trees)));
    out
}

fn rewrite_list(by_symbol: &BTreeMap<Symbol, Vec<&Hedge>>, list: &[Tree], emit: &mut dyn FnMut(Vec<Tree>)) {
    for (i, t) in list.iter().enumerate() {
        let splice = |middle: &[Tree]| {
            let mut v = Vec::with_capacity(list.len() + middle.len());
            v.extend_from_slice(&list[..i]);
            v.extend_from_slice(middle);
            v.extend_from_slice(&list[i + 1..]);
            v
        };
        for rhs in by_symbol.get(&t.label).into_iter().flatten() {
            emit(splice(rhs.plug(&t.children).trees()));
        }
        rewrite_list(by_symbol, t.children.trees(), &mut |children| {
            emit(splice(&[Tree::new(t.label, Hedge::from_trees(children))]));
        });
    }
}

/// Result of [`post_star_bounded`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedPost {
    /// Reachable hedges of size ≤ `max_size`, in (size, lexicographic) order.
    pub hedges: Vec<Hedge>,
    /// True when `hedges` is exactly post* ∩ {size ≤ max_size}: every rule
    /// is size-nondecreasing, so no path to a small hedge passes through a
    /// larger one.
    pub exact: bool,
    /// Number of distinct hedges visited.
    pub explored: usize,
}

/// Breadth-first closure from `seeds`, dropping hedges larger than
/// `max_intermediate` and reporting those of size ≤ `max_size`.
pub fn post_star_bounded(
    rules: &GroundRuleSet,
    seeds: impl IntoIterator<Item = Hedge>,
    max_size: usize,
    max_intermediate: usize,
) -> BoundedPost {
    let max_intermediate = max_intermediate.max(max_size);
    let mut seen: BTreeSet<Hedge> = seeds.into_iter().filter(|h| h.size() <= max_intermediate).collect();
    let mut frontier: Vec<Hedge> = seen.iter().cloned().collect();
    while !frontier.is_empty() {
        sort_size_lex(&mut frontier);
        let mut next = Vec::new();
        for h in &frontier {
            for s in one_step_all(rules, h) {
                if s.size() <= max_intermediate && !seen.contains(&s) {
                    seen.insert(s.clone());
                    next.push(s);
                }
            }
        }
        frontier = next;
    }
    let explored = seen.len();
    let mut hedges: Vec<Hedge> = seen.into_iter().filter(|h| h.size() <= max_size).collect();
    sort_size_lex(&mut hedges);
    BoundedPost {
        hedges,
        exact: rules.iter().all(GroundRule::is_size_nondecreasing),
        explored,
    }
}

/// Hedges reachable from `seeds` in at most `depth` steps, never exceeding
/// `max_size` nodes.
pub fn reachable_within(rules: &GroundRuleSet, seeds: impl IntoIterator<Item = Hedge>, depth: usize, max_size: usize) -> BTreeSet<Hedge> {
    let mut seen: BTreeSet<Hedge> = seeds.into_iter().filter(|h| h.size() <= max_size).collect();
    let mut frontier: Vec<Hedge> = seen.iter().cloned().collect();
    for _ in 0..depth {
        let mut next = Vec::new();
        for h in &frontier {
            for s in one_step(rules, h) {
                if s.size() <= max_size && seen.insert(s.clone()) {
                    next.push(s);
                }
            }
        }
        frontier = next;
    }
    seen
}

/// Result of [`instantiate_phrs`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Instantiation {
    pub rules: GroundRuleSet,
    /// One line per update rule dropped because a parameter state has no
    /// member within the bound.
    pub warnings: Vec<String>,
}

/// Expands every update rule over all choices of parameter hedges of size
/// ≤ `param_size_bound`, each state occurrence chosen independently.
pub fn instantiate_phrs(r: &Phrs, param_size_bound: usize) -> Instantiation {
    let candidates = enumerate_hedges(&r.param.alphabet, param_size_bound);
    let mut languages: BTreeMap<StateId, Vec<Hedge>> = BTreeMap::new();
    let mut language = |p: StateId| -> Vec<Hedge> {
        languages
            .entry(p)
            .or_insert_with(|| {
                let mut rec = Recognizer::new(&r.param.with_finals([p]));
                candidates.iter().filter(|h| rec.accepts(h).unwrap_or(false)).cloned().collect()
            })
            .clone()
    };
    let mut out = Instantiation::default();
    let hole = || Hedge::leaf(Symbol::hole());
    for rule in &r.rules {
        let states = rule.param_states();
        let choices: Vec<Vec<Hedge>> = states.iter().map(|&p| language(p)).collect();
        if let Some(i) = choices.iter().position(Vec::is_empty) {
            out.warnings.push(format!(
                "rule `{rule}` dropped: state `{}` has no member of size ≤ {param_size_bound}",
                states[i]
            ));
            continue;
        }
        for pick in product(&choices) {
            let cat = |xs: &[Hedge]| xs.iter().fold(Hedge::empty(), |acc, x| acc.concat(x));
            let rhs = match rule {
                UpdateRule::Ren { to, .. } => Hedge::single(Tree::new(*to, hole())),
                UpdateRule::Ac { at, before, .. } => {
                    let (u, v) = pick.split_at(before.len());
                    let children = cat(u).concat(&hole()).concat(&cat(v));
                    Hedge::single(Tree::new(*at, children))
                }
                UpdateRule::As { at, before, .. } => {
                    let (u, v) = pick.split_at(before.len());
                    cat(u).concat(&Hedge::single(Tree::new(*at, hole()))).concat(&cat(v))
                }
                UpdateRule::Ap { at, parent } => {
                    Hedge::single(Tree::new(*parent, Hedge::single(Tree::new(*at, hole()))))
                }
                UpdateRule::Rpl { .. } => cat(&pick),
                UpdateRule::Del { .. } => hole(),
            };
            out.rules.insert(GroundRule::new(rule.at(), rhs));
        }
    }
    out
}

fn product(choices: &[Vec<Hedge>]) -> Vec<Vec<Hedge>> {
    choices.iter().fold(vec![Vec::new()], |acc, options| {
        acc.iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut v = prefix.clone();
                    v.push(o.clone());
                    v
                })
            })
            .collect()
    })
}
