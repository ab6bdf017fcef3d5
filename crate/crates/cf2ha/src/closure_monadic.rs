//! Forward closure under linear, inverse-monadic, 1-childvar rewriting.
//!
//! For rules `a(x) → h` the closure automaton recognizes instances of every
//! non-variable sub-hedge of a right-hand side bottom-up (states `sub:N`),
//! folds a recognized right-hand side back into its left-hand symbol
//! (`h̲(x) → a̲(x)`, with `a̲` the state `sym:a`), and runs a copy of the input
//! automaton over the `sym:a` states instead of the symbols.
//!
//! Tree-shaped sub-hedges `a(h)` are read from `a̲(h̲(x))` rather than from
//! the symbol `a`: a node produced by folding a right-hand side is labelled
//! `a̲`, and it must still be able to take part in an enclosing right-hand
//! side. Symbol nodes reach `a̲` through `a(x) → a̲(x)`.
//!
//! The input automaton must not merge arguments: every horizontal
//! transition has at most one `$` position. A transition such as
//! `p($1) q($2) → r($1 $2)` concatenates the child lists of two different
//! nodes, and the assembly rows would then match a right-hand side across
//! that seam, accepting hedges that are not reachable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::automata::{fresh_state, Arg, Automaton, HTransition, Label, StateId, VTransition};
use crate::hedge::{parse_pattern, suffix_subhedges, Hedge, Symbol, Tree, HOLE_NAME};
use crate::oracle::{GroundRule, GroundRuleSet};

/// `symbol(x) → rhs`, the hole in `rhs` standing for `x`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RewriteRule {
    pub symbol: Symbol,
    pub rhs: Hedge,
}

impl RewriteRule {
    pub fn new(symbol: Symbol, rhs: Hedge) -> RewriteRule {
        RewriteRule { symbol, rhs }
    }

    pub fn to_ground(&self) -> GroundRule {
        GroundRule::new(self.symbol, self.rhs.clone())
    }
}

impl fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rhs = self.rhs.to_string().replace(HOLE_NAME, "$x");
        write!(f, "{}($x) -> {}", self.symbol, rhs)
    }
}

pub fn to_ground_rules(rules: &[RewriteRule]) -> GroundRuleSet {
    rules.iter().map(RewriteRule::to_ground).collect()
}

/// The first condition a rule fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Condition {
    /// The right-hand side is the bare variable or empty.
    InverseMonadic { rhs_is_variable: bool },
    /// The variable occurs more than once.
    Linear { occurrences: usize },
    /// The variable has siblings.
    OneChildVar { siblings: Vec<Symbol> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Position of the rule in the checked slice.
    pub index: usize,
    pub rule: RewriteRule,
    pub condition: Condition,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule `{}` ", self.rule)?;
        match &self.condition {
            Condition::InverseMonadic { rhs_is_variable: true } => {
                f.write_str("is not inverse-monadic: the right-hand side is the variable")
            }
            Condition::InverseMonadic { rhs_is_variable: false } => {
                f.write_str("is not inverse-monadic: the right-hand side is empty")
            }
            Condition::Linear { occurrences } => write!(f, "is not linear: $x occurs {occurrences} times"),
            Condition::OneChildVar { siblings } => {
                let names: Vec<&str> = siblings.iter().map(|s| s.name()).collect();
                write!(f, "is not 1-childvar: $x has siblings {}", names.join(" "))
            }
        }
    }
}

/// Outcome of [`check_rule_class`]; accepted iff `violations` is empty.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("accepted");
        }
        let lines: Vec<String> = self.violations.iter().map(Violation::to_string).collect();
        f.write_str(&lines.join("\n"))
    }
}

/// Checks that every rule is inverse-monadic, linear and 1-childvar. The
/// left-hand side shape `a(x)` is guaranteed by [`RewriteRule`] itself.
pub fn check_rule_class(rules: &[RewriteRule]) -> Verdict {
    let violations = rules
        .iter()
        .enumerate()
        .filter_map(|(index, rule)| {
            violated_condition(&rule.rhs).map(|condition| Violation {
                index,
                rule: rule.clone(),
                condition,
            })
        })
        .collect();
    Verdict { violations }
}

fn violated_condition(rhs: &Hedge) -> Option<Condition> {
    if rhs.is_empty() || rhs.is_bare_hole() {
        return Some(Condition::InverseMonadic {
            rhs_is_variable: !rhs.is_empty(),
        });
    }
    let occurrences = rhs.hole_count();
    if occurrences > 1 {
        return Some(Condition::Linear { occurrences });
    }
    hole_siblings(rhs).map(|siblings| Condition::OneChildVar { siblings })
}

/// Labels of the hole's siblings, if it has any.
fn hole_siblings(h: &Hedge) -> Option<Vec<Symbol>> {
    let trees = h.trees();
    if trees.len() > 1 && trees.iter().any(|t| t.label.is_hole()) {
        return Some(trees.iter().map(|t| t.label).filter(|l| !l.is_hole()).collect());
    }
    trees.iter().find_map(|t| hole_siblings(&t.children))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonadicError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: left-hand side `{lhs}` is not of the form SYMBOL($var), so the rule is not inverse-monadic")]
    LhsShape { line: usize, lhs: String },
    #[error("{0}")]
    RuleClass(Verdict),
    #[error("rule `{0}` drops its argument; only rules whose right-hand side keeps $x are supported")]
    Erasing(RewriteRule),
    #[error("input transition `{0}` concatenates several arguments; the closure needs at most one argument per horizontal transition")]
    MergingInput(String),
}

impl MonadicError {
    /// Rule-class rejections as opposed to syntax errors.
    pub fn is_rule_class(&self) -> bool {
        matches!(self, MonadicError::LhsShape { .. } | MonadicError::RuleClass(_) | MonadicError::Erasing(_))
    }
}

/// Parses `a($x) -> rhs` (an optional leading `rule` keyword is allowed).
pub fn parse_rule(text: &str) -> Result<RewriteRule, MonadicError> {
    parse_rule_at(text, 1)
}

fn parse_rule_at(text: &str, line: usize) -> Result<RewriteRule, MonadicError> {
    let err = |message: String| MonadicError::Parse { line, message };
    let body = text.trim();
    let body = body.strip_prefix("rule").filter(|r| r.starts_with(char::is_whitespace)).unwrap_or(body);
    let (lhs, rhs) = body.split_once("->").ok_or_else(|| err("expected `lhs -> rhs`".into()))?;
    let lhs_pat = parse_pattern(lhs.trim()).map_err(|e| err(format!("left-hand side: {e}")))?;
    let rhs_pat = parse_pattern(rhs.trim()).map_err(|e| err(format!("right-hand side: {e}")))?;
    let shape_ok = match lhs_pat.hedge.trees() {
        [t] => !t.label.is_hole() && t.children.is_bare_hole(),
        _ => false,
    };
    if !shape_ok {
        return Err(MonadicError::LhsShape {
            line,
            lhs: lhs.trim().to_owned(),
        });
    }
    let var = &lhs_pat.vars[0];
    if let Some(other) = rhs_pat.vars.iter().find(|v| *v != var) {
        return Err(err(format!("variable `${other}` is not bound by the left-hand side")));
    }
    Ok(RewriteRule::new(lhs_pat.hedge.trees()[0].label, rhs_pat.hedge))
}

/// Parses a rule file: one rule per line, `#` comments. Returns each rule
/// with its line number.
pub fn parse_hrs(text: &str) -> Result<Vec<(usize, RewriteRule)>, MonadicError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if !line.is_empty() {
            out.push((i + 1, parse_rule_at(line, i + 1)?));
        }
    }
    Ok(out)
}

/// Treatment of the rows that send hedges outside the sub-hedge set to the
/// catch-all state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CatchAll {
    /// Leave them out. The catch-all state is still allocated but unused.
    #[default]
    Omit,
    /// Add `t̲(x)·h̲ → q(x)`, `a̲(h̲(x)) → a̲(x)` and `a̲(q(x)) → a̲(x)`. These
    /// forget the ground part of the matched hedge and over-approximate.
    Literal,
}

/// The closure automaton with its state bookkeeping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonadicClosure {
    pub automaton: Automaton,
    /// Sub-hedge (hole for `x`) to its state.
    pub subhedges: BTreeMap<Hedge, StateId>,
    /// `a ↦ a̲`.
    pub symbols: BTreeMap<Symbol, StateId>,
    pub catch: StateId,
}

impl MonadicClosure {
    /// State names with the hedge or symbol they stand for, for reports.
    pub fn legend(&self) -> Vec<(StateId, String)> {
        let mut out: Vec<(StateId, String)> = self
            .subhedges
            .iter()
            .map(|(h, &q)| (q, h.to_string().replace(HOLE_NAME, "$x")))
            .collect();
        out.extend(self.symbols.iter().map(|(a, &q)| (q, format!("{a}(…)"))));
        out.push((self.catch, "catch-all".into()));
        out
    }
}

/// The union of all right-hand sides' non-variable sub-hedges.
pub fn subhedge_set(rules: &[RewriteRule]) -> BTreeSet<Hedge> {
    rules.iter().flat_map(|r| suffix_subhedges(&r.rhs)).collect()
}

/// |Q_L| + |sub-hedges| + |Σ| + 1, with Σ the input alphabet plus the
/// symbols of the rules.
pub fn predicted_state_count(a_l: &Automaton, rules: &[RewriteRule]) -> usize {
    a_l.states.len() + subhedge_set(rules).len() + closure_alphabet(a_l, rules).len() + 1
}

fn closure_alphabet(a_l: &Automaton, rules: &[RewriteRule]) -> BTreeSet<Symbol> {
    let mut sigma = a_l.alphabet.clone();
    for r in rules {
        sigma.insert(r.symbol);
        sigma.extend(r.rhs.labels().into_iter().copied().filter(|l| !l.is_hole()));
    }
    sigma
}

fn arg_of(h: &Hedge) -> Arg {
    if h.has_hole() {
        Arg::Var
    } else {
        Arg::Eps
    }
}

/// Builds the closure automaton recognizing post* of `L(a_l)`.
pub fn build_closure(a_l: &Automaton, rules: &[RewriteRule], catch_all: CatchAll) -> Result<MonadicClosure, MonadicError> {
    let verdict = check_rule_class(rules);
    if !verdict.is_accepted() {
        return Err(MonadicError::RuleClass(verdict));
    }
    if let Some(r) = rules.iter().find(|r| !r.rhs.has_hole()) {
        return Err(MonadicError::Erasing(r.clone()));
    }
    if let Some(t) = a_l.horizontals.iter().find(|t| t.lhs.iter().filter(|(_, x)| *x == Arg::Var).count() > 1) {
        return Err(MonadicError::MergingInput(t.to_string()));
    }
    Ok(construct(a_l, rules, catch_all))
}

fn construct(a_l: &Automaton, rules: &[RewriteRule], catch_all: CatchAll) -> MonadicClosure {
    let sigma = closure_alphabet(a_l, rules);
    let subs = subhedge_set(rules);

    let mut taken: BTreeSet<String> = a_l.states.iter().map(|q| q.name().to_owned()).collect();
    let mut mint = |base: String| {
        let q = fresh_state(&base, |n| taken.contains(n));
        taken.insert(q.name().to_owned());
        q
    };
    let symbols: BTreeMap<Symbol, StateId> = sigma.iter().map(|&a| (a, mint(format!("sym:{a}")))).collect();
    let subhedges: BTreeMap<Hedge, StateId> =
        subs.iter().enumerate().map(|(i, h)| (h.clone(), mint(format!("sub:{i}")))).collect();
    let catch = mint("catch".into());

    let mut out = Automaton::new(sigma.iter().copied());
    out.states.extend(a_l.states.iter().copied());
    out.states.extend(symbols.values().copied());
    out.states.extend(subhedges.values().copied());
    out.states.insert(catch);
    out.finals = a_l.finals.clone();

    // Copy of the input automaton reading a̲ for every symbol a.
    let under = |l: Label| match l {
        Label::Sym(a) => Label::State(symbols[&a]),
        state => state,
    };
    for t in &a_l.horizontals {
        out.add_horizontal(HTransition::new(t.lhs.iter().map(|&(l, x)| (under(l), x)).collect(), t.rhs));
    }
    for t in &a_l.verticals {
        out.add_vertical(VTransition::new(under(t.outer), under(t.inner), t.arg, t.rhs));
    }

    for (&a, &sa) in &symbols {
        out.add_horizontal(HTransition::unit(a, Arg::Var, sa));
    }

    for (s, &qs) in &subhedges {
        match s.trees() {
            [t] => {
                let sa = symbols[&t.label];
                if t.children.is_empty() {
                    out.add_horizontal(HTransition::unit(sa, Arg::Eps, qs));
                } else if t.children.is_bare_hole() {
                    out.add_horizontal(HTransition::unit(sa, Arg::Var, qs));
                } else {
                    let inner = subhedges[&t.children];
                    out.add_vertical(VTransition::new(sa, inner, arg_of(&t.children), qs));
                }
            }
            trees => {
                let head = Hedge::single(trees[0].clone());
                let tail = s.slice(1..trees.len());
                let lhs = vec![
                    (Label::State(subhedges[&head]), arg_of(&head)),
                    (Label::State(subhedges[&tail]), arg_of(&tail)),
                ];
                out.add_horizontal(HTransition::new(lhs, qs));
            }
        }
    }

    for r in rules {
        out.add_horizontal(HTransition::unit(subhedges[&r.rhs], Arg::Var, symbols[&r.symbol]));
    }

    if catch_all == CatchAll::Literal {
        for (t, &qt) in subhedges.iter().filter(|(t, _)| t.len() == 1) {
            for (h, &qh) in &subhedges {
                if t.has_hole() && h.has_hole() || subs.contains(&t.concat(h)) {
                    continue;
                }
                let lhs = if t.has_hole() {
                    vec![(Label::State(qt), Arg::Var), (Label::State(qh), Arg::Eps)]
                } else {
                    vec![(Label::State(qt), Arg::Eps), (Label::State(qh), Arg::Var)]
                };
                out.add_horizontal(HTransition::new(lhs, catch));
            }
        }
        for (&a, &sa) in &symbols {
            for (h, &qh) in &subhedges {
                if !subs.contains(&Hedge::single(Tree::new(a, h.clone()))) {
                    out.add_vertical(VTransition::new(sa, qh, Arg::Var, sa));
                }
            }
            out.add_vertical(VTransition::new(sa, catch, Arg::Var, sa));
        }
    }

    MonadicClosure {
        automaton: out,
        subhedges,
        symbols,
        catch,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::parse_automaton;
    use crate::decision::Recognizer;
    use crate::hedge::{enumerate_hedges, parse_hedge};
    use crate::oracle::post_star_bounded;

    fn rules(text: &str) -> Vec<RewriteRule> {
        parse_hrs(text).unwrap().into_iter().map(|(_, r)| r).collect()
    }

    fn example1() -> Vec<RewriteRule> {
        rules("rule p0($x) -> a p1($x)\nrule p1($x) -> p2($x) c\nrule p2($x) -> p0(b($x))\nrule p2($x) -> b($x)\n")
    }

    fn p0() -> Automaton {
        parse_automaton("alphabet: a b c p0 p1 p2\nstates: f\nfinal: f\ntrans: p0 -> f\n").unwrap()
    }

    fn h(s: &str) -> Hedge {
        parse_hedge(s).unwrap()
    }

    #[test]
    fn rule_parsing() {
        let r = parse_rule("rule a($y) -> c a(e $y g) d").unwrap();
        assert_eq!(r.to_string(), "a($x) -> c a(e $x g) d");
        assert!(matches!(parse_rule("a(b $x) -> c"), Err(MonadicError::LhsShape { .. })));
        assert!(matches!(parse_rule("a -> c"), Err(MonadicError::LhsShape { .. })));
        assert!(matches!(parse_rule("a($x) -> b($y)"), Err(MonadicError::Parse { .. })));
        assert!(matches!(parse_rule("a($x) b"), Err(MonadicError::Parse { .. })));
        let parsed = parse_hrs("# comment\n\nrule a($x) -> b($x) # trailing\n").unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[0].0, 3);
    }

    #[test]
    fn rule_class_examples() {
        assert!(check_rule_class(&example1()).is_accepted());
        let v = check_rule_class(&rules("a($x) -> c a(e $x g) d"));
        assert_eq!(
            v.violations[0].condition,
            Condition::OneChildVar {
                siblings: vec![Symbol::new("e").unwrap(), Symbol::new("g").unwrap()]
            }
        );
        assert!(v.to_string().contains("1-childvar"));
        let cases = [
            ("a($x) -> $x", Condition::InverseMonadic { rhs_is_variable: true }),
            ("a($x) ->", Condition::InverseMonadic { rhs_is_variable: false }),
            ("a($x) -> b($x) c($x)", Condition::Linear { occurrences: 2 }),
            ("a($x) -> b $x", Condition::OneChildVar { siblings: vec![Symbol::new("b").unwrap()] }),
        ];
        for (text, want) in cases {
            assert_eq!(check_rule_class(&rules(text)).violations[0].condition, want, "{text}");
        }
        assert!(check_rule_class(&rules("a($x) -> b c")).is_accepted());
    }

    #[test]
    fn erasing_rules_are_refused() {
        let r = rules("a($x) -> b c");
        assert!(matches!(build_closure(&p0(), &r, CatchAll::Omit), Err(MonadicError::Erasing(_))));
    }

    #[test]
    fn example1_tpatterns() {
        let c = build_closure(&p0(), &example1(), CatchAll::Omit).unwrap();
        assert_eq!(c.automaton.states.len(), predicted_state_count(&p0(), &example1()));
        c.automaton.validate().unwrap();
        let mut rec = Recognizer::new(&c.automaton);
        for yes in ["p0", "a p1", "a p2 c", "a b c", "a a b(b) c c", "a a p1(b) c"] {
            assert!(rec.accepts(&h(yes)).unwrap(), "{yes}");
        }
        for no in ["a b(b) c", "a a b c c", "b", "a b c c", "a"] {
            assert!(!rec.accepts(&h(no)).unwrap(), "{no}");
        }
    }

    #[test]
    fn no_rules_keeps_the_language() {
        let a = p0();
        let c = build_closure(&a, &[], CatchAll::Omit).unwrap();
        let (mut r1, mut r2) = (Recognizer::new(&a), Recognizer::new(&c.automaton));
        for x in enumerate_hedges(&a.alphabet.iter().copied().collect::<Vec<_>>(), 3) {
            assert_eq!(r1.accepts(&x).unwrap(), r2.accepts(&x).unwrap(), "{x}");
        }
    }

    #[test]
    fn merging_inputs_are_refused() {
        let a = parse_automaton(
            "alphabet: a b c\nstates: s0\nfinal: s0\n\
             trans: a($1) b($2) -> s0($1 $2)\ntrans: b($1) s0 s0($3) -> s0($1 $3)\n\
             trans: s0 s0 -> s0\ntrans: s0(s0) -> s0\ntrans: a($1) b -> s0($1)\n",
        )
        .unwrap();
        let r = rules("b($x) -> b c($x)");
        assert!(matches!(build_closure(&a, &r, CatchAll::Omit), Err(MonadicError::MergingInput(_))));
        // Built anyway, `b` from the first list and `c` from the second are
        // read as one instance of `b c($x)`.
        let unchecked = construct(&a, &r, CatchAll::Omit);
        let x = h("a(a b) b(c)");
        assert!(Recognizer::new(&unchecked.automaton).accepts(&x).unwrap());
        let seeds = crate::decision::bounded_language(&a, 5);
        let post = post_star_bounded(&to_ground_rules(&r), seeds, 5, 5);
        assert!(post.exact);
        assert!(!post.hedges.contains(&x));
    }

    #[test]
    fn literal_catch_all_over_approximates() {
        let a = parse_automaton("alphabet: g\nstates: f\nfinal: f\ntrans: g -> f\n").unwrap();
        let r = rules("p($x) -> d($x) e");
        let omit = build_closure(&a, &r, CatchAll::Omit).unwrap();
        let literal = build_closure(&a, &r, CatchAll::Literal).unwrap();
        let reachable = post_star_bounded(&to_ground_rules(&r), [h("g")], 4, 4);
        assert_eq!(reachable.hedges, vec![h("g")]);
        assert!(!Recognizer::new(&omit.automaton).accepts(&h("g(e)")).unwrap());
        assert!(Recognizer::new(&literal.automaton).accepts(&h("g(e)")).unwrap());
    }
}
