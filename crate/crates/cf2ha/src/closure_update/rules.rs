//! Parameterized update rules and their text format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::automata::{parse_automaton, Arg, Automaton, AutomatonError, HTransition, Label, StateId, VTransition};
use crate::hedge::{is_identifier, Symbol};

/// One of the six update forms. `before`/`after`/`with` are sequences of
/// parameter states, each occurrence standing for any member of its language.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UpdateRule {
    /// `a(x) → b(x)`
    Ren { at: Symbol, to: Symbol },
    /// `a(x) → a(u x v)`
    Ac { at: Symbol, before: Vec<StateId>, after: Vec<StateId> },
    /// `a(x) → u a(x) v`
    As { at: Symbol, before: Vec<StateId>, after: Vec<StateId> },
    /// `a(x) → b(a(x))`
    Ap { at: Symbol, parent: Symbol },
    /// `a(x) → u`
    Rpl { at: Symbol, with: Vec<StateId> },
    /// `a(x) → x`
    Del { at: Symbol },
}

impl UpdateRule {
    /// The symbol rewritten by the rule.
    pub fn at(&self) -> Symbol {
        match self {
            UpdateRule::Ren { at, .. }
            | UpdateRule::Ac { at, .. }
            | UpdateRule::As { at, .. }
            | UpdateRule::Ap { at, .. }
            | UpdateRule::Rpl { at, .. }
            | UpdateRule::Del { at } => *at,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            UpdateRule::Ren { .. } => "ren",
            UpdateRule::Ac { .. } => "ac",
            UpdateRule::As { .. } => "as",
            UpdateRule::Ap { .. } => "ap",
            UpdateRule::Rpl { .. } => "rpl",
            UpdateRule::Del { .. } => "del",
        }
    }

    /// Parameter states in order of occurrence.
    pub fn param_states(&self) -> Vec<StateId> {
        match self {
            UpdateRule::Ac { before, after, .. } | UpdateRule::As { before, after, .. } => {
                before.iter().chain(after).copied().collect()
            }
            UpdateRule::Rpl { with, .. } => with.clone(),
            _ => Vec::new(),
        }
    }

    /// Symbols mentioned by the rule.
    pub fn symbols(&self) -> Vec<Symbol> {
        match self {
            UpdateRule::Ren { at, to } => vec![*at, *to],
            UpdateRule::Ap { at, parent } => vec![*at, *parent],
            other => vec![other.at()],
        }
    }

    /// The same rule with symbols mapped through `m`.
    pub fn relabel(&self, m: &BTreeMap<Symbol, Symbol>) -> UpdateRule {
        let s = |x: &Symbol| *m.get(x).unwrap_or(x);
        match self {
            UpdateRule::Ren { at, to } => UpdateRule::Ren { at: s(at), to: s(to) },
            UpdateRule::Ac { at, before, after } => UpdateRule::Ac {
                at: s(at),
                before: before.clone(),
                after: after.clone(),
            },
            UpdateRule::As { at, before, after } => UpdateRule::As {
                at: s(at),
                before: before.clone(),
                after: after.clone(),
            },
            UpdateRule::Ap { at, parent } => UpdateRule::Ap {
                at: s(at),
                parent: s(parent),
            },
            UpdateRule::Rpl { at, with } => UpdateRule::Rpl {
                at: s(at),
                with: with.clone(),
            },
            UpdateRule::Del { at } => UpdateRule::Del { at: s(at) },
        }
    }
}

fn seq(states: &[StateId]) -> String {
    states.iter().map(|q| format!("%{q}")).collect::<Vec<_>>().join(" ")
}

fn around(before: &[StateId], after: &[StateId]) -> String {
    [seq(before), "_".to_owned(), seq(after)]
        .into_iter()
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

impl fmt::Display for UpdateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpdateRule::Ren { at, to } => write!(f, "ren {at} -> {to}"),
            UpdateRule::Ac { at, before, after } => write!(f, "ac {at} -> {at} ( {} )", around(before, after)),
            UpdateRule::As { at, before, after } => write!(f, "as {at} -> {}", around(before, after)),
            UpdateRule::Ap { at, parent } => write!(f, "ap {at} -> {parent}"),
            UpdateRule::Rpl { at, with } if with.is_empty() => write!(f, "rpl {at} ->"),
            UpdateRule::Rpl { at, with } => write!(f, "rpl {at} -> {}", seq(with)),
            UpdateRule::Del { at } => write!(f, "del {at}"),
        }
    }
}

/// A parameterized hedge rewriting system: update rules plus the HA whose
/// states may occur in rule right-hand sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Phrs {
    pub rules: BTreeSet<UpdateRule>,
    pub param: Automaton,
}

impl Phrs {
    pub fn new(rules: impl IntoIterator<Item = UpdateRule>, param: Automaton) -> Phrs {
        Phrs {
            rules: rules.into_iter().collect(),
            param,
        }
    }

    /// Symbols of the rules and of the parameter automaton.
    pub fn alphabet(&self) -> BTreeSet<Symbol> {
        let mut out = self.param.alphabet.clone();
        for r in &self.rules {
            out.extend(r.symbols());
        }
        out
    }

    /// Checks that every parameter state exists in the parameter automaton.
    pub fn validate(&self) -> Result<(), UpdateError> {
        for r in &self.rules {
            for q in r.param_states() {
                if !self.param.states.contains(&q) {
                    return Err(UpdateError::UnknownParamState {
                        line: 0,
                        name: q.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Renders the rules in the PHRS file format (without the parameter line).
    pub fn render_rules(&self) -> String {
        self.rules.iter().map(|r| format!("rule: {r}\n")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UpdateError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: `{rule}` is not an update rule: {reason}")]
    NotAnUpdateRule { line: usize, rule: String, reason: String },
    #[error("line {line}: `{rule}` combines {} in one rule; split it into one rule per form", .forms.join(" and "))]
    Combination { line: usize, rule: String, forms: Vec<&'static str> },
    #[error("line {line}: unknown parameter state `{name}`")]
    UnknownParamState { line: usize, name: String },
    #[error("line {line}: literal symbol `{symbol}` in a parameter sequence; use a %state or enable literal lifting")]
    Literal { line: usize, symbol: String },
    #[error("parameter automaton `{path}`: {source}")]
    ParamAutomaton { path: String, source: AutomatonError },
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

impl UpdateError {
    pub fn line(&self) -> Option<usize> {
        match self {
            UpdateError::Parse { line, .. }
            | UpdateError::NotAnUpdateRule { line, .. }
            | UpdateError::Combination { line, .. }
            | UpdateError::UnknownParamState { line, .. }
            | UpdateError::Literal { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// Options of [`parse_phrs`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Accept literal symbol leaves in parameter sequences by minting a
    /// parameter state `lit:a` accepting exactly `a`.
    pub lift_literals: bool,
}

/// Right-hand side pattern of a rule before classification.
#[derive(Clone, Debug, PartialEq)]
enum Item {
    Var,
    State(String),
    Node(String, Vec<Item>),
}

fn contains_var(items: &[Item]) -> bool {
    items.iter().any(|i| match i {
        Item::Var => true,
        Item::State(_) => false,
        Item::Node(_, kids) => contains_var(kids),
    })
}

struct PatternParser<'a> {
    toks: Vec<&'a str>,
    pos: usize,
}

fn tokenize(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(&text[s..i]);
            }
            if c != ' ' && !c.is_whitespace() {
                out.push(&text[i..i + 1]);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(&text[s..]);
    }
    out
}

impl PatternParser<'_> {
    fn items(&mut self) -> Result<Vec<Item>, String> {
        let mut out = Vec::new();
        while let Some(&t) = self.toks.get(self.pos) {
            if t == ")" {
                break;
            }
            self.pos += 1;
            let item = if t == "_" || t.starts_with('$') {
                Item::Var
            } else if let Some(name) = t.strip_prefix('%') {
                Item::State(name.to_owned())
            } else if is_identifier(t) {
                if self.toks.get(self.pos) == Some(&"(") {
                    self.pos += 1;
                    let kids = self.items()?;
                    if self.toks.get(self.pos) != Some(&")") {
                        return Err("expected `)`".into());
                    }
                    self.pos += 1;
                    Item::Node(t.to_owned(), kids)
                } else {
                    Item::Node(t.to_owned(), Vec::new())
                }
            } else {
                return Err(format!("unexpected token `{t}`"));
            };
            if matches!(item, Item::Var | Item::State(_)) && self.toks.get(self.pos) == Some(&"(") {
                return Err(format!("`{t}` cannot have children"));
            }
            out.push(item);
        }
        Ok(out)
    }
}

fn parse_items(text: &str) -> Result<Vec<Item>, String> {
    let mut p = PatternParser {
        toks: tokenize(text),
        pos: 0,
    };
    let items = p.items()?;
    if p.pos != p.toks.len() {
        return Err("unbalanced `)`".into());
    }
    Ok(items)
}

/// Outcome of classifying `a(x) → rhs` before parameter resolution.
enum Shape {
    Ren(String),
    Ac(Vec<Item>, Vec<Item>),
    As(Vec<Item>, Vec<Item>),
    Ap(String),
    Rpl(Vec<Item>),
    Del,
}

fn split_at_var(items: &[Item]) -> Option<(Vec<Item>, Vec<Item>)> {
    let k = items.iter().position(|i| *i == Item::Var)?;
    Some((items[..k].to_vec(), items[k + 1..].to_vec()))
}

fn classify(at: &str, rhs: &[Item]) -> Result<Shape, Result<Vec<&'static str>, String>> {
    let var_count = count_vars(rhs);
    if var_count > 1 {
        return Err(Err("the variable occurs more than once".into()));
    }
    if var_count == 0 {
        if rhs.iter().all(|i| matches!(i, Item::State(_) | Item::Node(_, _)) && !is_nested(i)) {
            return Ok(Shape::Rpl(rhs.to_vec()));
        }
        return Err(Err("a right-hand side without the variable must be a sequence of parameter states".into()));
    }
    if rhs == [Item::Var] {
        return Ok(Shape::Del);
    }
    let k = rhs.iter().position(|i| contains_var(std::slice::from_ref(i))).expect("variable present");
    let siblings = rhs.len() > 1;
    let (before, after) = (rhs[..k].to_vec(), rhs[k + 1..].to_vec());
    let Item::Node(b, kids) = &rhs[k] else {
        return Err(Ok(vec!["del", "as"]));
    };
    let renamed = b != at;
    if kids.as_slice() == [Item::Var] {
        return match (renamed, siblings) {
            (false, false) => Err(Err("the rule rewrites a node to itself".into())),
            (false, true) => Ok(Shape::As(before, after)),
            (true, false) => Ok(Shape::Ren(b.clone())),
            (true, true) => Err(Ok(vec!["as", "ren"])),
        };
    }
    if let [Item::Node(c, inner)] = kids.as_slice() {
        if inner.as_slice() == [Item::Var] {
            let mut forms = vec!["ap"];
            if c != at {
                forms.push("ren");
            }
            if siblings {
                forms.push("as");
            }
            return if forms.len() == 1 { Ok(Shape::Ap(b.clone())) } else { Err(Ok(forms)) };
        }
    }
    if let Some((u, v)) = split_at_var(kids) {
        let mut forms = vec!["ac"];
        if siblings {
            forms.push("as");
        }
        if renamed {
            forms.push("ren");
        }
        return if forms.len() == 1 { Ok(Shape::Ac(u, v)) } else { Err(Ok(forms)) };
    }
    Err(Err("the variable is nested too deeply for any update form".into()))
}

fn count_vars(items: &[Item]) -> usize {
    items
        .iter()
        .map(|i| match i {
            Item::Var => 1,
            Item::State(_) => 0,
            Item::Node(_, kids) => count_vars(kids),
        })
        .sum()
}

fn is_nested(i: &Item) -> bool {
    matches!(i, Item::Node(_, kids) if !kids.is_empty())
}

struct Context<'a> {
    line: usize,
    rule: &'a str,
    options: ParseOptions,
    param: &'a mut Automaton,
}

impl Context<'_> {
    fn symbol(&self, name: &str) -> Result<Symbol, UpdateError> {
        Symbol::new(name).map_err(|e| UpdateError::Parse {
            line: self.line,
            message: e.to_string(),
        })
    }

    fn states(&mut self, items: &[Item]) -> Result<Vec<StateId>, UpdateError> {
        items.iter().map(|i| self.state(i)).collect()
    }

    fn state(&mut self, item: &Item) -> Result<StateId, UpdateError> {
        match item {
            Item::State(name) => {
                let q = StateId::new(name).map_err(|e| UpdateError::Parse {
                    line: self.line,
                    message: e.to_string(),
                })?;
                if !self.param.states.contains(&q) {
                    return Err(UpdateError::UnknownParamState {
                        line: self.line,
                        name: name.clone(),
                    });
                }
                Ok(q)
            }
            Item::Node(name, kids) if kids.is_empty() => {
                if !self.options.lift_literals {
                    return Err(UpdateError::Literal {
                        line: self.line,
                        symbol: name.clone(),
                    });
                }
                Ok(lift_literal(self.param, self.symbol(name)?))
            }
            _ => Err(UpdateError::NotAnUpdateRule {
                line: self.line,
                rule: self.rule.to_owned(),
                reason: "parameter sequences contain states only".into(),
            }),
        }
    }
}

/// Adds (once) a parameter state `lit:a` accepting exactly the leaf `a`,
/// using HA-shaped transitions.
pub fn lift_literal(param: &mut Automaton, a: Symbol) -> StateId {
    let target = StateId::generated(&format!("lit:{a}"));
    if param.states.contains(&target) {
        return target;
    }
    let empty = StateId::generated(&format!("lit:{a}:e"));
    let tree = StateId::generated(&format!("lit:{a}:v"));
    param.alphabet.insert(a);
    param.add_horizontal(HTransition::epsilon(empty));
    param.add_vertical(VTransition::new(a, empty, Arg::Eps, tree));
    param.add_horizontal(HTransition::new(
        vec![(Label::State(empty), Arg::Eps), (Label::State(tree), Arg::Eps)],
        target,
    ));
    target
}

fn parse_rule(text: &str, ctx: &mut Context<'_>) -> Result<UpdateRule, UpdateError> {
    let line = ctx.line;
    let bad = |message: &str| UpdateError::Parse {
        line,
        message: message.to_owned(),
    };
    let text = text.trim();
    let (head, rhs_text) = match text.split_once("->") {
        Some((h, r)) => (h.trim(), Some(r.trim())),
        None => (text, None),
    };
    let mut words = head.split_whitespace();
    let first = words.next().ok_or_else(|| bad("empty rule"))?;
    let keyword = ["ren", "ac", "as", "ap", "rpl", "del"].contains(&first);
    let (declared, at_name, rhs_items) = if keyword {
        let at_name = words.next().ok_or_else(|| bad("missing symbol after the rule kind"))?;
        if words.next().is_some() {
            return Err(bad("unexpected text before `->`"));
        }
        let items = match (first, rhs_text) {
            ("del", None) => vec![Item::Var],
            ("del", Some(_)) => return Err(bad("`del a` takes no right-hand side")),
            (_, None) => return Err(bad("missing `->`")),
            (kind, Some(r)) => {
                let items = parse_items(r).map_err(|m| bad(&m))?;
                match kind {
                    "ren" => match items.as_slice() {
                        [Item::Node(b, kids)] if kids.is_empty() => vec![Item::Node(b.clone(), vec![Item::Var])],
                        _ => return Err(bad("`ren a -> b` expects a single symbol")),
                    },
                    "ap" => match items.as_slice() {
                        [Item::Node(b, kids)] if kids.is_empty() => {
                            vec![Item::Node(b.clone(), vec![Item::Node(at_name.to_owned(), vec![Item::Var])])]
                        }
                        _ => return Err(bad("`ap a -> b` expects a single symbol")),
                    },
                    "as" => {
                        let (u, v) = split_at_var(&items).ok_or_else(|| bad("`as` needs `_` marking the node"))?;
                        let mut out = u;
                        out.push(Item::Node(at_name.to_owned(), vec![Item::Var]));
                        out.extend(v);
                        out
                    }
                    _ => items,
                }
            }
        };
        (Some(first), at_name.to_owned(), items)
    } else {
        // Generic form `a($x) -> rhs`.
        let lhs = parse_items(head).map_err(|m| bad(&m))?;
        let [Item::Node(a, kids)] = lhs.as_slice() else {
            return Err(bad("left-hand side must be `a($x)`"));
        };
        if kids.as_slice() != [Item::Var] {
            return Err(bad("left-hand side must be `a($x)`"));
        }
        let r = rhs_text.ok_or_else(|| bad("missing `->`"))?;
        let items = parse_items(r).map_err(|m| bad(&m))?;
        if head.contains('$') && r.contains('$') {
            let lhs_var = head.split('$').nth(1).map(|s| s.trim_end_matches(')').trim());
            for part in r.split('$').skip(1) {
                let name: String = part.chars().take_while(|c| c.is_ascii_alphanumeric() || *c == '_').collect();
                if Some(name.as_str()) != lhs_var {
                    return Err(bad(&format!("variable `${name}` does not occur on the left-hand side")));
                }
            }
        }
        (None, a.clone(), items)
    };
    let at = ctx.symbol(&at_name)?;
    let shape = classify(&at_name, &rhs_items).map_err(|e| match e {
        Ok(forms) => UpdateError::Combination {
            line,
            rule: ctx.rule.to_owned(),
            forms,
        },
        Err(reason) => UpdateError::NotAnUpdateRule {
            line,
            rule: ctx.rule.to_owned(),
            reason,
        },
    })?;
    let rule = match shape {
        Shape::Ren(b) => UpdateRule::Ren { at, to: ctx.symbol(&b)? },
        Shape::Ap(b) => UpdateRule::Ap {
            at,
            parent: ctx.symbol(&b)?,
        },
        Shape::Del => UpdateRule::Del { at },
        Shape::Rpl(u) => UpdateRule::Rpl {
            at,
            with: ctx.states(&u)?,
        },
        Shape::Ac(u, v) => UpdateRule::Ac {
            at,
            before: ctx.states(&u)?,
            after: ctx.states(&v)?,
        },
        Shape::As(u, v) => UpdateRule::As {
            at,
            before: ctx.states(&u)?,
            after: ctx.states(&v)?,
        },
    };
    if let Some(kind) = declared {
        if kind != rule.kind() {
            return Err(UpdateError::NotAnUpdateRule {
                line,
                rule: ctx.rule.to_owned(),
                reason: format!("declared as {kind} but has the shape of {}", rule.kind()),
            });
        }
    }
    Ok(rule)
}

/// Parses a single rule line body (e.g. `ren a -> b` or `a($x) -> b($x)`)
/// against a parameter automaton.
pub fn parse_update_rule(text: &str, param: &mut Automaton, options: ParseOptions) -> Result<UpdateRule, UpdateError> {
    let mut ctx = Context {
        line: 1,
        rule: text.trim(),
        options,
        param,
    };
    parse_rule(text, &mut ctx)
}

/// Parses a PHRS file. `param-automaton:` paths are resolved against `base_dir`.
pub fn parse_phrs(text: &str, base_dir: &Path, options: ParseOptions) -> Result<Phrs, UpdateError> {
    let mut param = Automaton::default();
    let mut param_seen = false;
    let mut rules = BTreeSet::new();
    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let content = full.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, rest)) = content.split_once(':') else {
            return Err(UpdateError::Parse {
                line,
                message: "expected `key: value`".into(),
            });
        };
        match key.trim() {
            "param-automaton" => {
                if param_seen {
                    return Err(UpdateError::Parse {
                        line,
                        message: "duplicate param-automaton".into(),
                    });
                }
                if !rules.is_empty() {
                    return Err(UpdateError::Parse {
                        line,
                        message: "param-automaton must precede the rules".into(),
                    });
                }
                param_seen = true;
                let path = base_dir.join(rest.trim());
                let text = std::fs::read_to_string(&path).map_err(|e| UpdateError::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                param = parse_automaton(&text).map_err(|source| UpdateError::ParamAutomaton {
                    path: path.display().to_string(),
                    source,
                })?;
            }
            "rule" => {
                let mut ctx = Context {
                    line,
                    rule: rest.trim(),
                    options,
                    param: &mut param,
                };
                rules.insert(parse_rule(rest, &mut ctx)?);
            }
            other => {
                return Err(UpdateError::Parse {
                    line,
                    message: format!("unknown key `{other}`"),
                })
            }
        }
    }
    Ok(Phrs { rules, param })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn param() -> Automaton {
        parse_automaton("alphabet: item\nstates: h0 v1 p\ntrans: -> h0\ntrans: item(h0) -> v1\ntrans: h0 v1 -> p\n")
            .unwrap()
    }

    fn parse(text: &str) -> Result<UpdateRule, UpdateError> {
        parse_update_rule(text, &mut param(), ParseOptions::default())
    }

    fn s(x: &str) -> Symbol {
        Symbol::new(x).unwrap()
    }

    fn p() -> StateId {
        StateId::new("p").unwrap()
    }

    #[test]
    fn explicit_forms() {
        assert_eq!(parse("ren a -> b").unwrap(), UpdateRule::Ren { at: s("a"), to: s("b") });
        assert_eq!(
            parse("ac doc -> doc ( %p _ )").unwrap(),
            UpdateRule::Ac {
                at: s("doc"),
                before: vec![p()],
                after: vec![]
            }
        );
        assert_eq!(
            parse("as a -> %p _ %p").unwrap(),
            UpdateRule::As {
                at: s("a"),
                before: vec![p()],
                after: vec![p()]
            }
        );
        assert_eq!(parse("ap a -> b").unwrap(), UpdateRule::Ap { at: s("a"), parent: s("b") });
        assert_eq!(parse("rpl a -> %p").unwrap(), UpdateRule::Rpl { at: s("a"), with: vec![p()] });
        assert_eq!(parse("rpl a ->").unwrap(), UpdateRule::Rpl { at: s("a"), with: vec![] });
        assert_eq!(parse("del a").unwrap(), UpdateRule::Del { at: s("a") });
    }

    #[test]
    fn generic_forms_are_classified() {
        assert_eq!(parse("a($x) -> b($x)").unwrap(), UpdateRule::Ren { at: s("a"), to: s("b") });
        assert_eq!(parse("a($x) -> $x").unwrap(), UpdateRule::Del { at: s("a") });
        assert_eq!(parse("a($x) -> b(a($x))").unwrap(), UpdateRule::Ap { at: s("a"), parent: s("b") });
        assert!(matches!(parse("a($x) -> a(%p $x)").unwrap(), UpdateRule::Ac { .. }));
        assert!(matches!(parse("a($x) -> %p a($x)").unwrap(), UpdateRule::As { .. }));
    }

    #[test]
    fn combinations_are_rejected_by_name() {
        let mut param = param();
        let opts = ParseOptions { lift_literals: true };
        let err = parse_update_rule("a($x) -> c a2($x) d", &mut param, opts).unwrap_err();
        assert!(matches!(&err, UpdateError::Combination { forms, .. } if forms == &vec!["as", "ren"]), "{err}");
        let err = parse_update_rule("a2($x) -> a(e $x g)", &mut param, opts).unwrap_err();
        assert!(matches!(&err, UpdateError::Combination { forms, .. } if forms == &vec!["ac", "ren"]), "{err}");
        assert!(err.to_string().contains("combines ac and ren"), "{err}");
        let err = parse("ac a -> b ( %p _ )").unwrap_err();
        assert!(matches!(err, UpdateError::Combination { .. }));
    }

    #[test]
    fn malformed_rules() {
        assert!(matches!(parse("a($x) -> a($x)"), Err(UpdateError::NotAnUpdateRule { .. })));
        assert!(matches!(parse("rpl a -> %nope"), Err(UpdateError::UnknownParamState { .. })));
        assert!(matches!(parse("rpl a -> item"), Err(UpdateError::Literal { .. })));
        assert!(matches!(parse("ren a -> b c"), Err(UpdateError::Parse { .. })));
        assert!(matches!(parse("a($x) -> b($y)"), Err(UpdateError::Parse { .. })));
        assert!(matches!(parse("a($x) -> b($x) c($x)"), Err(UpdateError::NotAnUpdateRule { .. })));
        assert!(matches!(parse("ap a -> b ( _ )"), Err(UpdateError::Parse { .. })));
    }

    #[test]
    fn literal_lifting_mints_singleton_states() {
        let mut param = param();
        let rule = parse_update_rule("ac doc -> doc ( item _ )", &mut param, ParseOptions { lift_literals: true }).unwrap();
        let lit = StateId::new("lit:item").unwrap();
        assert_eq!(rule.param_states(), vec![lit]);
        assert!(param.states.contains(&lit));
        assert_eq!(crate::automata::classify_fragment(&param), crate::automata::Fragment::HA);
    }

    #[test]
    fn display_round_trips() {
        for text in ["ren a -> b", "ac doc -> doc ( %p _ )", "as a -> %p _ %p", "ap a -> b", "rpl a -> %p", "rpl a ->", "del a"] {
            let rule = parse(text).unwrap();
            assert_eq!(rule.to_string(), text);
            assert_eq!(parse(&rule.to_string()).unwrap(), rule);
        }
    }
}
