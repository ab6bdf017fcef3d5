//! Line-based text format for automata.
//!
//! ```text
//! alphabet: a b c
//! states: q0 q1 q2
//! final: q2
//! trans: b($1) -> q0($1)
//! trans: a q0($2) -> q1($2)
//! trans: q2(b($1)) -> q0($1)   # vertical
//! trans: ε -> q0               # n = 0 (the left side may also be left empty)
//! ```
//!
//! States appearing on a right-hand side are declared implicitly.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{Arg, Automaton, AutomatonError, HTransition, Label, StateId, VTransition};
use crate::hedge::Symbol;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Var(String),
    Open,
    Close,
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Tok>, AutomatonError> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    let name_char = |c: char| c.is_ascii() && super::is_state_name(c.encode_utf8(&mut [0; 4]));
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            'ε' => {
                chars.next();
            }
            '(' => {
                chars.next();
                toks.push(Tok::Open);
            }
            ')' => {
                chars.next();
                toks.push(Tok::Close);
            }
            '$' => {
                chars.next();
                let mut name = String::new();
                while let Some(&c) = chars.peek().filter(|c| c.is_ascii_alphanumeric() || **c == '_') {
                    name.push(c);
                    chars.next();
                }
                if name.is_empty() {
                    return Err(parse_err(line, "expected a variable name after `$`"));
                }
                toks.push(Tok::Var(name));
            }
            c if name_char(c) => {
                let mut name = String::new();
                while let Some(&c) = chars.peek().filter(|c| name_char(**c)) {
                    name.push(c);
                    chars.next();
                }
                toks.push(Tok::Name(name));
            }
            other => return Err(parse_err(line, format!("unexpected character `{other}`"))),
        }
    }
    Ok(toks)
}

fn parse_err(line: usize, message: impl Into<String>) -> AutomatonError {
    AutomatonError::Parse {
        line,
        message: message.into(),
    }
}

/// One lhs position before label resolution.
enum RawItem {
    Position { label: String, var: Option<String> },
    Stack { outer: String, inner: String, var: Option<String> },
}

struct RawTransition {
    line: usize,
    lhs: Vec<RawItem>,
    rhs: String,
    rhs_vars: Vec<String>,
}

fn parse_transition(text: &str, line: usize) -> Result<RawTransition, AutomatonError> {
    let (lhs_text, rhs_text) = text
        .split_once("->")
        .ok_or_else(|| parse_err(line, "transition needs `->`"))?;
    let lhs_toks = tokenize(lhs_text, line)?;
    let mut lhs = Vec::new();
    let mut i = 0;
    let expect = |i: usize, t: &Tok| lhs_toks.get(i) == Some(t);
    while i < lhs_toks.len() {
        let Tok::Name(label) = &lhs_toks[i] else {
            return Err(parse_err(line, "expected a label on the left-hand side"));
        };
        i += 1;
        if !expect(i, &Tok::Open) {
            lhs.push(RawItem::Position {
                label: label.clone(),
                var: None,
            });
            continue;
        }
        i += 1;
        match lhs_toks.get(i) {
            Some(Tok::Var(v)) => {
                i += 1;
                if !expect(i, &Tok::Close) {
                    return Err(parse_err(line, "expected `)` after variable"));
                }
                i += 1;
                lhs.push(RawItem::Position {
                    label: label.clone(),
                    var: Some(v.clone()),
                });
            }
            Some(Tok::Name(inner)) => {
                i += 1;
                let mut var = None;
                if expect(i, &Tok::Open) {
                    match (lhs_toks.get(i + 1), lhs_toks.get(i + 2)) {
                        (Some(Tok::Var(v)), Some(Tok::Close)) => var = Some(v.clone()),
                        _ => return Err(parse_err(line, "vertical argument must be a single variable")),
                    }
                    i += 3;
                }
                if !expect(i, &Tok::Close) {
                    return Err(parse_err(line, "a vertical transition stacks exactly two labels"));
                }
                i += 1;
                lhs.push(RawItem::Stack {
                    outer: label.clone(),
                    inner: inner.clone(),
                    var,
                });
            }
            Some(Tok::Close) => {
                i += 1;
                lhs.push(RawItem::Position {
                    label: label.clone(),
                    var: None,
                });
            }
            _ => return Err(parse_err(line, "malformed left-hand side")),
        }
    }
    if lhs.len() > 1 && lhs.iter().any(|it| matches!(it, RawItem::Stack { .. })) {
        return Err(parse_err(line, "a vertical transition has a single stacked position"));
    }
    let rhs_toks = tokenize(rhs_text, line)?;
    let (rhs, rhs_vars) = match rhs_toks.as_slice() {
        [Tok::Name(q)] => (q.clone(), Vec::new()),
        [Tok::Name(q), Tok::Open, rest @ .., Tok::Close] => {
            let vars = rest
                .iter()
                .map(|t| match t {
                    Tok::Var(v) => Ok(v.clone()),
                    _ => Err(parse_err(line, "right-hand side arguments must be variables")),
                })
                .collect::<Result<Vec<_>, _>>()?;
            (q.clone(), vars)
        }
        _ => return Err(parse_err(line, "right-hand side must be `q` or `q($i ...)`")),
    };
    Ok(RawTransition {
        line,
        lhs,
        rhs,
        rhs_vars,
    })
}

/// Parses the automaton text format. Errors carry the 1-based line number.
pub fn parse_automaton(text: &str) -> Result<Automaton, AutomatonError> {
    let mut alphabet = BTreeSet::new();
    let mut declared: Vec<(usize, String)> = Vec::new();
    let mut finals: Vec<(usize, String)> = Vec::new();
    let mut raw = Vec::new();
    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let content = full.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, rest) = content
            .split_once(':')
            .ok_or_else(|| parse_err(line, "expected `key: value`"))?;
        let words = || rest.split_whitespace().map(str::to_owned);
        match key.trim() {
            "alphabet" => {
                for w in words() {
                    let sym = Symbol::new(&w).map_err(|e| parse_err(line, e.to_string()))?;
                    alphabet.insert(sym);
                }
            }
            "states" => declared.extend(words().map(|w| (line, w))),
            "final" | "finals" => finals.extend(words().map(|w| (line, w))),
            "trans" => raw.push(parse_transition(rest, line)?),
            other => return Err(parse_err(line, format!("unknown key `{other}`"))),
        }
    }

    let mut a = Automaton::new(alphabet);
    let state = |line: usize, name: &str| StateId::new(name).map_err(|e| parse_err(line, e.to_string()));
    let implicit: Vec<(usize, String)> = raw.iter().map(|t| (t.line, t.rhs.clone())).collect();
    for (line, name) in declared.iter().chain(&implicit) {
        if a.alphabet.iter().any(|s| s.name() == name) {
            return Err(parse_err(*line, format!("`{name}` is both an alphabet symbol and a state")));
        }
        a.states.insert(state(*line, name)?);
    }
    for (line, name) in &finals {
        let q = state(*line, name)?;
        if !a.states.contains(&q) {
            return Err(parse_err(*line, format!("final state `{name}` is not a state")));
        }
        a.finals.insert(q);
    }
    let resolve = |line: usize, name: &str, a: &Automaton| -> Result<Label, AutomatonError> {
        if let Some(s) = a.alphabet.iter().find(|s| s.name() == name) {
            return Ok(Label::Sym(*s));
        }
        match StateId::new(name) {
            Ok(q) if a.states.contains(&q) => Ok(Label::State(q)),
            _ => Err(parse_err(line, format!("unknown label `{name}`"))),
        }
    };
    for t in raw {
        let rhs = state(t.line, &t.rhs)?;
        if let [RawItem::Stack { outer, inner, var }] = t.lhs.as_slice() {
            let rhs_ok = match var {
                None => t.rhs_vars.is_empty(),
                Some(v) => t.rhs_vars == [v.clone()],
            };
            if !rhs_ok {
                return Err(parse_err(t.line, "vertical right-hand side must carry exactly the inner argument"));
            }
            let arg = if var.is_some() { Arg::Var } else { Arg::Eps };
            let vt = VTransition::new(resolve(t.line, outer, &a)?, resolve(t.line, inner, &a)?, arg, rhs);
            a.verticals.insert(vt);
            continue;
        }
        let mut lhs = Vec::new();
        let mut vars = Vec::new();
        for item in &t.lhs {
            let RawItem::Position { label, var } = item else {
                unreachable!("stacked items were handled above")
            };
            let arg = match var {
                Some(v) => {
                    if vars.contains(v) {
                        return Err(parse_err(t.line, format!("variable `${v}` used twice")));
                    }
                    vars.push(v.clone());
                    Arg::Var
                }
                None => Arg::Eps,
            };
            lhs.push((resolve(t.line, label, &a)?, arg));
        }
        if t.rhs_vars != vars {
            return Err(parse_err(
                t.line,
                "right-hand side must list the left-hand variables in order",
            ));
        }
        a.horizontals.insert(HTransition::new(lhs, rhs));
    }
    Ok(a)
}

/// Renders an automaton in the text format; output is deterministic.
pub fn render_automaton(a: &Automaton) -> String {
    let join = |it: &mut dyn Iterator<Item = String>| it.collect::<Vec<_>>().join(" ");
    let mut out = String::new();
    let _ = writeln!(out, "alphabet: {}", join(&mut a.alphabet.iter().map(|s| s.to_string())));
    let _ = writeln!(out, "states: {}", join(&mut a.states.iter().map(|q| q.to_string())));
    let _ = writeln!(out, "final: {}", join(&mut a.finals.iter().map(|q| q.to_string())));
    for t in &a.horizontals {
        let _ = writeln!(out, "trans: {t}");
    }
    for t in &a.verticals {
        let _ = writeln!(out, "trans: {t}");
    }
    out
}
