//! Hedges (ordered forests of unranked trees), contexts and their text format.
//!
//! Hedges are immutable and share structure through reference counting, so
//! cloning is cheap and they can be used freely as memo-table keys.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::intern;

/// Name of the reserved hole symbol used by contexts and rule patterns.
pub const HOLE_NAME: &str = "$hole";

/// An interned alphabet symbol.
///
/// Equality and hashing use the interned id; ordering follows the name so
/// that every sorted output is independent of interning order.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Symbol(u32);

impl Symbol {
    /// Interns `name` after checking it against `[A-Za-z0-9_]+`.
    pub fn new(name: &str) -> Result<Symbol, HedgeError> {
        if is_identifier(name) {
            Ok(Symbol(intern::intern(name)))
        } else {
            Err(HedgeError::InvalidSymbol(name.to_owned()))
        }
    }

    /// The reserved hole symbol. It never belongs to an alphabet.
    pub fn hole() -> Symbol {
        Symbol(intern::intern(HOLE_NAME))
    }

    pub fn is_hole(self) -> bool {
        self == Symbol::hole()
    }

    pub fn name(self) -> &'static str {
        intern::lookup(self.0)
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.0 == other.0 {
            Ordering::Equal
        } else {
            self.name().cmp(other.name())
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

pub(crate) fn is_identifier(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// A tree `label(children)`; a leaf has no children.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tree<L = Symbol> {
    pub label: L,
    pub children: Hedge<L>,
}

impl<L: Clone> Tree<L> {
    pub fn new(label: L, children: Hedge<L>) -> Self {
        Tree { label, children }
    }

    pub fn leaf(label: L) -> Self {
        Tree {
            label,
            children: Hedge::empty(),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children.size()
    }
}

/// An ordered sequence of trees. The empty hedge is written ε.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hedge<L = Symbol>(Arc<[Tree<L>]>);

impl<L: Clone> Hedge<L> {
    pub fn empty() -> Self {
        Hedge(Arc::from(Vec::new()))
    }

    pub fn from_trees(trees: Vec<Tree<L>>) -> Self {
        Hedge(Arc::from(trees))
    }

    pub fn single(tree: Tree<L>) -> Self {
        Hedge::from_trees(vec![tree])
    }

    pub fn leaf(label: L) -> Self {
        Hedge::single(Tree::leaf(label))
    }

    pub fn trees(&self) -> &[Tree<L>] {
        &self.0
    }

    /// Number of top-level trees.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total node count.
    pub fn size(&self) -> usize {
        self.0.iter().map(Tree::size).sum()
    }

    /// The hedge formed by the top-level trees in `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        if range.start == 0 && range.end == self.len() {
            self.clone()
        } else {
            Hedge::from_trees(self.0[range].to_vec())
        }
    }

    pub fn concat(&self, other: &Hedge<L>) -> Self {
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        let mut trees = self.0.to_vec();
        trees.extend_from_slice(&other.0);
        Hedge::from_trees(trees)
    }

    pub fn map_labels<M: Clone>(&self, f: &mut impl FnMut(&L) -> M) -> Hedge<M> {
        Hedge::from_trees(
            self.0
                .iter()
                .map(|t| Tree::new(f(&t.label), t.children.map_labels(f)))
                .collect(),
        )
    }

    /// Preorder iterator over all labels.
    pub fn labels(&self) -> Vec<&L> {
        fn walk<'a, L>(h: &'a [Tree<L>], out: &mut Vec<&'a L>) {
            for t in h {
                out.push(&t.label);
                walk(&t.children.0, out);
            }
        }
        let mut out = Vec::new();
        walk(&self.0, &mut out);
        out
    }
}

impl<L: Clone> Default for Hedge<L> {
    fn default() -> Self {
        Hedge::empty()
    }
}

impl<L: Clone> FromIterator<Tree<L>> for Hedge<L> {
    fn from_iter<I: IntoIterator<Item = Tree<L>>>(iter: I) -> Self {
        Hedge::from_trees(iter.into_iter().collect())
    }
}

impl Hedge<Symbol> {
    /// Number of hole nodes.
    pub fn hole_count(&self) -> usize {
        self.labels().into_iter().filter(|l| l.is_hole()).count()
    }

    pub fn has_hole(&self) -> bool {
        self.hole_count() > 0
    }

    /// Whether the hedge is exactly one hole leaf.
    pub fn is_bare_hole(&self) -> bool {
        self.len() == 1 && self.0[0].label.is_hole() && self.0[0].children.is_empty()
    }

    /// Replaces every hole leaf by the trees of `h`, spliced in place.
    pub fn plug(&self, h: &Hedge) -> Hedge {
        if !self.has_hole() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.len() + h.len());
        for t in self.trees() {
            if t.label.is_hole() {
                out.extend_from_slice(h.trees());
            } else {
                out.push(Tree::new(t.label, t.children.plug(h)));
            }
        }
        Hedge::from_trees(out)
    }
}

/// Orders hedges by size, then structurally (labels by name, left to right).
pub fn size_lex_cmp<L: Clone + Ord>(a: &Hedge<L>, b: &Hedge<L>) -> Ordering {
    a.size().cmp(&b.size()).then_with(|| a.cmp(b))
}

/// Sorts hedges in (size, lexicographic) order.
pub fn sort_size_lex<L: Clone + Ord>(hedges: &mut [Hedge<L>]) {
    hedges.sort_by(size_lex_cmp);
}

impl<L: fmt::Display> fmt::Display for Hedge<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl<L: fmt::Display> fmt::Display for Tree<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)?;
        if !self.children.0.is_empty() {
            write!(f, "({})", self.children)?;
        }
        Ok(())
    }
}

impl<L: fmt::Display> fmt::Debug for Hedge<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("ε")
        } else {
            write!(f, "{self}")
        }
    }
}

impl<L: fmt::Display> fmt::Debug for Tree<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A hedge with exactly one hole leaf.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Context {
    body: Hedge,
}

impl Context {
    pub fn new(body: Hedge) -> Result<Context, HedgeError> {
        let holes = body.hole_count();
        if holes != 1 {
            return Err(HedgeError::NotAContext(holes));
        }
        if hole_has_children(&body) {
            return Err(HedgeError::HoleWithChildren);
        }
        Ok(Context { body })
    }

    /// The trivial context consisting of the hole alone.
    pub fn hole() -> Context {
        Context {
            body: Hedge::leaf(Symbol::hole()),
        }
    }

    pub fn body(&self) -> &Hedge {
        &self.body
    }
}

fn hole_has_children(h: &Hedge) -> bool {
    h.trees()
        .iter()
        .any(|t| (t.label.is_hole() && !t.children.is_empty()) || hole_has_children(&t.children))
}

/// `C[h]`: the context body with its hole replaced by the trees of `h`.
pub fn apply_context(c: &Context, h: &Hedge) -> Hedge {
    c.body.plug(h)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HedgeError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid symbol name `{0}` (expected [A-Za-z0-9_]+)")]
    InvalidSymbol(String),
    #[error("a context needs exactly one hole, found {0}")]
    NotAContext(usize),
    #[error("the hole of a context cannot have children")]
    HoleWithChildren,
}

/// A parsed rule pattern: hedge with variables replaced by the hole symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub hedge: Hedge,
    /// Variable names in order of occurrence (with repetitions).
    pub vars: Vec<String>,
}

/// Parses a ground hedge: `hedge := tree*`, `tree := SYMBOL | SYMBOL "(" hedge ")"`.
pub fn parse_hedge(text: &str) -> Result<Hedge, HedgeError> {
    let mut p = Parser::new(text, false);
    let h = p.hedge()?;
    p.finish()?;
    Ok(h)
}

/// Parses a hedge that may contain variables `$name` (as leaves).
/// Every variable becomes the hole symbol; names are reported separately.
pub fn parse_pattern(text: &str) -> Result<Pattern, HedgeError> {
    let mut p = Parser::new(text, true);
    let hedge = p.hedge()?;
    p.finish()?;
    Ok(Pattern {
        hedge,
        vars: p.vars,
    })
}

/// Parses a context written with a single `$hole` (any `$name` is accepted as the hole).
pub fn parse_context(text: &str) -> Result<Context, HedgeError> {
    Context::new(parse_pattern(text)?.hedge)
}

pub fn render_hedge<L: fmt::Display>(h: &Hedge<L>) -> String {
    h.to_string()
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
    allow_vars: bool,
    vars: Vec<String>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, allow_vars: bool) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
            allow_vars,
            vars: Vec::new(),
        }
    }

    fn error(&self, message: impl Into<String>) -> HedgeError {
        HedgeError::Parse(ParseError {
            line: self.line,
            column: self.col,
            message: message.into(),
        })
    }

    fn bump(&mut self) {
        if self.src[self.pos] == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        self.pos += 1;
    }

    fn skip_trivia(&mut self) {
        while self.pos < self.src.len() {
            match self.src[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' => self.bump(),
                b'#' => {
                    while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_trivia();
        self.src.get(self.pos).copied()
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.bump();
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn hedge(&mut self) -> Result<Hedge, HedgeError> {
        let mut trees = Vec::new();
        loop {
            match self.peek() {
                None | Some(b')') => return Ok(Hedge::from_trees(trees)),
                Some(_) => trees.push(self.tree()?),
            }
        }
    }

    fn tree(&mut self) -> Result<Tree, HedgeError> {
        let c = self.peek().expect("tree called at end of input");
        if c == b'$' {
            if !self.allow_vars {
                return Err(self.error("variables are not allowed in a ground hedge"));
            }
            self.bump();
            let name = self.ident();
            if name.is_empty() {
                return Err(self.error("expected a variable name after `$`"));
            }
            if self.peek() == Some(b'(') {
                return Err(self.error(format!("variable `${name}` cannot have children")));
            }
            self.vars.push(name);
            return Ok(Tree::leaf(Symbol::hole()));
        }
        if !(c.is_ascii_alphanumeric() || c == b'_') {
            let ch = std::str::from_utf8(&self.src[self.pos..])
                .ok()
                .and_then(|s| s.chars().next())
                .unwrap_or('?');
            return Err(self.error(format!("unexpected character `{ch}`")));
        }
        let name = self.ident();
        let label = Symbol::new(&name).map_err(|_| self.error("bad symbol"))?;
        if self.peek() == Some(b'(') {
            self.bump();
            let children = self.hedge()?;
            if self.peek() != Some(b')') {
                return Err(self.error("expected `)`"));
            }
            self.bump();
            Ok(Tree::new(label, children))
        } else {
            Ok(Tree::leaf(label))
        }
    }

    fn finish(&mut self) -> Result<(), HedgeError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.error("unbalanced `)`")),
        }
    }
}

/// All hedges over `alphabet` with at most `max_size` nodes, each exactly
/// once, in (size, lexicographic) order.
pub fn enumerate_hedges<'a>(
    alphabet: impl IntoIterator<Item = &'a Symbol>,
    max_size: usize,
) -> Vec<Hedge> {
    let letters: BTreeSet<Symbol> = alphabet.into_iter().copied().collect();
    // by_size[n] holds the hedges of size exactly n, sorted.
    let mut by_size: Vec<Vec<Hedge>> = vec![vec![Hedge::empty()]];
    let mut trees_by_size: Vec<Vec<Tree>> = vec![Vec::new()];
    for n in 1..=max_size {
        let trees: Vec<Tree> = letters
            .iter()
            .flat_map(|&a| by_size[n - 1].iter().map(move |c| Tree::new(a, c.clone())))
            .collect();
        trees_by_size.push(trees);
        let mut level = Vec::new();
        for k in 1..=n {
            for t in &trees_by_size[k] {
                for rest in &by_size[n - k] {
                    let mut items = Vec::with_capacity(1 + rest.len());
                    items.push(t.clone());
                    items.extend_from_slice(rest.trees());
                    level.push(Hedge::from_trees(items));
                }
            }
        }
        level.sort();
        by_size.push(level);
    }
    by_size.into_iter().flatten().collect()
}

/// The suffix sub-hedges of a rule right-hand side: the least set containing
/// `h` and closed under splitting off the head tree of a sequence and under
/// descending into the children of a single tree. Hole-only hedges and ε are
/// never members.
pub fn suffix_subhedges(h: &Hedge) -> BTreeSet<Hedge> {
    let mut out = BTreeSet::new();
    let mut stack = vec![h.clone()];
    while let Some(s) = stack.pop() {
        if s.is_empty() || s.is_bare_hole() || !out.insert(s.clone()) {
            continue;
        }
        if s.len() >= 2 {
            stack.push(s.slice(0..1));
            stack.push(s.slice(1..s.len()));
        } else {
            let t = &s.trees()[0];
            if !t.label.is_hole() {
                stack.push(t.children.clone());
            }
        }
    }
    out
}
