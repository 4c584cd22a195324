//! Process trees: block-structured models built from sequence, exclusive
//! choice, parallel and loop operators over activity leaves.
//!
//! Textual form (whitespace-insensitive):
//!
//! ```text
//! ->(A, X(B, tau), +(C, D), *(E, F))
//! ```
//!
//! `->` is sequence, `X` exclusive choice, `+` parallel interleaving, `*` a
//! loop with exactly two children (do-child, redo-child) and `tau` the silent
//! leaf. A loop executes its do-child, then either exits or fires the
//! redo-child followed by the do-child again, up to the configured redo cap.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::log::{Activity, Trace, VariantTable};
use crate::model::net::{NetBuilder, WorkflowNet};
use crate::model::EnumerationConfig;

/// A process tree node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProcessTree {
    /// Emit one activity.
    Leaf(Activity),
    /// Emit nothing.
    Tau,
    /// Children in order.
    Seq(Vec<ProcessTree>),
    /// Exactly one child.
    Xor(Vec<ProcessTree>),
    /// All children, arbitrarily interleaved.
    And(Vec<ProcessTree>),
    /// Do-child, then zero or more (redo-child, do-child) rounds.
    Loop(Box<ProcessTree>, Box<ProcessTree>),
}

impl ProcessTree {
    pub fn leaf(label: impl Into<Activity>) -> Self {
        ProcessTree::Leaf(label.into())
    }

    /// Distinct visible activity labels, in first-visit (depth-first) order.
    pub fn activities(&self) -> Vec<Activity> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        self.walk(&mut |node| {
            if let ProcessTree::Leaf(a) = node {
                if seen.insert(a.clone()) {
                    out.push(a.clone());
                }
            }
        });
        out
    }

    /// Number of visible (non-tau) leaves, duplicates included.
    pub fn visible_leaf_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |node| {
            if matches!(node, ProcessTree::Leaf(_)) {
                n += 1;
            }
        });
        n
    }

    /// Counts operator nodes by kind: (seq, xor, and, loop).
    pub fn operator_counts(&self) -> (usize, usize, usize, usize) {
        let mut c = (0, 0, 0, 0);
        self.walk(&mut |node| match node {
            ProcessTree::Seq(_) => c.0 += 1,
            ProcessTree::Xor(_) => c.1 += 1,
            ProcessTree::And(_) => c.2 += 1,
            ProcessTree::Loop(..) => c.3 += 1,
            _ => {}
        });
        c
    }

    fn walk(&self, f: &mut impl FnMut(&ProcessTree)) {
        f(self);
        match self {
            ProcessTree::Seq(cs) | ProcessTree::Xor(cs) | ProcessTree::And(cs) => {
                for c in cs {
                    c.walk(f);
                }
            }
            ProcessTree::Loop(d, r) => {
                d.walk(f);
                r.walk(f);
            }
            _ => {}
        }
    }

    /// Exact set of distinct complete traces (possibly including the empty
    /// trace) producible under `cfg`, each with count 1.
    pub fn enumerate_variants(&self, cfg: &EnumerationConfig) -> Result<VariantTable> {
        let set = self.enumerate_set(cfg)?;
        let total = set.len() as u64;
        let counts: BTreeMap<Trace, u64> = set.into_iter().map(|t| (t, 1)).collect();
        Ok(VariantTable::from_counts(counts, total))
    }

    fn enumerate_set(&self, cfg: &EnumerationConfig) -> Result<BTreeSet<Trace>> {
        let ceiling = cfg.variant_ceiling;
        let set = match self {
            ProcessTree::Leaf(a) => BTreeSet::from([vec![a.clone()]]),
            ProcessTree::Tau => BTreeSet::from([vec![]]),
            ProcessTree::Seq(cs) => {
                let mut acc = BTreeSet::from([vec![]]);
                for c in cs {
                    acc = concat_sets(&acc, &c.enumerate_set(cfg)?, ceiling)?;
                }
                acc
            }
            ProcessTree::Xor(cs) => {
                let mut acc = BTreeSet::new();
                for c in cs {
                    acc.extend(c.enumerate_set(cfg)?);
                    if acc.len() > ceiling {
                        return Err(Error::VariantCeiling(ceiling));
                    }
                }
                acc
            }
            ProcessTree::And(cs) => {
                let mut acc = BTreeSet::from([vec![]]);
                for c in cs {
                    acc = shuffle_sets(&acc, &c.enumerate_set(cfg)?, ceiling)?;
                }
                acc
            }
            ProcessTree::Loop(do_child, redo_child) => {
                let d = do_child.enumerate_set(cfg)?;
                let r = redo_child.enumerate_set(cfg)?;
                let round = concat_sets(&r, &d, ceiling)?;
                let mut acc = BTreeSet::new();
                let mut tail = d.clone();
                for _ in 0..=cfg.effective_redo_cap() {
                    acc.extend(tail.iter().cloned());
                    if acc.len() > ceiling {
                        return Err(Error::VariantCeiling(ceiling));
                    }
                    tail = concat_sets(&tail, &round, ceiling)?;
                }
                acc
            }
        };
        Ok(set)
    }

    /// Writes the textual form to a file (with trailing newline).
    pub fn write_text(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, format!("{self}\n")).map_err(|e| Error::io(path, e))
    }

    /// Reads a tree from its textual form in a file.
    pub fn read_text(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_tree(&text)
    }
}

fn concat_sets(a: &BTreeSet<Trace>, b: &BTreeSet<Trace>, ceiling: usize) -> Result<BTreeSet<Trace>> {
    if a.len().saturating_mul(b.len()) > ceiling.saturating_mul(4) {
        return Err(Error::VariantCeiling(ceiling));
    }
    let mut out = BTreeSet::new();
    for x in a {
        for y in b {
            let mut t = x.clone();
            t.extend(y.iter().cloned());
            out.insert(t);
            if out.len() > ceiling {
                return Err(Error::VariantCeiling(ceiling));
            }
        }
    }
    Ok(out)
}

fn shuffle_sets(a: &BTreeSet<Trace>, b: &BTreeSet<Trace>, ceiling: usize) -> Result<BTreeSet<Trace>> {
    let mut out = BTreeSet::new();
    for x in a {
        for y in b {
            // The number of interleavings is C(|x|+|y|, |x|); bail before
            // materializing anything explosive.
            if binomial(x.len() + y.len(), x.len())
                .map(|c| c > ceiling as u128)
                .unwrap_or(true)
            {
                return Err(Error::VariantCeiling(ceiling));
            }
            interleave_into(x, y, &mut Vec::new(), &mut out);
            if out.len() > ceiling {
                return Err(Error::VariantCeiling(ceiling));
            }
        }
    }
    Ok(out)
}

fn interleave_into(x: &[Activity], y: &[Activity], prefix: &mut Trace, out: &mut BTreeSet<Trace>) {
    if x.is_empty() && y.is_empty() {
        out.insert(prefix.clone());
        return;
    }
    if let Some((h, t)) = x.split_first() {
        prefix.push(h.clone());
        interleave_into(t, y, prefix, out);
        prefix.pop();
    }
    if let Some((h, t)) = y.split_first() {
        prefix.push(h.clone());
        interleave_into(x, t, prefix, out);
        prefix.pop();
    }
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    Some(acc)
}

// ---------------------------------------------------------------------------
// Textual form
// ---------------------------------------------------------------------------

impl fmt::Display for ProcessTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join(f: &mut fmt::Formatter<'_>, op: &str, children: &[ProcessTree]) -> fmt::Result {
            write!(f, "{op}(")?;
            for (i, c) in children.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, ")")
        }
        match self {
            ProcessTree::Leaf(a) => write!(f, "{a}"),
            ProcessTree::Tau => write!(f, "tau"),
            ProcessTree::Seq(cs) => join(f, "->", cs),
            ProcessTree::Xor(cs) => join(f, "X", cs),
            ProcessTree::And(cs) => join(f, "+", cs),
            ProcessTree::Loop(d, r) => write!(f, "*({d}, {r})"),
        }
    }
}

/// Parses the textual form. Labels may contain ASCII alphanumerics, `_` and
/// `-`; `tau` is the silent leaf; an identifier directly followed by `(`
/// must be an operator symbol.
pub fn parse_tree(text: &str) -> Result<ProcessTree> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    let tree = p.node()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("trailing input after tree"));
    }
    Ok(tree)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::TreeSyntax {
            at: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {:?}", c as char)))
        }
    }

    fn node(&mut self) -> Result<ProcessTree> {
        self.skip_ws();
        match self.peek() {
            Some(b'-') => {
                self.eat(b'-')?;
                self.eat(b'>')?;
                Ok(ProcessTree::Seq(self.children()?))
            }
            Some(b'+') => {
                self.eat(b'+')?;
                Ok(ProcessTree::And(self.children()?))
            }
            Some(b'*') => {
                self.eat(b'*')?;
                let cs = self.children()?;
                if cs.len() != 2 {
                    return Err(self.err(format!("loop takes exactly 2 children, got {}", cs.len())));
                }
                let mut it = cs.into_iter();
                Ok(ProcessTree::Loop(
                    Box::new(it.next().unwrap()),
                    Box::new(it.next().unwrap()),
                ))
            }
            Some(c) if c.is_ascii_alphanumeric() || c == b'_' => {
                let start = self.pos;
                while self
                    .peek()
                    .map(|c| c.is_ascii_alphanumeric() || c == b'_' || c == b'-')
                    .unwrap_or(false)
                {
                    // A `-` might open `->(`; stop the identifier before it.
                    if self.bytes[self.pos] == b'-' && self.bytes.get(self.pos + 1) == Some(&b'>') {
                        break;
                    }
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
                let ws_end = {
                    let mut i = self.pos;
                    while i < self.bytes.len() && self.bytes[i].is_ascii_whitespace() {
                        i += 1;
                    }
                    i
                };
                if self.bytes.get(ws_end) == Some(&b'(') {
                    if ident == "X" {
                        return Ok(ProcessTree::Xor(self.children()?));
                    }
                    return Err(self.err(format!("unknown operator {ident:?}")));
                }
                if ident == "tau" {
                    Ok(ProcessTree::Tau)
                } else {
                    Ok(ProcessTree::Leaf(Activity::new(ident)))
                }
            }
            _ => Err(self.err("expected an operator or label")),
        }
    }

    fn children(&mut self) -> Result<Vec<ProcessTree>> {
        self.skip_ws();
        self.eat(b'(')?;
        let mut out = Vec::new();
        loop {
            out.push(self.node()?);
            self.skip_ws();
            match self.peek() {
                Some(b',') => {
                    self.pos += 1;
                }
                Some(b')') => {
                    self.pos += 1;
                    if out.is_empty() {
                        return Err(self.err("operator needs at least one child"));
                    }
                    return Ok(out);
                }
                _ => return Err(self.err("expected ',' or ')'")),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Analytic statistics
// ---------------------------------------------------------------------------

/// Closed-form language statistics of a tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeStats {
    pub variant_count: u128,
    pub min_len: usize,
    pub max_len: usize,
}

/// Computes exact variant count and length bounds without enumeration.
///
/// Only defined (`Some`) for loop-free trees whose visible labels are all
/// distinct: distinct-alphabet children make sequence products and parallel
/// shuffles collision-free, so counting by length polynomials is exact. The
/// one duplicate a unique-label tree can produce — the empty variant from
/// several optional choice children — is deduplicated at XOR nodes.
pub fn tree_stats(tree: &ProcessTree) -> Option<TreeStats> {
    let labels = tree.activities();
    if labels.len() != tree.visible_leaf_count() {
        return None; // duplicate visible labels
    }
    let poly = length_poly(tree)?;
    let variant_count: u128 = {
        let mut acc: u128 = 0;
        for &c in &poly {
            acc = acc.checked_add(c)?;
        }
        acc
    };
    if variant_count == 0 {
        return None;
    }
    let min_len = poly.iter().position(|&c| c > 0)?;
    let max_len = poly.iter().rposition(|&c| c > 0)?;
    Some(TreeStats {
        variant_count,
        min_len,
        max_len,
    })
}

/// `poly[l]` = number of distinct variants of length `l`.
fn length_poly(tree: &ProcessTree) -> Option<Vec<u128>> {
    match tree {
        ProcessTree::Leaf(_) => Some(vec![0, 1]),
        ProcessTree::Tau => Some(vec![1]),
        ProcessTree::Seq(cs) => {
            let mut acc = vec![1u128];
            for c in cs {
                acc = poly_mul(&acc, &length_poly(c)?)?;
            }
            Some(acc)
        }
        ProcessTree::Xor(cs) => {
            let mut acc: Vec<u128> = Vec::new();
            for c in cs {
                let p = length_poly(c)?;
                if p.len() > acc.len() {
                    acc.resize(p.len(), 0);
                }
                for (i, &v) in p.iter().enumerate() {
                    acc[i] = acc[i].checked_add(v)?;
                }
            }
            if let Some(zero) = acc.first_mut() {
                *zero = (*zero).min(1); // the empty variant collapses
            }
            Some(acc)
        }
        ProcessTree::And(cs) => {
            let mut acc = vec![1u128];
            for c in cs {
                acc = poly_shuffle(&acc, &length_poly(c)?)?;
            }
            Some(acc)
        }
        ProcessTree::Loop(..) => None,
    }
}

fn poly_mul(a: &[u128], b: &[u128]) -> Option<Vec<u128>> {
    let mut out = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = out[i + j].checked_add(x.checked_mul(y)?)?;
        }
    }
    Some(out)
}

/// Shuffle product: interleavings of an `i`-long and `j`-long word number
/// `C(i + j, i)`.
fn poly_shuffle(a: &[u128], b: &[u128]) -> Option<Vec<u128>> {
    let mut out = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y == 0 {
                continue;
            }
            let ways = binomial(i + j, i)?;
            out[i + j] = out[i + j].checked_add(x.checked_mul(y)?.checked_mul(ways)?)?;
        }
    }
    Some(out)
}

// ---------------------------------------------------------------------------
// Conversion to nets
// ---------------------------------------------------------------------------

/// Builds a workflow net with the same language as the tree (under equal
/// caps, see [`EnumerationConfig`]).
///
/// The encoding is canonical: choices get one silent branch-entry transition
/// per child (so play-out picks children uniformly), parallels get silent
/// split/join transitions, and loops get silent redo/exit transitions after
/// the do-child — which is where the "redo with probability 1/2" play-out
/// behaviour comes from.
pub fn tree_to_net(tree: &ProcessTree) -> WorkflowNet {
    let mut b = NetBuilder::new();
    let source = b.place();
    let sink = b.place();
    wire(tree, &mut b, source, sink);
    b.build(source, sink)
}

fn wire(tree: &ProcessTree, b: &mut NetBuilder, p_in: usize, p_out: usize) {
    match tree {
        ProcessTree::Leaf(a) => b.activity(a.clone(), &[p_in], &[p_out]),
        ProcessTree::Tau => b.tau(&[p_in], &[p_out]),
        ProcessTree::Seq(cs) => {
            let mut current = p_in;
            for (i, c) in cs.iter().enumerate() {
                let next = if i + 1 == cs.len() { p_out } else { b.place() };
                wire(c, b, current, next);
                current = next;
            }
            if cs.is_empty() {
                b.tau(&[p_in], &[p_out]);
            }
        }
        ProcessTree::Xor(cs) => {
            for c in cs {
                let q = b.place();
                let r = b.place();
                b.tau(&[p_in], &[q]);
                wire(c, b, q, r);
                b.tau(&[r], &[p_out]);
            }
        }
        ProcessTree::And(cs) => {
            let mut starts = Vec::new();
            let mut ends = Vec::new();
            for _ in cs {
                starts.push(b.place());
                ends.push(b.place());
            }
            b.tau(&[p_in], &starts);
            for (c, (&q, &r)) in cs.iter().zip(starts.iter().zip(ends.iter())) {
                wire(c, b, q, r);
            }
            b.tau(&ends, &[p_out]);
        }
        ProcessTree::Loop(do_child, redo_child) => {
            let d_in = b.place();
            let d_out = b.place();
            b.tau(&[p_in], &[d_in]);
            wire(do_child, b, d_in, d_out);
            b.tau(&[d_out], &[p_out]); // exit
            let r_in = b.place();
            let r_out = b.place();
            b.tau(&[d_out], &[r_in]); // redo
            wire(redo_child, b, r_in, r_out);
            b.tau(&[r_out], &[d_in]);
        }
    }
}
