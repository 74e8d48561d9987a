use std::collections::BTreeMap;

use super::lexer::strip_comments;
use super::printer::{Printer, TokenOpts};
use super::tree::{NodeId, SyntaxTree};
use super::SyntaxError;

/// Replacement text keyed by the node it replaces (the whole subtree).
pub type Rewrites = BTreeMap<NodeId, String>;

/// Directives whose whole line is emitted as one unit.
const DIRECTIVE_LINE_KINDS: &[&str] = &[
    "preproc_include",
    "preproc_def",
    "preproc_function_def",
    "preproc_call",
    "preproc_line",
];

const CONDITIONAL_KINDS: &[&str] = &[
    "preproc_if",
    "preproc_ifdef",
    "preproc_elif",
    "preproc_elifdef",
    "preproc_else",
];

const ANGLE_PARENTS: &[&str] = &["template_parameter_list", "template_argument_list"];

const INLINE_BRACE_PARENTS: &[&str] = &["initializer_list", "enumerator_list"];

/// Rebuild source text from `tree` with `rewrites` applied, dropping comments
/// and normalising whitespace.
pub fn regenerate(tree: &SyntaxTree, rewrites: &Rewrites) -> Result<String, SyntaxError> {
    regenerate_node(tree, tree.root(), rewrites)
}

/// Like [`regenerate`] but only for the subtree rooted at `node`.
pub fn regenerate_node(
    tree: &SyntaxTree,
    node: NodeId,
    rewrites: &Rewrites,
) -> Result<String, SyntaxError> {
    if tree.get(node).is_none() {
        return Err(SyntaxError::UnknownNode(node.index()));
    }
    check_rewrites(tree, rewrites)?;
    let mut emitter = Emitter {
        tree,
        rewrites,
        printer: Printer::new(),
        last_end: None,
    };
    emitter.emit(node);
    Ok(emitter.printer.finish())
}

fn check_rewrites(tree: &SyntaxTree, rewrites: &Rewrites) -> Result<(), SyntaxError> {
    let mut outer: Option<NodeId> = None;
    for &id in rewrites.keys() {
        if tree.get(id).is_none() {
            return Err(SyntaxError::UnknownNode(id.index()));
        }
        if let Some(o) = outer {
            if tree.is_ancestor(o, id) {
                return Err(SyntaxError::RewriteConflict {
                    first: o.index(),
                    second: id.index(),
                });
            }
        }
        outer = Some(id);
    }
    Ok(())
}

struct Emitter<'t> {
    tree: &'t SyntaxTree,
    rewrites: &'t Rewrites,
    printer: Printer,
    last_end: Option<usize>,
}

impl Emitter<'_> {
    fn emit(&mut self, id: NodeId) {
        let node = self.tree.node(id);
        if let Some(text) = self.rewrites.get(&id) {
            self.printer.token(text, TokenOpts::default());
            self.last_end = Some(node.span.end);
            return;
        }
        if node.is_comment() || node.is_missing {
            return;
        }
        if DIRECTIVE_LINE_KINDS.contains(&node.kind) {
            let line = self.directive_text(&[id]);
            self.printer.directive(&line);
            self.last_end = None;
            return;
        }
        if CONDITIONAL_KINDS.contains(&node.kind) {
            self.emit_conditional(id);
            return;
        }
        if node.is_leaf() {
            let text = self.tree.text(id);
            if text.starts_with('#') {
                // Stray directive token (e.g. `#endif` under an ERROR node).
                self.printer.directive(text);
                self.last_end = None;
                return;
            }
            let inline_brace = (text == "{" || text == "}")
                && node
                    .parent
                    .is_some_and(|p| INLINE_BRACE_PARENTS.contains(&self.tree.kind(p)));
            let angle = (text == "<" || text == ">")
                && node
                    .parent
                    .is_some_and(|p| ANGLE_PARENTS.contains(&self.tree.kind(p)));
            let adjacent = self.last_end == Some(node.span.start);
            self.printer.token(text, TokenOpts { inline_brace, adjacent, angle });
            self.last_end = Some(node.span.end);
            return;
        }
        for &child in &node.children {
            self.emit(child);
        }
    }

    fn emit_conditional(&mut self, id: NodeId) {
        let children = self.tree.children(id);
        let mut i = 0;
        while i < children.len() {
            let child = children[i];
            let node = self.tree.node(child);
            if node.is_leaf() && self.tree.text(child).starts_with('#') {
                // Header line: the `#if`-style token plus its condition/name.
                let mut line = vec![child];
                while let Some(&next) = children.get(i + 1) {
                    match self.tree.node(next).field {
                        Some("condition") | Some("name") => {
                            line.push(next);
                            i += 1;
                        }
                        _ => break,
                    }
                }
                let text = self.directive_text(&line);
                self.printer.directive(&text);
                self.last_end = None;
            } else {
                self.emit(child);
            }
            i += 1;
        }
    }

    /// Leaves of `roots` joined with their original spacing collapsed to at
    /// most one space; comments removed.
    fn directive_text(&self, roots: &[NodeId]) -> String {
        let mut leaves: Vec<(String, usize, usize)> = Vec::new();
        for &root in roots {
            self.collect_leaves(root, &mut leaves);
        }
        let mut out = String::new();
        let mut prev_end: Option<usize> = None;
        for (text, start, end) in leaves {
            let text = text.trim();
            if text.is_empty() {
                continue;
            }
            if let Some(pe) = prev_end {
                if pe != start {
                    out.push(' ');
                }
            }
            out.push_str(text);
            prev_end = Some(end);
        }
        out
    }

    fn collect_leaves(&self, id: NodeId, out: &mut Vec<(String, usize, usize)>) {
        let node = self.tree.node(id);
        if let Some(text) = self.rewrites.get(&id) {
            out.push((text.clone(), node.span.start, node.span.end));
            return;
        }
        if node.is_comment() || node.is_missing {
            return;
        }
        if node.is_leaf() {
            let raw = self.tree.text(id);
            let text = match node.kind {
                "preproc_arg" => collapse_whitespace(&strip_comments(raw)),
                "preproc_directive" => format!("#{}", raw[1..].trim_start()),
                _ => raw.to_owned(),
            };
            out.push((text, node.span.start, node.span.end));
            return;
        }
        for &child in &node.children {
            self.collect_leaves(child, out);
        }
    }
}

/// Collapse whitespace runs to one space, except line continuations which
/// keep their backslash-newline.
fn collapse_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\\' && matches!(chars.peek(), Some('\n') | Some('\r')) {
            while matches!(chars.peek(), Some('\n') | Some('\r')) {
                chars.next();
            }
            out.push_str(" \\\n");
            pending_space = false;
            continue;
        }
        if c.is_whitespace() {
            pending_space = true;
            continue;
        }
        if pending_space && !out.is_empty() && !out.ends_with('\n') {
            out.push(' ');
        }
        pending_space = false;
        out.push(c);
    }
    out
}
