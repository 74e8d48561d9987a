use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::ast::is_unparseable;
use super::MetricError;
use crate::syntax::{parse, Language, NodeId, SyntaxTree};

/// A use of a variable linked to its most recent definition.
///
/// Variables are numbered by first appearance within their function; `def`
/// and `use_` count the definitions and uses of that variable so far, which
/// keeps edges comparable across renamed or shifted code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DefUseEdge {
    pub var: u32,
    pub def: u32,
    pub use_: u32,
}

const SKIPPED_KINDS: &[&str] = &[
    "comment",
    "preproc_include",
    "preproc_def",
    "preproc_function_def",
    "preproc_call",
    "preproc_line",
    "qualified_identifier",
    "template_argument_list",
];

#[derive(Default)]
struct VarState {
    id: u32,
    defs: u32,
    uses: u32,
}

struct Flow<'t> {
    tree: &'t SyntaxTree,
    vars: HashMap<&'t str, VarState>,
    edges: Vec<DefUseEdge>,
}

impl<'t> Flow<'t> {
    fn new(tree: &'t SyntaxTree) -> Self {
        Flow { tree, vars: HashMap::new(), edges: Vec::new() }
    }

    fn var(&mut self, name: &'t str) -> &mut VarState {
        let next = self.vars.len() as u32;
        self.vars.entry(name).or_insert_with(|| VarState { id: next, ..VarState::default() })
    }

    fn define(&mut self, id: NodeId) {
        let name = self.tree.text(id);
        self.var(name).defs += 1;
    }

    fn use_(&mut self, id: NodeId) {
        let name = self.tree.text(id);
        let v = self.var(name);
        if v.defs > 0 {
            let edge = DefUseEdge { var: v.id, def: v.defs - 1, use_: v.uses };
            v.uses += 1;
            self.edges.push(edge);
        }
    }

    fn field(&self, id: NodeId, name: &str) -> Option<NodeId> {
        self.tree.child_by_field(id, name)
    }

    fn visit_children_except(&mut self, id: NodeId, skip: &[&str]) {
        for &c in self.tree.children(id) {
            if self.tree.node(c).field.is_some_and(|f| skip.contains(&f)) {
                continue;
            }
            self.visit(c);
        }
    }

    /// Definition site inside a declarator; array sizes and initialisers are uses.
    fn declarator(&mut self, id: NodeId) {
        match self.tree.kind(id) {
            "identifier" => self.define(id),
            "init_declarator" => {
                if let Some(v) = self.field(id, "value") {
                    self.visit(v);
                }
                if let Some(d) = self.field(id, "declarator") {
                    self.declarator(d);
                }
            }
            "array_declarator" => {
                if let Some(size) = self.field(id, "size") {
                    self.visit(size);
                }
                if let Some(d) = self.field(id, "declarator") {
                    self.declarator(d);
                }
            }
            "pointer_declarator" | "reference_declarator" | "parenthesized_declarator" => {
                let inner = self
                    .field(id, "declarator")
                    .or_else(|| self.tree.children(id).iter().copied().find(|&c| self.tree.node(c).named));
                if let Some(d) = inner {
                    self.declarator(d);
                }
            }
            "function_declarator" => {
                if let Some(p) = self.field(id, "parameters") {
                    self.visit(p);
                }
            }
            _ => self.visit(id),
        }
    }

    fn visit(&mut self, id: NodeId) {
        let node = self.tree.node(id);
        if SKIPPED_KINDS.contains(&node.kind) || node.is_missing {
            return;
        }
        if node.kind.starts_with("preproc_") {
            self.visit_children_except(id, &["condition", "name"]);
            return;
        }
        match node.kind {
            "identifier" => self.use_(id),
            "declaration" | "parameter_declaration" | "optional_parameter_declaration" => {
                for &c in self.tree.children(id) {
                    if self.tree.node(c).field == Some("declarator") {
                        self.declarator(c);
                    } else if self.tree.node(c).field == Some("default_value") {
                        self.visit(c);
                    }
                }
            }
            "function_definition" => {
                if let Some(d) = self.field(id, "declarator") {
                    self.declarator(d);
                }
                self.visit_children_except(id, &["declarator", "type"]);
            }
            "for_range_loop" => {
                if let Some(r) = self.field(id, "right") {
                    self.visit(r);
                }
                if let Some(d) = self.field(id, "declarator") {
                    self.declarator(d);
                }
                if let Some(b) = self.field(id, "body") {
                    self.visit(b);
                }
            }
            "assignment_expression" => {
                if let Some(r) = self.field(id, "right") {
                    self.visit(r);
                }
                let Some(left) = self.field(id, "left") else { return };
                if self.tree.kind(left) == "identifier" {
                    let compound = self
                        .field(id, "operator")
                        .is_some_and(|op| self.tree.text(op) != "=");
                    if compound {
                        self.use_(left);
                    }
                    self.define(left);
                } else {
                    self.visit(left);
                }
            }
            "update_expression" => match self.field(id, "argument") {
                Some(arg) if self.tree.kind(arg) == "identifier" => {
                    self.use_(arg);
                    self.define(arg);
                }
                Some(arg) => self.visit(arg),
                None => {}
            },
            "call_expression" => {
                if let Some(f) = self.field(id, "function") {
                    if self.tree.kind(f) != "identifier" {
                        self.visit(f);
                    }
                }
                if let Some(a) = self.field(id, "arguments") {
                    self.visit(a);
                }
            }
            "field_expression" => {
                if let Some(a) = self.field(id, "argument") {
                    self.visit(a);
                }
            }
            _ => {
                for &c in self.tree.children(id) {
                    self.visit(c);
                }
            }
        }
    }
}

/// Def-use edges of every function, plus one group for code outside functions.
pub fn dataflow_edges(tree: &SyntaxTree) -> Vec<DefUseEdge> {
    let functions: Vec<NodeId> = tree
        .preorder()
        .filter(|&id| {
            tree.kind(id) == "function_definition"
                && !tree.ancestors(id).any(|a| tree.kind(a) == "function_definition")
        })
        .collect();
    let mut edges = Vec::new();
    for &f in &functions {
        let mut flow = Flow::new(tree);
        flow.visit(f);
        edges.extend(flow.edges);
    }
    let mut outside = Flow::new(tree);
    outside_visit(&mut outside, tree.root(), &functions);
    edges.extend(outside.edges);
    edges
}

fn outside_visit(flow: &mut Flow<'_>, id: NodeId, functions: &[NodeId]) {
    let tree = flow.tree;
    if functions.contains(&id) {
        return;
    }
    if !functions.iter().any(|&f| tree.is_ancestor(id, f)) {
        flow.visit(id);
        return;
    }
    for &c in tree.children(id) {
        outside_visit(flow, c, functions);
    }
}

fn multiset(edges: Vec<DefUseEdge>) -> HashMap<DefUseEdge, usize> {
    let mut m = HashMap::new();
    for e in edges {
        *m.entry(e).or_insert(0) += 1;
    }
    m
}

/// Share of reference def-use edges present in the candidate; `None` when the
/// reference has no edges.
pub fn dataflow_match_trees(
    candidate: &SyntaxTree,
    reference: &SyntaxTree,
) -> Result<Option<f64>, MetricError> {
    if is_unparseable(reference) {
        return Err(MetricError::ReferenceUnparseable);
    }
    let refs = dataflow_edges(reference);
    if refs.is_empty() {
        return Ok(None);
    }
    if is_unparseable(candidate) {
        return Ok(Some(0.0));
    }
    let total = refs.len();
    let refs = multiset(refs);
    let cands = multiset(dataflow_edges(candidate));
    let matched: usize = refs
        .iter()
        .map(|(e, &n)| n.min(cands.get(e).copied().unwrap_or(0)))
        .sum();
    Ok(Some(matched as f64 / total as f64))
}

pub fn dataflow_match(
    candidate: &str,
    reference: &str,
    language: Language,
) -> Result<Option<f64>, MetricError> {
    let r = parse(reference, language).map_err(|_| MetricError::ReferenceUnparseable)?;
    let c = match parse(candidate, language) {
        Ok(c) => c,
        Err(_) => return Ok(if dataflow_edges(&r).is_empty() { None } else { Some(0.0) }),
    };
    dataflow_match_trees(&c, &r)
}
