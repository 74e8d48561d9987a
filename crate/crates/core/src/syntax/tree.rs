use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::ops::Range;
use std::sync::Mutex;

use tree_sitter::Parser;

use super::{Language, SyntaxError};

/// Index of a node inside its [`SyntaxTree`]. Ids follow pre-order, so they
/// also follow source order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Kinds that are kept as single leaves even though the grammar gives them
/// inner structure (quotes, escape sequences).
const ATOMIC_KINDS: &[&str] = &["string_literal", "char_literal", "raw_string_literal"];

#[derive(Debug, Clone)]
pub struct SyntaxNode {
    pub kind: &'static str,
    pub span: Range<usize>,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
    /// Grammar field under which this node hangs off its parent.
    pub field: Option<&'static str>,
    pub named: bool,
    pub is_error: bool,
    /// Zero-width node inserted by error recovery.
    pub is_missing: bool,
    subtree_end: u32,
}

impl SyntaxNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn is_comment(&self) -> bool {
        self.kind == "comment"
    }
}

/// Immutable, owned syntax tree of one C or C++ source text.
#[derive(Debug, Clone)]
pub struct SyntaxTree {
    nodes: Vec<SyntaxNode>,
    source: String,
    language: Language,
    error_count: usize,
    lossy: bool,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    pub reject_empty: bool,
}

thread_local! {
    static PARSERS: RefCell<[Option<Parser>; 2]> = const { RefCell::new([None, None]) };
    static SYMBOLS: RefCell<HashMap<(Language, bool, u16), &'static str>> = RefCell::new(HashMap::new());
}

static INTERNED: Mutex<Option<HashSet<&'static str>>> = Mutex::new(None);

/// Grammar symbol and field names as `&'static str`. The set is bounded by
/// the size of the two grammars.
fn symbol(language: Language, is_field: bool, id: u16, name: &str) -> &'static str {
    SYMBOLS.with(|cache| {
        *cache.borrow_mut().entry((language, is_field, id)).or_insert_with(|| {
            let mut guard = INTERNED.lock().expect("interner poisoned");
            let set = guard.get_or_insert_with(HashSet::new);
            match set.get(name) {
                Some(s) => s,
                None => {
                    let leaked: &'static str = Box::leak(name.to_owned().into_boxed_str());
                    set.insert(leaked);
                    leaked
                }
            }
        })
    })
}

fn with_parser<T>(language: Language, f: impl FnOnce(&mut Parser) -> T) -> Result<T, SyntaxError> {
    PARSERS.with(|cell| {
        let mut parsers = cell.borrow_mut();
        let slot = &mut parsers[language as usize];
        if slot.is_none() {
            let mut parser = Parser::new();
            let grammar: tree_sitter::Language = match language {
                Language::C => tree_sitter_c::LANGUAGE.into(),
                Language::Cpp => tree_sitter_cpp::LANGUAGE.into(),
            };
            parser
                .set_language(&grammar)
                .map_err(|e| SyntaxError::ParseFailure(e.to_string()))?;
            *slot = Some(parser);
        }
        Ok(f(slot.as_mut().expect("parser initialised above")))
    })
}

pub fn parse(source: &str, language: Language) -> Result<SyntaxTree, SyntaxError> {
    parse_with(source, language, ParseOptions::default())
}

/// Parse raw bytes; invalid UTF-8 is replaced and the tree is flagged lossy.
pub fn parse_bytes(source: &[u8], language: Language) -> Result<SyntaxTree, SyntaxError> {
    match std::str::from_utf8(source) {
        Ok(text) => parse(text, language),
        Err(_) => {
            let text = String::from_utf8_lossy(source);
            let mut tree = parse(&text, language)?;
            tree.lossy = true;
            Ok(tree)
        }
    }
}

pub fn parse_with(
    source: &str,
    language: Language,
    options: ParseOptions,
) -> Result<SyntaxTree, SyntaxError> {
    if options.reject_empty && source.trim().is_empty() {
        return Err(SyntaxError::ParseFailure("empty input".into()));
    }
    let ts_tree = with_parser(language, |p| p.parse(source, None))?
        .ok_or_else(|| SyntaxError::ParseFailure("parser returned no tree".into()))?;
    Ok(SyntaxTree::from_ts(&ts_tree, source, language))
}

impl SyntaxTree {
    fn from_ts(ts_tree: &tree_sitter::Tree, source: &str, language: Language) -> SyntaxTree {
        let mut nodes: Vec<SyntaxNode> = Vec::new();
        let mut error_count = 0usize;
        let mut ancestors: Vec<NodeId> = Vec::new();
        let mut cursor = ts_tree.walk();

        'walk: loop {
            let node = cursor.node();
            let field = cursor
                .field_id()
                .zip(cursor.field_name())
                .map(|(fid, name)| symbol(language, true, fid.get(), name));
            // Anonymous and named symbols can share spellings but not ids.
            let kind = symbol(language, false, node.kind_id(), node.kind());
            let is_error = node.is_error();
            let is_missing = node.is_missing();
            let mut descend = false;

            let range = node.byte_range();
            let whitespace_leaf = node.child_count() == 0
                && !is_missing
                && !range.is_empty()
                && source[range.clone()].trim().is_empty();

            if !whitespace_leaf {
                let id = NodeId(nodes.len() as u32);
                let parent = ancestors.last().copied();
                let span = if parent.is_none() { 0..source.len() } else { range };
                nodes.push(SyntaxNode {
                    kind,
                    span,
                    children: Vec::new(),
                    parent,
                    field,
                    named: node.is_named(),
                    is_error,
                    is_missing,
                    subtree_end: 0,
                });
                if let Some(p) = parent {
                    nodes[p.index()].children.push(id);
                }
                if ATOMIC_KINDS.contains(&kind) {
                    // Count recovery nodes hidden inside the collapsed literal.
                    error_count += count_errors(node);
                } else {
                    error_count += usize::from(is_error || is_missing);
                    if cursor.goto_first_child() {
                        ancestors.push(id);
                        descend = true;
                    }
                }
            }
            if descend {
                continue;
            }
            loop {
                if cursor.goto_next_sibling() {
                    continue 'walk;
                }
                if !cursor.goto_parent() {
                    break 'walk;
                }
                ancestors.pop();
            }
        }

        // Pre-order ids make each subtree a contiguous id range.
        for i in (0..nodes.len()).rev() {
            let end = nodes[i]
                .children
                .last()
                .map(|c| nodes[c.index()].subtree_end)
                .unwrap_or(i as u32 + 1);
            nodes[i].subtree_end = end;
        }

        SyntaxTree {
            nodes,
            source: source.to_owned(),
            language,
            error_count,
            lossy: false,
        }
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn language(&self) -> Language {
        self.language
    }

    /// Number of ERROR and MISSING nodes produced by error recovery.
    pub fn error_count(&self) -> usize {
        self.error_count
    }

    /// True when the input was not valid UTF-8 and had bytes replaced.
    pub fn is_lossy(&self) -> bool {
        self.lossy
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes[0].children.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &SyntaxNode {
        &self.nodes[id.index()]
    }

    pub fn get(&self, id: NodeId) -> Option<&SyntaxNode> {
        self.nodes.get(id.index())
    }

    pub fn kind(&self, id: NodeId) -> &'static str {
        self.nodes[id.index()].kind
    }

    pub fn text(&self, id: NodeId) -> &str {
        &self.source[self.nodes[id.index()].span.clone()]
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.index()].parent
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.index()].children
    }

    /// First child hanging off `id` under grammar field `field`.
    pub fn child_by_field(&self, id: NodeId, field: &str) -> Option<NodeId> {
        self.children(id)
            .iter()
            .copied()
            .find(|c| self.nodes[c.index()].field == Some(field))
    }

    pub fn children_by_field<'a>(
        &'a self,
        id: NodeId,
        field: &'a str,
    ) -> impl Iterator<Item = NodeId> + 'a {
        self.children(id)
            .iter()
            .copied()
            .filter(move |c| self.nodes[c.index()].field == Some(field))
    }

    /// All nodes in pre-order.
    pub fn preorder(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    /// `id` and every node below it, in pre-order.
    pub fn descendants(&self, id: NodeId) -> impl Iterator<Item = NodeId> {
        (id.0..self.nodes[id.index()].subtree_end).map(NodeId)
    }

    pub fn is_ancestor(&self, ancestor: NodeId, node: NodeId) -> bool {
        ancestor.0 <= node.0 && node.0 < self.nodes[ancestor.index()].subtree_end
    }

    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.parent(id), move |&p| self.parent(p))
    }

    /// Error and missing nodes inside the subtree of `id`.
    pub fn subtree_errors(&self, id: NodeId) -> usize {
        self.descendants(id)
            .filter(|&n| {
                let node = self.node(n);
                node.is_error || node.is_missing
            })
            .count()
    }

    /// Node kinds in pre-order, skipping comments and the subtrees below them.
    pub fn kind_sequence(&self) -> Vec<&'static str> {
        self.preorder()
            .filter(|&id| !self.node(id).is_comment())
            .map(|id| self.kind(id))
            .collect()
    }
}

fn count_errors(node: tree_sitter::Node<'_>) -> usize {
    let mut n = usize::from(node.is_error() || node.is_missing());
    let mut cursor = node.walk();
    for child in node.children(&mut cursor) {
        n += count_errors(child);
    }
    n
}
