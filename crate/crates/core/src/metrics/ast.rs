use std::collections::HashMap;

use super::MetricError;
use crate::syntax::{parse, Language, SyntaxTree};

/// Interns subtree shapes so equal subtrees across trees share an id.
#[derive(Default)]
struct ShapeTable {
    ids: HashMap<(&'static str, Vec<u32>), u32>,
}

impl ShapeTable {
    fn intern(&mut self, kind: &'static str, children: Vec<u32>) -> u32 {
        let next = self.ids.len() as u32;
        *self.ids.entry((kind, children)).or_insert(next)
    }

    /// Multiset of subtree shapes rooted at non-leaf nodes.
    fn subtrees(&mut self, tree: &SyntaxTree) -> HashMap<u32, usize> {
        let mut shape: Vec<Option<u32>> = vec![None; tree.len()];
        let mut out: HashMap<u32, usize> = HashMap::new();
        for id in tree.preorder().collect::<Vec<_>>().into_iter().rev() {
            let node = tree.node(id);
            if node.is_comment() || node.is_missing {
                continue;
            }
            let children: Vec<u32> = node.children.iter().filter_map(|c| shape[c.index()]).collect();
            let inner = !children.is_empty();
            let s = self.intern(node.kind, children);
            shape[id.index()] = Some(s);
            if inner {
                *out.entry(s).or_insert(0) += 1;
            }
        }
        out
    }
}

/// Number of non-leaf subtrees, the denominator of [`ast_match`].
pub fn subtree_count(tree: &SyntaxTree) -> usize {
    ShapeTable::default().subtrees(tree).values().sum()
}

/// A tree with nothing but error recovery at the top level.
pub(crate) fn is_unparseable(tree: &SyntaxTree) -> bool {
    let mut content = tree
        .children(tree.root())
        .iter()
        .map(|&c| tree.node(c))
        .filter(|n| !n.is_comment())
        .peekable();
    content.peek().is_none() || content.all(|n| n.is_error)
}

pub fn ast_match_trees(candidate: &SyntaxTree, reference: &SyntaxTree) -> Result<f64, MetricError> {
    if is_unparseable(reference) {
        return Err(MetricError::ReferenceUnparseable);
    }
    if is_unparseable(candidate) {
        return Ok(0.0);
    }
    let mut table = ShapeTable::default();
    let refs = table.subtrees(reference);
    let cands = table.subtrees(candidate);
    let total: usize = refs.values().sum();
    if total == 0 {
        return Err(MetricError::ReferenceUnparseable);
    }
    let matched: usize = refs
        .iter()
        .map(|(s, &n)| n.min(cands.get(s).copied().unwrap_or(0)))
        .sum();
    Ok(matched as f64 / total as f64)
}

/// Share of the reference's syntax subtrees found in the candidate.
///
/// Subtrees are compared by shape only: node kinds and structure, with
/// identifier and literal text ignored.
pub fn ast_match(candidate: &str, reference: &str, language: Language) -> Result<f64, MetricError> {
    let r = parse(reference, language).map_err(|_| MetricError::ReferenceUnparseable)?;
    let c = match parse(candidate, language) {
        Ok(c) => c,
        Err(_) => return Ok(0.0),
    };
    ast_match_trees(&c, &r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_renaming() {
        let a = "int f(int n) { int s = 0; for (int i = 0; i < n; i++) s += i; return s; }";
        let b = "int g(int m) { int t = 7; for (int k = 1; k < m; k++) t += k; return t; }";
        assert_eq!(ast_match(a, a, Language::C).unwrap(), 1.0);
        assert_eq!(ast_match(b, a, Language::C).unwrap(), 1.0);
    }

    #[test]
    fn partial_match() {
        let s = ast_match("int f(){int a;}", "int f(){int a; int b;}", Language::C).unwrap();
        assert!(s > 0.0 && s < 1.0);
    }

    #[test]
    fn unparseable_inputs() {
        assert_eq!(ast_match("", "int x;", Language::C).unwrap(), 0.0);
        assert_eq!(ast_match(") ) ) (", "int x;", Language::C).unwrap(), 0.0);
        assert_eq!(ast_match("int x;", "", Language::C), Err(MetricError::ReferenceUnparseable));
    }
}
