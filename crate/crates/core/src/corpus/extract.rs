use crate::syntax::{parse, regenerate_node, Language, NodeId, Rewrites, SyntaxTree};

use super::FunctionRecord;

/// Records from one file plus the functions dropped for parse errors.
#[derive(Debug, Clone, Default)]
pub struct Extraction {
    pub records: Vec<FunctionRecord>,
    pub rejected_parse: usize,
}

/// Kinds that make a nested function definition not top-level.
const ENCLOSING_KINDS: &[&str] = &["function_definition", "field_declaration_list", "lambda_expression"];

fn is_openmp_pragma(tree: &SyntaxTree, id: NodeId) -> bool {
    if tree.kind(id) != "preproc_call" {
        return false;
    }
    let directive = tree
        .child_by_field(id, "directive")
        .map(|d| tree.text(d)[1..].trim_start());
    let arg = tree
        .child_by_field(id, "argument")
        .map(|a| tree.text(a).trim_start())
        .unwrap_or("");
    directive == Some("pragma")
        && arg.starts_with("omp")
        && arg[3..].chars().next().is_none_or(|c| !(c.is_alphanumeric() || c == '_'))
}

/// True when the subtree of `id` holds a `#pragma omp` directive.
pub(crate) fn contains_openmp(tree: &SyntaxTree, id: NodeId) -> bool {
    tree.descendants(id).any(|n| is_openmp_pragma(tree, n))
}

/// One record per top-level function definition, comments removed.
///
/// A templated function is taken together with its `template<...>` header.
/// Functions whose subtree contains parse errors are counted, not returned.
pub fn extract_functions(source: &str, language: Language, repo: &str, path: &str) -> Extraction {
    let tree = match parse(source, language) {
        Ok(t) => t,
        Err(_) => return Extraction::default(),
    };
    extract_from_tree(&tree, repo, path)
}

pub(crate) fn extract_from_tree(tree: &SyntaxTree, repo: &str, path: &str) -> Extraction {
    let mut out = Extraction::default();
    for id in tree.preorder() {
        if tree.kind(id) != "function_definition" {
            continue;
        }
        if tree.ancestors(id).any(|a| ENCLOSING_KINDS.contains(&tree.kind(a))) {
            continue;
        }
        let unit = match tree.parent(id) {
            Some(p) if tree.kind(p) == "template_declaration" => p,
            _ => id,
        };
        let inside_error = tree.ancestors(unit).any(|a| tree.node(a).is_error);
        if inside_error || tree.subtree_errors(unit) > 0 {
            out.rejected_parse += 1;
            continue;
        }
        let code = match regenerate_node(tree, unit, &Rewrites::new()) {
            Ok(c) => c,
            Err(_) => {
                out.rejected_parse += 1;
                continue;
            }
        };
        let offset = tree.node(unit).span.start;
        let id_str = format!("{repo}:{path}:{offset}");
        let omp = contains_openmp(tree, unit);
        out.records
            .push(FunctionRecord::new(id_str, repo, path, tree.language(), code, omp));
    }
    out
}
