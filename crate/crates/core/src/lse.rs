//! Local semantics elimination.
//!
//! Declared identifiers, number literals and string literals are replaced by
//! role placeholders (`func_`, `var_`, `arr_`, `num_`, `str_`) carrying a
//! random integer suffix. Comments go away and layout is canonicalised by
//! regeneration. Identifiers that the unit does not declare (library calls,
//! macros) and preprocessor directives are left untouched.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::syntax::{self, Language, NodeId, Rewrites, SyntaxError, SyntaxTree};

#[derive(Debug, Error)]
pub enum LseError {
    #[error("source has {errors} parse errors (limit {limit})")]
    Rejected { errors: usize, limit: usize },
    #[error("invalid suffix range {lo}..={hi}")]
    EmptyRange { lo: u64, hi: u64 },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LseConfig {
    /// Inclusive lower bound of the suffix range.
    pub suffix_min: u64,
    /// Inclusive upper bound of the suffix range.
    pub suffix_max: u64,
    pub seed: u64,
    pub anonymize_numbers: bool,
    pub anonymize_strings: bool,
    /// Keep number and string literals verbatim so the output still compiles.
    pub compilable_mode: bool,
    /// Sources with more parse errors than this are rejected.
    pub max_parse_errors: usize,
}

impl Default for LseConfig {
    fn default() -> Self {
        LseConfig {
            suffix_min: 1,
            suffix_max: 1000,
            seed: 0,
            anonymize_numbers: true,
            anonymize_strings: true,
            compilable_mode: false,
            max_parse_errors: 0,
        }
    }
}

impl LseConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<(), LseError> {
        if self.suffix_min > self.suffix_max {
            return Err(LseError::EmptyRange {
                lo: self.suffix_min,
                hi: self.suffix_max,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Function,
    Variable,
    Array,
    Parameter,
    Number,
    String,
}

impl Role {
    pub fn prefix(self) -> &'static str {
        match self {
            Role::Function => "func",
            Role::Variable | Role::Parameter => "var",
            Role::Array => "arr",
            Role::Number => "num",
            Role::String => "str",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Role::Function => "function",
            Role::Variable => "variable",
            Role::Array => "array",
            Role::Parameter => "parameter",
            Role::Number => "number",
            Role::String => "string",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapEntry {
    pub original: String,
    pub role: Role,
    /// Placeholder without quotes, e.g. `str_17` for a string literal.
    pub replacement: String,
    pub suffix: u64,
}

/// Per-unit mapping from original tokens to placeholders, in first-use order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnonymizationMap {
    entries: Vec<MapEntry>,
    index: HashMap<(Role, String), usize>,
}

impl AnonymizationMap {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[MapEntry] {
        &self.entries
    }

    pub fn get(&self, role: Role, original: &str) -> Option<&MapEntry> {
        self.index
            .get(&(role, original.to_owned()))
            .map(|&i| &self.entries[i])
    }

    /// Replacement for `original` under any role.
    pub fn lookup(&self, original: &str) -> Option<&MapEntry> {
        self.entries.iter().find(|e| e.original == original)
    }

    fn insert(&mut self, entry: MapEntry) -> usize {
        let key = (entry.role, entry.original.clone());
        *self.index.entry(key).or_insert_with(|| {
            self.entries.push(entry);
            self.entries.len() - 1
        })
    }
}

/// Suffix source: seeded, unique per unit, never producing a name that
/// already occurs in the unit.
struct SuffixGen {
    rng: ChaCha8Rng,
    lo: u64,
    hi: u64,
    used: HashSet<u64>,
    taken_names: HashSet<String>,
    overflow: u64,
}

impl SuffixGen {
    fn new(config: &LseConfig, taken_names: HashSet<String>) -> Self {
        SuffixGen {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            lo: config.suffix_min,
            hi: config.suffix_max,
            used: HashSet::new(),
            taken_names,
            overflow: config.suffix_max.saturating_add(1),
        }
    }

    fn free(&self, prefix: &str, k: u64) -> bool {
        !self.used.contains(&k) && !self.taken_names.contains(&format!("{prefix}_{k}"))
    }

    fn draw(&mut self, prefix: &str) -> u64 {
        let k = self.pick(prefix);
        self.used.insert(k);
        k
    }

    fn pick(&mut self, prefix: &str) -> u64 {
        for _ in 0..64 {
            let k = self.rng.gen_range(self.lo..=self.hi);
            if self.free(prefix, k) {
                return k;
            }
        }
        // Dense range: scan from a random start before extending it.
        let span = self.hi - self.lo + 1;
        let start = self.rng.gen_range(0..span);
        for off in 0..span {
            let k = self.lo + (start + off) % span;
            if self.free(prefix, k) {
                return k;
            }
        }
        loop {
            let k = self.overflow;
            self.overflow += 1;
            if self.free(prefix, k) {
                return k;
            }
        }
    }
}

/// Seed for one record, so batch results do not depend on processing order.
pub fn record_seed(global_seed: u64, record_id: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(global_seed.to_le_bytes());
    hasher.update(record_id.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

const DIRECTIVE_KINDS: &[&str] = &[
    "preproc_include",
    "preproc_def",
    "preproc_function_def",
    "preproc_call",
    "preproc_line",
];

const DECLARATION_KINDS: &[&str] = &[
    "declaration",
    "field_declaration",
    "parameter_declaration",
    "optional_parameter_declaration",
    "function_definition",
    "for_range_loop",
];

const STRING_KINDS: &[&str] = &["string_literal", "raw_string_literal"];

/// Marks nodes on preprocessor lines, including `#if` conditions.
fn directive_mask(tree: &SyntaxTree) -> Vec<bool> {
    let mut mask = vec![false; tree.len()];
    for id in tree.preorder() {
        let node = tree.node(id);
        let own = DIRECTIVE_KINDS.contains(&node.kind)
            || node.parent.is_some_and(|p| {
                tree.kind(p).starts_with("preproc_")
                    && matches!(node.field, Some("condition") | Some("name"))
            });
        let inherited = node.parent.is_some_and(|p| mask[p.index()]);
        mask[id.index()] = own || inherited;
    }
    mask
}

/// Walk a declarator down to the declared name.
fn declared_name(tree: &SyntaxTree, declarator: NodeId, parameter: bool) -> Option<(NodeId, Role)> {
    let mut cur = declarator;
    let mut saw_array = false;
    let mut innermost_wrapper: Option<&str> = None;
    loop {
        let kind = tree.kind(cur);
        match kind {
            "identifier" | "field_identifier" => {
                let role = if innermost_wrapper == Some("function_declarator") {
                    Role::Function
                } else if saw_array {
                    Role::Array
                } else if parameter {
                    Role::Parameter
                } else {
                    Role::Variable
                };
                return Some((cur, role));
            }
            "init_declarator" | "function_declarator" | "array_declarator" => {
                if kind == "array_declarator" {
                    saw_array = true;
                }
                if kind != "init_declarator" {
                    innermost_wrapper = Some(kind);
                }
                cur = tree.child_by_field(cur, "declarator")?;
            }
            "pointer_declarator" | "reference_declarator" | "parenthesized_declarator"
            | "attributed_declarator" => {
                innermost_wrapper = Some(kind);
                cur = tree
                    .child_by_field(cur, "declarator")
                    .or_else(|| tree.children(cur).iter().copied().find(|&c| tree.node(c).named))?;
            }
            _ => return None,
        }
    }
}

struct Declared {
    roles: HashMap<String, Role>,
}

fn scan_declarations(tree: &SyntaxTree, mask: &[bool]) -> Declared {
    let type_names: HashSet<&str> = tree
        .preorder()
        .filter(|&id| tree.kind(id) == "type_identifier")
        .map(|id| tree.text(id))
        .collect();
    let mut roles: HashMap<String, Role> = HashMap::new();
    for id in tree.preorder() {
        if mask[id.index()] {
            continue;
        }
        let kind = tree.kind(id);
        let mut found: Vec<(NodeId, Role)> = Vec::new();
        if DECLARATION_KINDS.contains(&kind) {
            let parameter = kind.ends_with("parameter_declaration");
            for d in tree.children_by_field(id, "declarator") {
                found.extend(declared_name(tree, d, parameter));
            }
        } else if kind == "enumerator" {
            if let Some(name) = tree.child_by_field(id, "name") {
                found.push((name, Role::Variable));
            }
        }
        for (name, role) in found {
            let text = tree.text(name);
            // Constructors share the class name; renaming them breaks the type.
            if role == Role::Function && type_names.contains(text) {
                continue;
            }
            roles.entry(text.to_owned()).or_insert(role);
        }
    }
    Declared { roles }
}

fn taken_names(tree: &SyntaxTree) -> HashSet<String> {
    tree.preorder()
        .filter(|&id| {
            matches!(
                tree.kind(id),
                "identifier" | "field_identifier" | "type_identifier" | "namespace_identifier"
            )
        })
        .map(|id| tree.text(id).to_owned())
        .collect()
}

/// The map together with the node rewrites that realise it.
fn plan(tree: &SyntaxTree, config: &LseConfig) -> (AnonymizationMap, Rewrites) {
    let mask = directive_mask(tree);
    let declared = scan_declarations(tree, &mask);
    let mut suffixes = SuffixGen::new(config, taken_names(tree));
    let mut map = AnonymizationMap::default();
    let mut rewrites = Rewrites::new();
    let keep_literals = config.compilable_mode;

    for id in tree.preorder() {
        if mask[id.index()] {
            continue;
        }
        let node = tree.node(id);
        if node.is_missing {
            continue;
        }
        let text = tree.text(id);
        let target = match node.kind {
            "identifier" | "field_identifier" => {
                let qualified = node
                    .parent
                    .is_some_and(|p| tree.kind(p) == "qualified_identifier");
                match declared.roles.get(text) {
                    Some(&role) if !qualified => Some(role),
                    _ => None,
                }
            }
            "number_literal" if config.anonymize_numbers && !keep_literals => Some(Role::Number),
            kind if STRING_KINDS.contains(&kind)
                && config.anonymize_strings
                && !keep_literals
                && node
                    .parent
                    .is_none_or(|p| tree.kind(p) != "linkage_specification") =>
            {
                Some(Role::String)
            }
            _ => None,
        };
        let Some(role) = target else { continue };
        let idx = match map.index.get(&(role, text.to_owned())) {
            Some(&i) => i,
            None => {
                let suffix = suffixes.draw(role.prefix());
                map.insert(MapEntry {
                    original: text.to_owned(),
                    role,
                    replacement: format!("{}_{suffix}", role.prefix()),
                    suffix,
                })
            }
        };
        let entry = &map.entries[idx];
        let replacement = if role == Role::String {
            format!("\"{}\"", entry.replacement)
        } else {
            entry.replacement.clone()
        };
        rewrites.insert(id, replacement);
    }
    (map, rewrites)
}

pub fn build_anonymization_map(tree: &SyntaxTree, config: &LseConfig) -> AnonymizationMap {
    plan(tree, config).0
}

/// Result of running LSE on one unit.
#[derive(Debug, Clone)]
pub struct LseOutput {
    pub code: String,
    pub map: AnonymizationMap,
}

pub fn apply_lse_tree(tree: &SyntaxTree, config: &LseConfig) -> Result<LseOutput, LseError> {
    config.validate()?;
    if tree.error_count() > config.max_parse_errors {
        return Err(LseError::Rejected {
            errors: tree.error_count(),
            limit: config.max_parse_errors,
        });
    }
    let (map, rewrites) = plan(tree, config);
    let code = syntax::regenerate(tree, &rewrites)?;
    Ok(LseOutput { code, map })
}

/// Anonymise `source` and return comment-free, canonically laid out code.
pub fn apply_lse(source: &str, language: Language, config: &LseConfig) -> Result<String, LseError> {
    let tree = syntax::parse(source, language)?;
    Ok(apply_lse_tree(&tree, config)?.code)
}

/// `func_12`, `var_3`, `arr_88`, `num_34`, `str_5`.
pub fn is_placeholder(word: &str) -> bool {
    let Some((prefix, digits)) = word.split_once('_') else {
        return false;
    };
    matches!(prefix, "func" | "var" | "arr" | "num" | "str")
        && !digits.is_empty()
        && digits.bytes().all(|b| b.is_ascii_digit())
}

/// Text with every placeholder suffix erased, plus the placeholders in order.
fn skeleton(text: &str) -> (String, Vec<&str>) {
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut found = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_alphanumeric() || b == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &text[start..i];
            if is_placeholder(word) {
                let prefix = &word[..word.find('_').expect("placeholder has underscore")];
                out.push_str(prefix);
                out.push_str("_#");
                found.push(word);
            } else {
                out.push_str(word);
            }
        } else {
            let ch = text[i..].chars().next().expect("in bounds");
            out.push(ch);
            i += ch.len_utf8();
        }
    }
    (out, found)
}

/// True when `a` and `b` differ only by a consistent, one-to-one renaming of
/// placeholder suffixes.
pub fn alpha_equivalent(a: &str, b: &str) -> bool {
    let (sa, pa) = skeleton(a);
    let (sb, pb) = skeleton(b);
    if sa != sb || pa.len() != pb.len() {
        return false;
    }
    let mut fwd: HashMap<&str, &str> = HashMap::new();
    let mut back: HashMap<&str, &str> = HashMap::new();
    for (x, y) in pa.into_iter().zip(pb) {
        if *fwd.entry(x).or_insert(y) != y || *back.entry(y).or_insert(x) != x {
            return false;
        }
    }
    true
}
