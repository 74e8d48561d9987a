//! C/C++ parsing, lexing and source regeneration.
//!
//! The rest of the crate only sees [`SyntaxTree`] and [`LexToken`]; the
//! tree-sitter grammars are an implementation detail of [`parse`].

mod detok;
mod lexer;
mod printer;
mod regen;
mod tree;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use detok::detokenize;
pub use lexer::{
    is_keyword, keywords, lex, normalized_text, strip_comments, LexToken, TokenCategory, OPENMP_WORDS,
};
pub use regen::{regenerate, regenerate_node, Rewrites};
pub use tree::{parse, parse_bytes, parse_with, NodeId, ParseOptions, SyntaxNode, SyntaxTree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("parser could not produce a tree: {0}")]
    ParseFailure(String),
    #[error("rewrites for nodes {first} and {second} overlap")]
    RewriteConflict { first: usize, second: usize },
    #[error("node {0} does not belong to this tree")]
    UnknownNode(usize),
}

/// Source language of a compilation unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Language {
    #[serde(rename = "c")]
    C,
    #[serde(rename = "cpp")]
    Cpp,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::C => "c",
            Language::Cpp => "cpp",
        }
    }

    /// Guess the language from a file extension. Headers (`.h`) count as C.
    pub fn from_path(path: &Path) -> Option<Language> {
        let ext = path.extension()?.to_str()?;
        match ext {
            "c" | "h" => Some(Language::C),
            "cc" | "cpp" | "cxx" | "c++" | "C" | "hpp" | "hh" | "hxx" | "h++" => Some(Language::Cpp),
            _ => None,
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "c" => Ok(Language::C),
            "cpp" | "c++" | "cxx" => Ok(Language::Cpp),
            other => Err(format!("unknown language `{other}` (expected c or cpp)")),
        }
    }
}
