use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenCategory {
    Keyword,
    Identifier,
    Number,
    String,
    Punctuation,
    Pragma,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexToken {
    pub text: String,
    pub category: TokenCategory,
    pub span: Range<usize>,
}

const C_KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else",
    "enum", "extern", "float", "for", "goto", "if", "inline", "int", "long", "register",
    "restrict", "return", "short", "signed", "sizeof", "static", "struct", "switch", "typedef",
    "union", "unsigned", "void", "volatile", "while", "_Alignas", "_Alignof", "_Atomic", "_Bool",
    "_Complex", "_Generic", "_Imaginary", "_Noreturn", "_Static_assert", "_Thread_local", "bool",
    "true", "false",
];

const CPP_EXTRA_KEYWORDS: &[&str] = &[
    "alignas", "alignof", "and", "and_eq", "asm", "bitand", "bitor", "catch", "char8_t",
    "char16_t", "char32_t", "class", "compl", "concept", "consteval", "constexpr", "constinit",
    "const_cast", "co_await", "co_return", "co_yield", "decltype", "delete", "dynamic_cast",
    "explicit", "export", "friend", "mutable", "namespace", "new", "noexcept", "not", "not_eq",
    "nullptr", "operator", "or", "or_eq", "private", "protected", "public", "reinterpret_cast",
    "requires", "static_assert", "static_cast", "template", "this", "thread_local", "throw",
    "try", "typeid", "typename", "using", "virtual", "wchar_t", "xor", "xor_eq",
];

/// OpenMP directive and clause words, as they appear after `#pragma omp`.
pub const OPENMP_WORDS: &[&str] = &[
    "omp", "parallel", "for", "simd", "sections", "section", "single", "master", "masked",
    "critical", "barrier", "atomic", "flush", "ordered", "task", "taskwait", "taskyield",
    "taskloop", "taskgroup", "target", "teams", "distribute", "declare", "end", "threadprivate",
    "data", "enter", "exit", "update", "map", "loop", "private", "shared", "firstprivate",
    "lastprivate", "default", "none", "schedule", "static", "dynamic", "guided", "auto",
    "runtime", "collapse", "nowait", "num_threads", "if", "copyin", "copyprivate", "linear",
    "aligned", "safelen", "simdlen", "proc_bind", "close", "spread", "depend", "num_teams",
    "thread_limit", "dist_schedule", "device", "is_device_ptr", "use_device_ptr", "defaultmap",
    "read", "write", "capture", "seq_cst", "untied", "mergeable", "final", "priority",
    "grainsize", "num_tasks", "nogroup", "hint", "reduction", "allocate", "order", "concurrent",
    "bind", "scan", "inclusive", "exclusive", "uniform", "inbranch", "notinbranch", "requires",
];

// Longest first within each length class.
const PUNCTUATORS: &[&str] = &[
    "<<=", ">>=", "...", "->*", "<=>", "::", "->", "++", "--", "<<", ">>", "<=", ">=", "==",
    "!=", "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "##", ".*", "{", "}", "[",
    "]", "(", ")", ";", ":", ",", ".", "?", "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "=",
    "<", ">", "#",
];

/// Reserved words of `language`.
pub fn keywords(language: Language) -> impl Iterator<Item = &'static str> {
    let extra: &[&str] = match language {
        Language::C => &[],
        Language::Cpp => CPP_EXTRA_KEYWORDS,
    };
    C_KEYWORDS.iter().chain(extra).copied()
}

pub fn is_keyword(word: &str, language: Language) -> bool {
    C_KEYWORDS.contains(&word)
        || (language == Language::Cpp && CPP_EXTRA_KEYWORDS.contains(&word))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Directive {
    Pragma,
    Include,
    Other,
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b >= 0x80
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    language: Language,
    line_start: bool,
    directive: Option<Directive>,
    /// Set right after `#include` so that `<...>` lexes as one string.
    expect_header: bool,
    out: Vec<LexToken>,
}

/// Lexical tokens of `source`, excluding comments and whitespace.
///
/// Identifiers ending in `_<digits>` are split into stem, `_` and digits,
/// so `func_252` yields `func`, `_`, `252`.
pub fn lex(source: &str, language: Language) -> Vec<LexToken> {
    let mut lexer = Lexer {
        src: source,
        bytes: source.as_bytes(),
        pos: 0,
        language,
        line_start: true,
        directive: None,
        expect_header: false,
        out: Vec::new(),
    };
    lexer.run();
    lexer.out
}

/// Tokens joined by single spaces; the canonical form used for hashing.
pub fn normalized_text(source: &str, language: Language) -> String {
    let tokens = lex(source, language);
    let mut out = String::with_capacity(source.len());
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&t.text);
    }
    out
}

impl<'a> Lexer<'a> {
    fn peek(&self, offset: usize) -> u8 {
        self.bytes.get(self.pos + offset).copied().unwrap_or(0)
    }

    fn push(&mut self, text: String, category: TokenCategory, span: Range<usize>) {
        self.out.push(LexToken { text, category, span });
        self.line_start = false;
    }

    fn run(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.peek(0);
            match b {
                b'\n' => {
                    self.pos += 1;
                    self.end_line();
                }
                b'\\' if self.peek(1) == b'\n' => self.pos += 2,
                b'\\' if self.peek(1) == b'\r' && self.peek(2) == b'\n' => self.pos += 3,
                b' ' | b'\t' | b'\r' | 0x0b | 0x0c => self.pos += 1,
                b'/' if self.peek(1) == b'/' => {
                    while self.pos < self.bytes.len() && self.peek(0) != b'\n' {
                        self.pos += 1;
                    }
                }
                b'/' if self.peek(1) == b'*' => {
                    self.pos += 2;
                    while self.pos < self.bytes.len()
                        && !(self.peek(0) == b'*' && self.peek(1) == b'/')
                    {
                        self.pos += 1;
                    }
                    self.pos = (self.pos + 2).min(self.bytes.len());
                }
                b'#' if self.line_start => self.directive_start(),
                b'<' if self.expect_header => self.header_name(),
                b'"' => self.quoted(b'"', self.pos),
                b'\'' => self.quoted(b'\'', self.pos),
                b'0'..=b'9' => self.number(),
                b'.' if self.peek(1).is_ascii_digit() => self.number(),
                _ if is_word_byte(b) => self.word(),
                _ => self.punct(),
            }
        }
    }

    fn end_line(&mut self) {
        self.line_start = true;
        self.directive = None;
        self.expect_header = false;
    }

    fn directive_start(&mut self) {
        let start = self.pos;
        let mut p = self.pos + 1;
        while matches!(self.bytes.get(p), Some(b' ' | b'\t')) {
            p += 1;
        }
        let word_start = p;
        while p < self.bytes.len() && self.bytes[p].is_ascii_alphanumeric() | (self.bytes[p] == b'_') {
            p += 1;
        }
        if p == word_start {
            self.pos += 1;
            self.push("#".into(), TokenCategory::Punctuation, start..start + 1);
            return;
        }
        let word = &self.src[word_start..p];
        let (directive, category) = match word {
            "pragma" => (Directive::Pragma, TokenCategory::Pragma),
            "include" | "include_next" | "import" => (Directive::Include, TokenCategory::Keyword),
            _ => (Directive::Other, TokenCategory::Keyword),
        };
        self.pos = p;
        self.push(format!("#{word}"), category, start..p);
        self.directive = Some(directive);
        self.expect_header = directive == Directive::Include;
    }

    fn header_name(&mut self) {
        let start = self.pos;
        let mut p = self.pos + 1;
        while p < self.bytes.len() && self.bytes[p] != b'>' && self.bytes[p] != b'\n' {
            p += 1;
        }
        if p < self.bytes.len() && self.bytes[p] == b'>' {
            p += 1;
        }
        self.pos = p;
        self.expect_header = false;
        self.push(self.src[start..p].to_owned(), TokenCategory::String, start..p);
    }

    /// String or character literal starting at the quote at `self.pos`;
    /// `start` includes any encoding prefix.
    fn quoted(&mut self, quote: u8, start: usize) {
        let mut p = self.pos + 1;
        while p < self.bytes.len() {
            match self.bytes[p] {
                b'\\' => p += 2,
                b'\n' => break,
                c if c == quote => {
                    p += 1;
                    break;
                }
                _ => p += 1,
            }
        }
        let p = p.min(self.bytes.len());
        self.pos = p;
        self.expect_header = false;
        self.push(self.src[start..p].to_owned(), TokenCategory::String, start..p);
    }

    fn raw_string(&mut self, start: usize) {
        // self.pos is at the opening quote: R"delim( ... )delim"
        let open = self.pos + 1;
        let mut p = open;
        while p < self.bytes.len() && self.bytes[p] != b'(' && self.bytes[p] != b'\n' && p - open < 16 {
            p += 1;
        }
        if self.bytes.get(p) != Some(&b'(') {
            self.quoted(b'"', start);
            return;
        }
        let delim = &self.src[open..p];
        let closing = format!("){delim}\"");
        let end = self.src[p..]
            .find(&closing)
            .map(|i| p + i + closing.len())
            .unwrap_or(self.bytes.len());
        self.pos = end;
        self.push(self.src[start..end].to_owned(), TokenCategory::String, start..end);
    }

    fn number(&mut self) {
        let start = self.pos;
        let mut p = self.pos;
        while p < self.bytes.len() {
            let c = self.bytes[p];
            let part = c.is_ascii_alphanumeric()
                || c == b'_'
                || c == b'.'
                || ((c == b'+' || c == b'-') && matches!(self.bytes[p - 1], b'e' | b'E' | b'p' | b'P'))
                || (c == b'\''
                    && self.language == Language::Cpp
                    && self.bytes.get(p + 1).is_some_and(|n| n.is_ascii_alphanumeric()));
            if !part {
                break;
            }
            p += 1;
        }
        self.pos = p;
        self.push(self.src[start..p].to_owned(), TokenCategory::Number, start..p);
    }

    fn word(&mut self) {
        let start = self.pos;
        let mut p = self.pos;
        while p < self.bytes.len() && is_word_byte(self.bytes[p]) {
            p += 1;
        }
        let word = &self.src[start..p];
        let next = self.bytes.get(p).copied();
        let string_prefix = matches!(word, "L" | "u" | "U" | "u8");
        let raw_prefix = matches!(word, "R" | "LR" | "uR" | "UR" | "u8R");
        if next == Some(b'"') && raw_prefix {
            self.pos = p;
            self.raw_string(start);
            return;
        }
        if string_prefix && matches!(next, Some(b'"') | Some(b'\'')) {
            self.pos = p;
            self.quoted(next.unwrap(), start);
            return;
        }
        self.pos = p;
        let in_pragma = self.directive == Some(Directive::Pragma);
        let mut parts = Vec::new();
        split_identifier(word, start, &mut parts);
        for (text, span) in parts {
            let category = if text.bytes().all(|b| b.is_ascii_digit()) {
                TokenCategory::Number
            } else if in_pragma {
                TokenCategory::Pragma
            } else if is_keyword(text, self.language) {
                TokenCategory::Keyword
            } else {
                TokenCategory::Identifier
            };
            self.push(text.to_owned(), category, span);
        }
    }

    fn punct(&mut self) {
        let start = self.pos;
        let rest = &self.src[start..];
        for p in PUNCTUATORS {
            if rest.starts_with(p) {
                self.pos += p.len();
                self.push((*p).to_owned(), TokenCategory::Punctuation, start..self.pos);
                return;
            }
        }
        let ch = rest.chars().next().expect("non-empty remainder");
        self.pos += ch.len_utf8();
        self.push(ch.to_string(), TokenCategory::Other, start..self.pos);
    }
}

/// `a_1_2` -> `a`, `_`, `1`, `_`, `2`. Only trailing `_<digits>` groups split.
fn split_identifier<'w>(word: &'w str, offset: usize, out: &mut Vec<(&'w str, Range<usize>)>) {
    if let Some(us) = word.rfind('_') {
        let stem = &word[..us];
        let digits = &word[us + 1..];
        if !stem.is_empty() && !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            split_identifier(stem, offset, out);
            out.push(("_", offset + us..offset + us + 1));
            out.push((digits, offset + us + 1..offset + word.len()));
            return;
        }
    }
    out.push((word, offset..offset + word.len()));
}

/// Remove `//` and `/* */` comments, leaving string and character literals
/// intact. Block comments become a single space.
pub fn strip_comments(text: &str) -> String {
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    let mut copy_from = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'"' | b'\'' => {
                let quote = bytes[i];
                i += 1;
                while i < bytes.len() && bytes[i] != quote && bytes[i] != b'\n' {
                    i += if bytes[i] == b'\\' { 2 } else { 1 };
                }
                i = (i + 1).min(bytes.len());
            }
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                out.push_str(&text[copy_from..i]);
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                copy_from = i;
            }
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                out.push_str(&text[copy_from..i]);
                i += 2;
                while i < bytes.len() && !(bytes[i] == b'*' && bytes.get(i + 1) == Some(&b'/')) {
                    i += 1;
                }
                i = (i + 2).min(bytes.len());
                out.push(' ');
                copy_from = i;
            }
            _ => i += 1,
        }
    }
    out.push_str(&text[copy_from.min(text.len())..]);
    out
}
