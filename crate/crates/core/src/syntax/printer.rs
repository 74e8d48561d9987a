//! Canonical layout: one space between tokens, a newline after `;`, `{` and
//! `}`, directives on their own lines. A handful of glue rules (calls,
//! subscripts, member access, separators) never merge two tokens into one.

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Gap {
    None,
    Space,
    Newline,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Class {
    Word,
    Number,
    Other,
}

fn classify(text: &str) -> Class {
    match text.bytes().next() {
        Some(b) if b.is_ascii_digit() => Class::Number,
        Some(b) if b.is_ascii_alphabetic() || b == b'_' || b >= 0x80 => Class::Word,
        _ => Class::Other,
    }
}

/// Keywords that take a parenthesised header and keep a space before it.
const CONTROL_WORDS: &[&str] = &[
    "if", "for", "while", "switch", "return", "catch", "else", "do", "case", "throw", "co_return",
];

#[derive(Default, Clone, Copy)]
pub(crate) struct TokenOpts {
    /// Brace of an initializer or enumerator list: laid out inline.
    pub inline_brace: bool,
    /// Token touched the previous one in the original source.
    pub adjacent: bool,
    /// `<` or `>` delimiting template parameters or arguments.
    pub angle: bool,
}

pub(crate) struct Printer {
    out: String,
    pending: Gap,
    paren_depth: usize,
    prev: Option<(Class, String)>,
    after_angle_open: bool,
}

impl Printer {
    pub fn new() -> Self {
        Printer {
            out: String::new(),
            pending: Gap::None,
            paren_depth: 0,
            prev: None,
            after_angle_open: false,
        }
    }

    fn at_line_start(&self) -> bool {
        self.out.is_empty() || self.out.ends_with('\n')
    }

    fn glue(&self, text: &str, class: Class, opts: &TokenOpts) -> bool {
        let Some((prev_class, prev)) = &self.prev else {
            return true;
        };
        let prev = prev.as_str();
        if opts.angle {
            return text == "<" || prev != ">" || opts.adjacent;
        }
        if self.after_angle_open {
            return true;
        }
        let callee = (*prev_class == Class::Word && !CONTROL_WORDS.contains(&prev))
            || prev == ")"
            || prev == "]";
        match text {
            ")" | "]" | ";" | "," => return true,
            "(" | "[" if callee => return true,
            "." | "->" if callee => return true,
            "::" if *prev_class == Class::Word || prev == ">" => return true,
            ">" if prev == ">" && opts.adjacent => return true,
            _ => {}
        }
        match prev {
            "(" | "[" => true,
            "." | "->" | "::" => class == Class::Word,
            _ => false,
        }
    }

    pub fn token(&mut self, text: &str, opts: TokenOpts) {
        if text.is_empty() {
            return;
        }
        let class = classify(text);
        let block_brace = (text == "{" || text == "}") && !opts.inline_brace;
        if text == "}" && block_brace {
            self.pending = Gap::Newline;
        }
        if !self.at_line_start() {
            match self.pending {
                Gap::Newline => self.out.push('\n'),
                _ if self.glue(text, class, &opts) => {}
                _ => self.out.push(' '),
            }
        }
        self.out.push_str(text);
        match text {
            "(" => self.paren_depth += 1,
            ")" => self.paren_depth = self.paren_depth.saturating_sub(1),
            _ => {}
        }
        self.pending = match text {
            ";" if self.paren_depth == 0 => Gap::Newline,
            "{" | "}" if block_brace => Gap::Newline,
            _ => Gap::Space,
        };
        self.prev = Some((class, text.to_owned()));
        self.after_angle_open = opts.angle && text == "<";
    }

    /// A whole preprocessor line, kept on a line of its own.
    pub fn directive(&mut self, text: &str) {
        let text = text.trim();
        if text.is_empty() {
            return;
        }
        if !self.at_line_start() {
            self.out.push('\n');
        }
        self.out.push_str(text);
        self.out.push('\n');
        self.pending = Gap::Newline;
        self.prev = None;
        self.after_angle_open = false;
    }

    pub fn finish(self) -> String {
        let mut out = self.out;
        while out.ends_with('\n') || out.ends_with(' ') {
            out.pop();
        }
        out
    }
}
