use super::lexer::OPENMP_WORDS;
use super::printer::{Printer, TokenOpts};

/// OpenACC words accepted on a `#pragma acc` line besides the OpenMP ones.
const OPENACC_WORDS: &[&str] = &[
    "acc", "kernels", "gang", "worker", "vector", "seq", "present", "copy", "copyout", "create",
];

fn is_word(t: &str) -> bool {
    t.bytes()
        .next()
        .is_some_and(|b| b.is_ascii_alphabetic() || b == b'_' || b >= 0x80)
}

fn is_digits(t: &str) -> bool {
    !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit())
}

/// Rebuild compilable-looking source from a lexical token stream.
///
/// Inverse of the lexer's `name_<digits>` split; preprocessor directives are
/// put back on lines of their own. Layout follows the regeneration rules.
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let toks: Vec<String> = merge_identifier_splits(tokens);
    let mut printer = Printer::new();
    let mut braces: Vec<bool> = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let t = toks[i].as_str();
        if t.starts_with('#') && t.len() > 1 && t != "##" {
            let end = directive_end(&toks, i);
            let line = join_directive(&toks[i..end]);
            printer.directive(&line);
            i = end;
            continue;
        }
        let prev = if i > 0 { toks[i - 1].as_str() } else { "" };
        let inline_brace = match t {
            "{" => {
                let inline = matches!(prev, "=" | "," | "(" | "return")
                    || (prev == "{" && braces.last() == Some(&true));
                braces.push(inline);
                inline
            }
            "}" => braces.pop().unwrap_or(false),
            _ => false,
        };
        printer.token(t, TokenOpts { inline_brace, ..TokenOpts::default() });
        i += 1;
    }
    printer.finish()
}

fn merge_identifier_splits<S: AsRef<str>>(tokens: &[S]) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(tokens.len());
    // Whether the last output token is an identifier that may absorb `_<digits>`.
    let mut extendable = false;
    let mut i = 0;
    while i < tokens.len() {
        let t = tokens[i].as_ref();
        if t == "_" && extendable {
            if let Some(next) = tokens.get(i + 1).map(|s| s.as_ref()) {
                if is_digits(next) {
                    let last = out.last_mut().expect("extendable implies a previous token");
                    last.push('_');
                    last.push_str(next);
                    i += 2;
                    continue;
                }
            }
        }
        extendable = is_word(t);
        out.push(t.to_owned());
        i += 1;
    }
    out
}

/// Index one past the last token of the directive starting at `start`.
fn directive_end(toks: &[String], start: usize) -> usize {
    let head = toks[start].as_str();
    let mut i = start + 1;
    let n = toks.len();
    match head {
        "#endif" | "#else" => i,
        "#include" | "#include_next" | "#import" | "#ifdef" | "#ifndef" | "#undef" => (i + 1).min(n),
        "#pragma" => {
            let omp = toks.get(i).is_some_and(|t| t == "omp" || t == "acc");
            while i < n {
                let t = toks[i].as_str();
                let next = toks.get(i + 1).map(String::as_str);
                if t == "(" {
                    i = skip_group(toks, i);
                } else if t == "," || t == ":" {
                    i += 1;
                } else if is_word(t) {
                    if t == "for" && next == Some("(") {
                        break;
                    }
                    if omp {
                        if !OPENMP_WORDS.contains(&t) && !OPENACC_WORDS.contains(&t) {
                            break;
                        }
                    } else if super::is_keyword(t, super::Language::Cpp)
                        || matches!(next, Some("=" | "[" | "." | "->" | "++" | "--"))
                    {
                        break;
                    }
                    i += 1;
                } else if !omp && is_digits(t) {
                    i += 1;
                } else {
                    break;
                }
            }
            i
        }
        "#define" => {
            // Name, optional parameter list, then one replacement token or group.
            if let Some(end) = macro_params_end(&toks[start..]) {
                i = start + end;
            } else {
                i += 1;
            }
            match toks.get(i).map(String::as_str) {
                Some("(") => skip_group(toks, i),
                Some(_) => i + 1,
                None => n,
            }
        }
        _ => {
            // #if / #elif and unknown directives: a condition expression.
            while i < n {
                let t = toks[i].as_str();
                if t == "(" {
                    i = skip_group(toks, i);
                    continue;
                }
                let operand = is_word(t) || is_digits(t) || t.starts_with('\'');
                let prev_operand = i > start + 1 && {
                    let p = toks[i - 1].as_str();
                    is_word(p) || is_digits(p) || p == ")"
                };
                if matches!(t, "{" | "}" | ";") || t.starts_with('#') || (operand && prev_operand) {
                    break;
                }
                if is_word(t) && t != "defined" && super::is_keyword(t, super::Language::Cpp) {
                    break;
                }
                i += 1;
            }
            i
        }
    }
}

fn skip_group(toks: &[String], open: usize) -> usize {
    let mut depth = 0usize;
    let mut i = open;
    while i < toks.len() {
        match toks[i].as_str() {
            "(" => depth += 1,
            ")" => {
                depth -= 1;
                if depth == 0 {
                    return i + 1;
                }
            }
            _ => {}
        }
        i += 1;
    }
    i
}

fn join_directive(toks: &[String]) -> String {
    let params_end = macro_params_end(toks);
    let mut out = String::new();
    for (i, t) in toks.iter().enumerate() {
        if i > 0 {
            let p = toks[i - 1].as_str();
            let glue = match t.as_str() {
                ")" | "," | ":" => true,
                "(" if i == 2 && toks[0] == "#define" => params_end.is_some(),
                "(" => is_word(p) && i > 1,
                _ => p == "(" || p == ":",
            };
            if !glue {
                out.push(' ');
            }
        }
        out.push_str(t);
    }
    out
}

/// For `#define NAME ( ... )`, whether the parenthesised group looks like a
/// parameter list (identifiers, commas, `...`) rather than a value.
fn macro_params_end(toks: &[String]) -> Option<usize> {
    if toks.first().map(String::as_str) != Some("#define") || toks.get(2).map(String::as_str) != Some("(") {
        return None;
    }
    let mut i = 3;
    while i < toks.len() {
        match toks[i].as_str() {
            ")" => return Some(i + 1),
            "," | "..." => {}
            t if is_word(t) => {}
            _ => return None,
        }
        i += 1;
    }
    None
}
