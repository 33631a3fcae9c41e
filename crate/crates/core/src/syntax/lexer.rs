//! Whitespace-driven tokenizer for module files and terms.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tok {
    pub text: String,
    pub line: usize,
    pub col: usize,
}

fn is_special(c: char) -> bool {
    matches!(c, '(' | ')' | ',' | '[' | ']' | '{' | '}')
}

/// Splits text into tokens; `---` and `***` start comments running to end of line.
pub fn lex(src: &str) -> Vec<Tok> {
    let mut out = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let mut cur = String::new();
        let mut start = 0;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let at_word_start = cur.is_empty();
            if at_word_start && (starts_with(&chars, i, "---") || starts_with(&chars, i, "***")) {
                break;
            }
            if c.is_whitespace() {
                flush(&mut cur, ln, start, &mut out);
            } else if is_special(c) {
                flush(&mut cur, ln, start, &mut out);
                out.push(Tok { text: c.to_string(), line: ln + 1, col: i + 1 });
            } else {
                if cur.is_empty() {
                    start = i;
                }
                cur.push(c);
            }
            i += 1;
        }
        flush(&mut cur, ln, start, &mut out);
    }
    out
}

fn starts_with(chars: &[char], i: usize, pat: &str) -> bool {
    let p: Vec<char> = pat.chars().collect();
    chars.len() >= i + p.len() && chars[i..i + p.len()] == p[..]
}

fn flush(cur: &mut String, ln: usize, start: usize, out: &mut Vec<Tok>) {
    if !cur.is_empty() {
        out.push(Tok { text: std::mem::take(cur), line: ln + 1, col: start + 1 });
    }
}

/// Tokens of a name fragment, as used inside mixfix templates.
pub fn lex_fragment(s: &str) -> Vec<String> {
    lex(s).into_iter().map(|t| t.text).collect()
}

pub const KEYWORDS: &[&str] = &[
    "fmod", "endfm", "sort", "sorts", "subsort", "subsorts", "op", "ops", "var", "vars", "eq", "ceq", "cq", "mb", "cmb",
    "protecting", "pr", "including", "inc", "extending", "ex",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}
