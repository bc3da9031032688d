//! Tokenizer for the declaration format.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(String),
    Str(String),
    Punct(char),
    Arrow,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Punct(c) => write!(f, "`{c}`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

/// Token with its 1-based source position.
#[derive(Clone, Debug)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// A character that does not start any token.
#[derive(Clone, Debug)]
pub struct LexError {
    pub line: usize,
    pub col: usize,
    pub found: String,
}

const PUNCT: &str = "[](){},;:=+-*/^.";

pub fn tokenize(text: &str, line0: usize, col0: usize) -> Result<Vec<Spanned>, LexError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut line, mut col) = (line0, col0);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let push = |out: &mut Vec<Spanned>, tok| {
            out.push(Spanned {
                tok,
                line: start.0,
                col: start.1,
            })
        };
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
        } else if c.is_whitespace() {
            col += 1;
            i += 1;
        } else if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c.is_ascii_digit() {
            let j = (i..chars.len()).find(|&j| !chars[j].is_ascii_digit()).unwrap_or(chars.len());
            push(&mut out, Tok::Int(chars[i..j].iter().collect()));
            col += j - i;
            i = j;
        } else if c.is_alphabetic() || c == '_' {
            let j = (i..chars.len())
                .find(|&j| !(chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\''))
                .unwrap_or(chars.len());
            push(&mut out, Tok::Ident(chars[i..j].iter().collect()));
            col += j - i;
            i = j;
        } else if c == '"' {
            let Some(len) = chars[i + 1..].iter().position(|&d| d == '"' || d == '\n') else {
                return Err(LexError { line, col, found: "unterminated string".into() });
            };
            if chars[i + 1 + len] == '\n' {
                return Err(LexError { line, col, found: "unterminated string".into() });
            }
            push(&mut out, Tok::Str(chars[i + 1..i + 1 + len].iter().collect()));
            col += len + 2;
            i += len + 2;
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            push(&mut out, Tok::Arrow);
            col += 2;
            i += 2;
        } else if c == '\u{2212}' {
            // Unicode minus sign.
            push(&mut out, Tok::Punct('-'));
            col += 1;
            i += 1;
        } else if PUNCT.contains(c) {
            push(&mut out, Tok::Punct(c));
            col += 1;
            i += 1;
        } else {
            return Err(LexError { line, col, found: format!("`{c}`") });
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}
