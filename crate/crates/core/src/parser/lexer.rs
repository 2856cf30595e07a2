use std::ops::Range;

use super::diagnostic::Diagnostic;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    Bang,
    Query,
    Dot,
    Bar,
    Star,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Semi,
    Eq,
    Plus,
    Tick,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Bang => "!",
            Tok::Query => "?",
            Tok::Dot => ".",
            Tok::Bar => "|",
            Tok::Star => "*",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::Eq => "=",
            Tok::Plus => "+",
            Tok::Tick => "`",
            Tok::Ident(_) | Tok::Int(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Range<usize>,
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Splits the source into tokens. The final token is always `Eof`, whose
/// span covers the last byte (or is `0..0` for empty input).
pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == '-' {
            chars.next();
            if let Some(&(_, '-')) = chars.peek() {
                while let Some(&(_, c)) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
                continue;
            }
            return Err(Diagnostic::error(
                "E-SYNTAX",
                i..i + 1,
                "unexpected `-` (comments start with `--`)",
            ));
        }
        if is_ident_start(c) {
            let mut end = i;
            while let Some(&(j, c)) = chars.peek() {
                if !is_ident_continue(c) {
                    break;
                }
                end = j + c.len_utf8();
                chars.next();
            }
            out.push(Token {
                tok: Tok::Ident(src[i..end].to_string()),
                span: i..end,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut end = i;
            while let Some(&(j, c)) = chars.peek() {
                if !c.is_ascii_digit() {
                    break;
                }
                end = j + 1;
                chars.next();
            }
            let n = src[i..end].parse::<u64>().map_err(|_| {
                Diagnostic::error("E-SYNTAX", i..end, "integer literal out of range")
            })?;
            out.push(Token {
                tok: Tok::Int(n),
                span: i..end,
            });
            continue;
        }
        let tok = match c {
            '!' => Tok::Bang,
            '?' => Tok::Query,
            '.' => Tok::Dot,
            '|' => Tok::Bar,
            '*' => Tok::Star,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            ';' => Tok::Semi,
            '=' => Tok::Eq,
            '+' => Tok::Plus,
            '`' => Tok::Tick,
            other => {
                return Err(Diagnostic::error(
                    "E-SYNTAX",
                    i..i + other.len_utf8(),
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        chars.next();
        out.push(Token {
            tok,
            span: i..i + c.len_utf8(),
        });
    }
    let eof = if src.is_empty() {
        0..0
    } else {
        let last = src.char_indices().last().map(|(i, _)| i).unwrap_or(0);
        last..src.len()
    };
    out.push(Token {
        tok: Tok::Eof,
        span: eof,
    });
    Ok(out)
}
