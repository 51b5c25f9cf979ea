//! Tokenizer for the loop language. Comments (`#` to end of line) and blank
//! lines disappear here; everything else is split into simple tokens, one
//! logical line at a time.

use crate::error::FrontendError;
use crate::symbolic::{parse_rat, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Ident(String),
    Number(Rat),
    /// `:=`
    Init,
    /// `=`
    Assign,
    At,
    Semicolon,
    Colon,
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Caret,
    Less,
    Greater,
    While,
}

impl Token {
    /// Short description for error messages.
    pub fn describe(&self) -> String {
        match self {
            Token::Ident(name) => format!("identifier `{}`", name),
            Token::Number(value) => format!("number `{}`", value),
            Token::Init => "`:=`".to_string(),
            Token::Assign => "`=`".to_string(),
            Token::At => "`@`".to_string(),
            Token::Semicolon => "`;`".to_string(),
            Token::Colon => "`:`".to_string(),
            Token::LParen => "`(`".to_string(),
            Token::RParen => "`)`".to_string(),
            Token::Plus => "`+`".to_string(),
            Token::Minus => "`-`".to_string(),
            Token::Star => "`*`".to_string(),
            Token::Caret => "`^`".to_string(),
            Token::Less => "`<`".to_string(),
            Token::Greater => "`>`".to_string(),
            Token::While => "`while`".to_string(),
        }
    }
}

/// One non-empty source line with its 1-based line number.
#[derive(Debug, Clone)]
pub struct Line {
    pub number: usize,
    pub tokens: Vec<Token>,
}

/// Splits the source into token lines.
pub fn tokenize(source: &str) -> Result<Vec<Line>, FrontendError> {
    let mut lines = Vec::new();
    for (idx, raw) in source.lines().enumerate() {
        let number = idx + 1;
        let text = match raw.split_once('#') {
            Some((before, _)) => before,
            None => raw,
        };
        let tokens = tokenize_line(number, text)?;
        if !tokens.is_empty() {
            lines.push(Line { number, tokens });
        }
    }
    Ok(lines)
}

fn tokenize_line(number: usize, text: &str) -> Result<Vec<Token>, FrontendError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let b = bytes[pos];
        match b {
            b' ' | b'\t' | b'\r' => pos += 1,
            b'(' => {
                tokens.push(Token::LParen);
                pos += 1;
            }
            b')' => {
                tokens.push(Token::RParen);
                pos += 1;
            }
            b'+' => {
                tokens.push(Token::Plus);
                pos += 1;
            }
            b'-' => {
                tokens.push(Token::Minus);
                pos += 1;
            }
            b'*' => {
                tokens.push(Token::Star);
                pos += 1;
            }
            b'^' => {
                tokens.push(Token::Caret);
                pos += 1;
            }
            b'@' => {
                tokens.push(Token::At);
                pos += 1;
            }
            b';' => {
                tokens.push(Token::Semicolon);
                pos += 1;
            }
            b':' => {
                if bytes.get(pos + 1) == Some(&b'=') {
                    tokens.push(Token::Init);
                    pos += 2;
                } else {
                    tokens.push(Token::Colon);
                    pos += 1;
                }
            }
            b'=' => {
                if bytes.get(pos + 1) == Some(&b'=') {
                    return Err(FrontendError::syntax(
                        number,
                        "`==` is not supported; guards use a strict inequality (`<` or `>`)",
                    ));
                }
                tokens.push(Token::Assign);
                pos += 1;
            }
            b'<' | b'>' => {
                if bytes.get(pos + 1) == Some(&b'=') {
                    return Err(FrontendError::syntax(
                        number,
                        "guards must use a strict inequality (`<` or `>`)",
                    ));
                }
                tokens.push(if b == b'<' { Token::Less } else { Token::Greater });
                pos += 1;
            }
            b'/' => {
                return Err(FrontendError::syntax(
                    number,
                    "`/` is only allowed inside rational literals like `1/2`; \
                     write `(1/2)*x` instead of `x/2`",
                ));
            }
            b'0'..=b'9' => {
                let (token, next) = lex_number(number, bytes, pos)?;
                tokens.push(token);
                pos = next;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = pos;
                while pos < bytes.len()
                    && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_')
                {
                    pos += 1;
                }
                let word = &text[start..pos];
                if word == "while" {
                    tokens.push(Token::While);
                } else {
                    tokens.push(Token::Ident(word.to_string()));
                }
            }
            _ => {
                return Err(FrontendError::syntax(
                    number,
                    format!("unexpected character `{}`", text[pos..].chars().next().unwrap()),
                ));
            }
        }
    }
    Ok(tokens)
}

/// Lexes an unsigned numeric literal: `12`, `0.25`, or `3/4` (the fraction
/// slash must follow the digits immediately).
fn lex_number(number: usize, bytes: &[u8], start: usize) -> Result<(Token, usize), FrontendError> {
    let mut pos = start;
    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
        pos += 1;
    }
    let mut end = pos;
    if pos < bytes.len() && (bytes[pos] == b'.' || bytes[pos] == b'/') {
        let sep = bytes[pos];
        let mut frac = pos + 1;
        while frac < bytes.len() && bytes[frac].is_ascii_digit() {
            frac += 1;
        }
        if frac == pos + 1 {
            if sep == b'.' {
                return Err(FrontendError::syntax(number, "digits must follow a decimal point"));
            }
            // A bare slash after a number is division, which is unsupported.
            return Err(FrontendError::syntax(
                number,
                "`/` is only allowed inside rational literals like `1/2`",
            ));
        }
        end = frac;
    }
    let text = std::str::from_utf8(&bytes[start..end]).unwrap();
    match parse_rat(text) {
        Some(value) => Ok((Token::Number(value), end)),
        None => Err(FrontendError::syntax(number, format!("malformed number `{}`", text))),
    }
}
