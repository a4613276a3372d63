use std::fmt;

use super::{Diagnostic, Span};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Number(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Wedge,
    At,
    DotDot,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(v) => write!(f, "number {v}"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::LBracket => f.write_str("'['"),
            Tok::RBracket => f.write_str("']'"),
            Tok::Comma => f.write_str("','"),
            Tok::Semi => f.write_str("';'"),
            Tok::Colon => f.write_str("':'"),
            Tok::Eq => f.write_str("'='"),
            Tok::Plus => f.write_str("'+'"),
            Tok::Minus => f.write_str("'-'"),
            Tok::Star => f.write_str("'*'"),
            Tok::Slash => f.write_str("'/'"),
            Tok::Caret => f.write_str("'^'"),
            Tok::Wedge => f.write_str("'^w'"),
            Tok::At => f.write_str("'@'"),
            Tok::DotDot => f.write_str("'..'"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Splits `src` into tokens; `#` starts a comment running to the end of the line.
pub fn lex(src: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut errors = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 0usize);
    while i < chars.len() {
        let c = chars[i];
        let span = Span::new(line, col);
        let single = |t: Tok| Some((t, 1));
        let lexed: Option<(Tok, usize)> = match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 0;
                continue;
            }
            c if c.is_whitespace() => None,
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => single(Tok::LParen),
            ')' => single(Tok::RParen),
            '[' => single(Tok::LBracket),
            ']' => single(Tok::RBracket),
            ',' => single(Tok::Comma),
            ';' => single(Tok::Semi),
            ':' => single(Tok::Colon),
            '=' => single(Tok::Eq),
            '+' => single(Tok::Plus),
            '-' | '−' => single(Tok::Minus),
            '*' => single(Tok::Star),
            '/' => single(Tok::Slash),
            '@' => single(Tok::At),
            '^' => {
                if chars.get(i + 1) == Some(&'w') {
                    Some((Tok::Wedge, 2))
                } else {
                    single(Tok::Caret)
                }
            }
            '.' if chars.get(i + 1) == Some(&'.') => Some((Tok::DotDot, 2)),
            c if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let start = i;
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j < chars.len() && chars[j] == '.' && chars.get(j + 1) != Some(&'.') {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let text: String = chars[start..j].iter().collect();
                match text.parse::<f64>() {
                    Ok(v) => Some((Tok::Number(v), j - start)),
                    Err(_) => {
                        errors.push(Diagnostic::error(span, format!("malformed number `{text}`")));
                        Some((Tok::Number(0.0), j - start))
                    }
                }
            }
            c if is_ident_start(c) => {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                Some((Tok::Ident(chars[i..j].iter().collect()), j - i))
            }
            other => {
                errors.push(Diagnostic::error(span, format!("unexpected character '{other}'")));
                None
            }
        };
        match lexed {
            Some((tok, len)) => {
                out.push(Token { tok, span });
                i += len;
                col += len;
            }
            None => {
                i += 1;
                col += 1;
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(line, col),
    });
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn ranges_and_wedge() {
        assert_eq!(
            toks("-2..2.5 dx^wdy x^2 x^w"),
            vec![
                Tok::Minus,
                Tok::Number(2.0),
                Tok::DotDot,
                Tok::Number(2.5),
                Tok::Ident("dx".into()),
                Tok::Wedge,
                Tok::Ident("dy".into()),
                Tok::Ident("x".into()),
                Tok::Caret,
                Tok::Number(2.0),
                Tok::Ident("x".into()),
                Tok::Wedge,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn exponents_and_comments() {
        assert_eq!(toks("1e-9 # tail\n3"), vec![Tok::Number(1e-9), Tok::Number(3.0), Tok::Eof]);
        let t = lex("a\n  b").unwrap();
        assert_eq!(t[1].span, Span::new(2, 2));
    }

    #[test]
    fn bad_character() {
        let e = lex("field f = 2 $ 3").unwrap_err();
        assert_eq!(e[0].span, Span::new(1, 12));
    }
}
