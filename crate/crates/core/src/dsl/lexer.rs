//! Hand-rolled lexer for the generative-model language. C-like surface
//! syntax: identifiers, numeric/string/bool literals, the usual operator
//! set, and `//` / `/* */` comments.

use super::ast::Span;
use super::SyntaxError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Real(f64),
    Str(String),
    KwIf,
    KwElse,
    KwWhile,
    KwTrue,
    KwFalse,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Semi,
    Comma,
    Dot,
    Question,
    Colon,
    Assign,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Not,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Real(v) => format!("real `{v}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::KwIf => "`if`".into(),
            Tok::KwElse => "`else`".into(),
            Tok::KwWhile => "`while`".into(),
            Tok::KwTrue => "`true`".into(),
            Tok::KwFalse => "`false`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Question => "`?`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Assign => "`=`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::NotEq => "`!=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::AndAnd => "`&&`".into(),
            Tok::OrOr => "`||`".into(),
            Tok::Not => "`!`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Percent => "`%`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpannedTok {
    pub tok: Tok,
    pub span: Span,
}

pub fn lex(source: &str) -> Result<Vec<SpannedTok>, SyntaxError> {
    let mut out = Vec::new();
    let bytes = source.as_bytes();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! push {
        ($tok:expr, $span:expr) => {
            out.push(SpannedTok {
                tok: $tok,
                span: $span,
            })
        };
    }

    while i < bytes.len() {
        let c = bytes[i] as char;
        let span = Span::new(line, col);
        match c {
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            '/' if i + 1 < bytes.len() && bytes[i + 1] == b'/' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            '/' if i + 1 < bytes.len() && bytes[i + 1] == b'*' => {
                i += 2;
                col += 2;
                let mut closed = false;
                while i + 1 < bytes.len() {
                    if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                        i += 2;
                        col += 2;
                        closed = true;
                        break;
                    }
                    if bytes[i] == b'\n' {
                        line += 1;
                        col = 1;
                    } else {
                        col += 1;
                    }
                    i += 1;
                }
                if !closed {
                    return Err(SyntaxError::new(span, "unterminated block comment", &[]));
                }
            }
            '"' => {
                i += 1;
                col += 1;
                let mut s = String::new();
                loop {
                    if i >= bytes.len() {
                        return Err(SyntaxError::new(span, "unterminated string literal", &[]));
                    }
                    match bytes[i] as char {
                        '"' => {
                            i += 1;
                            col += 1;
                            break;
                        }
                        '\\' => {
                            if i + 1 >= bytes.len() {
                                return Err(SyntaxError::new(
                                    span,
                                    "unterminated string escape",
                                    &[],
                                ));
                            }
                            let esc = bytes[i + 1] as char;
                            s.push(match esc {
                                'n' => '\n',
                                't' => '\t',
                                '\\' => '\\',
                                '"' => '"',
                                other => {
                                    return Err(SyntaxError::new(
                                        Span::new(line, col),
                                        format!("unknown escape `\\{other}`"),
                                        &[],
                                    ))
                                }
                            });
                            i += 2;
                            col += 2;
                        }
                        '\n' => {
                            return Err(SyntaxError::new(span, "unterminated string literal", &[]))
                        }
                        ch => {
                            s.push(ch);
                            i += ch.len_utf8();
                            col += 1;
                        }
                    }
                }
                push!(Tok::Str(s), span);
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                let mut is_real = false;
                if i < bytes.len()
                    && bytes[i] == b'.'
                    && i + 1 < bytes.len()
                    && (bytes[i + 1] as char).is_ascii_digit()
                {
                    is_real = true;
                    i += 1;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        is_real = true;
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &source[start..i];
                col += (i - start) as u32;
                if is_real {
                    let v: f64 = text.parse().map_err(|_| {
                        SyntaxError::new(span, format!("bad real literal `{text}`"), &[])
                    })?;
                    push!(Tok::Real(v), span);
                } else {
                    let v: i64 = text.parse().map_err(|_| {
                        SyntaxError::new(span, format!("integer literal `{text}` out of range"), &[])
                    })?;
                    push!(Tok::Int(v), span);
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() {
                    let ch = bytes[i] as char;
                    if ch.is_ascii_alphanumeric() || ch == '_' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let text = &source[start..i];
                col += (i - start) as u32;
                let tok = match text {
                    "if" => Tok::KwIf,
                    "else" => Tok::KwElse,
                    "while" => Tok::KwWhile,
                    "true" => Tok::KwTrue,
                    "false" => Tok::KwFalse,
                    other => Tok::Ident(other.to_string()),
                };
                push!(tok, span);
            }
            _ => {
                let two = if i + 1 < bytes.len() {
                    &source[i..i + 2]
                } else {
                    ""
                };
                let (tok, len) = match two {
                    "==" => (Tok::EqEq, 2),
                    "!=" => (Tok::NotEq, 2),
                    "<=" => (Tok::Le, 2),
                    ">=" => (Tok::Ge, 2),
                    "&&" => (Tok::AndAnd, 2),
                    "||" => (Tok::OrOr, 2),
                    _ => match c {
                        '(' => (Tok::LParen, 1),
                        ')' => (Tok::RParen, 1),
                        '[' => (Tok::LBracket, 1),
                        ']' => (Tok::RBracket, 1),
                        '{' => (Tok::LBrace, 1),
                        '}' => (Tok::RBrace, 1),
                        ';' => (Tok::Semi, 1),
                        ',' => (Tok::Comma, 1),
                        '.' => (Tok::Dot, 1),
                        '?' => (Tok::Question, 1),
                        ':' => (Tok::Colon, 1),
                        '=' => (Tok::Assign, 1),
                        '<' => (Tok::Lt, 1),
                        '>' => (Tok::Gt, 1),
                        '!' => (Tok::Not, 1),
                        '+' => (Tok::Plus, 1),
                        '-' => (Tok::Minus, 1),
                        '*' => (Tok::Star, 1),
                        '/' => (Tok::Slash, 1),
                        '%' => (Tok::Percent, 1),
                        other => {
                            return Err(SyntaxError::new(
                                span,
                                format!("unexpected character `{other}`"),
                                &[],
                            ))
                        }
                    },
                };
                i += len;
                col += len as u32;
                push!(tok, span);
            }
        }
    }
    out.push(SpannedTok {
        tok: Tok::Eof,
        span: Span::new(line, col),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn lexes_listing_style_line() {
        let toks = kinds("__meetPrecondition= oDesiredLocation.discrete != state.robotLocation.discrete;");
        assert_eq!(toks[0], Tok::Ident("__meetPrecondition".into()));
        assert_eq!(toks[1], Tok::Assign);
        assert!(toks.contains(&Tok::NotEq));
        assert_eq!(toks.last(), Some(&Tok::Eof));
    }

    #[test]
    fn numbers_and_spans() {
        let toks = lex("x = 2.0 + 7 - 1e3;").unwrap();
        assert_eq!(toks[2].tok, Tok::Real(2.0));
        assert_eq!(toks[4].tok, Tok::Int(7));
        assert_eq!(toks[6].tok, Tok::Real(1000.0));
        assert_eq!(toks[0].span, Span::new(1, 1));
        assert_eq!(toks[2].span, Span::new(1, 5));
    }

    #[test]
    fn comments_are_skipped() {
        let toks = kinds("a = 1; // trailing\n/* block\ncomment */ b = 2;");
        let idents: Vec<_> = toks
            .iter()
            .filter_map(|t| match t {
                Tok::Ident(s) => Some(s.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(idents, vec!["a", "b"]);
    }

    #[test]
    fn string_escapes() {
        let toks = kinds(r#"s = "a\"b\n";"#);
        assert_eq!(toks[2], Tok::Str("a\"b\n".into()));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(lex("a = @;").is_err());
        assert!(lex("s = \"open").is_err());
    }
}
