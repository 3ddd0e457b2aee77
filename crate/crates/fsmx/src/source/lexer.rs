//! Tokenizer for the input subset, including the line-shape checks.

use super::SourceError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    StrLit(String),
    KwClass,
    KwImplements,
    KwNew,
    KwIf,
    KwElse,
    KwWhile,
    KwNull,
    Dot,
    Comma,
    Semi,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Assign,
    EqEq,
    Neq,
    AndAnd,
    OrOr,
    Bang,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: u32,
    pub col: u32,
}

/// Lexes the unit and validates the formatting assumptions the numbering
/// scheme relies on: at most one statement per line, and closing braces on
/// lines of their own (a trailing `else {` is allowed).
pub fn tokenize(text: &str) -> Result<Vec<Token>, SourceError> {
    let tokens = lex(text)?;
    validate_line_shape(&tokens)?;
    Ok(tokens)
}

fn lex(text: &str) -> Result<Vec<Token>, SourceError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line: u32 = 1;
    let mut col: u32 = 0;

    while let Some(ch) = chars.next() {
        col += 1;
        let (tline, tcol) = (line, col);
        let mut push = |kind: TokenKind| {
            tokens.push(Token {
                kind,
                line: tline,
                col: tcol,
            })
        };
        match ch {
            '\n' => {
                line += 1;
                col = 0;
            }
            c if c.is_whitespace() => {}
            '/' => {
                if chars.peek() == Some(&'/') {
                    while let Some(&c) = chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        chars.next();
                    }
                } else {
                    return Err(SourceError::Lex {
                        line,
                        col,
                        msg: "unexpected `/`".to_string(),
                    });
                }
            }
            '"' => {
                let mut s = String::new();
                let mut closed = false;
                for c in chars.by_ref() {
                    col += 1;
                    match c {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\n' => break,
                        c => s.push(c),
                    }
                }
                if !closed {
                    return Err(SourceError::Lex {
                        line,
                        col,
                        msg: "unterminated string literal".to_string(),
                    });
                }
                push(TokenKind::StrLit(s));
            }
            '.' => push(TokenKind::Dot),
            ',' => push(TokenKind::Comma),
            ';' => push(TokenKind::Semi),
            '(' => push(TokenKind::LParen),
            ')' => push(TokenKind::RParen),
            '{' => push(TokenKind::LBrace),
            '}' => push(TokenKind::RBrace),
            '<' => push(TokenKind::Lt),
            '>' => push(TokenKind::Gt),
            '=' => {
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    push(TokenKind::EqEq);
                } else {
                    push(TokenKind::Assign);
                }
            }
            '!' => {
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    push(TokenKind::Neq);
                } else {
                    push(TokenKind::Bang);
                }
            }
            '&' => {
                if chars.peek() == Some(&'&') {
                    chars.next();
                    col += 1;
                    push(TokenKind::AndAnd);
                } else {
                    return Err(SourceError::Lex {
                        line,
                        col,
                        msg: "expected `&&`".to_string(),
                    });
                }
            }
            '|' => {
                if chars.peek() == Some(&'|') {
                    chars.next();
                    col += 1;
                    push(TokenKind::OrOr);
                } else {
                    return Err(SourceError::Lex {
                        line,
                        col,
                        msg: "expected `||`".to_string(),
                    });
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::from(c);
                while let Some(&n) = chars.peek() {
                    if n.is_ascii_alphanumeric() || n == '_' {
                        word.push(n);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let kind = match word.as_str() {
                    "class" => TokenKind::KwClass,
                    "implements" => TokenKind::KwImplements,
                    "new" => TokenKind::KwNew,
                    "if" => TokenKind::KwIf,
                    "else" => TokenKind::KwElse,
                    "while" => TokenKind::KwWhile,
                    "null" => TokenKind::KwNull,
                    _ => TokenKind::Ident(word),
                };
                push(kind);
            }
            c => {
                return Err(SourceError::Lex {
                    line,
                    col,
                    msg: format!("unexpected character `{c}`"),
                });
            }
        }
    }
    Ok(tokens)
}

fn validate_line_shape(tokens: &[Token]) -> Result<(), SourceError> {
    let mut idx = 0;
    while idx < tokens.len() {
        let line = tokens[idx].line;
        let mut end = idx;
        while end < tokens.len() && tokens[end].line == line {
            end += 1;
        }
        let row = &tokens[idx..end];

        let semis = row
            .iter()
            .filter(|t| t.kind == TokenKind::Semi)
            .count();
        if semis > 1 {
            return Err(SourceError::Format {
                line,
                msg: "multiple statements on one line".to_string(),
            });
        }
        if row.iter().any(|t| t.kind == TokenKind::RBrace) {
            let shape: Vec<&TokenKind> = row.iter().map(|t| &t.kind).collect();
            let plain = shape == [&TokenKind::RBrace];
            let with_else =
                shape == [&TokenKind::RBrace, &TokenKind::KwElse, &TokenKind::LBrace];
            if !plain && !with_else {
                return Err(SourceError::Format {
                    line,
                    msg: "closing brace must be on a line of its own".to_string(),
                });
            }
        }
        idx = end;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_line_tokenizes() {
        let toks = tokenize("if (idMain != idOpt) {").unwrap();
        let kinds: Vec<TokenKind> = toks.into_iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::KwIf,
                TokenKind::LParen,
                TokenKind::Ident("idMain".into()),
                TokenKind::Neq,
                TokenKind::Ident("idOpt".into()),
                TokenKind::RParen,
                TokenKind::LBrace,
            ]
        );
    }

    #[test]
    fn two_statements_on_a_line_are_rejected() {
        let err = tokenize("idSet.add(id); idSet.clear();").unwrap_err();
        assert!(matches!(err, SourceError::Format { line: 1, .. }));
    }

    #[test]
    fn brace_sharing_a_line_with_an_operator_is_rejected() {
        let err = tokenize("idSet.add(id); }").unwrap_err();
        assert!(matches!(err, SourceError::Format { .. }));
    }

    #[test]
    fn brace_else_brace_line_is_fine() {
        assert!(tokenize("} else {").is_ok());
    }

    #[test]
    fn comments_and_strings() {
        let toks = tokenize("idSet.add(\"LK32EJ2\"); // main id\n").unwrap();
        assert!(toks
            .iter()
            .any(|t| t.kind == TokenKind::StrLit("LK32EJ2".into())));
        assert_eq!(toks.last().unwrap().kind, TokenKind::Semi);
    }

    #[test]
    fn stray_character_is_a_lex_error() {
        let err = tokenize("int x = 3 % 2;").unwrap_err();
        assert!(matches!(err, SourceError::Lex { .. }));
    }
}
