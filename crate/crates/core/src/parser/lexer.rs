use crate::ast::{BinOp, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    /// Unsigned magnitude; sign is handled by the parser so `i64::MIN` fits.
    Int(u64),
    Colon,
    Comma,
    Dot,
    Assign,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Op(BinOp),
    Newline,
    Eof,
    Error(String),
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

/// Split source into tokens. Newlines are significant and kept; `//`
/// comments and `\r` are dropped. Lexing never fails: bad input becomes
/// [`Tok::Error`] tokens that the parser turns into diagnostics.
pub(crate) fn tokenize(source: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut last_line = 1;
    let mut last_col = 1;
    for (idx, line) in source.split('\n').enumerate() {
        let line_no = idx + 1;
        let chars: Vec<char> = line.chars().collect();
        lex_line(&chars, line_no, &mut out);
        last_line = line_no;
        last_col = chars.len() + 1;
        out.push(Token {
            tok: Tok::Newline,
            span: Span::new(line_no, chars.len() + 1, chars.len() + 1),
        });
    }
    out.pop();
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(last_line, last_col, last_col),
    });
    out
}

fn lex_line(chars: &[char], line: usize, out: &mut Vec<Token>) {
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i + 1;
        let single = |tok: Tok| Token {
            tok,
            span: Span::new(line, start, start),
        };
        match c {
            ' ' | '\t' | '\r' | '\u{feff}' => {
                i += 1;
            }
            '/' if chars.get(i + 1) == Some(&'/') => break,
            ':' => {
                out.push(single(Tok::Colon));
                i += 1;
            }
            ',' => {
                out.push(single(Tok::Comma));
                i += 1;
            }
            '.' => {
                out.push(single(Tok::Dot));
                i += 1;
            }
            '(' => {
                out.push(single(Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push(single(Tok::RParen));
                i += 1;
            }
            '{' => {
                out.push(single(Tok::LBrace));
                i += 1;
            }
            '}' => {
                out.push(single(Tok::RBrace));
                i += 1;
            }
            '+' => {
                out.push(single(Tok::Op(BinOp::Add)));
                i += 1;
            }
            '-' => {
                out.push(single(Tok::Op(BinOp::Sub)));
                i += 1;
            }
            '*' => {
                out.push(single(Tok::Op(BinOp::Mul)));
                i += 1;
            }
            '/' => {
                out.push(single(Tok::Op(BinOp::Div)));
                i += 1;
            }
            '=' | '!' | '<' | '>' => {
                let next_eq = chars.get(i + 1) == Some(&'=');
                let (tok, width) = match (c, next_eq) {
                    ('=', true) => (Tok::Op(BinOp::Eq), 2),
                    ('=', false) => (Tok::Assign, 1),
                    ('!', true) => (Tok::Op(BinOp::Ne), 2),
                    ('!', false) => (Tok::Error("unexpected character '!'".into()), 1),
                    ('<', true) => (Tok::Op(BinOp::Le), 2),
                    ('<', false) => (Tok::Op(BinOp::Lt), 1),
                    ('>', true) => (Tok::Op(BinOp::Ge), 2),
                    (_, _) => (Tok::Op(BinOp::Gt), 1),
                };
                out.push(Token {
                    tok,
                    span: Span::new(line, start, start + width - 1),
                });
                i += width;
            }
            '"' | '\'' => {
                let (tok, end) = lex_string(chars, i);
                out.push(Token {
                    tok,
                    span: Span::new(line, start, end),
                });
                i = end;
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                let tok = match text.parse::<u64>() {
                    Ok(n) => Tok::Int(n),
                    Err(_) => Tok::Error(format!("integer literal {text} out of range")),
                };
                out.push(Token {
                    tok,
                    span: Span::new(line, start, j),
                });
                i = j;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(chars[i..j].iter().collect()),
                    span: Span::new(line, start, j),
                });
                i = j;
            }
            other => {
                out.push(single(Tok::Error(format!("unexpected character {other:?}"))));
                i += 1;
            }
        }
    }
}

/// Lex a quoted string starting at `chars[start]`; returns the token and the
/// index one past the closing quote (or the line end).
fn lex_string(chars: &[char], start: usize) -> (Tok, usize) {
    let quote = chars[start];
    let mut value = String::new();
    let mut i = start + 1;
    while i < chars.len() {
        match chars[i] {
            c if c == quote => return (Tok::Str(value), i + 1),
            '\\' => {
                let Some(&esc) = chars.get(i + 1) else {
                    break;
                };
                match esc {
                    'n' => value.push('\n'),
                    't' => value.push('\t'),
                    '\\' | '"' | '\'' => value.push(esc),
                    other => {
                        return (
                            Tok::Error(format!("unknown escape sequence \\{other}")),
                            (i + 2).min(chars.len()),
                        )
                    }
                }
                i += 2;
            }
            c => {
                value.push(c);
                i += 1;
            }
        }
    }
    (Tok::Error("unterminated string literal".into()), chars.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        tokenize(src).into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn both_quote_styles() {
        assert_eq!(
            kinds("'su' \"root\""),
            vec![Tok::Str("su".into()), Tok::Str("root".into()), Tok::Eof]
        );
    }

    #[test]
    fn comments_and_crlf() {
        assert_eq!(
            kinds("a // note\r\nb"),
            vec![
                Tok::Ident("a".into()),
                Tok::Newline,
                Tok::Ident("b".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn operators() {
        assert_eq!(
            kinds("a==b!=c<=d>=e<f>g=h"),
            vec![
                Tok::Ident("a".into()),
                Tok::Op(BinOp::Eq),
                Tok::Ident("b".into()),
                Tok::Op(BinOp::Ne),
                Tok::Ident("c".into()),
                Tok::Op(BinOp::Le),
                Tok::Ident("d".into()),
                Tok::Op(BinOp::Ge),
                Tok::Ident("e".into()),
                Tok::Op(BinOp::Lt),
                Tok::Ident("f".into()),
                Tok::Op(BinOp::Gt),
                Tok::Ident("g".into()),
                Tok::Assign,
                Tok::Ident("h".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn spans_are_one_based_columns() {
        let toks = tokenize("  get_con: x");
        assert_eq!(toks[0].span, Span::new(1, 3, 9));
        assert_eq!(toks[1].span, Span::new(1, 10, 10));
        assert_eq!(toks[2].span, Span::new(1, 12, 12));
    }

    #[test]
    fn unterminated_string_is_an_error_token() {
        assert!(matches!(kinds("'abc")[0], Tok::Error(_)));
    }
}
