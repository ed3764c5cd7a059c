use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(u64),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
    Pipe,
    Semi,
    Le,
    Ge,
    Eq,
    Ne,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Ne => "`!=`".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub offset: usize,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            b'|' => Some(Tok::Pipe),
            b';' => Some(Tok::Semi),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, offset: start });
            i += 1;
            continue;
        }
        match c {
            b'<' | b'>' | b'!' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    let tok = match c {
                        b'<' => Tok::Le,
                        b'>' => Tok::Ge,
                        _ => Tok::Ne,
                    };
                    out.push(Token { tok, offset: start });
                    i += 2;
                } else {
                    return Err(ParseError::UnexpectedChar {
                        ch: c as char,
                        offset: start,
                    });
                }
            }
            b'=' => {
                // accept both `=` and `==`
                i += if bytes.get(i + 1) == Some(&b'=') { 2 } else { 1 };
                out.push(Token {
                    tok: Tok::Eq,
                    offset: start,
                });
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let text = &src[start..i];
                let n = text
                    .parse::<u64>()
                    .map_err(|_| ParseError::IntegerOverflow { offset: start })?;
                out.push(Token {
                    tok: Tok::Int(n),
                    offset: start,
                });
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(src[start..i].to_string()),
                    offset: start,
                });
            }
            _ => {
                // multi-byte relation symbols
                let rest = &src[i..];
                let (tok, len) = if rest.starts_with('≤') {
                    (Tok::Le, '≤'.len_utf8())
                } else if rest.starts_with('≥') {
                    (Tok::Ge, '≥'.len_utf8())
                } else if rest.starts_with('≠') {
                    (Tok::Ne, '≠'.len_utf8())
                } else {
                    let ch = rest.chars().next().unwrap_or('?');
                    return Err(ParseError::UnexpectedChar { ch, offset: start });
                };
                out.push(Token { tok, offset: start });
                i += len;
            }
        }
    }
    Ok(out)
}
