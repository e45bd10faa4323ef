use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Cons,
    AddB,
    Arrow,
    LParen,
    RParen,
    Colon,
    Backslash,
    Dot,
    Plus,
    Star,
    Comma,
    Eq,
}

#[derive(Clone, Debug)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub col: usize,
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Strips a `#` comment.
pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

pub(crate) fn lex_line(text: &str, line: usize) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = strip_comment(text).chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |col: usize, msg: String| Error::Syntax { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, col });
        match c {
            '(' => push(&mut out, Tok::LParen),
            ')' => push(&mut out, Tok::RParen),
            '\\' | 'λ' => push(&mut out, Tok::Backslash),
            '.' => push(&mut out, Tok::Dot),
            '*' => push(&mut out, Tok::Star),
            ',' => push(&mut out, Tok::Comma),
            '=' => push(&mut out, Tok::Eq),
            ':' => {
                if chars.get(i + 1) == Some(&':') {
                    push(&mut out, Tok::Cons);
                    i += 1;
                } else {
                    push(&mut out, Tok::Colon);
                }
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    push(&mut out, Tok::Arrow);
                    i += 1;
                } else {
                    return Err(err(col, "unexpected `-`".into()));
                }
            }
            '+' => {
                let b_follows = chars.get(i + 1) == Some(&'B')
                    && !chars.get(i + 2).copied().is_some_and(ident_char);
                if b_follows {
                    push(&mut out, Tok::AddB);
                    i += 1;
                } else {
                    push(&mut out, Tok::Plus);
                }
            }
            '[' => {
                if chars.get(i + 1) == Some(&']') {
                    push(&mut out, Tok::Ident("[]".into()));
                    i += 1;
                } else {
                    return Err(err(col, "expected `[]`".into()));
                }
            }
            c if ident_char(c) && c != '\'' => {
                let start = i;
                while i < chars.len() && ident_char(chars[i]) {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push(Spanned {
                    tok: Tok::Ident(s),
                    col,
                });
                continue;
            }
            other => return Err(err(col, format!("unexpected character `{other}`"))),
        }
        i += 1;
    }
    Ok(out)
}

/// Cursor over one line of tokens.
pub(crate) struct Cursor<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(toks: &'a [Spanned], line: usize) -> Self {
        Cursor { toks, pos: 0, line }
    }

    pub fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    pub fn next(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos).map(|s| &s.tok);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|s| s.col)
            .or_else(|| self.toks.last().map(|s| s.col + 1))
            .unwrap_or(1)
    }

    pub fn line(&self) -> usize {
        self.line
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            col: self.col(),
            msg: msg.into(),
        }
    }

    pub fn expect(&mut self, tok: &Tok, what: &str) -> Result<()> {
        if self.peek() == Some(tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    pub fn ident(&mut self, what: &str) -> Result<&'a str> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn expect_end(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }
}
