use super::{Diagnostic, Pos};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Number(f64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Colon,
    Semi,
    Comma,
    Dot,
    Eq,
    Arrow,
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(_) => "number".to_string(),
            Tok::Str(_) => "string".to_string(),
            Tok::Eof => "end of file".to_string(),
            other => format!("`{}`", other.punct()),
        }
    }

    fn punct(&self) -> &'static str {
        match self {
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Eq => "=",
            Tok::Arrow => "->",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            _ => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn take_while(&mut self, out: &mut String, f: impl Fn(char) -> bool) {
        while let Some(c) = self.peek().filter(|&c| f(c)) {
            out.push(c);
            self.bump();
        }
    }
}

/// Splits source text into tokens. Lexical errors are collected; the
/// offending character is skipped so later errors are still reported.
pub(crate) fn tokenize(text: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        pos: Pos { line: 1, column: 1 },
    };
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    while let Some(c) = cur.peek() {
        let pos = cur.pos;
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            while cur.peek().is_some_and(|c| c != '\n') {
                cur.bump();
            }
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            cur.take_while(&mut s, |c| c.is_ascii_alphanumeric() || c == '_');
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            match number(&mut cur) {
                Ok(x) => Tok::Number(x),
                Err(msg) => {
                    errors.push(Diagnostic::error(msg, pos));
                    continue;
                }
            }
        } else if c == '"' {
            cur.bump();
            match string(&mut cur) {
                Ok(s) => Tok::Str(s),
                Err(msg) => {
                    errors.push(Diagnostic::error(msg, pos));
                    continue;
                }
            }
        } else {
            cur.bump();
            match c {
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ':' => Tok::Colon,
                ';' => Tok::Semi,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                '=' => Tok::Eq,
                '+' => Tok::Plus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '-' if cur.peek() == Some('>') => {
                    cur.bump();
                    Tok::Arrow
                }
                '-' => Tok::Minus,
                other => {
                    errors.push(Diagnostic::error(format!("unexpected character `{}`", other.escape_debug()), pos));
                    continue;
                }
            }
        };
        tokens.push(Token { tok, pos });
    }
    tokens.push(Token {
        tok: Tok::Eof,
        pos: cur.pos,
    });
    (tokens, errors)
}

fn number(cur: &mut Cursor) -> Result<f64, String> {
    let mut s = String::new();
    cur.take_while(&mut s, |c| c.is_ascii_digit());
    if cur.peek() == Some('.') {
        s.push('.');
        cur.bump();
        let before = s.len();
        cur.take_while(&mut s, |c| c.is_ascii_digit());
        if s.len() == before {
            return Err(format!("malformed number `{s}`: expected digits after `.`"));
        }
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        s.push('e');
        cur.bump();
        if let Some(sign @ ('+' | '-')) = cur.peek() {
            s.push(sign);
            cur.bump();
        }
        let before = s.len();
        cur.take_while(&mut s, |c| c.is_ascii_digit());
        if s.len() == before {
            return Err(format!("malformed number `{s}`: expected exponent digits"));
        }
    }
    if cur.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
        let mut rest = String::new();
        cur.take_while(&mut rest, |c| c.is_ascii_alphanumeric() || c == '_');
        return Err(format!("malformed number `{s}{rest}`"));
    }
    let x: f64 = s.parse().map_err(|e| format!("malformed number `{s}`: {e}"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("number `{s}` is out of range"))
    }
}

fn string(cur: &mut Cursor) -> Result<String, String> {
    let mut s = String::new();
    loop {
        match cur.bump() {
            None | Some('\n') => return Err("unterminated string".to_string()),
            Some('"') => return Ok(s),
            Some('\\') => match cur.bump() {
                Some('"') => s.push('"'),
                Some('\\') => s.push('\\'),
                Some('n') => s.push('\n'),
                Some('r') => s.push('\r'),
                Some('t') => s.push('\t'),
                Some(c) => return Err(format!("unknown escape `\\{}`", c.escape_debug())),
                None => return Err("unterminated string".to_string()),
            },
            Some(c) => s.push(c),
        }
    }
}
