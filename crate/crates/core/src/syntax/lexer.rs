use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Lowercase-initial identifier or number.
    Ident(String),
    /// Uppercase- or underscore-initial identifier.
    Var(String),
    Directive(String),
    Not,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Dot,
    If,
    Eq,
    Slash,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut push = |tok: Tok| {
            out.push(Token {
                tok,
                line: start_line,
                column: start_col,
            })
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            '.' => Some(Tok::Dot),
            '=' => Some(Tok::Eq),
            '/' => Some(Tok::Slash),
            _ => None,
        };
        if let Some(tok) = single {
            push(tok);
            i += 1;
            col += 1;
            continue;
        }
        if c == ':' {
            if chars.get(i + 1) == Some(&'-') {
                push(Tok::If);
                i += 2;
                col += 2;
            } else {
                push(Tok::Colon);
                i += 1;
                col += 1;
            }
            continue;
        }
        if c == '#' || ident_char(c) {
            let start = i;
            i += 1;
            while i < chars.len() && ident_char(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if let Some(d) = word.strip_prefix('#') {
                if d.is_empty() {
                    return Err(Error::Syntax {
                        line: start_line,
                        column: start_col,
                        message: "expected a directive name after `#`".into(),
                    });
                }
                Tok::Directive(d.to_string())
            } else if word == "not" {
                Tok::Not
            } else if crate::model::is_variable_name(word.trim_start_matches('_'))
                || word.trim_start_matches('_').is_empty()
            {
                Tok::Var(word)
            } else {
                Tok::Ident(word)
            };
            push(tok);
            continue;
        }
        return Err(Error::Syntax {
            line,
            column: col,
            message: format!("unexpected character `{c}`"),
        });
    }
    Ok(out)
}

/// Cursor over a token stream with positioned error reporting.
pub struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Cursor {
    pub fn new(text: &str) -> Result<Self> {
        let tokens = tokenize(text)?;
        let lines = text.split('\n').count().max(1);
        let last = text
            .split('\n')
            .next_back()
            .map_or(0, |l| l.chars().count());
        Ok(Cursor {
            tokens,
            pos: 0,
            end: (lines, last + 1),
        })
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    pub fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + offset).map(|t| &t.tok)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok, what: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    pub fn position(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .map_or(self.end, |t| (t.line, t.column))
    }

    pub fn error(&self, message: String) -> Error {
        let (line, column) = self.position();
        let found = match self.peek() {
            Some(t) => format!(", found {}", describe(t)),
            None => ", found end of input".to_string(),
        };
        Error::Syntax {
            line,
            column,
            message: format!("{message}{found}"),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) | Tok::Var(s) => format!("`{s}`"),
        Tok::Directive(d) => format!("`#{d}`"),
        Tok::Not => "`not`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::LBrace => "`{`".into(),
        Tok::RBrace => "`}`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Semi => "`;`".into(),
        Tok::Colon => "`:`".into(),
        Tok::Dot => "`.`".into(),
        Tok::If => "`:-`".into(),
        Tok::Eq => "`=`".into(),
        Tok::Slash => "`/`".into(),
    }
}
