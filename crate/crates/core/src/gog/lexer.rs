use std::fmt;

use super::{GogError, Pos};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident(String),
    Dot,
    Star,
    Comma,
    LParen,
    RParen,
    Colon,
    Str(String),
    Number(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Element,
    Guide,
    // Reserved statement keywords with no semantics yet.
    Data,
    Scale,
    Coord,
}

impl Keyword {
    fn from_word(word: &str) -> Option<Self> {
        Some(match word {
            "ELEMENT" => Keyword::Element,
            "GUIDE" => Keyword::Guide,
            "DATA" => Keyword::Data,
            "SCALE" => Keyword::Scale,
            "COORD" => Keyword::Coord,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Element => "ELEMENT",
            Keyword::Guide => "GUIDE",
            Keyword::Data => "DATA",
            Keyword::Scale => "SCALE",
            Keyword::Coord => "COORD",
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Keyword(k) => f.write_str(k.as_str()),
            TokenKind::Ident(s) => write!(f, "identifier {s}"),
            TokenKind::Dot => f.write_str("'.'"),
            TokenKind::Star => f.write_str("'*'"),
            TokenKind::Comma => f.write_str("','"),
            TokenKind::LParen => f.write_str("'('"),
            TokenKind::RParen => f.write_str("')'"),
            TokenKind::Colon => f.write_str("':'"),
            TokenKind::Str(s) => write!(f, "string {s:?}"),
            TokenKind::Number(n) => write!(f, "number {n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl Lexer<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn digits(&mut self, out: &mut String) {
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            out.push(c);
            self.bump();
        }
    }

    fn number(&mut self, start: Pos) -> Result<TokenKind, GogError> {
        let mut text = String::new();
        if self.peek() == Some('-') {
            text.push('-');
            self.bump();
        }
        self.digits(&mut text);
        if self.peek() == Some('.') {
            text.push('.');
            self.bump();
            self.digits(&mut text);
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            text.push('e');
            self.bump();
            if let Some(sign) = self.peek().filter(|c| matches!(c, '+' | '-')) {
                text.push(sign);
                self.bump();
            }
            self.digits(&mut text);
        }
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(TokenKind::Number)
            .ok_or_else(|| GogError::Lex {
                pos: start,
                message: format!("malformed number {text:?}"),
            })
    }

    fn string(&mut self, start: Pos) -> Result<TokenKind, GogError> {
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => {
                    return Err(GogError::Lex {
                        pos: start,
                        message: "unterminated string".into(),
                    })
                }
                Some('"') => return Ok(TokenKind::Str(out)),
                Some('\\') => match self.bump() {
                    Some(c @ ('"' | '\\')) => out.push(c),
                    Some('n') => out.push('\n'),
                    _ => {
                        return Err(GogError::Lex {
                            pos: start,
                            message: "invalid escape in string".into(),
                        })
                    }
                },
                Some(c) => out.push(c),
            }
        }
    }
}

/// Splits a script into tokens, dropping whitespace and `#` line comments.
pub fn tokenize(source: &str) -> Result<Vec<Token>, GogError> {
    let mut lx = Lexer {
        chars: source.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();
    while let Some(c) = lx.peek() {
        let pos = lx.pos();
        let kind = match c {
            c if c.is_whitespace() => {
                lx.bump();
                continue;
            }
            '#' => {
                while lx.peek().is_some_and(|c| c != '\n') {
                    lx.bump();
                }
                continue;
            }
            '.' | '*' | ',' | '(' | ')' | ':' => {
                lx.bump();
                match c {
                    '.' => TokenKind::Dot,
                    '*' => TokenKind::Star,
                    ',' => TokenKind::Comma,
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    _ => TokenKind::Colon,
                }
            }
            '"' => lx.string(pos)?,
            c if c.is_ascii_digit() => lx.number(pos)?,
            '-' => {
                let mut ahead = lx.chars.clone();
                ahead.next();
                if ahead.next().is_some_and(|c| c.is_ascii_digit()) {
                    lx.number(pos)?
                } else {
                    return Err(GogError::Lex {
                        pos,
                        message: "illegal character '-'".into(),
                    });
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut word = String::new();
                while let Some(c) = lx.peek().filter(|c| c.is_alphanumeric() || *c == '_') {
                    word.push(c);
                    lx.bump();
                }
                match Keyword::from_word(&word) {
                    Some(k) => TokenKind::Keyword(k),
                    None => TokenKind::Ident(word),
                }
            }
            other => {
                return Err(GogError::Lex {
                    pos,
                    message: format!("illegal character {other:?}"),
                })
            }
        };
        tokens.push(Token { kind, pos });
    }
    Ok(tokens)
}
