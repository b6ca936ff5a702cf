//! Tokenizer for the Java subset. Comments and whitespace are dropped; every
//! token keeps its inclusive character span.
//!
//! `>` is always emitted as a single-character token so that nested generic
//! arguments (`List<List<String>>`) close naturally. The parser glues adjacent
//! `>` / `=` tokens back into shift and comparison operators.

use super::source::Span;
use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Keyword,
    Int,
    Float,
    Str,
    Char,
    Punct,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

impl Token {
    pub fn is(&self, text: &str) -> bool {
        matches!(self.kind, TokenKind::Punct | TokenKind::Keyword) && self.text == text
    }
}

pub const KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "package", "private", "protected", "public", "return", "short", "static",
    "strictfp", "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try",
    "void", "volatile", "while", "true", "false", "null",
];

const PUNCTS: &[&str] = &[
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", "<<", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@", "=", ">", "<",
    "!", "~", "?", ":", "+", "-", "*", "/", "&", "|", "^", "%",
];

pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    Lexer { chars: &chars, pos: 0, line: 1, line_start: 0 }.run()
}

pub fn tokenize_chars(chars: &[char]) -> Result<Vec<Token>, ParseError> {
    Lexer { chars, pos: 0, line: 1, line_start: 0 }.run()
}

struct Lexer<'a> {
    chars: &'a [char],
    pos: usize,
    line: usize,
    line_start: usize,
}

impl Lexer<'_> {
    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek(0)?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.line_start = self.pos;
        }
        Some(c)
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            column: self.pos - self.line_start + 1,
            message: msg.into(),
        }
    }

    fn run(mut self) -> Result<Vec<Token>, ParseError> {
        let mut tokens = Vec::new();
        loop {
            self.skip_trivia()?;
            let start = self.pos;
            let Some(c) = self.peek(0) else {
                tokens.push(Token {
                    kind: TokenKind::Eof,
                    text: String::new(),
                    span: Span::new(start, start),
                });
                return Ok(tokens);
            };
            let kind = if c.is_alphabetic() || c == '_' || c == '$' {
                while matches!(self.peek(0), Some(c) if c.is_alphanumeric() || c == '_' || c == '$') {
                    self.bump();
                }
                TokenKind::Ident
            } else if c.is_ascii_digit() || (c == '.' && matches!(self.peek(1), Some(d) if d.is_ascii_digit())) {
                self.number()
            } else if c == '"' {
                self.string()?;
                TokenKind::Str
            } else if c == '\'' {
                self.bump();
                loop {
                    match self.bump() {
                        Some('\\') => {
                            self.bump();
                        }
                        Some('\'') => break,
                        Some('\n') | None => return Err(self.error("unterminated character literal")),
                        _ => {}
                    }
                }
                TokenKind::Char
            } else {
                let punct = PUNCTS
                    .iter()
                    .find(|p| p.chars().enumerate().all(|(i, pc)| self.peek(i) == Some(pc)))
                    .ok_or_else(|| self.error(format!("unexpected character `{c}`")))?;
                for _ in 0..punct.chars().count() {
                    self.bump();
                }
                TokenKind::Punct
            };
            let text: String = self.chars[start..self.pos].iter().collect();
            let kind = if kind == TokenKind::Ident && KEYWORDS.contains(&text.as_str()) {
                TokenKind::Keyword
            } else {
                kind
            };
            tokens.push(Token { kind, text, span: Span::new(start, self.pos - 1) });
        }
    }

    fn skip_trivia(&mut self) -> Result<(), ParseError> {
        loop {
            match (self.peek(0), self.peek(1)) {
                (Some(c), _) if c.is_whitespace() => {
                    self.bump();
                }
                (Some('/'), Some('/')) => {
                    while !matches!(self.peek(0), Some('\n') | None) {
                        self.bump();
                    }
                }
                (Some('/'), Some('*')) => {
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek(0), self.peek(1)) {
                            (Some('*'), Some('/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (None, _) => return Err(self.error("unterminated block comment")),
                            _ => {
                                self.bump();
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn number(&mut self) -> TokenKind {
        let mut kind = TokenKind::Int;
        if self.peek(0) == Some('0') && matches!(self.peek(1), Some('x' | 'X' | 'b' | 'B')) {
            self.bump();
            self.bump();
            while matches!(self.peek(0), Some(c) if c.is_ascii_hexdigit() || c == '_') {
                self.bump();
            }
        } else {
            while matches!(self.peek(0), Some(c) if c.is_ascii_digit() || c == '_') {
                self.bump();
            }
            if self.peek(0) == Some('.') && matches!(self.peek(1), Some(c) if c.is_ascii_digit()) {
                kind = TokenKind::Float;
                self.bump();
                while matches!(self.peek(0), Some(c) if c.is_ascii_digit() || c == '_') {
                    self.bump();
                }
            } else if self.peek(0) == Some('.')
                && !matches!(self.peek(1), Some(c) if c.is_alphabetic() || c == '.')
            {
                // `1.` is a valid double literal
                kind = TokenKind::Float;
                self.bump();
            }
            if matches!(self.peek(0), Some('e' | 'E')) {
                let sign = usize::from(matches!(self.peek(1), Some('+' | '-')));
                if matches!(self.peek(1 + sign), Some(c) if c.is_ascii_digit()) {
                    kind = TokenKind::Float;
                    for _ in 0..=sign {
                        self.bump();
                    }
                    while matches!(self.peek(0), Some(c) if c.is_ascii_digit()) {
                        self.bump();
                    }
                }
            }
        }
        match self.peek(0) {
            Some('l' | 'L') => {
                self.bump();
            }
            Some('f' | 'F' | 'd' | 'D') => {
                self.bump();
                kind = TokenKind::Float;
            }
            _ => {}
        }
        kind
    }

    fn string(&mut self) -> Result<(), ParseError> {
        if self.peek(1) == Some('"') && self.peek(2) == Some('"') {
            for _ in 0..3 {
                self.bump();
            }
            loop {
                match self.bump() {
                    Some('\\') => {
                        self.bump();
                    }
                    Some('"') if self.peek(0) == Some('"') && self.peek(1) == Some('"') => {
                        self.bump();
                        self.bump();
                        return Ok(());
                    }
                    None => return Err(self.error("unterminated text block")),
                    _ => {}
                }
            }
        }
        self.bump();
        loop {
            match self.bump() {
                Some('\\') => {
                    self.bump();
                }
                Some('"') => return Ok(()),
                Some('\n') | None => return Err(self.error("unterminated string literal")),
                _ => {}
            }
        }
    }
}
