use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::{PolyError, Polynomial, VarId};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum TokenKind {
    Int(BigInt),
    Var(VarId),
    /// An identifier that is not a recognised variable name.
    Ident(String),
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    Bang,
    Amp,
    Pipe,
    Gt,
    Ge,
    Lt,
    Le,
    Eq,
    Ne,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub pos: usize,
}

/// Tokenizer shared by the polynomial and formula grammars.
pub(crate) struct Lexer {
    tokens: Vec<Token>,
    next: usize,
    end: usize,
}

impl Lexer {
    pub fn new(src: &str) -> Result<Self, PolyError> {
        let bytes = src.as_bytes();
        let mut tokens = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            let start = i;
            let kind = match c {
                b' ' | b'\t' | b'\r' | b'\n' => {
                    i += 1;
                    continue;
                }
                b'0'..=b'9' => {
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    TokenKind::Int(src[start..i].parse().unwrap())
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                        i += 1;
                    }
                    let word = &src[start..i];
                    match word.parse::<VarId>() {
                        Ok(v) => TokenKind::Var(v),
                        Err(()) => TokenKind::Ident(word.to_string()),
                    }
                }
                _ => {
                    let two = bytes.get(i + 1).copied();
                    let (kind, len) = match (c, two) {
                        (b'>', Some(b'=')) => (TokenKind::Ge, 2),
                        (b'<', Some(b'=')) => (TokenKind::Le, 2),
                        (b'!', Some(b'=')) => (TokenKind::Ne, 2),
                        (b'=', Some(b'=')) => (TokenKind::Eq, 2),
                        (b'>', _) => (TokenKind::Gt, 1),
                        (b'<', _) => (TokenKind::Lt, 1),
                        (b'=', _) => (TokenKind::Eq, 1),
                        (b'!', _) => (TokenKind::Bang, 1),
                        (b'+', _) => (TokenKind::Plus, 1),
                        (b'-', _) => (TokenKind::Minus, 1),
                        (b'*', _) => (TokenKind::Star, 1),
                        (b'(', _) => (TokenKind::LParen, 1),
                        (b')', _) => (TokenKind::RParen, 1),
                        (b'&', _) => (TokenKind::Amp, 1),
                        (b'|', _) => (TokenKind::Pipe, 1),
                        _ => {
                            return Err(PolyError::Parse {
                                pos: i,
                                msg: format!("unexpected character {:?}", src[i..].chars().next().unwrap()),
                            })
                        }
                    };
                    i += len;
                    kind
                }
            };
            tokens.push(Token { kind, pos: start });
        }
        Ok(Lexer { tokens, next: 0, end: src.len() })
    }

    pub fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.next)
    }

    pub fn peek_kind(&self) -> Option<&TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    pub fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.next).cloned();
        if t.is_some() {
            self.next += 1;
        }
        t
    }

    /// Byte offset of the next token, or end of input.
    pub fn pos(&self) -> usize {
        self.peek().map_or(self.end, |t| t.pos)
    }

    pub fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek_kind() == Some(kind) {
            self.next += 1;
            true
        } else {
            false
        }
    }
}

fn err(pos: usize, msg: impl Into<String>) -> PolyError {
    PolyError::Parse { pos, msg: msg.into() }
}

/// `poly := term {("+"|"-") term}`; `term := ["-"] factor {"*" factor}`;
/// `factor := integer | var`. `accept_var` rejects variables a caller does
/// not allow (reported as an unknown variable token).
pub(crate) fn parse_poly(lx: &mut Lexer, accept_var: impl Fn(VarId) -> bool + Copy) -> Result<Polynomial, PolyError> {
    let mut acc = parse_term(lx, accept_var)?;
    loop {
        if lx.eat(&TokenKind::Plus) {
            acc = acc.add(&parse_term(lx, accept_var)?);
        } else if lx.eat(&TokenKind::Minus) {
            acc = acc.sub(&parse_term(lx, accept_var)?);
        } else {
            return Ok(acc);
        }
    }
}

fn parse_term(lx: &mut Lexer, accept_var: impl Fn(VarId) -> bool + Copy) -> Result<Polynomial, PolyError> {
    let negate = lx.eat(&TokenKind::Minus);
    let mut acc = parse_factor(lx, accept_var)?;
    while lx.eat(&TokenKind::Star) {
        acc = acc.mul(&parse_factor(lx, accept_var)?);
    }
    Ok(if negate { acc.neg() } else { acc })
}

fn parse_factor(lx: &mut Lexer, accept_var: impl Fn(VarId) -> bool) -> Result<Polynomial, PolyError> {
    let pos = lx.pos();
    match lx.bump() {
        Some(Token { kind: TokenKind::Int(n), .. }) => {
            let n = n
                .to_i64()
                .filter(|n| *n <= 1 << 20)
                .ok_or_else(|| err(pos, "integer constant too large for standard form"))?;
            Ok(Polynomial::constant(n))
        }
        Some(Token { kind: TokenKind::Var(v), .. }) if accept_var(v) => Ok(Polynomial::var(v)),
        Some(Token { kind: TokenKind::Var(v), .. }) => Err(err(pos, format!("unknown variable token {v}"))),
        Some(Token { kind: TokenKind::Ident(w), .. }) => Err(err(pos, format!("unknown variable token {w}"))),
        Some(_) => Err(err(pos, "expected integer or variable")),
        None => Err(err(pos, "unexpected end of input")),
    }
}
