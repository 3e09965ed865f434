//! Pratt parser for the expression grammar.
//!
//! Binding powers, loosest first: `+ -` (left), `* /` (left), unary `-`,
//! `^` (right). Implicit multiplication is not supported.

use thiserror::Error;

use super::{BinOp, BinaryFn, Expr, UnaryFn, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: expected {expected}")]
pub struct SyntaxError {
    pub offset: usize,
    pub expected: String,
}

impl SyntaxError {
    fn new(offset: usize, expected: impl Into<String>) -> Self {
        Self {
            offset,
            expected: expected.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(usize, Tok), SyntaxError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((start, Tok::End));
        };
        let tok = match c {
            b'0'..=b'9' | b'.' => return self.number(start),
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while self.pos < bytes.len()
                    && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                return Ok((start, Tok::Ident(self.src[start..self.pos].to_string())));
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            _ => {
                return Err(SyntaxError::new(
                    start,
                    "a number, identifier, operator or parenthesis",
                ))
            }
        };
        self.pos += 1;
        Ok((start, tok))
    }

    fn number(&mut self, start: usize) -> Result<(usize, Tok), SyntaxError> {
        let bytes = self.src.as_bytes();
        let digits = |pos: &mut usize| {
            let from = *pos;
            while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
                *pos += 1;
            }
            *pos - from
        };
        let mut n = digits(&mut self.pos);
        if self.pos < bytes.len() && bytes[self.pos] == b'.' {
            self.pos += 1;
            n += digits(&mut self.pos);
        }
        if n == 0 {
            return Err(SyntaxError::new(start, "digits in numeric literal"));
        }
        if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < bytes.len() && (bytes[self.pos] == b'+' || bytes[self.pos] == b'-') {
                self.pos += 1;
            }
            if digits(&mut self.pos) == 0 {
                return Err(SyntaxError::new(save, "exponent digits"));
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>()
            .map(|v| (start, Tok::Num(v)))
            .map_err(|_| SyntaxError::new(start, "a valid numeric literal"))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: (usize, Tok),
}

const BP_ADD: u8 = 10;
const BP_MUL: u8 = 20;
const BP_NEG: u8 = 30;
const BP_POW: u8 = 40;

/// Parses an expression string.
pub fn parse(text: &str) -> Result<Expr, SyntaxError> {
    let mut lexer = Lexer { src: text, pos: 0 };
    let first = lexer.next()?;
    let mut p = Parser {
        lexer,
        peeked: first,
    };
    let e = p.expr(0)?;
    match p.peeked {
        (_, Tok::End) => Ok(e),
        (at, _) => Err(SyntaxError::new(at, "an operator or end of input")),
    }
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(usize, Tok), SyntaxError> {
        let next = self.lexer.next()?;
        Ok(std::mem::replace(&mut self.peeked, next))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), SyntaxError> {
        if self.peeked.1 == tok {
            self.bump()?;
            Ok(())
        } else {
            Err(SyntaxError::new(self.peeked.0, what))
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, SyntaxError> {
        let mut lhs = self.prefix()?;
        loop {
            let (op, bp, right_assoc) = match self.peeked.1 {
                Tok::Op('+') => (BinOp::Add, BP_ADD, false),
                Tok::Op('-') => (BinOp::Sub, BP_ADD, false),
                Tok::Op('*') => (BinOp::Mul, BP_MUL, false),
                Tok::Op('/') => (BinOp::Div, BP_MUL, false),
                Tok::Op('^') => (BinOp::Pow, BP_POW, true),
                _ => break,
            };
            if bp < min_bp || (bp == min_bp && !right_assoc) {
                break;
            }
            self.bump()?;
            let rhs = if op == BinOp::Pow {
                // exponent may carry its own unary minus: 2^-x
                self.exponent()?
            } else {
                self.expr(bp)?
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn exponent(&mut self) -> Result<Expr, SyntaxError> {
        if self.peeked.1 == Tok::Op('-') {
            self.bump()?;
            let inner = self.exponent()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.expr(BP_POW)
    }

    fn prefix(&mut self) -> Result<Expr, SyntaxError> {
        let (at, tok) = self.bump()?;
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Op('-') => {
                let operand = self.expr(BP_NEG)?;
                Ok(Expr::Neg(Box::new(operand)))
            }
            Tok::LParen => {
                let e = self.expr(0)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(at, &name),
            _ => Err(SyntaxError::new(
                at,
                "a number, variable, function call, `-` or `(`",
            )),
        }
    }

    fn ident(&mut self, at: usize, name: &str) -> Result<Expr, SyntaxError> {
        if let Some(v) = Var::from_name(name) {
            return Ok(Expr::Var(v));
        }
        if name == "pi" {
            return Ok(Expr::Num(std::f64::consts::PI));
        }
        let unary = match name {
            "sin" => Some(UnaryFn::Sin),
            "cos" => Some(UnaryFn::Cos),
            "exp" => Some(UnaryFn::Exp),
            "tanh" => Some(UnaryFn::Tanh),
            "sqrt" => Some(UnaryFn::Sqrt),
            "abs" => Some(UnaryFn::Abs),
            _ => None,
        };
        let binary = match name {
            "min" => Some(BinaryFn::Min),
            "max" => Some(BinaryFn::Max),
            _ => None,
        };
        if unary.is_none() && binary.is_none() {
            return Err(SyntaxError::new(
                at,
                "a variable (lambda, x, y, s, t), `pi` or a function name",
            ));
        }
        self.expect(Tok::LParen, "`(` after function name")?;
        let first = self.expr(0)?;
        let e = if let Some(f) = unary {
            Expr::Call(f, Box::new(first))
        } else {
            self.expect(Tok::Comma, "`,` between arguments")?;
            let second = self.expr(0)?;
            Expr::Call2(binary.unwrap(), Box::new(first), Box::new(second))
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(e)
    }
}
