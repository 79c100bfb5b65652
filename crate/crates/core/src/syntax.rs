//! Text grammar for elements and terms.
//!
//! ```text
//! element := "a(" i "," j ")" | "b(" i "," j ")" | "d(" k ")" | "c"
//!          | "t([" element ("," element)* "]," tag ")"
//! term    := "x" idx | "u(" term ")" | "upqr{" element ";" element ";" element "}(" term ")"
//!          | "f(" term ("," term)* ")" | element
//! ```
//!
//! Whitespace is ignored between tokens.

use std::sync::Arc;

use thiserror::Error;

use crate::elements::{Element, Params, Triple};
use crate::terms::Term;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at position {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

pub fn parse_element(src: &str, params: &Params) -> Result<Element, ParseError> {
    let mut p = Parser::new(src, params);
    let e = p.element()?;
    p.end()?;
    Ok(e)
}

/// Parses a term; element literals become `Const` leaves.
pub fn parse_term(src: &str, params: &Params) -> Result<Term, ParseError> {
    let mut p = Parser::new(src, params);
    let t = p.term()?;
    p.end()?;
    Ok(t)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    params: &'a Params,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, params: &'a Params) -> Self {
        Parser {
            src: src.as_bytes(),
            pos: 0,
            params,
        }
    }

    fn err<T>(&self, pos: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, ch: u8) -> Result<(), ParseError> {
        match self.peek() {
            Some(c) if c == ch => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => self.err(self.pos, format!("expected '{}', found '{}'", ch as char, c as char)),
            None => self.err(self.pos, format!("expected '{}', found end of input", ch as char)),
        }
    }

    fn end(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(c) => self.err(self.pos, format!("unexpected trailing '{}'", c as char)),
        }
    }

    fn ident(&mut self) -> Result<(usize, &'a str), ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err(start, "expected an identifier");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        Ok((start, s))
    }

    fn number(&mut self) -> Result<u32, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err(start, "expected a number");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        s.parse()
            .or_else(|_| self.err(start, format!("number {s} out of range")))
    }

    fn element(&mut self) -> Result<Element, ParseError> {
        let (start, id) = self.ident()?;
        self.element_after(start, id)
    }

    fn element_after(&mut self, start: usize, id: &str) -> Result<Element, ParseError> {
        let e = match id {
            "a" | "b" => {
                self.expect(b'(')?;
                let i = self.number()?;
                self.expect(b',')?;
                let j = self.number()?;
                self.expect(b')')?;
                if id == "a" {
                    Element::A(i, j)
                } else {
                    Element::B(i, j)
                }
            }
            "d" => {
                self.expect(b'(')?;
                let k = self.number()?;
                self.expect(b')')?;
                Element::D(k)
            }
            "c" => Element::C,
            "t" => {
                self.expect(b'(')?;
                self.expect(b'[')?;
                let mut args = vec![self.element()?];
                while self.peek() == Some(b',') {
                    self.pos += 1;
                    args.push(self.element()?);
                }
                self.expect(b']')?;
                self.expect(b',')?;
                let tag = self.number()?;
                self.expect(b')')?;
                Element::Tagged(Arc::from(args), tag)
            }
            other => return self.err(start, format!("unknown element symbol '{other}'")),
        };
        match e.validate(self.params) {
            Ok(()) => Ok(e),
            Err(err) => self.err(start, err.to_string()),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let (start, id) = self.ident()?;
        match id {
            "x" => Ok(Term::Var(self.number()?)),
            "u" => {
                self.expect(b'(')?;
                let t = self.term()?;
                self.expect(b')')?;
                Ok(Term::U(Arc::new(t)))
            }
            "upqr" => {
                self.expect(b'{')?;
                let p = self.element()?;
                self.expect(b';')?;
                let q = self.element()?;
                self.expect(b';')?;
                let r = self.element()?;
                self.expect(b'}')?;
                let triple = match Triple::new(p, q, r) {
                    Ok(t) => t,
                    Err(e) => return self.err(start, e.to_string()),
                };
                self.expect(b'(')?;
                let t = self.term()?;
                self.expect(b')')?;
                Ok(Term::Upqr(triple, Arc::new(t)))
            }
            "f" => {
                self.expect(b'(')?;
                let mut args = vec![Arc::new(self.term()?)];
                while self.peek() == Some(b',') {
                    self.pos += 1;
                    args.push(Arc::new(self.term()?));
                }
                self.expect(b')')?;
                if args.len() != self.params.n() {
                    return self.err(
                        start,
                        format!("f takes {} arguments, found {}", self.params.n(), args.len()),
                    );
                }
                Ok(Term::F(args))
            }
            _ => Ok(Term::Const(self.element_after(start, id)?)),
        }
    }
}
