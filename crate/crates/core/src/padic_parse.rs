//! Small expression reader for field elements.
//!
//! Accepts integers, `a/b`, the generators `p`, `s`, `t`, the operators
//! `+ - * / ^`, parentheses and a trailing `O(p^(w))` precision term, so
//! that the printed form of an element reads back to the same element.

use crate::padic::{Field, FieldElement, PadicError, Result};
use num_rational::Rational64;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(i128),
    Ident(char),
    Op(char),
}

fn lex(text: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse::<i128>().map_err(|_| PadicError::Parse(format!("number too large: {s}")))?;
            out.push(Tok::Num(n));
        } else if matches!(c, 'p' | 's' | 't' | 'O') {
            out.push(Tok::Ident(c));
            i += 1;
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(PadicError::Parse(format!("unexpected character {c:?} at offset {i}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    field: Field,
    toks: &'a [Tok],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(PadicError::Parse(format!("expected {op:?} at token {}", self.pos)))
        }
    }

    fn expr(&mut self) -> Result<FieldElement> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<FieldElement> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.factor()?);
            } else if self.eat('/') {
                acc = acc.checked_div(&self.factor()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<FieldElement> {
        if self.eat('-') {
            return Ok(self.factor()?.neg());
        }
        let is_p = self.peek() == Some(&Tok::Ident('p'));
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let exp = self.exponent()?;
        if is_p {
            let k = self
                .field
                .to_pi_units(exp)
                .ok_or_else(|| PadicError::Parse(format!("exponent {exp} outside the value group")))?;
            return Ok(self.field.pi_pow(k));
        }
        if !exp.is_integer() {
            return Err(PadicError::Parse("fractional exponent on a non-prime base".into()));
        }
        let n = exp.to_integer();
        let r = base.pow(n.unsigned_abs() as u32);
        if n < 0 {
            r.inv()
        } else {
            Ok(r)
        }
    }

    fn exponent(&mut self) -> Result<Rational64> {
        let neg = self.eat('-');
        let v = if self.eat('(') {
            let neg_in = self.eat('-');
            let n = self.integer()?;
            let d = if self.eat('/') { self.integer()? } else { 1 };
            self.expect(')')?;
            let r = Rational64::new(n as i64, d as i64);
            if neg_in {
                -r
            } else {
                r
            }
        } else {
            Rational64::from_integer(self.integer()? as i64)
        };
        Ok(if neg { -v } else { v })
    }

    fn integer(&mut self) -> Result<i128> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            other => Err(PadicError::Parse(format!("expected integer, found {other:?}"))),
        }
    }

    fn atom(&mut self) -> Result<FieldElement> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(self.field.from_i128(n))
            }
            Some(Tok::Ident('p')) => {
                self.pos += 1;
                Ok(self.field.pi_pow(self.field.ramification()))
            }
            Some(Tok::Ident('s')) => {
                self.pos += 1;
                self.field.gen_s()
            }
            Some(Tok::Ident('t')) => {
                self.pos += 1;
                self.field.gen_t()
            }
            Some(Tok::Ident('O')) => {
                self.pos += 1;
                self.expect('(')?;
                let x = self.expr()?;
                self.expect(')')?;
                let v = x.val_pi().ok_or_else(|| PadicError::Parse("O(0) is meaningless".into()))?;
                Ok(self.field.zero().with_abs_prec_pi(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let x = self.expr()?;
                self.expect(')')?;
                Ok(x)
            }
            other => Err(PadicError::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

pub(crate) fn parse_element(field: Field, text: &str) -> Result<FieldElement> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(PadicError::Parse("empty input".into()));
    }
    let mut parser = Parser { field, toks: &toks, pos: 0 };
    let x = parser.expr()?;
    if parser.pos != toks.len() {
        return Err(PadicError::Parse(format!("trailing input at token {}", parser.pos)));
    }
    Ok(x)
}
