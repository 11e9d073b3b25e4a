//! Polynomial expressions: integers, symbols, `+ - * / ^` and parentheses.
//!
//! `x` is the polynomial variable; any other symbol must name an element of
//! the base field (`t` for K(t), `u`, `v` for the two-variable field).
//! Divisors must be nonzero constants, so `3/2` and `1/t` are accepted while
//! `1/x` is not.

use keypoly::chain::KPoly;
use keypoly::poly::PolyOps;
use keypoly::scalars::ValuedField;
use num_bigint::BigInt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("parse error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol {name:?} at {pos}")]
    UnknownSymbol { name: String, pos: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { pos, .. } | ParseError::UnknownSymbol { pos, .. } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Sym(String),
    Op(char),
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let (pos, c) = chars[k];
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() {
            let s = k;
            while k < chars.len() && chars[k].1.is_ascii_digit() {
                k += 1;
            }
            let digits: String = chars[s..k].iter().map(|c| c.1).collect();
            out.push((Tok::Int(digits.parse().unwrap()), pos));
        } else if c.is_alphabetic() || c == '_' {
            let s = k;
            while k < chars.len() && (chars[k].1.is_alphanumeric() || chars[k].1 == '_') {
                k += 1;
            }
            out.push((Tok::Sym(chars[s..k].iter().map(|c| c.1).collect()), pos));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), pos));
            k += 1;
        } else if c == '−' {
            out.push((Tok::Op('-'), pos));
            k += 1;
        } else {
            return Err(ParseError::Syntax { pos, msg: format!("unexpected character {c:?}") });
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a, F: ValuedField> {
    field: &'a F,
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl<'a, F: ValuedField> Parser<'a, F> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn expr(&mut self) -> Result<KPoly<F>, ParseError> {
        let k = self.field;
        let mut acc = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = *self.peek() {
            self.at += 1;
            let rhs = self.term()?;
            acc = if c == '+' { k.padd(&acc, &rhs) } else { k.psub(&acc, &rhs) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<KPoly<F>, ParseError> {
        let k = self.field;
        let mut acc = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = *self.peek() {
            self.at += 1;
            let pos = self.pos();
            let rhs = self.unary()?;
            if c == '*' {
                acc = k.pmul(&acc, &rhs);
                continue;
            }
            if rhs.deg() > 0 {
                return Err(ParseError::Syntax { pos, msg: "divisor must not involve x".into() });
            }
            let inv = rhs
                .coeffs()
                .first()
                .and_then(|c| k.inv(c))
                .ok_or_else(|| ParseError::Syntax { pos, msg: "division by zero".into() })?;
            acc = k.pscale(&acc, &inv);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<KPoly<F>, ParseError> {
        match self.peek() {
            Tok::Op('-') => {
                self.at += 1;
                Ok(self.field.pneg(&self.unary()?))
            }
            Tok::Op('+') => {
                self.at += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<KPoly<F>, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.at += 1;
        let Tok::Int(n) = self.peek().clone() else {
            return self.syntax("expected a non-negative integer exponent");
        };
        let n: usize = n.try_into().or_else(|_| self.syntax("exponent too large"))?;
        self.at += 1;
        Ok(self.field.ppow(&base, n))
    }

    fn atom(&mut self) -> Result<KPoly<F>, ParseError> {
        let k = self.field;
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.at += 1;
                Ok(k.pconst(k.from_int(&n)))
            }
            Tok::Sym(s) => {
                self.at += 1;
                if s == "x" {
                    return Ok(k.px());
                }
                k.symbol(&s).map(|c| k.pconst(c)).ok_or(ParseError::UnknownSymbol { name: s, pos })
            }
            Tok::Op('(') => {
                self.at += 1;
                let e = self.expr()?;
                if *self.peek() != Tok::Op(')') {
                    return self.syntax("expected ')'");
                }
                self.at += 1;
                Ok(e)
            }
            Tok::End => self.syntax("unexpected end of input"),
            Tok::Op(c) => self.syntax(format!("unexpected {c:?}")),
        }
    }
}

/// Parses `text` into a polynomial over `field`.
pub fn parse_polynomial<F: ValuedField>(field: &F, text: &str) -> Result<KPoly<F>, ParseError> {
    let mut p = Parser { field, toks: lex(text)?, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.syntax("trailing input");
    }
    Ok(e)
}

/// The normalized text form; `parse_polynomial` reads it back unchanged.
pub fn print_polynomial<F: ValuedField>(field: &F, f: &KPoly<F>) -> String {
    field.pshow(f, "x")
}

#[cfg(test)]
mod tests {
    use super::*;
    use keypoly::scalars::{Field, FpT, PAdic};

    fn q() -> PAdic {
        PAdic::new(2).unwrap()
    }

    fn ints(k: &PAdic, f: &KPoly<PAdic>) -> Vec<String> {
        f.coeffs().iter().map(|c| k.show(c)).collect()
    }

    #[test]
    fn basic_forms() {
        let k = q();
        assert_eq!(ints(&k, &parse_polynomial(&k, "x^2 - 2").unwrap()), ["-2", "0", "1"]);
        assert_eq!(ints(&k, &parse_polynomial(&k, "(x+1)^2").unwrap()), ["1", "2", "1"]);
        assert_eq!(ints(&k, &parse_polynomial(&k, "3/2*x - -x").unwrap()), ["0", "5/2"]);
        assert!(parse_polynomial(&k, "0").unwrap().is_zero());
    }

    #[test]
    fn errors_carry_positions() {
        let k = q();
        assert_eq!(parse_polynomial(&k, "x + y"), Err(ParseError::UnknownSymbol { name: "y".into(), pos: 4 }));
        assert_eq!(parse_polynomial(&k, "x + t").unwrap_err().position(), 4);
        assert_eq!(parse_polynomial(&k, "(x + 1").unwrap_err().position(), 6);
        assert!(matches!(parse_polynomial(&k, "1/x"), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(parse_polynomial(&k, "x/0"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_polynomial(&k, "x^-1"), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(parse_polynomial(&k, "2 x"), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(parse_polynomial(&k, "x $ 1"), Err(ParseError::Syntax { pos: 2, .. })));
    }

    #[test]
    fn field_symbols() {
        let f = FpT::fp(3).unwrap();
        let h = parse_polynomial(&f, "x^3 - t^2").unwrap();
        assert_eq!(h, f.poly(vec![f.neg(&f.t_power(2)), f.zero(), f.zero(), f.one()]));
        let g = parse_polynomial(&f, "x/t + 1/(t+1)").unwrap();
        assert_eq!(parse_polynomial(&f, &print_polynomial(&f, &g)).unwrap(), g);
    }
}
