//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr     := term (("+" | "-") term)*
//! term     := factor ("*" factor)*
//! factor   := rational | symbol ("^" uint)? | "(" expr ")" ("^" uint)? | "-" factor
//! rational := uint ("/" uint)?
//! symbol   := letter+
//! ```
//!
//! Whitespace is ignored. There is no implicit multiplication.

use num_bigint::BigInt;
use num_traits::Zero;

use super::{ParseError, Poly, Rational};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Sym(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(s: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<(usize, char)> = s.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, ch) = chars[i];
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        if ch.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().map(|c| c.1).collect();
            let n: BigInt = digits.parse().expect("digit run");
            out.push((pos, Tok::Num(n)));
            continue;
        }
        if ch.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].1.is_ascii_alphabetic() {
                i += 1;
            }
            let name: String = chars[start..i].iter().map(|c| c.1).collect();
            out.push((pos, Tok::Sym(name)));
            continue;
        }
        let t = match ch {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            other => {
                return Err(ParseError::new(pos, format!("unexpected character '{other}'")));
            }
        };
        out.push((pos, t));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.bump();
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn exponent(&mut self) -> Result<Option<u32>, ParseError> {
        if self.peek() != Some(&Tok::Caret) {
            return Ok(None);
        }
        self.bump();
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(n)) => u32::try_from(n)
                .map(Some)
                .map_err(|_| ParseError::new(pos, "exponent too large")),
            Some(Tok::Minus) => Err(ParseError::new(pos, "negative exponent")),
            _ => Err(ParseError::new(pos, "expected exponent")),
        }
    }

    fn factor(&mut self) -> Result<Poly, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(n)) => {
                let mut den = BigInt::from(1);
                if self.peek() == Some(&Tok::Slash) {
                    self.bump();
                    let dpos = self.pos();
                    match self.bump() {
                        Some(Tok::Num(d)) if !d.is_zero() => den = d,
                        Some(Tok::Num(_)) => return Err(ParseError::new(dpos, "zero denominator")),
                        _ => return Err(ParseError::new(dpos, "expected denominator")),
                    }
                }
                if self.peek() == Some(&Tok::Caret) {
                    return Err(ParseError::new(self.pos(), "exponent on a number"));
                }
                Ok(Poly::constant(Rational::new(n, den)))
            }
            Some(Tok::Sym(name)) => {
                let base = Poly::var(&name);
                Ok(match self.exponent()? {
                    Some(e) => base.pow(e),
                    None => base,
                })
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                let cpos = self.pos();
                if self.bump() != Some(Tok::RParen) {
                    return Err(ParseError::new(cpos, "expected ')'"));
                }
                Ok(match self.exponent()? {
                    Some(e) => inner.pow(e),
                    None => inner,
                })
            }
            Some(Tok::Minus) => Ok(-&self.factor()?),
            Some(t) => Err(ParseError::new(pos, format!("unexpected token {t:?}"))),
            None => Err(ParseError::new(pos, "unexpected end of input")),
        }
    }
}

/// Parses an expression into its expanded polynomial.
pub fn parse_expr(s: &str) -> Result<Poly, ParseError> {
    let toks = tokenize(s)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: s.len(),
    };
    let out = p.expr()?;
    if p.at < p.toks.len() {
        return Err(ParseError::new(p.pos(), "trailing input"));
    }
    Ok(out)
}

/// Parses a signed rational `[-]n[/d]`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseError> {
    let t = s.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (n, d) = match body.split_once('/') {
        Some((n, d)) => (n, d),
        None => (body, "1"),
    };
    let bad = || ParseError::new(0, format!("malformed rational '{s}'"));
    if n.is_empty() || d.is_empty() || !n.bytes().all(|b| b.is_ascii_digit()) || !d.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(ParseError::new(0, "zero denominator"));
    }
    let r = Rational::new(n, d);
    Ok(if neg { -r } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpoly::rat;

    #[test]
    fn parses_grammar_examples() {
        let p = parse_expr("y + x*(a*x^2 + b*x*y)").unwrap();
        assert_eq!(p, parse_expr("a*x^3 + b*x^2*y + y").unwrap());
        let q = parse_expr("3/2*x^4 - y").unwrap();
        assert_eq!(q.num_terms(), 2);
        assert_eq!(parse_expr("-(-x)").unwrap(), parse_expr("x").unwrap());
        assert_eq!(parse_expr("  2 * x ^ 2 ").unwrap(), parse_expr("2*x^2").unwrap());
    }

    #[test]
    fn negative_exponent_is_rejected() {
        let e = parse_expr("x^-1").unwrap_err();
        assert_eq!(e.position, 2);
        assert!(e.message.contains("negative exponent"));
    }

    #[test]
    fn syntax_errors_carry_position() {
        assert_eq!(parse_expr("x + ").unwrap_err().position, 4);
        assert_eq!(parse_expr("2x").unwrap_err().position, 1);
        assert_eq!(parse_expr("(x + y").unwrap_err().position, 6);
        assert!(parse_expr("x $ y").is_err());
        assert!(parse_expr("1/0").is_err());
        assert!(parse_expr("").is_err());
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("-3/6").unwrap(), Rational::new((-1).into(), 2.into()));
        assert_eq!(parse_rational("7").unwrap(), rat(7));
        assert!(parse_rational("1.5").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a").is_err());
    }
}
