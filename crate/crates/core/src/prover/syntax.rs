//! Concrete syntax for goals: `0`, `S t`, `t + u`, `t * u`, `t = u`,
//! `P ==> Q`, `!x. P`, and sequents `H1, H2 |- C`.
//!
//! `∀`, `⟹` and `⊢` are accepted as aliases. Decimal numerals abbreviate
//! `S (... (S 0))`.

use super::term::{Prop, Sequent, Term};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {position}: expected {expected}")]
pub struct SyntaxError {
    pub position: usize,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(usize),
    Zero,
    Succ,
    Plus,
    Times,
    Equals,
    Implies,
    Turnstile,
    Bang,
    Dot,
    Comma,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '+' => Tok::Plus,
            '*' => Tok::Times,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '!' | '∀' => Tok::Bang,
            '⟹' | '→' => Tok::Implies,
            '⊢' => Tok::Turnstile,
            '=' if chars.get(i + 1) == Some(&'=') && chars.get(i + 2) == Some(&'>') => {
                i += 2;
                Tok::Implies
            }
            '=' => Tok::Equals,
            '|' if chars.get(i + 1) == Some(&'-') => {
                i += 1;
                Tok::Turnstile
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                i = j - 1;
                let n: usize = text.parse().map_err(|_| SyntaxError {
                    position: start,
                    expected: "a small numeral".into(),
                })?;
                if n == 0 {
                    Tok::Zero
                } else {
                    Tok::Num(n)
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len()
                    && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'')
                {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                i = j - 1;
                if text == "S" {
                    Tok::Succ
                } else {
                    Tok::Ident(text)
                }
            }
            _ => {
                return Err(SyntaxError { position: i, expected: "a term or connective".into() })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, SyntaxError> {
        Ok(Parser { toks: lex(src)?, pos: 0, end: src.chars().count() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn err<T>(&self, expected: &str) -> Result<T, SyntaxError> {
        Err(SyntaxError { position: self.offset(), expected: expected.into() })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), SyntaxError> {
        if self.eat(t) {
            Ok(())
        } else {
            self.err(what)
        }
    }

    fn finish(&self) -> Result<(), SyntaxError> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            self.err("end of input")
        }
    }

    fn prop(&mut self) -> Result<Prop, SyntaxError> {
        if self.eat(&Tok::Bang) {
            let Some(Tok::Ident(v)) = self.peek().cloned() else {
                return self.err("a bound variable");
            };
            self.pos += 1;
            // `!x y. P` is sugar for `!x. !y. P`
            let mut vars = vec![v];
            while let Some(Tok::Ident(v)) = self.peek().cloned() {
                self.pos += 1;
                vars.push(v);
            }
            self.expect(&Tok::Dot, "'.' after binder")?;
            let body = self.prop()?;
            return Ok(vars.iter().rev().fold(body, |p, v| Prop::forall(v, p)));
        }
        let lhs = self.prop_atom()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.prop()?;
            return Ok(Prop::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn prop_atom(&mut self) -> Result<Prop, SyntaxError> {
        // A parenthesis may open either a proposition or a term; try the
        // proposition first and fall back.
        if self.peek() == Some(&Tok::LParen) {
            let save = self.pos;
            self.pos += 1;
            if let Ok(p) = self.prop() {
                if self.eat(&Tok::RParen) {
                    return Ok(p);
                }
            }
            self.pos = save;
        }
        let a = self.term()?;
        self.expect(&Tok::Equals, "'='")?;
        let b = self.term()?;
        Ok(Prop::Eq(a, b))
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        let mut t = self.product()?;
        while self.eat(&Tok::Plus) {
            let r = self.product()?;
            t = Term::plus(t, r);
        }
        Ok(t)
    }

    fn product(&mut self) -> Result<Term, SyntaxError> {
        let mut t = self.app()?;
        while self.eat(&Tok::Times) {
            let r = self.app()?;
            t = Term::times(t, r);
        }
        Ok(t)
    }

    fn app(&mut self) -> Result<Term, SyntaxError> {
        if self.eat(&Tok::Succ) {
            return Ok(Term::succ(self.app()?));
        }
        self.term_atom()
    }

    fn term_atom(&mut self) -> Result<Term, SyntaxError> {
        match self.peek().cloned() {
            Some(Tok::Zero) => {
                self.pos += 1;
                Ok(Term::Zero)
            }
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Term::numeral(n))
            }
            Some(Tok::Ident(v)) => {
                self.pos += 1;
                Ok(Term::Var(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(t)
            }
            _ => self.err("a term"),
        }
    }

    fn sequent(&mut self) -> Result<Sequent, SyntaxError> {
        if self.eat(&Tok::Turnstile) {
            return Ok(Sequent::new(vec![], self.prop()?));
        }
        let mut hyps = vec![self.prop()?];
        loop {
            if self.eat(&Tok::Comma) {
                hyps.push(self.prop()?);
            } else if self.eat(&Tok::Turnstile) {
                let concl = self.prop()?;
                return Ok(Sequent::new(hyps, concl));
            } else if hyps.len() == 1 && self.pos == self.toks.len() {
                let concl = hyps.pop().expect("one element");
                return Ok(Sequent::new(vec![], concl));
            } else {
                return self.err("',' or '|-'");
            }
        }
    }
}

pub fn parse_term(src: &str) -> Result<Term, SyntaxError> {
    let mut p = Parser::new(src)?;
    let t = p.term()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_prop(src: &str) -> Result<Prop, SyntaxError> {
    let mut p = Parser::new(src)?;
    let t = p.prop()?;
    p.finish()?;
    Ok(t)
}

/// Parses `H1, ..., Hn |- C`; a bare proposition is a sequent without
/// hypotheses.
pub fn parse_sequent(src: &str) -> Result<Sequent, SyntaxError> {
    let mut p = Parser::new(src)?;
    let s = p.sequent()?;
    p.finish()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let t = parse_term("S x + 0 * y").unwrap();
        assert_eq!(
            t,
            Term::plus(Term::succ(Term::var("x")), Term::times(Term::Zero, Term::var("y")))
        );
        assert_eq!(parse_term("2").unwrap(), Term::numeral(2));
        assert_eq!(parse_term("S S 0").unwrap(), Term::numeral(2));
    }

    #[test]
    fn props_and_binders() {
        let p = parse_prop("!x.!y. S x + y = S (x + y)").unwrap();
        assert_eq!(p.to_string(), "!x. !y. S x + y = S (x + y)");
        let q = parse_prop("(0 = 0 ==> x = x) ==> y = y").unwrap();
        assert_eq!(parse_prop(&q.to_string()).unwrap(), q);
        assert_eq!(parse_prop("∀x. x = x").unwrap(), parse_prop("!x. x = x").unwrap());
        assert_eq!(parse_prop("(x) + 0 = x").unwrap().to_string(), "x + 0 = x");
    }

    #[test]
    fn sequents() {
        let s = parse_sequent("x + 0 = x ⊢ S x + 0 = S x").unwrap();
        assert_eq!(s.hyps.len(), 1);
        assert_eq!(s.to_string(), "x + 0 = x |- S x + 0 = S x");
        assert_eq!(parse_sequent("|- 0 = 0").unwrap(), parse_sequent("0 = 0").unwrap());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_prop("x + = 0").unwrap_err();
        assert_eq!(e.position, 4);
        assert!(parse_prop("x = 0 extra").is_err());
        assert!(parse_term("x $ y").is_err());
    }
}
