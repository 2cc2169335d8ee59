//! Textual strategy expressions (`.psx`).
//!
//! ```text
//! expr := LIFT(nm, tac, [gt,...], [gt,...])
//!       | THEN(expr, expr) | TENSOR(expr, expr) | REPEAT(expr, gt)
//!       | NEST(nm, expr) | OR(nm, expr, expr) | ORELSE(nm, expr, expr)
//!       | EMPTY
//! tac  := ident ('[' ident (',' ident)* ']')?
//! gt   := "quoted goal type" | bare goal type without top-level ',' ']' ')'
//! ```
//!
//! Lines whose first non-blank character is `#` are comments.

use super::{
    empty_fun, lift_typed, nest, or_comb, orelse_comb, repeat_alpha, tensor, then_pick, CombinatorError,
    PSGraphFun,
};
use crate::goaltype::{parse_goaltype, GoalType};
use crate::psgraph::{PSGraph, TacticSpec};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq)]
pub enum StrategyExpr {
    Lift { name: String, tac: TacticSpec, ins: Vec<GoalType>, outs: Vec<GoalType> },
    Then(Box<StrategyExpr>, Box<StrategyExpr>),
    Tensor(Box<StrategyExpr>, Box<StrategyExpr>),
    Repeat(Box<StrategyExpr>, GoalType),
    Nest(String, Box<StrategyExpr>),
    Or(String, Box<StrategyExpr>, Box<StrategyExpr>),
    OrElse(String, Box<StrategyExpr>, Box<StrategyExpr>),
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("strategy parse error at {position}: expected {expected}")]
    Parse { position: usize, expected: String },
    #[error(transparent)]
    Combinator(#[from] CombinatorError),
}

struct Parser {
    chars: Vec<char>,
    i: usize,
}

type Res<T> = Result<T, StrategyError>;

impl Parser {
    fn err<T>(&self, expected: &str) -> Res<T> {
        Err(StrategyError::Parse { position: self.i, expected: expected.into() })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn skip(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => self.i += 1,
                Some('#') if self.at_line_start() => {
                    while self.peek().is_some_and(|c| c != '\n') {
                        self.i += 1;
                    }
                }
                _ => return,
            }
        }
    }

    fn at_line_start(&self) -> bool {
        self.chars[..self.i].iter().rev().take_while(|c| **c != '\n').all(|c| c.is_whitespace())
    }

    fn expect(&mut self, c: char) -> Res<()> {
        self.skip();
        if self.peek() == Some(c) {
            self.i += 1;
            Ok(())
        } else {
            self.err(&format!("'{c}'"))
        }
    }

    fn ident(&mut self) -> Res<String> {
        self.skip();
        let start = self.i;
        if !self.peek().is_some_and(|c| c.is_alphabetic() || c == '_') {
            return self.err("an identifier");
        }
        while self.peek().is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '\'') {
            self.i += 1;
        }
        Ok(self.chars[start..self.i].iter().collect())
    }

    fn tactic(&mut self) -> Res<TacticSpec> {
        let tactic = self.ident()?;
        let mut thms = Vec::new();
        self.skip();
        if self.peek() == Some('[') {
            self.i += 1;
            loop {
                thms.push(self.ident()?);
                self.skip();
                match self.peek() {
                    Some(',') => self.i += 1,
                    Some(']') => {
                        self.i += 1;
                        break;
                    }
                    _ => return self.err("',' or ']'"),
                }
            }
        }
        Ok(TacticSpec { tactic, thms })
    }

    fn goaltype(&mut self) -> Res<GoalType> {
        self.skip();
        let (start, text) = if self.peek() == Some('"') {
            self.i += 1;
            let start = self.i;
            while self.peek().is_some_and(|c| c != '"') {
                self.i += 1;
            }
            if self.peek().is_none() {
                return self.err("closing '\"'");
            }
            let text: String = self.chars[start..self.i].iter().collect();
            self.i += 1;
            (start, text)
        } else {
            let start = self.i;
            let mut depth = 0usize;
            while let Some(c) = self.peek() {
                match c {
                    '(' => depth += 1,
                    ')' if depth == 0 => break,
                    ')' => depth -= 1,
                    ',' | ']' if depth == 0 => break,
                    '\n' => break,
                    _ => {}
                }
                self.i += 1;
            }
            (start, self.chars[start..self.i].iter().collect())
        };
        parse_goaltype(&text).map_err(|e| StrategyError::Parse {
            position: start + e.position,
            expected: format!("{} in goal type", e.expected),
        })
    }

    fn list(&mut self) -> Res<Vec<GoalType>> {
        self.expect('[')?;
        self.skip();
        let mut out = Vec::new();
        if self.peek() == Some(']') {
            self.i += 1;
            return Ok(out);
        }
        loop {
            out.push(self.goaltype()?);
            self.skip();
            match self.peek() {
                Some(',') => self.i += 1,
                Some(']') => {
                    self.i += 1;
                    return Ok(out);
                }
                _ => return self.err("',' or ']'"),
            }
        }
    }

    fn sub(&mut self) -> Res<Box<StrategyExpr>> {
        self.expect(',')?;
        Ok(Box::new(self.expr()?))
    }

    fn expr(&mut self) -> Res<StrategyExpr> {
        self.skip();
        let at = self.i;
        let kw = self.ident()?;
        if kw == "EMPTY" {
            return Ok(StrategyExpr::Empty);
        }
        self.expect('(')?;
        let e = match kw.as_str() {
            "LIFT" => {
                let name = self.ident()?;
                self.expect(',')?;
                let tac = self.tactic()?;
                self.expect(',')?;
                let ins = self.list()?;
                self.expect(',')?;
                let outs = self.list()?;
                StrategyExpr::Lift { name, tac, ins, outs }
            }
            "THEN" | "TENSOR" => {
                let f = Box::new(self.expr()?);
                let g = self.sub()?;
                if kw == "THEN" {
                    StrategyExpr::Then(f, g)
                } else {
                    StrategyExpr::Tensor(f, g)
                }
            }
            "REPEAT" => {
                let f = Box::new(self.expr()?);
                self.expect(',')?;
                StrategyExpr::Repeat(f, self.goaltype()?)
            }
            "NEST" => {
                let name = self.ident()?;
                StrategyExpr::Nest(name, self.sub()?)
            }
            "OR" | "ORELSE" => {
                let name = self.ident()?;
                let f = self.sub()?;
                let g = self.sub()?;
                if kw == "OR" {
                    StrategyExpr::Or(name, f, g)
                } else {
                    StrategyExpr::OrElse(name, f, g)
                }
            }
            _ => {
                self.i = at;
                return self.err("a combinator (LIFT, THEN, TENSOR, REPEAT, NEST, OR, ORELSE, EMPTY)");
            }
        };
        self.expect(')')?;
        Ok(e)
    }
}

pub fn parse_strategy(text: &str) -> Result<StrategyExpr, StrategyError> {
    let mut p = Parser { chars: text.chars().collect(), i: 0 };
    let e = p.expr()?;
    p.skip();
    if p.peek().is_some() {
        return p.err("end of input");
    }
    Ok(e)
}

/// THEN elaborates with the first maximal plugging.
pub fn elaborate(e: &StrategyExpr) -> PSGraphFun {
    match e {
        StrategyExpr::Lift { name, tac, ins, outs } => lift_typed(name, tac.clone(), ins.clone(), outs.clone()),
        StrategyExpr::Then(f, g) => then_pick(&elaborate(f), &elaborate(g)),
        StrategyExpr::Tensor(f, g) => tensor(&elaborate(f), &elaborate(g)),
        StrategyExpr::Repeat(f, a) => repeat_alpha(&elaborate(f), a.clone()),
        StrategyExpr::Nest(n, f) => nest(n, &elaborate(f)),
        StrategyExpr::Or(n, f, g) => or_comb(n, &elaborate(f), &elaborate(g)),
        StrategyExpr::OrElse(n, f, g) => orelse_comb(n, &elaborate(f), &elaborate(g)),
        StrategyExpr::Empty => empty_fun(),
    }
}

/// Parses, elaborates and applies to the empty PSGraph.
pub fn build_strategy(text: &str) -> Result<PSGraph, StrategyError> {
    Ok(elaborate(&parse_strategy(text)?).build()?)
}
