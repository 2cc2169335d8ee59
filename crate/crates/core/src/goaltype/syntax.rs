//! Goal-type expressions.
//!
//! ```text
//! gt     := clause (';' clause)*
//! clause := lit ('or' lit)*
//! lit    := 'not'* atom
//! atom   := ident ('(' arg (',' arg)* ')')?
//! ```
//!
//! `;` is conjunction and binds loosest, then `or`, then `not`. Repeated
//! `not`s cancel pairwise at parse time.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("goal-type parse error at {position}: expected {expected}")]
pub struct ParseError {
    pub position: usize,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub negated: bool,
    pub atom: Atom,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Clause {
    Atom(Atom),
    Not(Atom),
    Or(Vec<Literal>),
}

/// A conjunction of clauses.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GoalType {
    pub clauses: Vec<Clause>,
}

impl Atom {
    pub fn new(pred: &str, args: &[&str]) -> Atom {
        Atom { pred: pred.into(), args: args.iter().map(|a| a.to_string()).collect() }
    }
}

impl Literal {
    pub fn pos(atom: Atom) -> Literal {
        Literal { negated: false, atom }
    }

    pub fn neg(atom: Atom) -> Literal {
        Literal { negated: true, atom }
    }
}

impl Clause {
    pub fn literals(&self) -> Vec<Literal> {
        match self {
            Clause::Atom(a) => vec![Literal::pos(a.clone())],
            Clause::Not(a) => vec![Literal::neg(a.clone())],
            Clause::Or(ls) => ls.clone(),
        }
    }

    fn from_literals(mut lits: Vec<Literal>) -> Clause {
        if lits.len() == 1 {
            let l = lits.pop().expect("one literal");
            if l.negated {
                Clause::Not(l.atom)
            } else {
                Clause::Atom(l.atom)
            }
        } else {
            Clause::Or(lits)
        }
    }

    fn normalized(&self) -> Clause {
        match self {
            Clause::Or(ls) => {
                let mut ls = ls.clone();
                ls.sort();
                Clause::Or(ls)
            }
            c => c.clone(),
        }
    }
}

impl GoalType {
    pub fn any() -> GoalType {
        GoalType { clauses: vec![Clause::Atom(Atom::new("any", &[]))] }
    }

    /// Clause and disjunct order sorted; argument text is already trimmed by
    /// the parser.
    pub fn normalized(&self) -> GoalType {
        let mut clauses: Vec<Clause> = self.clauses.iter().map(Clause::normalized).collect();
        clauses.sort();
        GoalType { clauses }
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        self.clauses.iter().flat_map(|c| c.literals().into_iter().map(|l| l.atom))
    }
}

/// Normalized syntactic equality.
pub fn comparable(a: &GoalType, b: &GoalType) -> bool {
    a.normalized() == b.normalized()
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            write!(f, "({})", self.args.join(", "))?;
        }
        Ok(())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "not ")?;
        }
        write!(f, "{}", self.atom)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lits = self.literals();
        for (i, l) in lits.iter().enumerate() {
            if i > 0 {
                write!(f, " or ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Display for GoalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for GoalType {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        parse_goaltype(s)
    }
}

struct Cursor {
    chars: Vec<(usize, char)>,
    i: usize,
}

impl Cursor {
    fn skip_ws(&mut self) {
        while self.chars.get(self.i).is_some_and(|(_, c)| c.is_whitespace()) {
            self.i += 1;
        }
    }

    fn pos(&self) -> usize {
        self.i
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).map(|(_, c)| *c)
    }

    fn err<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError { position: self.pos(), expected: expected.into() })
    }

    fn ident(&mut self) -> Option<String> {
        let start = self.i;
        match self.peek() {
            Some(c) if c.is_alphabetic() || c == '_' => {}
            _ => return None,
        }
        while self.peek().is_some_and(|c| c.is_alphanumeric() || c == '_') {
            self.i += 1;
        }
        Some(self.chars[start..self.i].iter().map(|(_, c)| c).collect())
    }

    /// Consumes `kw` if it appears as a whole word.
    fn keyword(&mut self, kw: &str) -> bool {
        let save = self.i;
        match self.ident() {
            Some(w) if w == kw => true,
            _ => {
                self.i = save;
                false
            }
        }
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let mut negated = false;
        loop {
            self.skip_ws();
            if self.keyword("not") {
                negated = !negated;
            } else {
                break;
            }
        }
        Ok(Literal { negated, atom: self.atom()? })
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        self.skip_ws();
        let start = self.i;
        let Some(pred) = self.ident() else {
            return self.err("a predicate name");
        };
        if pred == "not" || pred == "or" {
            self.i = start;
            return self.err("a predicate name");
        }
        self.skip_ws();
        let mut args = Vec::new();
        if self.peek() == Some('(') {
            self.i += 1;
            loop {
                self.skip_ws();
                let from = self.i;
                while self.peek().is_some_and(|c| !matches!(c, '(' | ')' | ',' | ';')) {
                    self.i += 1;
                }
                let arg: String = self.chars[from..self.i].iter().map(|(_, c)| c).collect();
                let arg = arg.trim();
                if arg.is_empty() {
                    return self.err("an argument");
                }
                args.push(arg.to_string());
                match self.peek() {
                    Some(',') => self.i += 1,
                    Some(')') => {
                        self.i += 1;
                        break;
                    }
                    _ => return self.err("',' or ')'"),
                }
            }
        }
        Ok(Atom { pred, args })
    }

    fn clause(&mut self) -> Result<Clause, ParseError> {
        let mut lits = vec![self.literal()?];
        loop {
            self.skip_ws();
            if self.keyword("or") {
                lits.push(self.literal()?);
            } else {
                return Ok(Clause::from_literals(lits));
            }
        }
    }
}

/// Parses the textual goal-type syntax; errors carry a character position.
pub fn parse_goaltype(text: &str) -> Result<GoalType, ParseError> {
    let mut c = Cursor { chars: text.char_indices().collect(), i: 0 };
    let mut clauses = vec![c.clause()?];
    loop {
        c.skip_ws();
        match c.peek() {
            None => return Ok(GoalType { clauses }),
            Some(';') => {
                c.i += 1;
                clauses.push(c.clause()?);
            }
            Some(_) => return c.err("';', 'or' or end of input"),
        }
    }
}
