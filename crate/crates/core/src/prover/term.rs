//! Peano terms, propositions and sequents, with the syntactic operations the
//! tactics need: substitution, first-order matching and homeomorphic
//! embedding.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Zero,
    Succ(Box<Term>),
    Plus(Box<Term>, Box<Term>),
    Times(Box<Term>, Box<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prop {
    Eq(Term, Term),
    Imp(Box<Prop>, Box<Prop>),
    Forall(String, Box<Prop>),
}

/// A goal: hypotheses entail the conclusion.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequent {
    pub hyps: Vec<Prop>,
    pub concl: Prop,
}

pub type Subst = BTreeMap<String, Term>;

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn succ(t: Term) -> Term {
        Term::Succ(Box::new(t))
    }

    pub fn plus(a: Term, b: Term) -> Term {
        Term::Plus(Box::new(a), Box::new(b))
    }

    pub fn times(a: Term, b: Term) -> Term {
        Term::Times(Box::new(a), Box::new(b))
    }

    /// `S^n 0`.
    pub fn numeral(n: usize) -> Term {
        (0..n).fold(Term::Zero, |t, _| Term::succ(t))
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Zero => 1,
            Term::Succ(t) => 1 + t.size(),
            Term::Plus(a, b) | Term::Times(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Zero => 0,
            Term::Succ(t) => 1 + t.depth(),
            Term::Plus(a, b) | Term::Times(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Zero => {}
            Term::Succ(t) => t.vars(out),
            Term::Plus(a, b) | Term::Times(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    pub fn subst(&self, s: &Subst) -> Term {
        match self {
            Term::Var(v) => s.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Zero => Term::Zero,
            Term::Succ(t) => Term::succ(t.subst(s)),
            Term::Plus(a, b) => Term::plus(a.subst(s), b.subst(s)),
            Term::Times(a, b) => Term::times(a.subst(s), b.subst(s)),
        }
    }

    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var(_) | Term::Zero => vec![],
            Term::Succ(t) => vec![t],
            Term::Plus(a, b) | Term::Times(a, b) => vec![a, b],
        }
    }

    /// All subterm positions in pre-order: outermost first, then left to right.
    pub fn positions(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        fn walk(t: &Term, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            out.push(path.clone());
            for (i, c) in t.children().into_iter().enumerate() {
                path.push(i);
                walk(c, path, out);
                path.pop();
            }
        }
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn at(&self, pos: &[usize]) -> Option<&Term> {
        match pos.split_first() {
            None => Some(self),
            Some((i, rest)) => self.children().get(*i).and_then(|c| c.at(rest)),
        }
    }

    pub fn replace_at(&self, pos: &[usize], new: Term) -> Term {
        let Some((i, rest)) = pos.split_first() else {
            return new;
        };
        match (self, i) {
            (Term::Succ(t), 0) => Term::succ(t.replace_at(rest, new)),
            (Term::Plus(a, b), 0) => Term::plus(a.replace_at(rest, new), (**b).clone()),
            (Term::Plus(a, b), 1) => Term::plus((**a).clone(), b.replace_at(rest, new)),
            (Term::Times(a, b), 0) => Term::times(a.replace_at(rest, new), (**b).clone()),
            (Term::Times(a, b), 1) => Term::times((**a).clone(), b.replace_at(rest, new)),
            _ => self.clone(),
        }
    }

    /// Replaces every occurrence of `from` (outermost first) by `to`.
    pub fn replace_all(&self, from: &Term, to: &Term) -> Term {
        if self == from {
            return to.clone();
        }
        match self {
            Term::Var(_) | Term::Zero => self.clone(),
            Term::Succ(t) => Term::succ(t.replace_all(from, to)),
            Term::Plus(a, b) => Term::plus(a.replace_all(from, to), b.replace_all(from, to)),
            Term::Times(a, b) => Term::times(a.replace_all(from, to), b.replace_all(from, to)),
        }
    }
}

/// First-order matching: extends `s` so that `pattern.subst(s) == target`.
pub fn match_term(pattern: &Term, target: &Term, s: &mut Subst) -> bool {
    match (pattern, target) {
        (Term::Var(v), _) => match s.get(v) {
            Some(bound) => bound == target,
            None => {
                s.insert(v.clone(), target.clone());
                true
            }
        },
        (Term::Zero, Term::Zero) => true,
        (Term::Succ(p), Term::Succ(t)) => match_term(p, t, s),
        (Term::Plus(p1, p2), Term::Plus(t1, t2)) | (Term::Times(p1, p2), Term::Times(t1, t2)) => {
            match_term(p1, t1, s) && match_term(p2, t2, s)
        }
        _ => false,
    }
}

impl Prop {
    pub fn eq(a: Term, b: Term) -> Prop {
        Prop::Eq(a, b)
    }

    pub fn imp(a: Prop, b: Prop) -> Prop {
        Prop::Imp(Box::new(a), Box::new(b))
    }

    pub fn forall(v: &str, p: Prop) -> Prop {
        Prop::Forall(v.to_string(), Box::new(p))
    }

    pub fn size(&self) -> usize {
        match self {
            Prop::Eq(a, b) => 1 + a.size() + b.size(),
            Prop::Imp(a, b) => 1 + a.size() + b.size(),
            Prop::Forall(_, p) => 1 + p.size(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut BTreeSet::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut BTreeSet<String>, out: &mut BTreeSet<String>) {
        match self {
            Prop::Eq(a, b) => {
                let mut vs = BTreeSet::new();
                a.vars(&mut vs);
                b.vars(&mut vs);
                out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
            }
            Prop::Imp(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Prop::Forall(v, p) => {
                let fresh = bound.insert(v.clone());
                p.collect_free(bound, out);
                if fresh {
                    bound.remove(v);
                }
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Prop::Eq(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Prop::Imp(a, b) => {
                a.all_names(out);
                b.all_names(out);
            }
            Prop::Forall(v, p) => {
                out.insert(v.clone());
                p.all_names(out);
            }
        }
    }

    /// Substitutes `t` for free occurrences of `var`. Callers pick `t` so that
    /// no capture can occur (fresh names only).
    pub fn subst_var(&self, var: &str, t: &Term) -> Prop {
        match self {
            Prop::Eq(a, b) => {
                let s: Subst = [(var.to_string(), t.clone())].into_iter().collect();
                Prop::Eq(a.subst(&s), b.subst(&s))
            }
            Prop::Imp(a, b) => Prop::imp(a.subst_var(var, t), b.subst_var(var, t)),
            Prop::Forall(v, p) if v == var => self.clone(),
            Prop::Forall(v, p) => Prop::forall(v, p.subst_var(var, t)),
        }
    }

    /// Applies `f` to every maximal term inside the proposition.
    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Prop {
        match self {
            Prop::Eq(a, b) => Prop::Eq(f(a), f(b)),
            Prop::Imp(a, b) => Prop::imp(a.map_terms(f), b.map_terms(f)),
            Prop::Forall(v, p) => Prop::forall(v, p.map_terms(f)),
        }
    }

    /// Term slots in left-to-right order, paired with a path that
    /// [`Prop::replace_term`] understands.
    pub fn term_slots(&self) -> Vec<(Vec<usize>, &Term)> {
        let mut out = Vec::new();
        fn walk<'a>(p: &'a Prop, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'a Term)>) {
            match p {
                Prop::Eq(a, b) => {
                    path.push(0);
                    out.push((path.clone(), a));
                    path.pop();
                    path.push(1);
                    out.push((path.clone(), b));
                    path.pop();
                }
                Prop::Imp(a, b) => {
                    path.push(0);
                    walk(a, path, out);
                    path.pop();
                    path.push(1);
                    walk(b, path, out);
                    path.pop();
                }
                Prop::Forall(_, q) => {
                    path.push(0);
                    walk(q, path, out);
                    path.pop();
                }
            }
        }
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn replace_term(&self, slot: &[usize], new: Term) -> Prop {
        match (self, slot.split_first()) {
            (Prop::Eq(_, b), Some((0, []))) => Prop::Eq(new, b.clone()),
            (Prop::Eq(a, _), Some((1, []))) => Prop::Eq(a.clone(), new),
            (Prop::Imp(a, b), Some((0, rest))) => Prop::imp(a.replace_term(rest, new), (**b).clone()),
            (Prop::Imp(a, b), Some((1, rest))) => Prop::imp((**a).clone(), b.replace_term(rest, new)),
            (Prop::Forall(v, q), Some((0, rest))) => Prop::forall(v, q.replace_term(rest, new)),
            _ => self.clone(),
        }
    }

    pub fn top_symbol(&self) -> &'static str {
        match self {
            Prop::Eq(..) => "eq",
            Prop::Imp(..) => "imp",
            Prop::Forall(..) => "forall",
        }
    }
}

impl Sequent {
    pub fn new(hyps: Vec<Prop>, concl: Prop) -> Self {
        Sequent { hyps, concl }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = self.concl.free_vars();
        for h in &self.hyps {
            out.extend(h.free_vars());
        }
        out
    }

    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.concl.all_names(&mut out);
        for h in &self.hyps {
            h.all_names(&mut out);
        }
        out
    }

    /// `base` if unused in the sequent, otherwise `base'`, `base''`, ... or a
    /// numbered variant.
    pub fn fresh_name(&self, base: &str) -> String {
        let used = self.all_names();
        if !used.contains(base) {
            return base.to_string();
        }
        (1..)
            .map(|n| format!("{base}{n}"))
            .find(|c| !used.contains(c))
            .expect("unbounded search")
    }
}

/// Uniform labelled-tree view over terms and propositions, used by the
/// embedding check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    pub label: String,
    pub children: Vec<Tree>,
}

impl From<&Term> for Tree {
    fn from(t: &Term) -> Tree {
        let label = match t {
            Term::Var(v) => format!("var:{v}"),
            Term::Zero => "0".to_string(),
            Term::Succ(_) => "S".to_string(),
            Term::Plus(..) => "+".to_string(),
            Term::Times(..) => "*".to_string(),
        };
        Tree { label, children: t.children().into_iter().map(Tree::from).collect() }
    }
}

impl From<&Prop> for Tree {
    fn from(p: &Prop) -> Tree {
        match p {
            Prop::Eq(a, b) => Tree { label: "=".into(), children: vec![a.into(), b.into()] },
            Prop::Imp(a, b) => {
                Tree { label: "==>".into(), children: vec![(&**a).into(), (&**b).into()] }
            }
            Prop::Forall(v, q) => Tree { label: format!("!{v}"), children: vec![(&**q).into()] },
        }
    }
}

impl Tree {
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Tree::size).sum::<usize>()
    }
}

/// Homeomorphic embedding: `skel` is obtained from `t` by contracting edges,
/// preserving labels and left-to-right order.
pub fn tree_embeds(skel: &Tree, t: &Tree) -> bool {
    let couples = skel.label == t.label
        && skel.children.len() == t.children.len()
        && skel.children.iter().zip(&t.children).all(|(s, c)| tree_embeds(s, c));
    couples || t.children.iter().any(|c| tree_embeds(skel, c))
}

/// Either a term or a proposition; `embeds` accepts any mix of the two.
#[derive(Clone, Copy, Debug)]
pub enum Expr<'a> {
    Term(&'a Term),
    Prop(&'a Prop),
}

impl<'a> From<&'a Term> for Expr<'a> {
    fn from(t: &'a Term) -> Self {
        Expr::Term(t)
    }
}

impl<'a> From<&'a Prop> for Expr<'a> {
    fn from(p: &'a Prop) -> Self {
        Expr::Prop(p)
    }
}

impl Expr<'_> {
    fn tree(&self) -> Tree {
        match self {
            Expr::Term(t) => Tree::from(*t),
            Expr::Prop(p) => Tree::from(*p),
        }
    }
}

pub fn embeds<'a, 'b>(skel: impl Into<Expr<'a>>, t: impl Into<Expr<'b>>) -> bool {
    tree_embeds(&skel.into().tree(), &t.into().tree())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn atom(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t {
                Term::Var(_) | Term::Zero => write!(f, "{t}"),
                _ => write!(f, "({t})"),
            }
        }
        // precedence: sum < product < application
        fn product_operand(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t {
                Term::Plus(..) => write!(f, "({t})"),
                _ => write!(f, "{t}"),
            }
        }
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Zero => write!(f, "0"),
            Term::Succ(t) => {
                write!(f, "S ")?;
                atom(t, f)
            }
            Term::Plus(a, b) => {
                write!(f, "{a} + ")?;
                match **b {
                    Term::Plus(..) => write!(f, "({b})"),
                    _ => write!(f, "{b}"),
                }
            }
            Term::Times(a, b) => {
                product_operand(a, f)?;
                write!(f, " * ")?;
                match **b {
                    Term::Plus(..) | Term::Times(..) => write!(f, "({b})"),
                    _ => write!(f, "{b}"),
                }
            }
        }
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prop::Eq(a, b) => write!(f, "{a} = {b}"),
            Prop::Imp(a, b) => {
                match **a {
                    Prop::Imp(..) | Prop::Forall(..) => write!(f, "({a})")?,
                    _ => write!(f, "{a}")?,
                }
                write!(f, " ==> {b}")
            }
            Prop::Forall(v, p) => write!(f, "!{v}. {p}"),
        }
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, h) in self.hyps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{h}")?;
        }
        if !self.hyps.is_empty() {
            write!(f, " ")?;
        }
        write!(f, "|- {}", self.concl)
    }
}
