//! Goal types: the predicate language labelling graph edges, the goal nodes
//! that travel along them, and the registry of predicate matchers.

mod syntax;

pub use syntax::{comparable, parse_goaltype, Atom, Clause, GoalType, Literal, ParseError};

use crate::prover::tactics::{can_rewrite, is_trivial};
use crate::prover::{embeds, Context, Pnode};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub type Annotations = BTreeMap<String, String>;

/// A goal in transit on an edge. Carries only serialisable data; the live
/// goal is found in the proof plan through `pnode_key`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gnode {
    pub goal_text: String,
    pub pnode_key: String,
    #[serde(default)]
    pub annotations: Annotations,
}

impl Gnode {
    /// The synthetic generating node used when a goal first enters a graph.
    pub fn root() -> Gnode {
        Gnode { goal_text: String::new(), pnode_key: String::new(), annotations: Annotations::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GoalTypeError {
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("duplicate predicate `{0}`")]
    DuplicatePredicate(String),
    #[error("predicate `{pred}`: {message}")]
    BadArguments { pred: String, message: String },
}

/// `(prev, args, pnode, ctx) -> Some(annotation updates)` on success.
pub type Matcher =
    Arc<dyn Fn(&Gnode, &[String], &Pnode, &Context) -> Result<Option<Annotations>, String> + Send + Sync>;

#[derive(Clone, Default)]
pub struct PredicateRegistry {
    matchers: BTreeMap<String, Matcher>,
}

impl fmt::Debug for PredicateRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.matchers.keys()).finish()
    }
}

/// Result of matching one goal against a goal type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchOutcome {
    Matched(Gnode),
    /// The first clause that did not hold.
    Rejected { clause: String },
}

fn pure(f: impl Fn(&[String], &Pnode, &Context) -> Result<bool, String> + Send + Sync + 'static) -> Matcher {
    Arc::new(move |_prev, args, p, ctx| Ok(f(args, p, ctx)?.then(Annotations::new)))
}

fn no_args(args: &[String]) -> Result<(), String> {
    if args.is_empty() {
        Ok(())
    } else {
        Err("takes no arguments".into())
    }
}

impl PredicateRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `any`, `top_symbol(sym)`, `has_hyp`, `hyp_embeds`, `is_eq`, `is_imp`,
    /// `closed` and `can_rewrite(thm, ...)`.
    pub fn builtin() -> Self {
        let entries: Vec<(&str, Matcher)> = vec![
            // arguments to `any` are labels only
            ("any", pure(|_, _, _| Ok(true))),
            (
                "top_symbol",
                pure(|args, p, _| {
                    let [sym] = args else {
                        return Err("expects one symbol".into());
                    };
                    let want = match sym.as_str() {
                        "forall" | "!" | "∀" => "forall",
                        "imp" | "==>" => "imp",
                        "eq" | "=" => "eq",
                        other => return Err(format!("unknown symbol `{other}`")),
                    };
                    Ok(p.concl.top_symbol() == want)
                }),
            ),
            ("has_hyp", pure(|args, p, _| no_args(args).map(|_| !p.hyps.is_empty()))),
            (
                "hyp_embeds",
                pure(|args, p, _| no_args(args).map(|_| p.hyps.iter().any(|h| embeds(h, &p.concl)))),
            ),
            (
                "is_eq",
                pure(|args, p, _| no_args(args).map(|_| p.concl.top_symbol() == "eq")),
            ),
            (
                "is_imp",
                pure(|args, p, _| no_args(args).map(|_| p.concl.top_symbol() == "imp")),
            ),
            ("closed", pure(|args, p, _| no_args(args).map(|_| is_trivial(&p.concl)))),
            (
                "can_rewrite",
                pure(|args, p, ctx| {
                    let thms = ctx.resolve_theorems(args).map_err(|e| e.to_string())?;
                    Ok(can_rewrite(&thms, &p.concl))
                }),
            ),
        ];
        entries.into_iter().fold(Self::empty(), |reg, (name, m)| {
            reg.register(name, m).expect("builtin names are unique")
        })
    }

    pub fn register(mut self, name: &str, matcher: Matcher) -> Result<Self, GoalTypeError> {
        if self.matchers.contains_key(name) {
            return Err(GoalTypeError::DuplicatePredicate(name.into()));
        }
        self.matchers.insert(name.into(), matcher);
        Ok(self)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.matchers.contains_key(name)
    }

    /// Names used by `gt` that are not registered.
    pub fn unknown_in(&self, gt: &GoalType) -> Vec<String> {
        let mut out: Vec<String> =
            gt.atoms().map(|a| a.pred).filter(|p| !self.contains(p)).collect();
        out.dedup();
        out
    }

    fn eval_atom(
        &self,
        atom: &Atom,
        prev: &Gnode,
        p: &Pnode,
        ctx: &Context,
    ) -> Result<Option<Annotations>, GoalTypeError> {
        let m = self
            .matchers
            .get(&atom.pred)
            .ok_or_else(|| GoalTypeError::UnknownPredicate(atom.pred.clone()))?;
        m(prev, &atom.args, p, ctx)
            .map_err(|message| GoalTypeError::BadArguments { pred: atom.pred.clone(), message })
    }

    /// Matches with an explanation of the first failing clause.
    pub fn check(
        &self,
        prev: &Gnode,
        gt: &GoalType,
        p: &Pnode,
        ctx: &Context,
    ) -> Result<MatchOutcome, GoalTypeError> {
        // every predicate must resolve, even in clauses after a failure
        if let Some(name) = self.unknown_in(gt).into_iter().next() {
            return Err(GoalTypeError::UnknownPredicate(name));
        }
        let mut annotations = prev.annotations.clone();
        for clause in &gt.clauses {
            let mut holds = None;
            for lit in clause.literals() {
                let res = self.eval_atom(&lit.atom, prev, p, ctx)?;
                let updates = match (res, lit.negated) {
                    (Some(u), false) => Some(u),
                    (None, true) => Some(Annotations::new()),
                    _ => None,
                };
                if updates.is_some() {
                    holds = updates;
                    break;
                }
            }
            match holds {
                Some(updates) => annotations.extend(updates),
                None => return Ok(MatchOutcome::Rejected { clause: clause.to_string() }),
            }
        }
        Ok(MatchOutcome::Matched(Gnode {
            goal_text: p.goal_text(),
            pnode_key: p.id.clone(),
            annotations,
        }))
    }

    /// `Some(gnode for p)` iff every clause holds.
    pub fn match_goal(
        &self,
        prev: &Gnode,
        gt: &GoalType,
        p: &Pnode,
        ctx: &Context,
    ) -> Result<Option<Gnode>, GoalTypeError> {
        Ok(match self.check(prev, gt, p, ctx)? {
            MatchOutcome::Matched(g) => Some(g),
            MatchOutcome::Rejected { .. } => None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prover::{parse_sequent, Pplan};
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn pnode(s: &str) -> Pnode {
        Pplan::from_sequent(parse_sequent(s).unwrap()).0
    }

    fn matches(gt: &str, goal: &str) -> bool {
        let reg = PredicateRegistry::builtin();
        reg.match_goal(&Gnode::root(), &parse_goaltype(gt).unwrap(), &pnode(goal), &Context::builtin())
            .unwrap()
            .is_some()
    }

    #[test]
    fn any_always_matches() {
        assert!(matches("any", "|- 0 = S 0"));
        assert!(matches("any(alpha)", "x = x |- !y. y = y"));
    }

    #[test]
    fn top_symbol() {
        assert!(matches("top_symbol(forall)", "|- !x. x + 0 = x"));
        assert!(!matches("top_symbol(forall)", "|- 0 + 0 = 0"));
        assert!(matches("top_symbol(forall); not closed", "|- !x. x = x"));
    }

    #[test]
    fn hyp_embeds_gates_step_cases() {
        assert!(matches("hyp_embeds", "x + 0 = x |- S x + 0 = S x"));
        assert!(!matches("hyp_embeds", "|- 0 + 0 = 0"));
        assert!(matches("not hyp_embeds", "|- 0 + 0 = 0"));
        assert!(matches("hyp_embeds or is_eq", "|- 0 = 0"));
        assert!(!matches("hyp_embeds or is_imp", "|- 0 = 0"));
    }

    #[test]
    fn closed_and_rewritable() {
        assert!(matches("closed", "|- S x = S x"));
        assert!(!matches("closed", "|- S x = x"));
        assert!(matches("can_rewrite(add_0)", "|- 0 + x = x"));
        assert!(!matches("can_rewrite(add_S)", "|- 0 + x = x"));
    }

    #[test]
    fn matched_gnode_refreshes_goal_and_keeps_annotations() {
        let reg = PredicateRegistry::builtin();
        let mut prev = Gnode::root();
        prev.annotations.insert("depth".into(), "1".into());
        let p = pnode("|- 0 = 0");
        let g = reg
            .match_goal(&prev, &GoalType::any(), &p, &Context::builtin())
            .unwrap()
            .unwrap();
        assert_eq!(g.goal_text, "|- 0 = 0");
        assert_eq!(g.pnode_key, p.id);
        assert_eq!(g.annotations, prev.annotations);
    }

    #[test]
    fn unknown_predicate_is_an_error_not_a_failed_match() {
        let reg = PredicateRegistry::builtin();
        let gt = parse_goaltype("closed; typo").unwrap();
        let r = reg.match_goal(&Gnode::root(), &gt, &pnode("|- 0 = S 0"), &Context::builtin());
        assert_eq!(r, Err(GoalTypeError::UnknownPredicate("typo".into())));
    }

    #[test]
    fn rejection_names_the_failing_clause() {
        let reg = PredicateRegistry::builtin();
        let gt = parse_goaltype("is_eq; hyp_embeds or has_hyp").unwrap();
        let out = reg.check(&Gnode::root(), &gt, &pnode("|- 0 = 0"), &Context::builtin()).unwrap();
        assert_eq!(out, MatchOutcome::Rejected { clause: "hyp_embeds or has_hyp".into() });
    }

    #[test]
    fn registration() {
        let reg = PredicateRegistry::empty().register("any", pure(|_, _, _| Ok(true))).unwrap();
        assert!(reg.contains("any"));
        assert!(matches!(
            reg.register("any", pure(|_, _, _| Ok(true))),
            Err(GoalTypeError::DuplicatePredicate(_))
        ));
    }

    #[test]
    fn annotating_matchers_merge_updates() {
        let calls = Arc::new(AtomicUsize::new(0));
        let c = calls.clone();
        let tag: Matcher = Arc::new(move |_, args, _, _| {
            c.fetch_add(1, Ordering::SeqCst);
            Ok(Some([("tag".to_string(), args.join(","))].into_iter().collect()))
        });
        let reg = PredicateRegistry::builtin().register("tag", tag).unwrap();
        let gt = parse_goaltype("tag(a); is_eq").unwrap();
        let g = reg
            .match_goal(&Gnode::root(), &gt, &pnode("|- 0 = 0"), &Context::builtin())
            .unwrap()
            .unwrap();
        assert_eq!(g.annotations.get("tag").map(String::as_str), Some("a"));
        assert_eq!(calls.load(Ordering::SeqCst), 1);
    }
}
