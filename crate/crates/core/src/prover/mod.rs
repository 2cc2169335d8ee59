//! Built-in desk-scale prover: Peano terms, sequent goals, equational
//! rewriting and structural induction behind the generic tactic contract.

pub mod context;
pub mod plan;
pub mod syntax;
pub mod tactics;
pub mod term;

pub use context::{apply_tactic, Appf, BackendError, BranchSeq, Context, Tactic, Thm};
pub use plan::{init_pplan, JournalEntry, PlanError, Pnode, PnodeId, Pplan};
pub use syntax::{parse_prop, parse_sequent, parse_term, SyntaxError};
pub use term::{embeds, Prop, Sequent, Term};

use std::collections::{BTreeMap, BTreeSet};

/// Audit failure found while replaying a journal.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("plan still has open goals")]
    Incomplete,
    #[error("journal entry for {0} cannot be re-derived")]
    NotRederivable(String),
    #[error("goal {0} is not justified by any journal entry")]
    Unjustified(String),
    #[error("bad tactic label `{0}`")]
    BadLabel(String),
}

/// Splits a journal label such as `rewrite[add_0,add_S]`.
pub fn split_label(label: &str) -> Option<(String, Vec<String>)> {
    match label.split_once('[') {
        None => Some((label.to_string(), vec![])),
        Some((name, rest)) => {
            let args = rest.strip_suffix(']')?;
            let args = args.split(',').map(|a| a.trim().to_string()).filter(|a| !a.is_empty());
            Some((name.to_string(), args.collect()))
        }
    }
}

/// Checks a finished proof: every journal entry's tactic, re-applied to its
/// recorded goal, yields exactly the recorded children (up to ids), and the
/// entries form a derivation tree rooted at the plan's root goal.
pub fn replay_journal(ctx: &Context, plan: &Pplan) -> Result<(), ReplayError> {
    if !plan.is_complete() {
        return Err(ReplayError::Incomplete);
    }
    let mut by_goal: BTreeMap<&str, &JournalEntry> = BTreeMap::new();
    for e in plan.journal() {
        by_goal.insert(&e.goal.id, e);
        let (name, thms) =
            split_label(&e.tactic).ok_or_else(|| ReplayError::BadLabel(e.tactic.clone()))?;
        let appf = ctx
            .appf(&name, &thms)
            .map_err(|_| ReplayError::BadLabel(e.tactic.clone()))?;
        let (_, fresh) = Pplan::from_sequent(e.goal.sequent());
        let start = fresh.get("p0").expect("root").clone();
        let want: Vec<Sequent> = e.children.iter().map(Pnode::sequent).collect();
        let found = appf(&start, &fresh)
            .any(|(kids, _)| kids.iter().map(Pnode::sequent).collect::<Vec<_>>() == want);
        if !found {
            return Err(ReplayError::NotRederivable(e.goal.id.clone()));
        }
    }
    let mut seen = BTreeSet::new();
    let mut todo = vec![plan.root.id.clone()];
    while let Some(id) = todo.pop() {
        let e = by_goal.get(id.as_str()).ok_or_else(|| ReplayError::Unjustified(id.clone()))?;
        seen.insert(id);
        todo.extend(e.children.iter().map(|c| c.id.clone()));
    }
    if seen.len() != by_goal.len() {
        return Err(ReplayError::Unjustified("unreachable journal entry".into()));
    }
    Ok(())
}
