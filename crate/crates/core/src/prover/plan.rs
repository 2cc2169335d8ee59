//! Partial proofs: open goals (`Pnode`s) inside a `Pplan`, plus the journal
//! of closed goals used to audit a finished proof.

use super::term::{Prop, Sequent};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub type PnodeId = String;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pnode {
    pub id: PnodeId,
    pub hyps: Vec<Prop>,
    pub concl: Prop,
}

impl Pnode {
    pub fn sequent(&self) -> Sequent {
        Sequent::new(self.hyps.clone(), self.concl.clone())
    }

    /// Goal text as carried by goal nodes on graph edges.
    pub fn goal_text(&self) -> String {
        self.sequent().to_string()
    }
}

impl fmt::Display for Pnode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.id, self.sequent())
    }
}

/// One closed goal: `goal` was consumed by `tactic`, producing `children`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JournalEntry {
    pub goal: Pnode,
    pub tactic: String,
    pub children: Vec<Pnode>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pplan {
    pub root: Pnode,
    open: BTreeMap<PnodeId, Pnode>,
    journal: Vec<Arc<JournalEntry>>,
    next_id: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("goal has free variables: {0:?}")]
    OpenTerm(Vec<String>),
    #[error("goal {0} is not open in this plan")]
    NotOpen(PnodeId),
}

/// Starts a proof of a closed proposition.
pub fn init_pplan(goal: Prop) -> Result<(Pnode, Pplan), PlanError> {
    let free = goal.free_vars();
    if !free.is_empty() {
        return Err(PlanError::OpenTerm(free.into_iter().collect()));
    }
    Ok(Pplan::from_sequent(Sequent::new(vec![], goal)))
}

impl Pplan {
    /// Starts a plan from an arbitrary sequent; free variables are treated as
    /// fixed constants.
    pub fn from_sequent(s: Sequent) -> (Pnode, Pplan) {
        let root = Pnode { id: "p0".into(), hyps: s.hyps, concl: s.concl };
        let open = [(root.id.clone(), root.clone())].into_iter().collect();
        let plan = Pplan { root: root.clone(), open, journal: vec![], next_id: 1 };
        (root, plan)
    }

    pub fn open_goals(&self) -> impl Iterator<Item = &Pnode> {
        self.open.values()
    }

    pub fn open_ids(&self) -> Vec<PnodeId> {
        self.open.keys().cloned().collect()
    }

    pub fn get(&self, id: &str) -> Option<&Pnode> {
        self.open.get(id)
    }

    pub fn is_complete(&self) -> bool {
        self.open.is_empty()
    }

    pub fn journal(&self) -> &[Arc<JournalEntry>] {
        &self.journal
    }

    /// Closes `goal` with `tactic`, opening one fresh pnode per sequent.
    pub fn refine(
        &self,
        goal: &Pnode,
        tactic: &str,
        subgoals: Vec<Sequent>,
    ) -> Result<(Vec<Pnode>, Pplan), PlanError> {
        if !self.open.contains_key(&goal.id) {
            return Err(PlanError::NotOpen(goal.id.clone()));
        }
        let mut next = self.clone();
        next.open.remove(&goal.id);
        let mut children = Vec::with_capacity(subgoals.len());
        for s in subgoals {
            let id = format!("p{}", next.next_id);
            next.next_id += 1;
            let node = Pnode { id: id.clone(), hyps: s.hyps, concl: s.concl };
            next.open.insert(id, node.clone());
            children.push(node);
        }
        next.journal.push(Arc::new(JournalEntry {
            goal: goal.clone(),
            tactic: tactic.to_string(),
            children: children.clone(),
        }));
        Ok((children, next))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prover::syntax::parse_prop;

    #[test]
    fn init_rejects_free_variables() {
        let (root, plan) = init_pplan(parse_prop("!x. x + 0 = x").unwrap()).unwrap();
        assert_eq!(plan.open_ids(), vec![root.id.clone()]);
        assert!(plan.journal().is_empty());
        assert_eq!(
            init_pplan(parse_prop("x = 0").unwrap()),
            Err(PlanError::OpenTerm(vec!["x".into()]))
        );
    }

    #[test]
    fn refine_conserves_goals() {
        let (root, plan) = init_pplan(parse_prop("0 = 0").unwrap()).unwrap();
        let (kids, next) = plan
            .refine(&root, "id", vec![root.sequent(), root.sequent()])
            .unwrap();
        assert_eq!(kids.len(), 2);
        assert_eq!(next.open_ids(), vec!["p1".to_string(), "p2".to_string()]);
        assert!(next.refine(&root, "id", vec![]).is_err());
    }
}
