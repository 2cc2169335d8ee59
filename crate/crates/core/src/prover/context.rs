//! The prover contract: theorems, tactics, and the `Appf` produced by
//! specialising a tactic to its theorem arguments.

use super::plan::{Pnode, Pplan};
use super::syntax::{parse_term, SyntaxError};
use super::tactics;
use super::term::{match_term, Sequent, Subst, Term};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// An oriented equation `lhs -> rhs`; all variables are universally
/// quantified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Thm {
    pub name: String,
    pub lhs: Term,
    pub rhs: Term,
}

impl Thm {
    pub fn new(name: &str, lhs: Term, rhs: Term) -> Result<Thm, BackendError> {
        let (mut l, mut r) = (BTreeSet::new(), BTreeSet::new());
        lhs.vars(&mut l);
        rhs.vars(&mut r);
        if !r.is_subset(&l) {
            return Err(BackendError::BadTheorem(name.into()));
        }
        Ok(Thm { name: name.into(), lhs, rhs })
    }

    /// Parses `lhs = rhs`.
    pub fn parse(name: &str, eqn: &str) -> Result<Thm, BackendError> {
        let (l, r) = eqn
            .split_once('=')
            .ok_or_else(|| BackendError::BadTheorem(name.into()))?;
        Thm::new(name, parse_term(l)?, parse_term(r)?)
    }

    /// Instance of `rhs` when `lhs` matches `t`.
    pub fn rewrite_root(&self, t: &Term) -> Option<Term> {
        let mut s = Subst::new();
        match_term(&self.lhs, t, &mut s).then(|| self.rhs.subst(&s))
    }
}

impl fmt::Display for Thm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} = {}", self.name, self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("unknown tactic `{0}`")]
    UnknownTactic(String),
    #[error("unknown theorem `{0}`")]
    UnknownTheorem(String),
    #[error("malformed theorem `{0}`")]
    BadTheorem(String),
    #[error("duplicate name `{0}`")]
    Duplicate(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

pub type Alternatives = Box<dyn Iterator<Item = Vec<Sequent>> + Send>;

/// A backend tactic. Each yielded item is one alternative: the list of
/// subgoals replacing the input goal. No items means the tactic failed.
pub trait Tactic: Send + Sync {
    fn run(&self, thms: &[Thm], goal: &Sequent) -> Alternatives;
}

impl<F> Tactic for F
where
    F: Fn(&[Thm], &Sequent) -> Vec<Vec<Sequent>> + Send + Sync,
{
    fn run(&self, thms: &[Thm], goal: &Sequent) -> Alternatives {
        Box::new(self(thms, goal).into_iter())
    }
}

pub type BranchSeq = Box<dyn Iterator<Item = (Vec<Pnode>, Pplan)> + Send>;

/// `(pnode, pplan) -> seq of (new pnodes, updated pplan)`.
pub type Appf = Arc<dyn Fn(&Pnode, &Pplan) -> BranchSeq + Send + Sync>;

/// Specialises `tac` to the theorem arguments. `label` is what the journal
/// records for each application.
pub fn apply_tactic(thms: Vec<Thm>, tac: Arc<dyn Tactic>, label: String) -> Appf {
    Arc::new(move |goal: &Pnode, plan: &Pplan| -> BranchSeq {
        let goal = goal.clone();
        let plan = plan.clone();
        let label = label.clone();
        let alts = tac.run(&thms, &goal.sequent());
        Box::new(alts.filter_map(move |subgoals| plan.refine(&goal, &label, subgoals).ok()))
    })
}

#[derive(Clone, Default)]
pub struct Context {
    theorems: BTreeMap<String, Thm>,
    tactics: BTreeMap<String, Arc<dyn Tactic>>,
}

impl fmt::Debug for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Context")
            .field("theorems", &self.theorems.keys().collect::<Vec<_>>())
            .field("tactics", &self.tactics.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Context {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Peano addition/multiplication rules and the built-in tactic suite.
    pub fn builtin() -> Self {
        let mut ctx = Context::empty();
        for (name, eqn) in [
            ("add_0", "0 + y = y"),
            ("add_S", "S x + y = S (x + y)"),
            ("mul_0", "0 * y = 0"),
            ("mul_S", "S x * y = y + x * y"),
        ] {
            ctx = ctx
                .with_theorem(Thm::parse(name, eqn).expect("builtin theorem"))
                .expect("unique builtin");
        }
        for (name, tac) in tactics::builtin_suite() {
            ctx = ctx.with_tactic(name, tac).expect("unique builtin");
        }
        ctx
    }

    pub fn with_theorem(mut self, thm: Thm) -> Result<Self, BackendError> {
        if self.theorems.contains_key(&thm.name) {
            return Err(BackendError::Duplicate(thm.name));
        }
        self.theorems.insert(thm.name.clone(), thm);
        Ok(self)
    }

    pub fn with_tactic(mut self, name: &str, tac: Arc<dyn Tactic>) -> Result<Self, BackendError> {
        if self.tactics.contains_key(name) {
            return Err(BackendError::Duplicate(name.into()));
        }
        self.tactics.insert(name.into(), tac);
        Ok(self)
    }

    pub fn theorem(&self, name: &str) -> Result<&Thm, BackendError> {
        self.theorems.get(name).ok_or_else(|| BackendError::UnknownTheorem(name.into()))
    }

    pub fn theorems(&self) -> impl Iterator<Item = &Thm> {
        self.theorems.values()
    }

    pub fn tactic(&self, name: &str) -> Result<Arc<dyn Tactic>, BackendError> {
        self.tactics
            .get(name)
            .cloned()
            .ok_or_else(|| BackendError::UnknownTactic(name.into()))
    }

    pub fn has_tactic(&self, name: &str) -> bool {
        self.tactics.contains_key(name)
    }

    /// Resolves theorem names; an empty list means every registered theorem.
    pub fn resolve_theorems(&self, names: &[String]) -> Result<Vec<Thm>, BackendError> {
        if names.is_empty() {
            return Ok(self.theorems.values().cloned().collect());
        }
        names.iter().map(|n| self.theorem(n).cloned()).collect()
    }

    /// Looks up a tactic by name and specialises it to named theorems.
    pub fn appf(&self, tactic: &str, thm_names: &[String]) -> Result<Appf, BackendError> {
        let tac = self.tactic(tactic)?;
        let thms = self.resolve_theorems(thm_names)?;
        let label = if thm_names.is_empty() {
            tactic.to_string()
        } else {
            format!("{tactic}[{}]", thm_names.join(","))
        };
        Ok(apply_tactic(thms, tac, label))
    }

    /// `u` is an instance of the pattern `t`.
    pub fn match_terms(&self, (t, u): (&Term, &Term)) -> bool {
        match_term(t, u, &mut Subst::new())
    }
}
