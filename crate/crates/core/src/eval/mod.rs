//! Evaluation of a PSGraph against a goal.
//!
//! An evaluation is a list of branches, searched depth first. Each branch
//! holds a stack of graph frames (the top one is active) and its own proof
//! plan. Goals sit in FIFO queues on edges.

use crate::goaltype::{GoalType, GoalTypeError, Gnode, MatchOutcome, PredicateRegistry};
use crate::graph::{AppData, EdgeId, NodeId, OpenGraph};
use crate::prover::{init_pplan, parse_prop, BackendError, Context, Pnode, Pplan};
use crate::psgraph::{Mode, PSGraph, ValidationReport};
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

pub const HISTORY_CAP: usize = 1000;
pub const SEQ_CAP: usize = 64;

/// Backend plus predicate registry: everything evaluation consults.
#[derive(Clone, Debug)]
pub struct Env {
    pub ctx: Context,
    pub preds: PredicateRegistry,
}

impl Env {
    pub fn builtin() -> Env {
        Env { ctx: Context::builtin(), preds: PredicateRegistry::builtin() }
    }
}

impl Default for Env {
    fn default() -> Self {
        Env::builtin()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RejectedEdge {
    pub edge: String,
    pub gtype: String,
    pub failed_clause: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnmatchedSubgoal {
    pub goal: String,
    pub rejected_edges: Vec<RejectedEdge>,
}

/// Where and why a branch died.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FailureReport {
    pub branch: u64,
    pub frame_depth: usize,
    pub node: String,
    pub consumed_goal: String,
    pub unmatched_subgoals: Vec<UnmatchedSubgoal>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FailReason {
    NoMatchingInput,
    PointOfFailure(FailureReport),
    FuelExhausted,
    UserTerminated,
}

impl FailReason {
    pub fn code(&self) -> &'static str {
        match self {
            FailReason::NoMatchingInput => "no_matching_input",
            FailReason::PointOfFailure(_) => "point_of_failure",
            FailReason::FuelExhausted => "fuel_exhausted",
            FailReason::UserTerminated => "user_terminated",
        }
    }

    pub fn report(&self) -> Option<&FailureReport> {
        match self {
            FailReason::PointOfFailure(r) => Some(r),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Running,
    Complete(Box<Branch>),
    Failed(FailReason),
}

impl Status {
    pub fn code(&self) -> &'static str {
        match self {
            Status::Running => "running",
            Status::Complete(_) => "complete",
            Status::Failed(_) => "failed",
        }
    }
}

/// The nested node a frame was entered through.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Origin {
    pub node: NodeId,
    pub key: String,
    pub alt: usize,
    pub mode: Mode,
    pub token: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub graph: OpenGraph,
    pub origin: Option<Origin>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub id: u64,
    pub stack: Vec<Frame>,
    pub pplan: Pplan,
    /// Later ORELSE alternative `(token, alt)`; activated once it reaches
    /// the front of the branch list.
    pub deferred: Option<(u64, usize)>,
}

impl Branch {
    pub fn top(&self) -> &Frame {
        self.stack.last().expect("stack is never empty")
    }

    fn top_mut(&mut self) -> &mut Frame {
        self.stack.last_mut().expect("stack is never empty")
    }

    /// Every queued pnode key, across all frames.
    pub fn queued_keys(&self) -> Vec<String> {
        let mut keys: Vec<String> = self
            .stack
            .iter()
            .flat_map(|f| f.graph.goals().map(|(_, g)| g.pnode_key.clone()))
            .collect();
        keys.sort();
        keys
    }

    /// Queued goals are exactly the open goals of the plan.
    pub fn conserves_goals(&self) -> bool {
        self.queued_keys() == self.pplan.open_ids()
    }

    /// Every queued goal still matches its edge's type.
    pub fn type_honest(&self, env: &Env) -> Result<bool, GoalTypeError> {
        for f in &self.stack {
            for e in f.graph.edges().values() {
                for g in &e.goals {
                    let Some(p) = self.pplan.get(&g.pnode_key) else {
                        return Ok(false);
                    };
                    if env.preds.match_goal(g, &e.gtype, p, &env.ctx)?.is_none() {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    pub fn is_finished(&self) -> bool {
        self.stack.len() == 1 && self.top().graph.goals_all_on_outputs()
    }

    /// Lowest-id edge into a tactic node with a queued goal; FIFO within it.
    pub fn next_goal(&self) -> Option<(EdgeId, usize)> {
        let g = &self.top().graph;
        g.edges()
            .iter()
            .find(|(_, e)| !e.goals.is_empty() && !g.is_output(e))
            .map(|(id, _)| (id.clone(), 0))
    }

    /// Goals of the plan, in id order.
    pub fn open_goal_texts(&self) -> Vec<String> {
        self.pplan.open_goals().map(Pnode::goal_text).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("evaluation is not running")]
    StepOnTerminated,
    #[error("no history to go back to")]
    EmptyHistory,
    #[error("no goal at {0} index {1} in the active frame")]
    BadSelection(String, usize),
    #[error("graph is not well-formed:\n{0}")]
    InvalidGraph(ValidationReport),
    #[error("pnode `{0}` is not open in the branch's plan")]
    MissingPnode(String),
    #[error("nested node `{0}` has no output edge for a child output")]
    PortMismatch(String),
    #[error("bad goal: {0}")]
    BadGoal(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    GoalType(#[from] GoalTypeError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalState {
    pub branches: Vec<Branch>,
    pub status: Status,
    /// Alternatives of the next step already explored by backtracking.
    pub skip: usize,
    pub selection: Option<(EdgeId, usize)>,
    pub steps: u64,
    pub warnings: Vec<String>,
    pub last_failure: Option<FailureReport>,
    next_token: u64,
    next_branch: u64,
}

/// Persistent snapshot list, shared between successive `Eval` values.
#[derive(Debug)]
struct Snapshot {
    state: EvalState,
    prev: Option<Arc<Snapshot>>,
    depth: usize,
}

#[derive(Clone, Debug)]
pub struct Eval {
    pub psgraph: Arc<PSGraph>,
    pub state: EvalState,
    history: Option<Arc<Snapshot>>,
    // snapshots reachable by backtracking, at most HISTORY_CAP
    available: usize,
}

/// One subgoal's candidate edges with the goal nodes they would carry.
type Matches = Vec<(EdgeId, Gnode)>;

fn match_edges(
    ps: &[Pnode],
    prev: &Gnode,
    edges: &[(EdgeId, GoalType)],
    env: &Env,
) -> Result<(Vec<Matches>, Vec<UnmatchedSubgoal>), GoalTypeError> {
    let mut all = Vec::with_capacity(ps.len());
    let mut unmatched = Vec::new();
    for p in ps {
        let mut ok = Vec::new();
        let mut rejected = Vec::new();
        for (id, gt) in edges {
            match env.preds.check(prev, gt, p, &env.ctx)? {
                MatchOutcome::Matched(g) => ok.push((id.clone(), g)),
                MatchOutcome::Rejected { clause } => rejected.push(RejectedEdge {
                    edge: id.to_string(),
                    gtype: gt.to_string(),
                    failed_clause: clause,
                }),
            }
        }
        if ok.is_empty() {
            unmatched.push(UnmatchedSubgoal { goal: p.goal_text(), rejected_edges: rejected });
        }
        all.push(ok);
    }
    Ok((all, unmatched))
}

/// Cartesian product, first list most significant.
fn product(lists: &[Matches]) -> Vec<Matches> {
    lists.iter().fold(vec![vec![]], |acc, choices| {
        acc.iter()
            .flat_map(|prefix| {
                choices.iter().map(move |c| {
                    let mut v = prefix.clone();
                    v.push(c.clone());
                    v
                })
            })
            .collect()
    })
}

/// Every type-respecting placement of `ps` on `edges`: one edge per
/// subgoal, in lexicographic order of edge choices.
pub fn distribute(
    ps: &[Pnode],
    prev: &Gnode,
    edges: &[(EdgeId, GoalType)],
    env: &Env,
) -> Result<Vec<Matches>, GoalTypeError> {
    Ok(product(&match_edges(ps, prev, edges, env)?.0))
}

fn out_ports(g: &OpenGraph, node: &NodeId) -> Vec<(EdgeId, GoalType)> {
    g.out_edges(node).into_iter().map(|(id, e)| (id.clone(), e.gtype.clone())).collect()
}

/// Pops the top frame, moving its output goals onto the origin node's
/// out-edges: the k-th child output of a type goes to the k-th out-edge of
/// that type.
fn pop_frame(b: &mut Branch) -> Result<Origin, EvalError> {
    let child = b.stack.pop().expect("stack height checked by caller");
    let origin = child.origin.expect("only the bottom frame lacks an origin");
    let parent = &mut b.top_mut().graph;
    let ports = out_ports(parent, &origin.node);
    let mut used: BTreeMap<GoalType, usize> = BTreeMap::new();
    for (id, gt) in child.graph.interface().outputs {
        let class = gt.normalized();
        let k = used.entry(class.clone()).or_default();
        let target = ports
            .iter()
            .filter(|(_, t)| t.normalized() == class)
            .nth(*k)
            .ok_or_else(|| EvalError::PortMismatch(origin.node.to_string()))?;
        *k += 1;
        let goals = &child.graph.edge(&id).expect("interface edge").goals;
        parent.edge_mut(&target.0).expect("port exists").goals.extend(goals.iter().cloned());
    }
    Ok(origin)
}

/// Pops finished frames; returns the origins popped.
fn settle(b: &mut Branch) -> Result<Vec<Origin>, EvalError> {
    let mut popped = Vec::new();
    while b.stack.len() > 1 && b.top().graph.goals_all_on_outputs() {
        popped.push(pop_frame(b)?);
    }
    Ok(popped)
}

/// Parses a closed goal and starts a plan for it.
pub fn prepare_goal(text: &str) -> Result<(Pnode, Pplan), EvalError> {
    let prop = parse_prop(text).map_err(|e| EvalError::BadGoal(e.to_string()))?;
    init_pplan(prop).map_err(|e| EvalError::BadGoal(e.to_string()))
}

/// One branch per input edge of the top graph whose type matches `pn`.
pub fn init_eval(p: Arc<PSGraph>, pn: &Pnode, plan: Pplan, env: &Env) -> Result<Eval, EvalError> {
    let report = p.validate_with(&env.ctx, &env.preds);
    if !report.is_empty() {
        return Err(EvalError::InvalidGraph(report));
    }
    let mut state = EvalState {
        branches: vec![],
        status: Status::Running,
        skip: 0,
        selection: None,
        steps: 0,
        warnings: vec![],
        last_failure: None,
        next_token: 0,
        next_branch: 0,
    };
    for (edge, gt) in p.graph.interface().inputs {
        if let Some(g) = env.preds.match_goal(&Gnode::root(), &gt, pn, &env.ctx)? {
            let graph = p.graph.push_goal(&edge, g).expect("interface edge");
            state.branches.push(Branch {
                id: state.next_branch,
                stack: vec![Frame { graph, origin: None }],
                pplan: plan.clone(),
                deferred: None,
            });
            state.next_branch += 1;
        }
    }
    state.status = if state.branches.is_empty() {
        Status::Failed(FailReason::NoMatchingInput)
    } else {
        match state.branches.iter().find(|b| b.is_finished()) {
            Some(b) => Status::Complete(Box::new(b.clone())),
            None => Status::Running,
        }
    };
    Ok(Eval { psgraph: p, state, history: None, available: 0 })
}

/// Starts an evaluation from goal text.
pub fn start(p: Arc<PSGraph>, goal: &str, env: &Env) -> Result<Eval, EvalError> {
    let (pn, plan) = prepare_goal(goal)?;
    init_eval(p, &pn, plan, env)
}

impl Eval {
    pub fn status(&self) -> &Status {
        &self.state.status
    }

    pub fn is_running(&self) -> bool {
        self.state.status == Status::Running
    }

    pub fn history_len(&self) -> usize {
        self.available
    }

    fn push_history(&mut self, state: EvalState) {
        let depth = self.history.as_ref().map_or(0, |h| h.depth) + 1;
        self.history = Some(Arc::new(Snapshot { state, prev: self.history.take(), depth }));
        self.available = (self.available + 1).min(HISTORY_CAP);
        if depth >= 2 * HISTORY_CAP {
            self.trim_history();
        }
    }

    /// Drops unreachable snapshots so the list stays bounded.
    fn trim_history(&mut self) {
        let mut keep = Vec::with_capacity(self.available);
        let mut cur = self.history.clone();
        while let Some(node) = cur {
            if keep.len() == self.available {
                break;
            }
            cur = node.prev.clone();
            keep.push(node);
        }
        let mut rebuilt: Option<Arc<Snapshot>> = None;
        for (i, node) in keep.into_iter().rev().enumerate() {
            rebuilt = Some(Arc::new(Snapshot { state: node.state.clone(), prev: rebuilt, depth: i + 1 }));
        }
        self.history = rebuilt;
    }

    fn pop_history(&mut self) -> Result<EvalState, EvalError> {
        if self.available == 0 {
            return Err(EvalError::EmptyHistory);
        }
        let node = self.history.take().ok_or(EvalError::EmptyHistory)?;
        self.history = node.prev.clone();
        self.available -= 1;
        Ok(node.state.clone())
    }

    /// Chooses the goal the next step consumes.
    pub fn select_goal(&self, edge: &EdgeId, index: usize) -> Result<Eval, EvalError> {
        let bad = || EvalError::BadSelection(edge.to_string(), index);
        let b = self.state.branches.first().ok_or_else(bad)?;
        let g = &b.top().graph;
        let e = g.edge(edge).ok_or_else(bad)?;
        if g.is_output(e) || index >= e.goals.len() {
            return Err(bad());
        }
        let mut next = self.clone();
        next.state.selection = Some((edge.clone(), index));
        Ok(next)
    }

    /// Applies the next tactic or enters the next nested node on the front
    /// branch.
    pub fn step(&self, env: &Env) -> Result<Eval, EvalError> {
        if !self.is_running() {
            return Err(EvalError::StepOnTerminated);
        }
        let mut next = self.clone();
        next.push_history(self.state.clone());
        let st = &mut next.state;
        st.steps += 1;
        let skip = std::mem::take(&mut st.skip);
        let selection = st.selection.take();
        let mut b = st.branches.remove(0);
        b.deferred = None;
        let (edge, idx) = match selection.or_else(|| b.next_goal()) {
            Some(s) => s,
            None => unreachable!("running branches always have a goal to consume"),
        };
        let depth = b.stack.len() - 1;
        let (gn, tnode) = {
            let top = &mut b.top_mut().graph;
            let e = top.edge_mut(&edge).ok_or_else(|| EvalError::BadSelection(edge.to_string(), idx))?;
            if idx >= e.goals.len() {
                return Err(EvalError::BadSelection(edge.to_string(), idx));
            }
            (e.goals.remove(idx), e.tgt.clone())
        };
        let node = b.top().graph.node(&tnode).expect("edge target exists").clone();
        let node_name = node.tactic_name().unwrap_or_default().to_string();
        let pnode =
            b.pplan.get(&gn.pnode_key).cloned().ok_or_else(|| EvalError::MissingPnode(gn.pnode_key.clone()))?;
        let mut produced: Vec<Branch> = Vec::new();
        let mut unmatched: Vec<UnmatchedSubgoal> = Vec::new();
        match node.app().expect("goals only flow into tactic nodes") {
            AppData::Atomic(key) => {
                let spec = &next.psgraph.atomics[key];
                let appf = env.ctx.appf(&spec.tactic, &spec.thms)?;
                let mut seq = appf(&pnode, &b.pplan);
                let elems: Vec<(Vec<Pnode>, Pplan)> = seq.by_ref().take(SEQ_CAP).collect();
                if seq.next().is_some() {
                    let w = format!("{node_name}: more than {SEQ_CAP} alternatives, rest dropped");
                    log::warn!("{w}");
                    st.warnings.push(w);
                }
                let ports = out_ports(&b.top().graph, &tnode);
                for (ps, plan) in elems {
                    let (matches, missing) = match_edges(&ps, &gn, &ports, env)?;
                    for u in missing {
                        if !unmatched.contains(&u) {
                            unmatched.push(u);
                        }
                    }
                    for assignment in product(&matches) {
                        let mut nb = b.clone();
                        nb.pplan = plan.clone();
                        let g = &mut nb.top_mut().graph;
                        for (eid, g2) in assignment {
                            g.edge_mut(&eid).expect("port exists").goals.push(g2);
                        }
                        produced.push(nb);
                    }
                }
            }
            AppData::Nested(key) => {
                let gt = &next.psgraph.graph_tactics[key];
                let token = st.next_token;
                st.next_token += 1;
                for (alt, child) in gt.graphs.iter().enumerate() {
                    let inputs = child.interface().inputs;
                    let (matches, missing) = match_edges(std::slice::from_ref(&pnode), &gn, &inputs, env)?;
                    if alt == 0 {
                        unmatched.extend(missing);
                    }
                    for (eid, g2) in matches.into_iter().flatten() {
                        let mut nb = b.clone();
                        let graph = child.push_goal(&eid, g2).expect("interface edge");
                        nb.stack.push(Frame {
                            graph,
                            origin: Some(Origin {
                                node: tnode.clone(),
                                key: key.clone(),
                                alt,
                                mode: gt.mode,
                                token,
                            }),
                        });
                        if gt.mode == Mode::OrElse && alt > 0 {
                            nb.deferred = Some((token, alt));
                        }
                        produced.push(nb);
                    }
                }
            }
        }
        let produced: Vec<Branch> = produced.into_iter().skip(skip).collect();
        if produced.is_empty() {
            let report = FailureReport {
                branch: b.id,
                frame_depth: depth,
                node: node_name,
                consumed_goal: gn.goal_text.clone(),
                unmatched_subgoals: unmatched,
            };
            log::debug!("branch {} failed at {}", b.id, report.node);
            st.last_failure = Some(report);
        }
        let mut fresh = Vec::with_capacity(produced.len());
        let mut committed: Vec<(u64, usize)> = Vec::new();
        for (i, mut nb) in produced.into_iter().enumerate() {
            // the first alternative keeps the branch identity
            if i > 0 {
                nb.id = st.next_branch;
                st.next_branch += 1;
            }
            for o in settle(&mut nb)? {
                if o.mode == Mode::OrElse {
                    committed.push((o.token, o.alt));
                }
            }
            fresh.push(nb);
        }
        fresh.append(&mut st.branches);
        st.branches = fresh
            .into_iter()
            .filter(|b| {
                !b.deferred.is_some_and(|(t, a)| committed.iter().any(|(ct, ca)| *ct == t && a > *ca))
            })
            .collect();
        st.status = if st.branches.is_empty() {
            match st.last_failure.clone() {
                Some(r) => Status::Failed(FailReason::PointOfFailure(r)),
                None => Status::Failed(FailReason::NoMatchingInput),
            }
        } else {
            match st.branches.iter().find(|b| b.is_finished()) {
                Some(b) => Status::Complete(Box::new(b.clone())),
                None => Status::Running,
            }
        };
        Ok(next)
    }

    /// Steps until complete, failed, or `fuel` steps have been taken.
    pub fn run_auto(&self, env: &Env, fuel: u64) -> Result<Eval, EvalError> {
        let mut e = self.clone();
        let mut used = 0;
        while e.is_running() {
            if used == fuel {
                e.state.status = Status::Failed(FailReason::FuelExhausted);
                break;
            }
            e = e.step(env)?;
            used += 1;
        }
        Ok(e)
    }

    /// Undoes the last step and marks the alternative it took as explored.
    pub fn backtrack(&self) -> Result<Eval, EvalError> {
        let mut next = self.clone();
        let prev = next.pop_history()?;
        let skip = prev.skip + 1;
        next.state = EvalState { skip, ..prev };
        Ok(next)
    }

    /// Undoes the last step and performs it again.
    pub fn replay(&self, env: &Env) -> Result<Eval, EvalError> {
        let mut next = self.clone();
        next.state = next.pop_history()?;
        if next.is_running() {
            next.step(env)
        } else {
            Ok(next)
        }
    }

    pub fn terminate(&self) -> Eval {
        let mut next = self.clone();
        next.push_history(self.state.clone());
        next.state.status = Status::Failed(FailReason::UserTerminated);
        next
    }

    /// The completed branch, if any.
    pub fn complete_branch(&self) -> Option<&Branch> {
        match &self.state.status {
            Status::Complete(b) => Some(b),
            _ => None,
        }
    }

    /// Open goals of the completed branch, sorted.
    pub fn final_goals(&self) -> Option<Vec<String>> {
        self.complete_branch().map(|b| {
            let mut v = b.open_goal_texts();
            v.sort();
            v
        })
    }
}
