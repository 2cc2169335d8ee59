//! Graph combinators. A [`PSGraphFun`] appends its construction to a given
//! PSGraph, drawing fresh names from it; the edges it adds form its
//! component.

mod strategy;

pub use strategy::{build_strategy, elaborate, parse_strategy, StrategyError, StrategyExpr};

use crate::goaltype::{comparable, parse_goaltype, GoalType, ParseError};
use crate::graph::{AppData, EdgeId, GraphError, NodeId, OpenGraph};
use crate::psgraph::{GraphTactic, Mode, PSGraph, TacticSpec, ValidationReport};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CombinatorError {
    #[error("bad goal type `{text}`: {error}")]
    BadGoalType { text: String, error: ParseError },
    #[error("no output of type `{0}`")]
    NoAlphaOutput(String),
    #[error("no input of type `{0}`")]
    NoAlphaInput(String),
    #[error("nested graph is not well-formed:\n{0}")]
    InvalidChild(ValidationReport),
    #[error("graphs under `{0}` have different interfaces")]
    InterfaceMismatch(String),
    #[error("then_all has no matching number {0}")]
    NoSuchMatching(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

type Inner = dyn Fn(&PSGraph) -> Result<PSGraph, CombinatorError> + Send + Sync;

#[derive(Clone)]
pub struct PSGraphFun(Arc<Inner>);

impl fmt::Debug for PSGraphFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PSGraphFun")
    }
}

impl PSGraphFun {
    pub fn new(f: impl Fn(&PSGraph) -> Result<PSGraph, CombinatorError> + Send + Sync + 'static) -> Self {
        PSGraphFun(Arc::new(f))
    }

    pub fn apply(&self, p: &PSGraph) -> Result<PSGraph, CombinatorError> {
        (self.0)(p)
    }

    /// Applies to the empty PSGraph.
    pub fn build(&self) -> Result<PSGraph, CombinatorError> {
        self.apply(&empty_psgraph())
    }
}

pub fn empty_psgraph() -> PSGraph {
    PSGraph::empty()
}

/// The identity: contributes nothing.
pub fn empty_fun() -> PSGraphFun {
    PSGraphFun::new(|p| Ok(p.clone()))
}

fn synced(p: &PSGraph) -> PSGraph {
    let mut q = p.clone();
    q.sync_counter();
    q
}

fn finish(mut q: PSGraph) -> PSGraph {
    q.sync_counter();
    q
}

fn parse_types(texts: &[&str]) -> Result<Vec<GoalType>, CombinatorError> {
    texts
        .iter()
        .map(|t| {
            parse_goaltype(t).map_err(|error| CombinatorError::BadGoalType { text: t.to_string(), error })
        })
        .collect()
}

/// A single tactic node with the given input and output edge types.
pub fn lift(node_nm: &str, tac: TacticSpec, ins: &[&str], outs: &[&str]) -> Result<PSGraphFun, CombinatorError> {
    Ok(lift_typed(node_nm, tac, parse_types(ins)?, parse_types(outs)?))
}

pub fn lift_typed(node_nm: &str, tac: TacticSpec, ins: Vec<GoalType>, outs: Vec<GoalType>) -> PSGraphFun {
    let node_nm = node_nm.to_string();
    PSGraphFun::new(move |p| {
        let mut q = synced(p);
        let key = q.fresh_key(&node_nm);
        q.atomics.insert(key.clone(), tac.clone());
        let name = q.graph.fresh_node_name(&node_nm);
        let g = &mut q.graph;
        let t = g.insert_tactic_node(&name, AppData::Atomic(key), None)?;
        for gt in &ins {
            let b = g.insert_boundary();
            g.insert_edge(&b, &t, gt.clone())?;
        }
        for gt in &outs {
            let b = g.insert_boundary();
            g.insert_edge(&t, &b, gt.clone())?;
        }
        Ok(finish(q))
    })
}

/// Edges of `after` that are not in `before`.
fn component(before: &OpenGraph, after: &OpenGraph) -> BTreeSet<EdgeId> {
    after.edges().keys().filter(|id| before.edge(id).is_none()).cloned().collect()
}

fn typed_outputs(g: &OpenGraph, comp: &BTreeSet<EdgeId>) -> Vec<(EdgeId, GoalType)> {
    g.interface().outputs.into_iter().filter(|(id, _)| comp.contains(id)).collect()
}

fn typed_inputs(g: &OpenGraph, comp: &BTreeSet<EdgeId>) -> Vec<(EdgeId, GoalType)> {
    g.interface().inputs.into_iter().filter(|(id, _)| comp.contains(id)).collect()
}

/// All maximal matchings between `outs` and `ins` under `comparable`, as
/// index pairs. Outputs are visited in order; for each, plugging into the
/// lowest free input is tried before leaving it unplugged.
pub fn maximal_matchings(outs: &[GoalType], ins: &[GoalType]) -> Vec<Vec<(usize, usize)>> {
    fn go(
        k: usize,
        outs: &[GoalType],
        ins: &[GoalType],
        used: &mut Vec<bool>,
        cur: &mut Vec<(usize, usize)>,
        acc: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if k == outs.len() {
            let plugged: BTreeSet<usize> = cur.iter().map(|(o, _)| *o).collect();
            let maximal = (0..outs.len()).filter(|o| !plugged.contains(o)).all(|o| {
                (0..ins.len()).all(|i| used[i] || !comparable(&outs[o], &ins[i]))
            });
            if maximal {
                acc.push(cur.clone());
            }
            return;
        }
        for i in 0..ins.len() {
            if !used[i] && comparable(&outs[k], &ins[i]) {
                used[i] = true;
                cur.push((k, i));
                go(k + 1, outs, ins, used, cur, acc);
                cur.pop();
                used[i] = false;
            }
        }
        go(k + 1, outs, ins, used, cur, acc);
    }
    let mut acc = Vec::new();
    go(0, outs, ins, &mut vec![false; ins.len()], &mut Vec::new(), &mut acc);
    acc
}

/// Every maximal plugging of `f`'s outputs into `g`'s inputs, applied to `p`.
/// Pluggings that join the same node pairs with the same types give
/// isomorphic graphs; only the first of each is kept.
pub fn then_results(f: &PSGraphFun, g: &PSGraphFun, p: &PSGraph) -> Result<Vec<PSGraph>, CombinatorError> {
    let p = synced(p);
    let pf = f.apply(&p)?;
    let comp_f = component(&p.graph, &pf.graph);
    let pg = g.apply(&pf)?;
    let comp_g = component(&pf.graph, &pg.graph);
    let outs = typed_outputs(&pg.graph, &comp_f);
    let ins = typed_inputs(&pg.graph, &comp_g);
    let out_types: Vec<GoalType> = outs.iter().map(|(_, t)| t.clone()).collect();
    let in_types: Vec<GoalType> = ins.iter().map(|(_, t)| t.clone()).collect();
    let mut seen = BTreeSet::new();
    maximal_matchings(&out_types, &in_types)
        .into_iter()
        .filter(|m| {
            let mut key: Vec<(NodeId, NodeId, String)> = m
                .iter()
                .map(|&(o, i)| {
                    let src = pg.graph.edge(&outs[o].0).expect("output edge").src.clone();
                    let tgt = pg.graph.edge(&ins[i].0).expect("input edge").tgt.clone();
                    (src, tgt, out_types[o].normalized().to_string())
                })
                .collect();
            key.sort();
            seen.insert(key)
        })
        .map(|m| {
            let mut q = pg.clone();
            for (o, i) in m {
                q.graph.fuse(&outs[o].0, &ins[i].0)?;
            }
            Ok(finish(q))
        })
        .collect()
}

fn nth_then(f: PSGraphFun, g: PSGraphFun, n: usize) -> PSGraphFun {
    PSGraphFun::new(move |p| {
        then_results(&f, &g, p)?.into_iter().nth(n).ok_or(CombinatorError::NoSuchMatching(n))
    })
}

/// One function per maximal plugging, in enumeration order. The number of
/// pluggings is found by applying to the empty PSGraph.
pub fn then_all(f: &PSGraphFun, g: &PSGraphFun) -> Result<Vec<PSGraphFun>, CombinatorError> {
    let n = then_results(f, g, &empty_psgraph())?.len();
    Ok((0..n).map(|i| nth_then(f.clone(), g.clone(), i)).collect())
}

/// The first maximal plugging.
pub fn then_pick(f: &PSGraphFun, g: &PSGraphFun) -> PSGraphFun {
    nth_then(f.clone(), g.clone(), 0)
}

/// Side by side, no plugging.
pub fn tensor(f: &PSGraphFun, g: &PSGraphFun) -> PSGraphFun {
    let (f, g) = (f.clone(), g.clone());
    PSGraphFun::new(move |p| g.apply(&f.apply(p)?))
}

/// Feeds the lowest-id `alpha` output of `f`'s component back into its
/// lowest-id `alpha` input.
pub fn repeat_alpha(f: &PSGraphFun, alpha: GoalType) -> PSGraphFun {
    let f = f.clone();
    PSGraphFun::new(move |p| {
        let p = synced(p);
        let mut q = f.apply(&p)?;
        let comp = component(&p.graph, &q.graph);
        let out = typed_outputs(&q.graph, &comp)
            .into_iter()
            .find(|(_, t)| comparable(t, &alpha))
            .ok_or_else(|| CombinatorError::NoAlphaOutput(alpha.to_string()))?;
        let inp = typed_inputs(&q.graph, &comp)
            .into_iter()
            .find(|(_, t)| comparable(t, &alpha))
            .ok_or_else(|| CombinatorError::NoAlphaInput(alpha.to_string()))?;
        q.graph.fuse(&out.0, &inp.0)?;
        Ok(finish(q))
    })
}

/// Builds `f` as a standalone graph sharing `p`'s tables and counter.
fn build_child(f: &PSGraphFun, p: &PSGraph) -> Result<PSGraph, CombinatorError> {
    let mut graph = OpenGraph::new();
    graph.bump_ids(p.fresh_counter);
    let base = PSGraph { graph, ..p.clone() };
    let child = f.apply(&base)?;
    let report = child.validate();
    if !report.is_empty() {
        return Err(CombinatorError::InvalidChild(report));
    }
    Ok(child)
}

fn nested_node(p: &PSGraph, name: &str, mode: Mode, children: Vec<PSGraph>) -> Result<PSGraph, CombinatorError> {
    let last = children.last().expect("at least one child");
    let mut q = PSGraph {
        graph: p.graph.clone(),
        atomics: last.atomics.clone(),
        graph_tactics: last.graph_tactics.clone(),
        fresh_counter: last.fresh_counter,
    };
    q.sync_counter();
    let iface = children[0].graph.interface();
    let key = q.fresh_key(name);
    let graphs = children.into_iter().map(|c| c.graph).collect();
    q.graph_tactics.insert(key.clone(), GraphTactic { mode, graphs });
    let node_name = q.graph.fresh_node_name(name);
    let g = &mut q.graph;
    let t = g.insert_tactic_node(&node_name, AppData::Nested(key), None)?;
    for (_, gt) in iface.inputs {
        let b = g.insert_boundary();
        g.insert_edge(&b, &t, gt)?;
    }
    for (_, gt) in iface.outputs {
        let b = g.insert_boundary();
        g.insert_edge(&t, &b, gt)?;
    }
    Ok(finish(q))
}

/// Collapses `f` into a single nested node with the same interface.
pub fn nest(name: &str, f: &PSGraphFun) -> PSGraphFun {
    let (name, f) = (name.to_string(), f.clone());
    PSGraphFun::new(move |p| {
        let p = synced(p);
        let child = build_child(&f, &p)?;
        nested_node(&p, &name, Mode::Single, vec![child])
    })
}

fn alternatives(name: &str, mode: Mode, f: &PSGraphFun, g: &PSGraphFun) -> PSGraphFun {
    let (name, f, g) = (name.to_string(), f.clone(), g.clone());
    PSGraphFun::new(move |p| {
        let p = synced(p);
        let cf = build_child(&f, &p)?;
        let cg = build_child(&g, &cf)?;
        if !cf.graph.interface().same_shape(&cg.graph.interface()) {
            return Err(CombinatorError::InterfaceMismatch(name.clone()));
        }
        nested_node(&p, &name, mode, vec![cf, cg])
    })
}

/// Nested node evaluating both graphs.
pub fn or_comb(name: &str, f: &PSGraphFun, g: &PSGraphFun) -> PSGraphFun {
    alternatives(name, Mode::Or, f, g)
}

/// Nested node evaluating `g` only once `f` has failed.
pub fn orelse_comb(name: &str, f: &PSGraphFun, g: &PSGraphFun) -> PSGraphFun {
    alternatives(name, Mode::OrElse, f, g)
}
