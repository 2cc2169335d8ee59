//! The strategy record: a graph plus the lookup tables its tactic nodes
//! refer to, and structural validation.

use crate::goaltype::PredicateRegistry;
use crate::graph::{AppData, EdgeId, Interface, NodeData, NodeId, OpenGraph};
use crate::prover::Context;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// A backend tactic name with theorem arguments, written `rewrite[add_0,add_S]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TacticSpec {
    pub tactic: String,
    pub thms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed tactic spec `{0}`")]
pub struct TacticSpecError(pub String);

impl TacticSpec {
    pub fn new(tactic: &str, thms: &[&str]) -> TacticSpec {
        TacticSpec { tactic: tactic.into(), thms: thms.iter().map(|t| t.to_string()).collect() }
    }
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && cs.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

impl FromStr for TacticSpec {
    type Err = TacticSpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TacticSpecError(s.to_string());
        let s = s.trim();
        let (name, thms) = match s.split_once('[') {
            None => (s, vec![]),
            Some((name, rest)) => {
                let inner = rest.strip_suffix(']').ok_or_else(bad)?;
                let thms: Vec<String> = if inner.trim().is_empty() {
                    vec![]
                } else {
                    inner.split(',').map(|t| t.trim().to_string()).collect()
                };
                (name.trim(), thms)
            }
        };
        if !is_ident(name) || !thms.iter().all(|t| is_ident(t)) {
            return Err(bad());
        }
        Ok(TacticSpec { tactic: name.into(), thms })
    }
}

impl fmt::Display for TacticSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tactic)?;
        if !self.thms.is_empty() {
            write!(f, "[{}]", self.thms.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Single,
    Or,
    OrElse,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Single => "single",
            Mode::Or => "or",
            Mode::OrElse => "orelse",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "single" => Some(Mode::Single),
            "or" => Some(Mode::Or),
            "orelse" => Some(Mode::OrElse),
            _ => None,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphTactic {
    pub mode: Mode,
    pub graphs: Vec<OpenGraph>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PSGraph {
    pub graph: OpenGraph,
    pub atomics: BTreeMap<String, TacticSpec>,
    pub graph_tactics: BTreeMap<String, GraphTactic>,
    pub fresh_counter: u64,
}

/// Where a violation was found: the top graph, or graph `index` of a
/// graph-tactic entry.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Location {
    Top,
    Nested { key: String, index: usize },
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Top => f.write_str("graph"),
            Location::Nested { key, index } => write!(f, "graph_tactics/{key}/{index}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    UnresolvedTactic { at: Location, node: NodeId, name: String },
    UnresolvedGraphTactic { at: Location, node: NodeId, name: String },
    DuplicateName { at: Location, name: String },
    BoundaryDegree { at: Location, node: NodeId, degree: usize },
    BoundaryToBoundary { at: Location, edge: EdgeId },
    DanglingEndpoint { at: Location, edge: EdgeId, node: NodeId },
    ModeArity { key: String, mode: Mode, count: usize },
    InterfaceMismatch { key: String, index: usize },
    PortMismatch { at: Location, node: NodeId, key: String },
    UnknownBackendTactic { key: String, tactic: String },
    UnknownTheorem { key: String, theorem: String },
    UnknownPredicate { at: Location, edge: EdgeId, name: String },
}

impl Violation {
    /// Machine-readable violation kind.
    pub fn code(&self) -> &'static str {
        match self {
            Violation::UnresolvedTactic { .. } => "UnresolvedTactic",
            Violation::UnresolvedGraphTactic { .. } => "UnresolvedGraphTactic",
            Violation::DuplicateName { .. } => "DuplicateName",
            Violation::BoundaryDegree { .. } => "BoundaryDegree",
            Violation::BoundaryToBoundary { .. } => "BoundaryToBoundary",
            Violation::DanglingEndpoint { .. } => "DanglingEndpoint",
            Violation::ModeArity { .. } => "ModeArity",
            Violation::InterfaceMismatch { .. } => "InterfaceMismatch",
            Violation::PortMismatch { .. } => "PortMismatch",
            Violation::UnknownBackendTactic { .. } => "UnknownBackendTactic",
            Violation::UnknownTheorem { .. } => "UnknownTheorem",
            Violation::UnknownPredicate { .. } => "UnknownPredicate",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let code = self.code();
        match self {
            Violation::UnresolvedTactic { at, node, name }
            | Violation::UnresolvedGraphTactic { at, node, name } => {
                write!(f, "{code}({name}) at {at} node {node}")
            }
            Violation::DuplicateName { at, name } => write!(f, "{code}({name}) at {at}"),
            Violation::BoundaryDegree { at, node, degree } => {
                write!(f, "{code} at {at}: boundary {node} has degree {degree}")
            }
            Violation::BoundaryToBoundary { at, edge } => write!(f, "{code} at {at} edge {edge}"),
            Violation::DanglingEndpoint { at, edge, node } => {
                write!(f, "{code} at {at}: edge {edge} refers to missing node {node}")
            }
            Violation::ModeArity { key, mode, count } => {
                write!(f, "{code}: {key} has mode {mode} with {count} graphs")
            }
            Violation::InterfaceMismatch { key, index } => {
                write!(f, "{code}: {key} graph {index} differs from graph 0")
            }
            Violation::PortMismatch { at, node, key } => {
                write!(f, "{code} at {at}: node {node} edges differ from the interface of {key}")
            }
            Violation::UnknownBackendTactic { key, tactic } => write!(f, "{code}({tactic}) in atomic {key}"),
            Violation::UnknownTheorem { key, theorem } => write!(f, "{code}({theorem}) in atomic {key}"),
            Violation::UnknownPredicate { at, edge, name } => {
                write!(f, "{code}({name}) at {at} edge {edge}")
            }
        }
    }
}

/// Every violated invariant; empty means well-formed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// A node's in- and out-edges viewed as an interface.
fn node_ports(g: &OpenGraph, node: &NodeId) -> Interface {
    let ports = |es: Vec<(&EdgeId, &crate::graph::Edge)>| {
        es.into_iter().map(|(id, e)| (id.clone(), e.gtype.clone())).collect()
    };
    Interface { inputs: ports(g.in_edges(node)), outputs: ports(g.out_edges(node)) }
}

fn check_graph(p: &PSGraph, at: Location, g: &OpenGraph, out: &mut Vec<Violation>) {
    let mut names: BTreeMap<&str, usize> = BTreeMap::new();
    for (id, node) in g.nodes() {
        match &node.data {
            NodeData::Boundary => {
                let degree = g.degree(id);
                if degree != 1 {
                    out.push(Violation::BoundaryDegree { at: at.clone(), node: id.clone(), degree });
                }
            }
            NodeData::Tactic { name, app } => {
                *names.entry(name).or_default() += 1;
                match app {
                    AppData::Atomic(k) if !p.atomics.contains_key(k) => {
                        out.push(Violation::UnresolvedTactic {
                            at: at.clone(),
                            node: id.clone(),
                            name: k.clone(),
                        })
                    }
                    AppData::Nested(k) => match p.graph_tactics.get(k) {
                        None => out.push(Violation::UnresolvedGraphTactic {
                            at: at.clone(),
                            node: id.clone(),
                            name: k.clone(),
                        }),
                        Some(gt) => {
                            if let Some(child) = gt.graphs.first() {
                                if !node_ports(g, id).same_shape(&child.interface()) {
                                    out.push(Violation::PortMismatch {
                                        at: at.clone(),
                                        node: id.clone(),
                                        key: k.clone(),
                                    });
                                }
                            }
                        }
                    },
                    _ => {}
                }
            }
        }
    }
    for (name, n) in names {
        if n > 1 {
            out.push(Violation::DuplicateName { at: at.clone(), name: name.into() });
        }
    }
    for (id, e) in g.edges() {
        for n in [&e.src, &e.tgt] {
            if g.node(n).is_none() {
                out.push(Violation::DanglingEndpoint { at: at.clone(), edge: id.clone(), node: n.clone() });
            }
        }
        if g.is_boundary(&e.src) && g.is_boundary(&e.tgt) {
            out.push(Violation::BoundaryToBoundary { at: at.clone(), edge: id.clone() });
        }
    }
}

impl PSGraph {
    pub fn empty() -> PSGraph {
        PSGraph::default()
    }

    /// Every graph in the record with its location, top graph first.
    pub fn all_graphs(&self) -> Vec<(Location, &OpenGraph)> {
        let mut v = vec![(Location::Top, &self.graph)];
        for (key, gt) in &self.graph_tactics {
            for (index, g) in gt.graphs.iter().enumerate() {
                v.push((Location::Nested { key: key.clone(), index }, g));
            }
        }
        v
    }

    pub fn graph_at(&self, at: &Location) -> Option<&OpenGraph> {
        match at {
            Location::Top => Some(&self.graph),
            Location::Nested { key, index } => self.graph_tactics.get(key)?.graphs.get(*index),
        }
    }

    /// Unused table key `base_0`, `base_1`, ... across both tables.
    pub fn fresh_key(&self, base: &str) -> String {
        (0..)
            .map(|n| format!("{base}_{n}"))
            .find(|k| !self.atomics.contains_key(k) && !self.graph_tactics.contains_key(k))
            .expect("unbounded search")
    }

    /// Keeps the id counter of the top graph and `fresh_counter` in step.
    pub(crate) fn sync_counter(&mut self) {
        let n = self.fresh_counter.max(self.graph.next_id());
        self.graph.bump_ids(n);
        self.fresh_counter = n;
    }

    pub fn validate(&self) -> ValidationReport {
        let mut out = Vec::new();
        for (at, g) in self.all_graphs() {
            check_graph(self, at, g, &mut out);
        }
        for (key, gt) in &self.graph_tactics {
            let count = gt.graphs.len();
            let arity_ok = match gt.mode {
                Mode::Single => count == 1,
                Mode::Or | Mode::OrElse => count >= 2,
            };
            if !arity_ok {
                out.push(Violation::ModeArity { key: key.clone(), mode: gt.mode, count });
            }
            if let Some(first) = gt.graphs.first() {
                let iface = first.interface();
                for (index, g) in gt.graphs.iter().enumerate().skip(1) {
                    if !g.interface().same_shape(&iface) {
                        out.push(Violation::InterfaceMismatch { key: key.clone(), index });
                    }
                }
            }
        }
        ValidationReport { violations: out }
    }

    /// Structural validation plus resolution of tactic, theorem and
    /// predicate names against a backend and predicate registry.
    pub fn validate_with(&self, ctx: &Context, preds: &PredicateRegistry) -> ValidationReport {
        let mut report = self.validate();
        let out = &mut report.violations;
        for (key, spec) in &self.atomics {
            if !ctx.has_tactic(&spec.tactic) {
                out.push(Violation::UnknownBackendTactic { key: key.clone(), tactic: spec.tactic.clone() });
            }
            for thm in &spec.thms {
                if ctx.theorem(thm).is_err() {
                    out.push(Violation::UnknownTheorem { key: key.clone(), theorem: thm.clone() });
                }
            }
        }
        for (at, g) in self.all_graphs() {
            for (id, e) in g.edges() {
                for name in preds.unknown_in(&e.gtype) {
                    out.push(Violation::UnknownPredicate { at: at.clone(), edge: id.clone(), name });
                }
            }
        }
        report
    }
}
