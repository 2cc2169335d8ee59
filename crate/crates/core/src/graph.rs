//! Open graphs: directed graphs whose dangling edges are realised by
//! boundary vertices. Edges carry goal types and FIFO queues of goal nodes.
//!
//! Every public operation takes `&self` and returns a new graph value.

use crate::goaltype::{GoalType, Gnode};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Orders `v2` before `v10`: alphabetic prefix first, then numeric suffix.
fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn split(s: &str) -> (&str, Option<u64>) {
        let idx = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (p, n) = s.split_at(idx);
        (p, n.parse().ok())
    }
    let (pa, na) = split(a);
    let (pb, nb) = split(b);
    pa.cmp(pb).then(na.cmp(&nb)).then_with(|| a.cmp(b))
}

macro_rules! id_type {
    ($name:ident) => {
        #[derive(Clone, Debug, PartialEq, Eq, Hash)]
        pub struct $name(pub String);

        impl Ord for $name {
            fn cmp(&self, other: &Self) -> Ordering {
                natural_cmp(&self.0, &other.0)
            }
        }

        impl PartialOrd for $name {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }
    };
}

id_type!(NodeId);
id_type!(EdgeId);

/// What a tactic node runs: a key into the owning PSGraph's atomic or
/// graph-tactic table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AppData {
    Atomic(String),
    Nested(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeData {
    Tactic { name: String, app: AppData },
    Boundary,
}

/// Optional layout coordinates, passed through untouched.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Meta {
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub data: NodeData,
    pub meta: Option<Meta>,
}

impl Node {
    pub fn is_boundary(&self) -> bool {
        matches!(self.data, NodeData::Boundary)
    }

    pub fn tactic_name(&self) -> Option<&str> {
        match &self.data {
            NodeData::Tactic { name, .. } => Some(name),
            NodeData::Boundary => None,
        }
    }

    pub fn app(&self) -> Option<&AppData> {
        match &self.data {
            NodeData::Tactic { app, .. } => Some(app),
            NodeData::Boundary => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub src: NodeId,
    pub tgt: NodeId,
    pub gtype: GoalType,
    pub goals: Vec<Gnode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("a tactic node named `{0}` already exists")]
    DuplicateName(String),
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("unknown edge `{0}`")]
    UnknownEdge(EdgeId),
    #[error("an edge may not join two boundary vertices")]
    BoundaryToBoundary,
    #[error("boundary vertex `{0}` already has an edge")]
    BoundaryInUse(NodeId),
}

/// Inputs and outputs of a graph, each sorted by edge id.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Interface {
    pub inputs: Vec<(EdgeId, GoalType)>,
    pub outputs: Vec<(EdgeId, GoalType)>,
}

impl Interface {
    pub fn input_types(&self) -> Vec<GoalType> {
        self.inputs.iter().map(|(_, g)| g.clone()).collect()
    }

    pub fn output_types(&self) -> Vec<GoalType> {
        self.outputs.iter().map(|(_, g)| g.clone()).collect()
    }

    /// Same number of inputs and outputs with the same goal types, as
    /// multisets of normalized types.
    pub fn same_shape(&self, other: &Interface) -> bool {
        fn key(ts: &[(EdgeId, GoalType)]) -> Vec<GoalType> {
            let mut v: Vec<GoalType> = ts.iter().map(|(_, g)| g.normalized()).collect();
            v.sort();
            v
        }
        key(&self.inputs) == key(&other.inputs) && key(&self.outputs) == key(&other.outputs)
    }
}

#[derive(Clone, Debug, Default)]
pub struct OpenGraph {
    nodes: BTreeMap<NodeId, Node>,
    edges: BTreeMap<EdgeId, Edge>,
    // never decreases, so ids are not reused after deletion
    next_id: u64,
}

impl PartialEq for OpenGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

fn id_number(s: &str) -> Option<u64> {
    let digits = &s[s.trim_end_matches(|c: char| c.is_ascii_digit()).len()..];
    digits.parse().ok()
}

impl OpenGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a graph from parts, e.g. after deserialisation.
    pub fn from_parts(nodes: BTreeMap<NodeId, Node>, edges: BTreeMap<EdgeId, Edge>) -> Self {
        let next_id = nodes
            .keys()
            .map(NodeId::as_str)
            .chain(edges.keys().map(EdgeId::as_str))
            .filter_map(id_number)
            .map(|n| n + 1)
            .max()
            .unwrap_or(0);
        OpenGraph { nodes, edges, next_id }
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub(crate) fn bump_ids(&mut self, floor: u64) {
        self.next_id = self.next_id.max(floor);
    }

    fn fresh(&mut self, prefix: &str) -> String {
        let id = format!("{prefix}{}", self.next_id);
        self.next_id += 1;
        id
    }

    pub fn nodes(&self) -> &BTreeMap<NodeId, Node> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeMap<EdgeId, Edge> {
        &self.edges
    }

    pub fn node(&self, id: &NodeId) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn edge(&self, id: &EdgeId) -> Option<&Edge> {
        self.edges.get(id)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_boundary(&self, id: &NodeId) -> bool {
        self.nodes.get(id).is_some_and(Node::is_boundary)
    }

    pub fn tactic_nodes(&self) -> impl Iterator<Item = (&NodeId, &Node)> {
        self.nodes.iter().filter(|(_, n)| !n.is_boundary())
    }

    pub fn node_by_name(&self, name: &str) -> Option<&NodeId> {
        self.nodes.iter().find(|(_, n)| n.tactic_name() == Some(name)).map(|(id, _)| id)
    }

    pub fn in_edges(&self, node: &NodeId) -> Vec<(&EdgeId, &Edge)> {
        self.edges.iter().filter(|(_, e)| &e.tgt == node).collect()
    }

    pub fn out_edges(&self, node: &NodeId) -> Vec<(&EdgeId, &Edge)> {
        self.edges.iter().filter(|(_, e)| &e.src == node).collect()
    }

    pub fn degree(&self, node: &NodeId) -> usize {
        self.edges.values().filter(|e| &e.src == node || &e.tgt == node).count()
    }

    pub fn is_input(&self, e: &Edge) -> bool {
        self.is_boundary(&e.src)
    }

    pub fn is_output(&self, e: &Edge) -> bool {
        self.is_boundary(&e.tgt)
    }

    pub fn interface(&self) -> Interface {
        let mut iface = Interface::default();
        for (id, e) in &self.edges {
            if self.is_input(e) {
                iface.inputs.push((id.clone(), e.gtype.clone()));
            }
            if self.is_output(e) {
                iface.outputs.push((id.clone(), e.gtype.clone()));
            }
        }
        iface
    }

    /// Unused tactic-node name `base0`, `base1`, ...
    pub fn fresh_node_name(&self, base: &str) -> String {
        (0..)
            .map(|n| format!("{base}{n}"))
            .find(|c| self.node_by_name(c).is_none())
            .expect("unbounded search")
    }

    pub fn add_tactic_node(&self, name: &str, app: AppData) -> Result<(OpenGraph, NodeId), GraphError> {
        let mut g = self.clone();
        let id = g.insert_tactic_node(name, app, None)?;
        Ok((g, id))
    }

    pub fn add_boundary(&self) -> (OpenGraph, NodeId) {
        let mut g = self.clone();
        let id = g.insert_boundary();
        (g, id)
    }

    pub fn add_edge(
        &self,
        src: &NodeId,
        tgt: &NodeId,
        gtype: GoalType,
    ) -> Result<(OpenGraph, EdgeId), GraphError> {
        let mut g = self.clone();
        let id = g.insert_edge(src, tgt, gtype)?;
        Ok((g, id))
    }

    /// Adds a boundary vertex and an edge from it into `tgt`.
    pub fn add_input(&self, tgt: &NodeId, gtype: GoalType) -> Result<(OpenGraph, EdgeId), GraphError> {
        let mut g = self.clone();
        let b = g.insert_boundary();
        let id = g.insert_edge(&b, tgt, gtype)?;
        Ok((g, id))
    }

    /// Adds a boundary vertex and an edge from `src` into it.
    pub fn add_output(&self, src: &NodeId, gtype: GoalType) -> Result<(OpenGraph, EdgeId), GraphError> {
        let mut g = self.clone();
        let b = g.insert_boundary();
        let id = g.insert_edge(src, &b, gtype)?;
        Ok((g, id))
    }

    /// Removes a node with its incident edges, or a single edge.
    pub fn delete_item(&self, id: &str) -> Result<OpenGraph, GraphError> {
        let mut g = self.clone();
        let nid = NodeId::from(id);
        let eid = EdgeId::from(id);
        if g.nodes.remove(&nid).is_some() {
            g.edges.retain(|_, e| e.src != nid && e.tgt != nid);
        } else if g.edges.remove(&eid).is_none() {
            return Err(GraphError::UnknownEdge(eid));
        }
        Ok(g)
    }

    pub fn set_node_data(&self, id: &NodeId, data: NodeData) -> Result<OpenGraph, GraphError> {
        let mut g = self.clone();
        if let NodeData::Tactic { name, .. } = &data {
            if g.nodes.iter().any(|(k, n)| k != id && n.tactic_name() == Some(name)) {
                return Err(GraphError::DuplicateName(name.clone()));
            }
        }
        let node = g.nodes.get_mut(id).ok_or_else(|| GraphError::UnknownNode(id.clone()))?;
        node.data = data;
        Ok(g)
    }

    pub fn set_meta(&self, id: &NodeId, meta: Option<Meta>) -> Result<OpenGraph, GraphError> {
        let mut g = self.clone();
        g.nodes.get_mut(id).ok_or_else(|| GraphError::UnknownNode(id.clone()))?.meta = meta;
        Ok(g)
    }

    pub fn set_edge_type(&self, id: &EdgeId, gtype: GoalType) -> Result<OpenGraph, GraphError> {
        let mut g = self.clone();
        g.edges.get_mut(id).ok_or_else(|| GraphError::UnknownEdge(id.clone()))?.gtype = gtype;
        Ok(g)
    }

    pub(crate) fn insert_tactic_node(
        &mut self,
        name: &str,
        app: AppData,
        meta: Option<Meta>,
    ) -> Result<NodeId, GraphError> {
        if self.node_by_name(name).is_some() {
            return Err(GraphError::DuplicateName(name.into()));
        }
        let id = NodeId(self.fresh("v"));
        self.nodes.insert(id.clone(), Node { data: NodeData::Tactic { name: name.into(), app }, meta });
        Ok(id)
    }

    pub(crate) fn insert_boundary(&mut self) -> NodeId {
        let id = NodeId(self.fresh("v"));
        self.nodes.insert(id.clone(), Node { data: NodeData::Boundary, meta: None });
        id
    }

    pub(crate) fn insert_edge(
        &mut self,
        src: &NodeId,
        tgt: &NodeId,
        gtype: GoalType,
    ) -> Result<EdgeId, GraphError> {
        for n in [src, tgt] {
            if !self.nodes.contains_key(n) {
                return Err(GraphError::UnknownNode(n.clone()));
            }
        }
        if self.is_boundary(src) && self.is_boundary(tgt) {
            return Err(GraphError::BoundaryToBoundary);
        }
        for n in [src, tgt] {
            if self.is_boundary(n) && self.degree(n) > 0 {
                return Err(GraphError::BoundaryInUse(n.clone()));
            }
        }
        let id = EdgeId(self.fresh("e"));
        self.edges.insert(
            id.clone(),
            Edge { src: src.clone(), tgt: tgt.clone(), gtype, goals: Vec::new() },
        );
        Ok(id)
    }

    /// Joins output `out` (into a boundary) with input `inp` (out of a
    /// boundary): both boundaries disappear and a fresh edge runs from the
    /// output's source to the input's target with the output's goal type.
    pub(crate) fn fuse(&mut self, out: &EdgeId, inp: &EdgeId) -> Result<EdgeId, GraphError> {
        let o = self.edges.remove(out).ok_or_else(|| GraphError::UnknownEdge(out.clone()))?;
        let i = self.edges.remove(inp).ok_or_else(|| GraphError::UnknownEdge(inp.clone()))?;
        self.nodes.remove(&o.tgt);
        self.nodes.remove(&i.src);
        let id = EdgeId(self.fresh("e"));
        let mut goals = o.goals;
        goals.extend(i.goals);
        self.edges.insert(id.clone(), Edge { src: o.src, tgt: i.tgt, gtype: o.gtype, goals });
        Ok(id)
    }

    pub(crate) fn edge_mut(&mut self, id: &EdgeId) -> Option<&mut Edge> {
        self.edges.get_mut(id)
    }

    /// Goal nodes queued anywhere in the graph, edge by edge.
    pub fn goals(&self) -> impl Iterator<Item = (&EdgeId, &Gnode)> {
        self.edges.iter().flat_map(|(id, e)| e.goals.iter().map(move |g| (id, g)))
    }

    /// Every queued goal sits on an output edge.
    pub fn goals_all_on_outputs(&self) -> bool {
        self.edges.values().all(|e| e.goals.is_empty() || self.is_output(e))
    }

    /// Returns a copy with `gnode` appended to the queue of `edge`.
    pub fn push_goal(&self, edge: &EdgeId, gnode: Gnode) -> Result<OpenGraph, GraphError> {
        let mut g = self.clone();
        g.edges.get_mut(edge).ok_or_else(|| GraphError::UnknownEdge(edge.clone()))?.goals.push(gnode);
        Ok(g)
    }
}
