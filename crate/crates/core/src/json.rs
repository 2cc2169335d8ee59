//! `.psg` serialisation.
//!
//! ```text
//! {"version":1, "graph":G, "atomics":{name:spec},
//!  "graph_tactics":{name:{"mode":"single"|"or"|"orelse","graphs":[G,...]}},
//!  "fresh_counter":int}
//! G = {"nodes":[{"id","kind":"tactic"|"boundary","name"?,"app"?,"meta"?}],
//!      "edges":[{"id","src","tgt","gtype","goals":[gnode,...]}]}
//! ```
//!
//! Nodes and edges are written in id order.

use crate::goaltype::{parse_goaltype, Annotations, Gnode};
use crate::graph::{AppData, Edge, EdgeId, Meta, Node, NodeData, NodeId, OpenGraph};
use crate::psgraph::{GraphTactic, Mode, PSGraph, TacticSpec};
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use thiserror::Error;

pub const VERSION: u64 = 1;

/// `path` is a JSON pointer to the offending field.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("schema error at {path}: {message}")]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

fn err<T>(path: &str, message: impl Into<String>) -> Result<T, SchemaError> {
    Err(SchemaError { path: path.into(), message: message.into() })
}

fn escape(seg: &str) -> String {
    seg.replace('~', "~0").replace('/', "~1")
}

pub fn gnode_to_value(g: &Gnode) -> Value {
    json!({"goal_text": g.goal_text, "pnode_key": g.pnode_key, "annotations": g.annotations})
}

pub fn graph_to_value(g: &OpenGraph) -> Value {
    let nodes: Vec<Value> = g
        .nodes()
        .iter()
        .map(|(id, n)| {
            let mut o = Map::new();
            o.insert("id".into(), json!(id.as_str()));
            match &n.data {
                NodeData::Boundary => {
                    o.insert("kind".into(), json!("boundary"));
                }
                NodeData::Tactic { name, app } => {
                    o.insert("kind".into(), json!("tactic"));
                    o.insert("name".into(), json!(name));
                    let app = match app {
                        AppData::Atomic(k) => json!({"atomic": k}),
                        AppData::Nested(k) => json!({"nested": k}),
                    };
                    o.insert("app".into(), app);
                }
            }
            if let Some(m) = n.meta {
                o.insert("meta".into(), json!({"x": m.x, "y": m.y}));
            }
            Value::Object(o)
        })
        .collect();
    let edges: Vec<Value> = g
        .edges()
        .iter()
        .map(|(id, e)| {
            json!({
                "id": id.as_str(),
                "src": e.src.as_str(),
                "tgt": e.tgt.as_str(),
                "gtype": e.gtype.to_string(),
                "goals": e.goals.iter().map(gnode_to_value).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({"nodes": nodes, "edges": edges})
}

pub fn to_value(p: &PSGraph) -> Value {
    let atomics: Map<String, Value> =
        p.atomics.iter().map(|(k, s)| (k.clone(), json!(s.to_string()))).collect();
    let gts: Map<String, Value> = p
        .graph_tactics
        .iter()
        .map(|(k, gt)| {
            let graphs: Vec<Value> = gt.graphs.iter().map(graph_to_value).collect();
            (k.clone(), json!({"mode": gt.mode.as_str(), "graphs": graphs}))
        })
        .collect();
    json!({
        "version": VERSION,
        "graph": graph_to_value(&p.graph),
        "atomics": atomics,
        "graph_tactics": gts,
        "fresh_counter": p.fresh_counter,
    })
}

/// Compact single-line JSON.
pub fn to_json(p: &PSGraph) -> String {
    to_value(p).to_string()
}

pub fn to_json_pretty(p: &PSGraph) -> String {
    serde_json::to_string_pretty(&to_value(p)).expect("values always serialise")
}

fn field<'a>(o: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value, SchemaError> {
    match o.get(key) {
        Some(v) => Ok(v),
        None => err(&format!("{path}/{key}"), "missing field"),
    }
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, SchemaError> {
    v.as_object().map_or_else(|| err(path, "expected an object"), Ok)
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, SchemaError> {
    v.as_array().map_or_else(|| err(path, "expected an array"), Ok)
}

fn string<'a>(v: &'a Value, path: &str) -> Result<&'a str, SchemaError> {
    v.as_str().map_or_else(|| err(path, "expected a string"), Ok)
}

fn str_field<'a>(o: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a str, SchemaError> {
    string(field(o, path, key)?, &format!("{path}/{key}"))
}

pub fn gnode_from_value(v: &Value, path: &str) -> Result<Gnode, SchemaError> {
    let o = object(v, path)?;
    let mut annotations = Annotations::new();
    if let Some(a) = o.get("annotations") {
        let ap = format!("{path}/annotations");
        for (k, v) in object(a, &ap)? {
            annotations.insert(k.clone(), string(v, &format!("{ap}/{}", escape(k)))?.to_string());
        }
    }
    Ok(Gnode {
        goal_text: str_field(o, path, "goal_text")?.to_string(),
        pnode_key: str_field(o, path, "pnode_key")?.to_string(),
        annotations,
    })
}

fn meta_from_value(v: &Value, path: &str) -> Result<Meta, SchemaError> {
    let o = object(v, path)?;
    let num = |k: &str| {
        field(o, path, k)?
            .as_f64()
            .map_or_else(|| err(&format!("{path}/{k}"), "expected a number"), Ok)
    };
    Ok(Meta { x: num("x")?, y: num("y")? })
}

pub fn graph_from_value(v: &Value, path: &str) -> Result<OpenGraph, SchemaError> {
    let o = object(v, path)?;
    let mut nodes = BTreeMap::new();
    let np = format!("{path}/nodes");
    for (i, n) in array(field(o, path, "nodes")?, &np)?.iter().enumerate() {
        let p = format!("{np}/{i}");
        let no = object(n, &p)?;
        let id = NodeId(str_field(no, &p, "id")?.to_string());
        let data = match str_field(no, &p, "kind")? {
            "boundary" => NodeData::Boundary,
            "tactic" => {
                let name = str_field(no, &p, "name")?.to_string();
                let ap = format!("{p}/app");
                let app = object(field(no, &p, "app")?, &ap)?;
                let app = match (app.get("atomic"), app.get("nested"), app.len()) {
                    (Some(k), None, 1) => AppData::Atomic(string(k, &format!("{ap}/atomic"))?.into()),
                    (None, Some(k), 1) => AppData::Nested(string(k, &format!("{ap}/nested"))?.into()),
                    _ => return err(&ap, "expected {\"atomic\": name} or {\"nested\": name}"),
                };
                NodeData::Tactic { name, app }
            }
            other => return err(&format!("{p}/kind"), format!("unknown node kind `{other}`")),
        };
        let meta = match no.get("meta") {
            Some(m) => Some(meta_from_value(m, &format!("{p}/meta"))?),
            None => None,
        };
        if nodes.insert(id.clone(), Node { data, meta }).is_some() {
            return err(&format!("{p}/id"), format!("duplicate node id `{id}`"));
        }
    }
    let mut edges = BTreeMap::new();
    let ep = format!("{path}/edges");
    for (i, e) in array(field(o, path, "edges")?, &ep)?.iter().enumerate() {
        let p = format!("{ep}/{i}");
        let eo = object(e, &p)?;
        let id = EdgeId(str_field(eo, &p, "id")?.to_string());
        let gtype = parse_goaltype(str_field(eo, &p, "gtype")?)
            .map_err(|e| SchemaError { path: format!("{p}/gtype"), message: e.to_string() })?;
        let gp = format!("{p}/goals");
        let goals = array(field(eo, &p, "goals")?, &gp)?
            .iter()
            .enumerate()
            .map(|(j, g)| gnode_from_value(g, &format!("{gp}/{j}")))
            .collect::<Result<Vec<_>, _>>()?;
        let edge = Edge {
            src: NodeId(str_field(eo, &p, "src")?.to_string()),
            tgt: NodeId(str_field(eo, &p, "tgt")?.to_string()),
            gtype,
            goals,
        };
        if edges.insert(id.clone(), edge).is_some() {
            return err(&format!("{p}/id"), format!("duplicate edge id `{id}`"));
        }
    }
    Ok(OpenGraph::from_parts(nodes, edges))
}

pub fn from_value(v: &Value) -> Result<PSGraph, SchemaError> {
    let o = object(v, "")?;
    match field(o, "", "version")?.as_u64() {
        Some(VERSION) => {}
        _ => return err("/version", format!("expected {VERSION}")),
    }
    let graph = graph_from_value(field(o, "", "graph")?, "/graph")?;
    let mut atomics = BTreeMap::new();
    for (k, s) in object(field(o, "", "atomics")?, "/atomics")? {
        let p = format!("/atomics/{}", escape(k));
        let spec: TacticSpec =
            string(s, &p)?.parse().map_err(|e: crate::psgraph::TacticSpecError| SchemaError {
                path: p.clone(),
                message: e.to_string(),
            })?;
        atomics.insert(k.clone(), spec);
    }
    let mut graph_tactics = BTreeMap::new();
    for (k, gt) in object(field(o, "", "graph_tactics")?, "/graph_tactics")? {
        let p = format!("/graph_tactics/{}", escape(k));
        let go = object(gt, &p)?;
        let mode = Mode::parse(str_field(go, &p, "mode")?)
            .map_or_else(|| err(&format!("{p}/mode"), "expected single, or or orelse"), Ok)?;
        let gp = format!("{p}/graphs");
        let graphs = array(field(go, &p, "graphs")?, &gp)?
            .iter()
            .enumerate()
            .map(|(i, g)| graph_from_value(g, &format!("{gp}/{i}")))
            .collect::<Result<Vec<_>, _>>()?;
        graph_tactics.insert(k.clone(), GraphTactic { mode, graphs });
    }
    let fresh_counter = field(o, "", "fresh_counter")?
        .as_u64()
        .map_or_else(|| err("/fresh_counter", "expected a non-negative integer"), Ok)?;
    let mut p = PSGraph { graph, atomics, graph_tactics, fresh_counter };
    p.sync_counter();
    Ok(p)
}

pub fn from_json(text: &str) -> Result<PSGraph, SchemaError> {
    let v: Value = serde_json::from_str(text).map_err(|e| SchemaError { path: String::new(), message: e.to_string() })?;
    from_value(&v)
}
