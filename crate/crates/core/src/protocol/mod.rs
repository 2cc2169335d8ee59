//! Client/server protocol. Requests are `{id, command, input}`; replies are
//! `{id, command, status: "ok"|"error", output}`. Errors carry a
//! machine-readable `reason` in their output.

mod render;
mod server;

pub use render::{branch_value, journal_value, state_value};
pub use server::{serve, Server, DEFAULT_PORT};

use crate::combinators::build_strategy;
use crate::eval::{start, Env, Eval, EvalError, Status};
use crate::goaltype::parse_goaltype;
use crate::graph::{AppData, EdgeId, Meta, NodeData, NodeId};
use crate::json::{from_value, graph_to_value, to_value};
use crate::psgraph::{PSGraph, TacticSpec, ValidationReport};
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Name of the graph being drawn in the session.
pub const CURRENT: &str = "<current>";

pub const DEFAULT_FUEL: u64 = 10_000;

#[derive(Debug)]
struct Fail {
    reason: &'static str,
    extra: Map<String, Value>,
}

impl Fail {
    fn new(reason: &'static str) -> Fail {
        Fail { reason, extra: Map::new() }
    }

    fn with(mut self, key: &str, v: impl Into<Value>) -> Fail {
        self.extra.insert(key.into(), v.into());
        self
    }
}

type Reply = Result<Value, Fail>;

fn report_value(r: &ValidationReport) -> Value {
    Value::Array(
        r.violations
            .iter()
            .map(|v| json!({"code": v.code(), "message": v.to_string()}))
            .collect(),
    )
}

fn eval_fail(e: EvalError) -> Fail {
    let reason = match &e {
        EvalError::StepOnTerminated => "not_running",
        EvalError::EmptyHistory => "empty_history",
        EvalError::BadSelection(..) => "bad_selection",
        EvalError::InvalidGraph(r) => return Fail::new("invalid_graph").with("report", report_value(r)),
        EvalError::BadGoal(_) => "bad_goal",
        EvalError::Backend(_) => "backend_error",
        EvalError::GoalType(_) => "goaltype_error",
        EvalError::MissingPnode(_) | EvalError::PortMismatch(_) => "internal_error",
    };
    Fail::new(reason).with("message", e.to_string())
}

fn str_arg<'a>(input: &'a Value, key: &str) -> Result<&'a str, Fail> {
    input.get(key).and_then(Value::as_str).ok_or_else(|| Fail::new("bad_input").with("field", key))
}

fn opt_str<'a>(input: &'a Value, key: &str) -> Option<&'a str> {
    input.get(key).and_then(Value::as_str)
}

fn goaltype_arg(input: &Value, key: &str) -> Result<crate::goaltype::GoalType, Fail> {
    parse_goaltype(str_arg(input, key)?).map_err(|e| {
        Fail::new("bad_goaltype").with("position", e.position).with("expected", e.expected)
    })
}

fn app_arg(v: &Value) -> Result<AppData, Fail> {
    match (v.get("atomic").and_then(Value::as_str), v.get("nested").and_then(Value::as_str)) {
        (Some(k), None) => Ok(AppData::Atomic(k.into())),
        (None, Some(k)) => Ok(AppData::Nested(k.into())),
        _ => Err(Fail::new("bad_input").with("field", "app")),
    }
}

fn meta_arg(v: &Value) -> Option<Meta> {
    Some(Meta { x: v.get("x")?.as_f64()?, y: v.get("y")?.as_f64()? })
}

/// One client's state: stored graphs and at most one evaluation.
pub struct Session {
    pub id: u64,
    env: Arc<Env>,
    graphs: BTreeMap<String, PSGraph>,
    eval: Option<Eval>,
}

impl Session {
    pub fn new(id: u64, env: Arc<Env>) -> Session {
        let graphs = [(CURRENT.to_string(), PSGraph::empty())].into_iter().collect();
        Session { id, env, graphs, eval: None }
    }

    pub fn with_graph(mut self, name: &str, p: PSGraph) -> Session {
        self.graphs.insert(name.into(), p);
        self
    }

    pub fn eval(&self) -> Option<&Eval> {
        self.eval.as_ref()
    }

    /// Handles one request line; always returns one reply line.
    pub fn handle_line(&mut self, line: &str) -> String {
        let reply = match serde_json::from_str::<Value>(line) {
            Ok(v) => self.handle(&v),
            Err(e) => json!({
                "id": -1, "command": "", "status": "error",
                "output": {"reason": "malformed", "message": e.to_string()},
            }),
        };
        reply.to_string()
    }

    pub fn handle(&mut self, req: &Value) -> Value {
        let id = req.get("id").and_then(Value::as_i64);
        let command = req.get("command").and_then(Value::as_str);
        let (Some(id), Some(command)) = (id, command) else {
            return json!({
                "id": id.unwrap_or(-1), "command": command.unwrap_or(""), "status": "error",
                "output": {"reason": "malformed", "message": "request needs an integer id and a command"},
            });
        };
        let empty = json!({});
        let input = req.get("input").unwrap_or(&empty);
        match self.dispatch(command, input) {
            Ok(output) => json!({"id": id, "command": command, "status": "ok", "output": output}),
            Err(Fail { reason, mut extra }) => {
                extra.insert("reason".into(), json!(reason));
                json!({"id": id, "command": command, "status": "error", "output": extra})
            }
        }
    }

    fn dispatch(&mut self, command: &str, input: &Value) -> Reply {
        log::debug!("session {}: {command}", self.id);
        match command {
            "ping" => Ok(json!({})),
            "load_graph" => self.load_graph(input),
            "list_graphs" => Ok(json!({"names": self.graphs.keys().collect::<Vec<_>>()})),
            "start_eval" => self.start_eval(input),
            "step" => self.advance(|e, env| e.step(env)),
            "backtrack" => self.advance(|e, _| e.backtrack()),
            "replay" => self.advance(|e, env| e.replay(env)),
            "terminate" => self.advance(|e, _| Ok(e.terminate())),
            "state" => self.state(),
            "select_goal" => {
                let edge = EdgeId::from(str_arg(input, "edge_id")?);
                let index = input.get("index").and_then(Value::as_u64).unwrap_or(0) as usize;
                self.advance(|e, _| e.select_goal(&edge, index))
            }
            "add_node" | "add_edge" | "delete_item" | "set_node_data" | "set_edge_type" | "set_atomic" => {
                self.edit(command, input)
            }
            "check" => {
                let p = self.graph(input)?;
                let r = p.validate_with(&self.env.ctx, &self.env.preds);
                Ok(json!({"ok": r.is_empty(), "report": report_value(&r)}))
            }
            "save_graph" => {
                let name = opt_str(input, "name").unwrap_or(CURRENT);
                let p = self.graphs.get(name).ok_or_else(|| Fail::new("unknown_graph").with("name", name))?;
                Ok(json!({"name": name, "psgraph": to_value(p)}))
            }
            "hierarchy" => self.hierarchy(input),
            _ => Err(Fail::new("unknown_command")),
        }
    }

    fn graph(&self, input: &Value) -> Result<&PSGraph, Fail> {
        let name = opt_str(input, "graph").unwrap_or(CURRENT);
        self.graphs.get(name).ok_or_else(|| Fail::new("unknown_graph").with("name", name))
    }

    fn load_graph(&mut self, input: &Value) -> Reply {
        let name = str_arg(input, "name")?.to_string();
        let p = if let Some(text) = opt_str(input, "strategy") {
            build_strategy(text).map_err(|e| Fail::new("bad_strategy").with("message", e.to_string()))?
        } else {
            let v = match input.get("psgraph") {
                Some(Value::String(s)) => serde_json::from_str(s)
                    .map_err(|e| Fail::new("schema_error").with("path", "").with("message", e.to_string()))?,
                Some(v) => v.clone(),
                None => return Err(Fail::new("bad_input").with("field", "psgraph")),
            };
            from_value(&v).map_err(|e| Fail::new("schema_error").with("path", e.path).with("message", e.message))?
        };
        let report = p.validate_with(&self.env.ctx, &self.env.preds);
        self.graphs.insert(name.clone(), p);
        Ok(json!({"name": name, "report": report_value(&report)}))
    }

    fn start_eval(&mut self, input: &Value) -> Reply {
        let name = str_arg(input, "graph")?;
        let goal = str_arg(input, "goal")?;
        let mode = opt_str(input, "mode").unwrap_or("interactive");
        if mode != "auto" && mode != "interactive" {
            return Err(Fail::new("bad_mode").with("mode", mode));
        }
        let fuel = input.get("fuel").and_then(Value::as_u64).unwrap_or(DEFAULT_FUEL);
        let p = self.graphs.get(name).ok_or_else(|| Fail::new("unknown_graph").with("name", name))?;
        let mut e = start(Arc::new(p.clone()), goal, &self.env).map_err(eval_fail)?;
        if mode == "auto" {
            e = e.run_auto(&self.env, fuel).map_err(eval_fail)?;
        }
        self.eval = Some(e);
        self.state()
    }

    fn advance(&mut self, f: impl FnOnce(&Eval, &Env) -> Result<Eval, EvalError>) -> Reply {
        let e = self.eval.as_ref().ok_or_else(|| Fail::new("no_active_eval"))?;
        let next = f(e, &self.env).map_err(eval_fail)?;
        self.eval = Some(next);
        self.state()
    }

    fn state(&self) -> Reply {
        let e = self.eval.as_ref().ok_or_else(|| Fail::new("no_active_eval"))?;
        let mut checked: Vec<&crate::eval::Branch> = e.state.branches.iter().collect();
        if let Status::Complete(b) = &e.state.status {
            checked.push(b);
        }
        if let Some(b) = checked.iter().find(|b| !b.conserves_goals()) {
            return Err(Fail::new("invariant_violated").with("branch", b.id));
        }
        Ok(state_value(e))
    }

    fn running(&self) -> bool {
        self.eval.as_ref().is_some_and(Eval::is_running)
    }

    fn edit(&mut self, command: &str, input: &Value) -> Reply {
        if self.running() {
            return Err(Fail::new("eval_running"));
        }
        let name = opt_str(input, "graph").unwrap_or(CURRENT).to_string();
        let mut p = self.graphs.get(&name).ok_or_else(|| Fail::new("unknown_graph").with("name", &*name))?.clone();
        let gerr = |e: crate::graph::GraphError| Fail::new("graph_error").with("message", e.to_string());
        let mut out = json!({"graph": name});
        match command {
            "add_node" => {
                let meta = input.get("meta").and_then(meta_arg);
                let id = match opt_str(input, "kind").unwrap_or("tactic") {
                    "boundary" => {
                        let (g, id) = p.graph.add_boundary();
                        p.graph = g;
                        id
                    }
                    "tactic" => {
                        let node_name = str_arg(input, "name")?;
                        let app = app_arg(input.get("app").unwrap_or(&Value::Null))?;
                        let (g, id) = p.graph.add_tactic_node(node_name, app).map_err(gerr)?;
                        p.graph = g;
                        id
                    }
                    _ => return Err(Fail::new("bad_input").with("field", "kind")),
                };
                p.graph = p.graph.set_meta(&id, meta).map_err(gerr)?;
                out["id"] = json!(id.as_str());
            }
            "add_edge" => {
                let gt = goaltype_arg(input, "gtype")?;
                let src = NodeId::from(str_arg(input, "src")?);
                let tgt = NodeId::from(str_arg(input, "tgt")?);
                let (g, id) = p.graph.add_edge(&src, &tgt, gt).map_err(gerr)?;
                p.graph = g;
                out["id"] = json!(id.as_str());
            }
            "delete_item" => {
                p.graph = p.graph.delete_item(str_arg(input, "id")?).map_err(gerr)?;
            }
            "set_node_data" => {
                let id = NodeId::from(str_arg(input, "id")?);
                let node = p.graph.node(&id).ok_or_else(|| Fail::new("graph_error").with("message", "unknown node"))?;
                if let NodeData::Tactic { name: old_name, app: old_app } = node.data.clone() {
                    let node_name = opt_str(input, "name").unwrap_or(&old_name).to_string();
                    let app = match input.get("app") {
                        Some(a) => app_arg(a)?,
                        None => old_app,
                    };
                    p.graph = p.graph.set_node_data(&id, NodeData::Tactic { name: node_name, app }).map_err(gerr)?;
                }
                if let Some(m) = input.get("meta") {
                    p.graph = p.graph.set_meta(&id, meta_arg(m)).map_err(gerr)?;
                }
            }
            "set_edge_type" => {
                let gt = goaltype_arg(input, "gtype")?;
                let id = EdgeId::from(str_arg(input, "id")?);
                p.graph = p.graph.set_edge_type(&id, gt).map_err(gerr)?;
            }
            "set_atomic" => {
                let key = str_arg(input, "key")?;
                let spec: TacticSpec = str_arg(input, "spec")?
                    .parse()
                    .map_err(|e: crate::psgraph::TacticSpecError| Fail::new("bad_tactic").with("message", e.to_string()))?;
                p.atomics.insert(key.into(), spec);
            }
            _ => unreachable!("edit commands are listed in dispatch"),
        }
        p.fresh_counter = p.fresh_counter.max(p.graph.next_id());
        out["rendering"] = graph_to_value(&p.graph);
        self.graphs.insert(name, p);
        Ok(out)
    }

    fn hierarchy(&self, input: &Value) -> Reply {
        let node = NodeId::from(str_arg(input, "node_id")?);
        let p: &PSGraph = match (&self.eval, opt_str(input, "graph")) {
            (Some(e), None) => &e.psgraph,
            _ => self.graph(input)?,
        };
        let found = p.all_graphs().into_iter().find_map(|(_, g)| g.node(&node).cloned());
        let n = found.ok_or_else(|| Fail::new("unknown_node").with("node_id", node.as_str()))?;
        let path: Vec<Value> = self
            .eval
            .as_ref()
            .and_then(|e| e.state.branches.first())
            .map(|b| {
                b.stack
                    .iter()
                    .filter_map(|f| f.origin.as_ref())
                    .map(|o| json!({"node": o.node.as_str(), "key": o.key, "alt": o.alt}))
                    .collect()
            })
            .unwrap_or_default();
        let mut out = json!({"node_id": node.as_str(), "name": n.tactic_name(), "path": path});
        match n.app() {
            Some(AppData::Nested(key)) => {
                let gt = p.graph_tactics.get(key).ok_or_else(|| Fail::new("unknown_graph").with("name", &**key))?;
                out["kind"] = json!("nested");
                out["key"] = json!(key);
                out["mode"] = json!(gt.mode.as_str());
                out["graphs"] = Value::Array(gt.graphs.iter().map(graph_to_value).collect());
            }
            Some(AppData::Atomic(key)) => {
                out["kind"] = json!("atomic");
                out["key"] = json!(key);
                out["tactic"] = json!(p.atomics.get(key).map(ToString::to_string));
            }
            None => out["kind"] = json!("boundary"),
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(s: &mut Session, id: i64, command: &str, input: Value) -> Value {
        s.handle(&json!({"id": id, "command": command, "input": input}))
    }

    fn session() -> Session {
        Session::new(0, Arc::new(Env::builtin()))
    }

    #[test]
    fn ping_and_unknown() {
        let mut s = session();
        assert_eq!(
            req(&mut s, 1, "ping", json!({})),
            json!({"id": 1, "command": "ping", "status": "ok", "output": {}})
        );
        let r = req(&mut s, 2, "frobnicate", json!({}));
        assert_eq!(r["status"], "error");
        assert_eq!(r["output"]["reason"], "unknown_command");
        let r: Value = serde_json::from_str(&s.handle_line("{nope")).unwrap();
        assert_eq!(r["id"], -1);
    }

    #[test]
    fn step_without_eval() {
        let mut s = session();
        assert_eq!(req(&mut s, 3, "step", json!({}))["output"]["reason"], "no_active_eval");
    }

    #[test]
    fn bad_goaltype_reports_position() {
        let mut s = session();
        let a = req(&mut s, 1, "add_node", json!({"name": "a", "app": {"atomic": "a"}}));
        let b = req(&mut s, 2, "add_node", json!({"name": "b", "app": {"atomic": "b"}}));
        let (a, b) = (a["output"]["id"].clone(), b["output"]["id"].clone());
        let e = req(&mut s, 3, "add_edge", json!({"src": a, "tgt": b, "gtype": "any"}));
        let r = req(&mut s, 4, "set_edge_type", json!({"id": e["output"]["id"], "gtype": "closed; or"}));
        assert_eq!(r["output"]["reason"], "bad_goaltype");
        assert_eq!(r["output"]["position"], 8);
    }

    #[test]
    fn auto_run_and_edit_lock() {
        let mut s = session();
        let r = req(&mut s, 1, "load_graph", json!({"name": "g", "strategy": "LIFT(i, intro, [any], [any])"}));
        assert_eq!(r["status"], "ok", "{r}");
        let r = req(&mut s, 2, "start_eval", json!({"graph": "g", "goal": "!x. x = x", "mode": "auto"}));
        assert_eq!(r["output"]["status"], "complete");
        assert_eq!(r["output"]["open_goals"], 1);
        let r = req(&mut s, 3, "start_eval", json!({"graph": "g", "goal": "!x. x = x"}));
        assert_eq!(r["output"]["status"], "running");
        let r = req(&mut s, 4, "set_atomic", json!({"graph": "g", "key": "k", "spec": "refl"}));
        assert_eq!(r["output"]["reason"], "eval_running");
        let r = req(&mut s, 5, "step", json!({}));
        assert_eq!(r["output"]["status"], "complete");
        assert_eq!(req(&mut s, 6, "set_atomic", json!({"graph": "g", "key": "k", "spec": "refl"}))["status"], "ok");
    }
}
