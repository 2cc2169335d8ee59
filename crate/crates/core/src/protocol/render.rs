//! JSON views of evaluation state for clients.

use crate::eval::{Branch, Eval, Frame, Status};
use crate::json::graph_to_value;
use serde_json::{json, Value};

fn frame_value(f: &Frame, depth: usize) -> Value {
    let origin = f.origin.as_ref().map(|o| {
        json!({"node": o.node.as_str(), "key": o.key, "alt": o.alt, "mode": o.mode.as_str()})
    });
    json!({"depth": depth, "origin": origin, "graph": graph_to_value(&f.graph)})
}

pub fn branch_value(b: &Branch) -> Value {
    let frames: Vec<Value> = b.stack.iter().enumerate().map(|(i, f)| frame_value(f, i)).collect();
    json!({
        "id": b.id,
        "deferred": b.deferred.is_some(),
        "goals": b.open_goal_texts(),
        "frames": frames,
    })
}

fn branch_summary(b: &Branch) -> Value {
    json!({
        "id": b.id,
        "deferred": b.deferred.is_some(),
        "depth": b.stack.len(),
        "open_goals": b.pplan.open_ids().len(),
    })
}

/// Journal of a branch's plan as `{goal, tactic, children}` records.
pub fn journal_value(b: &Branch) -> Value {
    let entries: Vec<Value> = b
        .pplan
        .journal()
        .iter()
        .map(|e| {
            json!({
                "goal": e.goal.id,
                "goal_text": e.goal.goal_text(),
                "tactic": e.tactic,
                "children": e.children.iter().map(|c| c.id.clone()).collect::<Vec<_>>(),
            })
        })
        .collect();
    Value::Array(entries)
}

/// Full state view. `active` is the completed branch once complete, else
/// the front branch.
pub fn state_value(e: &Eval) -> Value {
    let st = &e.state;
    let active = match &st.status {
        Status::Complete(b) => Some(b.as_ref()),
        _ => st.branches.first(),
    };
    let (reason, failure) = match &st.status {
        Status::Failed(r) => (json!(r.code()), json!(r.report())),
        _ => (Value::Null, Value::Null),
    };
    let selection = st.selection.as_ref().map(|(e, i)| json!({"edge_id": e.as_str(), "index": i}));
    json!({
        "status": st.status.code(),
        "reason": reason,
        "failure": failure,
        "last_failure": st.last_failure,
        "steps": st.steps,
        "history": e.history_len(),
        "branch_count": st.branches.len(),
        "branches": st.branches.iter().map(branch_summary).collect::<Vec<_>>(),
        "open_goals": active.map_or(0, |b| b.pplan.open_ids().len()),
        "goals": active.map_or(vec![], Branch::open_goal_texts),
        "active": active.map(branch_value),
        "journal": active.map(journal_value),
        "selection": selection,
        "warnings": st.warnings,
    })
}
