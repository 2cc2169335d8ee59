//! Built-in tactic suite: induct, rewrite, fertilise, intro, refl,
//! assumption, id, fail.

use super::context::{Tactic, Thm};
use super::term::{Prop, Sequent, Term};
use std::sync::Arc;

/// One rewrite step on a term: `(theorem name, position, result)` for every
/// redex, outermost-leftmost positions first and theorems in argument order
/// within a position.
pub fn rewrite_steps(thms: &[Thm], t: &Term) -> Vec<(String, Vec<usize>, Term)> {
    let mut out = Vec::new();
    for pos in t.positions() {
        let sub = t.at(&pos).expect("position from positions()");
        for thm in thms {
            if let Some(r) = thm.rewrite_root(sub) {
                out.push((thm.name.clone(), pos.clone(), t.replace_at(&pos, r)));
            }
        }
    }
    out
}

/// Single-step rewrites of a proposition's terms, in slot order.
pub fn rewrite_prop(thms: &[Thm], p: &Prop) -> Vec<Prop> {
    let mut out = Vec::new();
    for (slot, t) in p.term_slots() {
        for (_, _, r) in rewrite_steps(thms, t) {
            out.push(p.replace_term(&slot, r));
        }
    }
    out
}

pub fn can_rewrite(thms: &[Thm], p: &Prop) -> bool {
    p.term_slots().into_iter().any(|(_, t)| {
        t.positions()
            .iter()
            .any(|pos| thms.iter().any(|th| th.rewrite_root(t.at(pos).expect("valid")).is_some()))
    })
}

/// Equation with syntactically identical sides.
pub fn is_trivial(p: &Prop) -> bool {
    matches!(p, Prop::Eq(a, b) if a == b)
}

fn induct(_: &[Thm], g: &Sequent) -> Vec<Vec<Sequent>> {
    let Prop::Forall(x, body) = &g.concl else {
        return vec![];
    };
    let hyp_free = g.hyps.iter().any(|h| h.free_vars().contains(x));
    let v = if hyp_free { g.fresh_name(x) } else { x.clone() };
    let base = Sequent::new(g.hyps.clone(), body.subst_var(x, &Term::Zero));
    let ih = body.subst_var(x, &Term::Var(v.clone()));
    let mut step_hyps = g.hyps.clone();
    step_hyps.push(ih);
    let step = Sequent::new(step_hyps, body.subst_var(x, &Term::succ(Term::Var(v))));
    vec![vec![base, step]]
}

fn rewrite(thms: &[Thm], g: &Sequent) -> Vec<Vec<Sequent>> {
    rewrite_prop(thms, &g.concl)
        .into_iter()
        .map(|c| vec![Sequent::new(g.hyps.clone(), c)])
        .collect()
}

fn intro(_: &[Thm], g: &Sequent) -> Vec<Vec<Sequent>> {
    match &g.concl {
        Prop::Forall(x, body) => {
            let v = if g.hyps.iter().any(|h| h.free_vars().contains(x)) {
                g.fresh_name(x)
            } else {
                x.clone()
            };
            vec![vec![Sequent::new(g.hyps.clone(), body.subst_var(x, &Term::Var(v)))]]
        }
        Prop::Imp(a, b) => {
            let mut hyps = g.hyps.clone();
            hyps.push((**a).clone());
            vec![vec![Sequent::new(hyps, (**b).clone())]]
        }
        Prop::Eq(..) => vec![],
    }
}

/// Uses hypotheses to reduce the conclusion: an equation `l = r` rewrites
/// occurrences of `l` to `r` (or `r` to `l` if `l` is absent), an implication `a ==> c`
/// reduces conclusion `c` to `a`, and a hypothesis equal to the conclusion
/// closes it. Trivial results close the goal.
fn fertilise(_: &[Thm], g: &Sequent) -> Vec<Vec<Sequent>> {
    let mut results: Vec<Prop> = Vec::new();
    let mut closes = false;
    for h in &g.hyps {
        match h {
            _ if *h == g.concl => closes = true,
            Prop::Eq(l, r) => {
                // right-to-left only when left-to-right does not apply
                let c = [(l, r), (r, l)]
                    .into_iter()
                    .map(|(from, to)| g.concl.map_terms(&mut |t| t.replace_all(from, to)))
                    .find(|c| *c != g.concl);
                if let Some(c) = c.filter(|c| !results.contains(c)) {
                    results.push(c);
                }
            }
            Prop::Imp(a, c) if **c == g.concl && !results.contains(a) => results.push((**a).clone()),
            _ => {}
        }
    }
    let mut out: Vec<Vec<Sequent>> = Vec::new();
    if closes {
        out.push(vec![]);
    }
    for c in results {
        if is_trivial(&c) {
            if !out.iter().any(Vec::is_empty) {
                out.push(vec![]);
            }
        } else {
            out.push(vec![Sequent::new(g.hyps.clone(), c)]);
        }
    }
    // closing alternatives first
    out.sort_by_key(|alt| !alt.is_empty());
    out
}

fn refl(_: &[Thm], g: &Sequent) -> Vec<Vec<Sequent>> {
    if is_trivial(&g.concl) {
        vec![vec![]]
    } else {
        vec![]
    }
}

fn assumption(_: &[Thm], g: &Sequent) -> Vec<Vec<Sequent>> {
    if g.hyps.contains(&g.concl) {
        vec![vec![]]
    } else {
        vec![]
    }
}

fn id(_: &[Thm], g: &Sequent) -> Vec<Vec<Sequent>> {
    vec![vec![g.clone()]]
}

fn fail(_: &[Thm], _: &Sequent) -> Vec<Vec<Sequent>> {
    vec![]
}

pub fn builtin_suite() -> Vec<(&'static str, Arc<dyn Tactic>)> {
    vec![
        ("induct", Arc::new(induct)),
        ("rewrite", Arc::new(rewrite)),
        ("fertilise", Arc::new(fertilise)),
        ("intro", Arc::new(intro)),
        ("refl", Arc::new(refl)),
        ("assumption", Arc::new(assumption)),
        ("id", Arc::new(id)),
        ("fail", Arc::new(fail)),
    ]
}
