#![allow(dead_code)]

use psgraph::eval::{Env, Eval};
use rand::seq::SliceRandom;
use rand::Rng;
use std::path::PathBuf;

pub fn strategies_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("strategies")
}

/// `(file stem, text, goal)` for every shipped strategy.
pub fn shipped() -> Vec<(String, String, String)> {
    let mut out = Vec::new();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(strategies_dir())
        .expect("strategies directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "psx"))
        .collect();
    paths.sort();
    for p in paths {
        let text = std::fs::read_to_string(&p).unwrap();
        let goal = text
            .lines()
            .find_map(|l| l.strip_prefix("# goal:"))
            .unwrap_or_else(|| panic!("{} has no goal line", p.display()))
            .trim()
            .to_string();
        out.push((p.file_stem().unwrap().to_string_lossy().into_owned(), text, goal));
    }
    out
}

pub fn scratch_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("psgraph-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

/// Random Peano term over `vars`, fully parenthesised.
pub fn rand_term<R: Rng>(rng: &mut R, depth: u32, vars: &[&str]) -> String {
    if depth == 0 || rng.gen_ratio(1, 3) {
        return match rng.gen_range(0..3) {
            0 if !vars.is_empty() => vars.choose(rng).unwrap().to_string(),
            1 => "0".into(),
            _ => format!("S ({})", rand_term(rng, 0, vars)),
        };
    }
    match rng.gen_range(0..5) {
        0 => format!("S ({})", rand_term(rng, depth - 1, vars)),
        1 => format!("({}) * ({})", rand_term(rng, depth - 1, vars), rand_term(rng, depth - 1, vars)),
        _ => format!("({}) + ({})", rand_term(rng, depth - 1, vars), rand_term(rng, depth - 1, vars)),
    }
}

/// Random closed equation, universally quantified over `x` half the time.
pub fn rand_goal<R: Rng>(rng: &mut R) -> String {
    if rng.gen_bool(0.5) {
        format!("!x. {} = {}", rand_term(rng, 3, &["x"]), rand_term(rng, 2, &["x"]))
    } else {
        format!("{} = {}", rand_term(rng, 3, &[]), rand_term(rng, 2, &[]))
    }
}

pub const TACTICS: &[&str] = &["induct", "rewrite[add_0, add_S]", "intro", "refl", "id", "fertilise", "assumption"];

struct Gen {
    names: usize,
    labels: usize,
}

impl Gen {
    fn name(&mut self, base: &str) -> String {
        self.names += 1;
        format!("{base}{}", self.names)
    }

    fn label(&mut self) -> String {
        self.labels += 1;
        format!("l{}", self.labels)
    }

    fn block<R: Rng>(&mut self, rng: &mut R, depth: u32, i: &str, o: &str) -> String {
        let choice = if depth == 0 { 0 } else { rng.gen_range(0..7) };
        match choice {
            0 | 1 => {
                let tac = TACTICS.choose(rng).unwrap();
                format!("LIFT({}, {tac}, [any({i})], [any({o})])", self.name("t"))
            }
            2 => {
                let m = self.label();
                format!("THEN({}, {})", self.block(rng, depth - 1, i, &m), self.block(rng, depth - 1, &m, o))
            }
            3 => format!("NEST({}, {})", self.name("n"), self.block(rng, depth - 1, i, o)),
            4 => format!(
                "OR({}, {}, {})",
                self.name("or"),
                self.block(rng, depth - 1, i, o),
                self.block(rng, depth - 1, i, o)
            ),
            5 => format!(
                "ORELSE({}, {}, {})",
                self.name("oe"),
                self.block(rng, depth - 1, i, o),
                self.block(rng, depth - 1, i, o)
            ),
            _ => {
                let tac = ["rewrite[add_0, add_S]", "intro", "induct"].choose(rng).unwrap();
                let (a, b, c, d) = (self.name("s"), self.name("e"), self.name("f"), self.name("g"));
                format!(
                    "REPEAT(ORELSE({}, TENSOR(LIFT({a}, {tac}, [any({i}), any({i})], [any({i})]), LIFT({b}, id, [], [any({o})])), \
                     TENSOR(LIFT({c}, id, [any({i}), any({i})], [any({o})]), LIFT({d}, id, [], [any({i})]))), any({i}))",
                    self.name("r")
                )
            }
        }
    }
}

/// Random strategy expression with interface `[any(in)] -> [any(out)]`.
pub fn rand_strategy<R: Rng>(rng: &mut R, depth: u32) -> String {
    Gen { names: 0, labels: 0 }.block(rng, depth, "in", "out")
}

/// THEN-chain of `tacs` with `any` types throughout.
pub fn then_chain(tacs: &[&str]) -> String {
    let mut it = tacs.iter().enumerate().map(|(k, t)| format!("LIFT(t{k}, {t}, [any], [any])"));
    let first = it.next().expect("non-empty chain");
    it.fold(first, |acc, l| format!("THEN({acc}, {l})"))
}

/// Steps `e` until it stops, calling `check` after every step. Returns the
/// final state and the number of steps taken.
pub fn step_out(mut e: Eval, env: &Env, max: usize, mut check: impl FnMut(&Eval)) -> (Eval, usize) {
    let mut n = 0;
    while e.is_running() && n < max {
        e = e.step(env).expect("step");
        n += 1;
        check(&e);
    }
    (e, n)
}
