//! Command-line entry points.

use crate::combinators::build_strategy;
use crate::eval::{start, Env, Status};
use crate::json::{from_json, to_json_pretty};
use crate::protocol::{Server, DEFAULT_FUEL, DEFAULT_PORT};
use crate::prover::replay_journal;
use crate::psgraph::PSGraph;
use clap::{Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Parser, Debug)]
#[command(name = "psgraph", version, about = "Proof-strategy graph engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Auto,
    Interactive,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a graph on a goal.
    Prove {
        /// `.psg` file, or a `.psx` strategy expression.
        #[arg(long)]
        graph: PathBuf,
        /// Goal in the prover's syntax. Required in auto mode.
        #[arg(long)]
        goal: Option<String>,
        #[arg(long, value_enum, default_value = "auto")]
        mode: Mode,
        #[arg(long, env = "PSGRAPH_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
    },
    /// Elaborate a strategy expression into a `.psg` file.
    Build {
        #[arg(long)]
        strategy: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a `.psg` file against the builtin backend.
    Check { file: PathBuf },
    /// Run the protocol server.
    Serve {
        #[arg(long, env = "PSGRAPH_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

struct Exit(i32, String);

fn usage(msg: impl std::fmt::Display) -> Exit {
    Exit(2, msg.to_string())
}

/// Reads a `.psg` file, or builds a `.psx` one.
pub fn load_graph(path: &Path) -> Result<PSGraph, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if path.extension().is_some_and(|x| x == "psx") {
        build_strategy(&text).map_err(|e| format!("{}: {e}", path.display()))
    } else {
        from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

fn graph_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "graph".into(), |s| s.to_string_lossy().into_owned())
}

fn prove(path: &Path, goal: Option<&str>, mode: Mode, port: u16, fuel: u64, out: &mut dyn Write) -> Result<i32, Exit> {
    let p = load_graph(path).map_err(usage)?;
    let env = Env::builtin();
    if mode == Mode::Interactive {
        let name = graph_name(path);
        let server = Server::bind("127.0.0.1", port, Arc::new(env)).map_err(usage)?.preload(&name, p);
        let addr = server.local_addr().map_err(usage)?;
        let _ = writeln!(out, "serving graph `{name}` on {addr}");
        let _ = out.flush();
        server.run().map_err(usage)?;
        return Ok(0);
    }
    let goal = goal.ok_or_else(|| usage("--goal is required in auto mode"))?;
    let e = start(Arc::new(p), goal, &env).map_err(usage)?;
    let e = e.run_auto(&env, fuel).map_err(usage)?;
    match e.status() {
        Status::Complete(b) => {
            let _ = writeln!(out, "status: complete ({} steps)", e.state.steps);
            for j in b.pplan.journal() {
                let kids: Vec<&str> = j.children.iter().map(|c| c.id.as_str()).collect();
                let _ = writeln!(out, "  {} {}  {}  -> [{}]", j.goal.id, j.tactic, j.goal.goal_text(), kids.join(", "));
            }
            let goals = b.open_goal_texts();
            let _ = writeln!(out, "open goals: {}", goals.len());
            for g in &goals {
                let _ = writeln!(out, "  {g}");
            }
            if goals.is_empty() {
                match replay_journal(&env.ctx, &b.pplan) {
                    Ok(()) => {
                        let _ = writeln!(out, "replay: ok");
                    }
                    Err(err) => {
                        let _ = writeln!(out, "replay: FAILED ({err})");
                        return Ok(1);
                    }
                }
            }
            Ok(0)
        }
        Status::Failed(r) => {
            let _ = writeln!(out, "status: failed ({}) after {} steps", r.code(), e.state.steps);
            if let Some(rep) = r.report() {
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(rep).unwrap_or_default());
            }
            Ok(1)
        }
        Status::Running => Ok(1),
    }
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<i32, Exit> {
    match cli.command {
        Command::Prove { graph, goal, mode, port, fuel } => prove(&graph, goal.as_deref(), mode, port, fuel, out),
        Command::Build { strategy, out: dest } => {
            let text = std::fs::read_to_string(&strategy).map_err(|e| usage(format!("{}: {e}", strategy.display())))?;
            let p = build_strategy(&text).map_err(|e| usage(format!("{}: {e}", strategy.display())))?;
            std::fs::write(&dest, to_json_pretty(&p) + "\n").map_err(|e| usage(format!("{}: {e}", dest.display())))?;
            let _ = writeln!(out, "wrote {}", dest.display());
            Ok(0)
        }
        Command::Check { file } => {
            let p = load_graph(&file).map_err(usage)?;
            let env = Env::builtin();
            let report = p.validate_with(&env.ctx, &env.preds);
            if report.is_empty() {
                let _ = writeln!(out, "{}: ok", file.display());
                Ok(0)
            } else {
                let _ = writeln!(out, "{}:\n{report}", file.display());
                Ok(1)
            }
        }
        Command::Serve { port, host } => {
            let server = Server::bind(&host, port, Arc::new(Env::builtin())).map_err(usage)?;
            let _ = writeln!(out, "listening on {}", server.local_addr().map_err(usage)?);
            let _ = out.flush();
            server.run().map_err(usage)?;
            Ok(0)
        }
    }
}

/// Runs the CLI, writing results to `out` and diagnostics to `err`.
pub fn cli_main_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match run(cli, out) {
        Ok(code) => code,
        Err(Exit(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    cli_main_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}
