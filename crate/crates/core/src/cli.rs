//! The `gfx` command line. Exit status 0 is a positive verdict or success, 1 a
//! negative verdict, 2 a usage or file format error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::automata::{accepts, strategy_radius, AlternatingAutomaton, LabelledGraph};
use crate::bisim::{guarded_bisimilar, max_guarded_bisim};
use crate::compiler::compile;
use crate::corpus;
use crate::finsat::{finsat_bounded, FinSatMode, FinSatOutcome};
use crate::game::{brute_solve, check_strategies, solve, ParityGame, BRUTE_MAX_POSITIONS};
use crate::graph::unravel;
use crate::logic::{parse_formula, parse_formula_inferring, validate_guarded, Formula, Mode};
use crate::structure::{evaluate, normalize_width, Structure, Valuation};
use crate::tabloid::{phi_label, tabloid_of_model};

#[derive(Parser, Debug)]
#[command(name = "gfx", version, about = "Guarded fixpoint logic workbench")]
struct Cli {
    /// Emit JSON lines instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CheckMode {
    Strict,
    Relaxed,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SatMode {
    Direct,
    Automaton,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a formula and report its width.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "strict")]
        mode: CheckMode,
    },
    /// Evaluate a formula on a structure.
    Mc {
        #[arg(short, long)]
        formula: PathBuf,
        #[arg(short, long)]
        structure: PathBuf,
        /// Free variable assignment, `x=a`.
        #[arg(long = "assign")]
        assign: Vec<String>,
    },
    /// Guarded bisimilarity of two structures, or of a tuple pair `a,b:c,d`.
    Bisim {
        #[arg(short)]
        a: PathBuf,
        #[arg(short)]
        b: PathBuf,
        #[arg(long)]
        tuple: Option<String>,
    },
    /// Write the φ-labelled tabloid graph of a model.
    Tabloid {
        #[arg(short, long)]
        structure: PathBuf,
        #[arg(short, long)]
        formula: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Unravel a labelled graph from a node.
    Unravel {
        #[arg(short, long)]
        graph: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        depth: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compile a sentence to an automaton.
    Compile {
        #[arg(short, long)]
        formula: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run an automaton on a labelled graph.
    Accept {
        #[arg(short, long)]
        automaton: PathBuf,
        #[arg(short, long)]
        graph: PathBuf,
        /// Start node; defaults to the graph's `start` line.
        #[arg(long)]
        from: Option<String>,
        /// Also report how far the winning strategy walks.
        #[arg(long)]
        radius: bool,
    },
    /// Search for a finite model up to a size bound.
    Finsat {
        #[arg(short, long)]
        formula: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_size: usize,
        #[arg(long, value_enum, default_value = "direct")]
        mode: SatMode,
    },
    /// Parity games.
    Games {
        #[command(subcommand)]
        command: GamesCommand,
    },
    /// Print generated corpus sentences and structures.
    Corpus {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long)]
        structures: bool,
    },
}

#[derive(Subcommand, Debug)]
enum GamesCommand {
    /// Solve a game; `--check` also runs the exhaustive solver on small games.
    Solve {
        file: PathBuf,
        #[arg(long)]
        check: bool,
    },
}

struct Failure(String);

type Outcome = Result<bool, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn in_file<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> Failure + '_ {
    move |e| Failure(format!("{}: {e}", path.display()))
}

fn load_structure(path: &Path) -> Result<Structure, Failure> {
    Structure::parse(&read(path)?).map_err(in_file(path))
}

fn load_formula(path: &Path) -> Result<Formula, Failure> {
    Ok(parse_formula_inferring(&read(path)?).map_err(in_file(path))?.0)
}

fn write_out(path: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(in_file(p)),
        None => out.write_all(text.as_bytes()).map_err(|e| Failure(e.to_string())),
    }
}

struct Ctx<'a> {
    json: bool,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn say(&mut self, text: String, value: serde_json::Value) {
        let line = if self.json { value.to_string() } else { text };
        let _ = writeln!(self.out, "{line}");
    }
}

fn element_tuple(s: &Structure, text: &str) -> Result<Vec<usize>, Failure> {
    text.split(',')
        .map(|n| s.element(n.trim()).ok_or_else(|| Failure(format!("no element `{n}`"))))
        .collect()
}

fn dispatch(cmd: Command, ctx: &mut Ctx<'_>) -> Outcome {
    match cmd {
        Command::Check { file, mode } => {
            let f = load_formula(&file)?;
            let mode = match mode {
                CheckMode::Strict => Mode::Strict,
                CheckMode::Relaxed => Mode::Relaxed,
            };
            let report = validate_guarded(&f, mode);
            let w = f.width();
            if report.is_ok() {
                ctx.say(format!("ok, width {w}"), json!({"valid": true, "width": w}));
            } else {
                let ds: Vec<String> = report.diagnostics.iter().map(|d| format!("{}: {}", d.kind, d.message)).collect();
                ctx.say(ds.join("\n"), json!({"valid": false, "width": w, "diagnostics": ds}));
            }
            Ok(report.is_ok())
        }
        Command::Mc { formula, structure, assign } => {
            let s = load_structure(&structure)?;
            let f = parse_formula(&read(&formula)?, s.signature()).map_err(in_file(&formula))?;
            let mut val = Valuation::new();
            for a in &assign {
                let (v, e) = a.split_once('=').ok_or_else(|| Failure(format!("bad assignment `{a}`")))?;
                let e = s.element(e).ok_or_else(|| Failure(format!("no element `{e}`")))?;
                val.insert(v.to_string(), e);
            }
            let b = evaluate(&s, &f, &val).map_err(|e| Failure(e.to_string()))?;
            ctx.say(b.to_string(), json!({"holds": b}));
            Ok(b)
        }
        Command::Bisim { a, b, tuple } => {
            let sa = load_structure(&a)?;
            let sb = load_structure(&b)?;
            match tuple {
                Some(t) => {
                    let (l, r) = t.split_once(':').ok_or_else(|| Failure("expected --tuple a,b:c,d".into()))?;
                    let (ta, tb) = (element_tuple(&sa, l)?, element_tuple(&sb, r)?);
                    let yes = guarded_bisimilar(&sa, &ta, &sb, &tb).map_err(|e| Failure(e.to_string()))?;
                    ctx.say(yes.to_string(), json!({"bisimilar": yes}));
                    Ok(yes)
                }
                None => {
                    let z = max_guarded_bisim(&sa, &sb).map_err(|e| Failure(e.to_string()))?;
                    let maps: Vec<String> = z
                        .maps
                        .iter()
                        .map(|m| {
                            let ps: Vec<String> = m.pairs.iter().map(|&(x, y)| format!("{}->{}", sa.name(x), sb.name(y))).collect();
                            ps.join(",")
                        })
                        .collect();
                    let text = if maps.is_empty() { "empty".to_string() } else { maps.join("\n") };
                    ctx.say(text, json!({"maps": maps}));
                    Ok(!z.maps.is_empty())
                }
            }
        }
        Command::Tabloid { structure, formula, output } => {
            let s = load_structure(&structure)?;
            let f = parse_formula(&read(&formula)?, s.signature()).map_err(in_file(&formula))?;
            let c = compile(&f.nnf()).map_err(|e| Failure(e.to_string()))?;
            let cl = c.closure();
            let m = normalize_width(&s, cl.n());
            let t = tabloid_of_model(&m, cl.n()).map_err(|e| Failure(e.to_string()))?;
            let g = phi_label(&m, cl, &t).map_err(|e| Failure(e.to_string()))?;
            let mut lg = LabelledGraph::from_phi(&g);
            lg.ids = t.tabloid.ids.clone();
            lg.start = Some(0);
            write_out(&output, &lg.to_string(), ctx.out)?;
            if output.is_some() {
                ctx.say(format!("{} nodes, {} edges", g.len(), g.edge_count()), json!({"nodes": g.len(), "edges": g.edge_count()}));
            }
            Ok(true)
        }
        Command::Unravel { graph, from, depth, output } => {
            let lg = LabelledGraph::parse(&read(&graph)?).map_err(in_file(&graph))?;
            let v = lg.node(&from).ok_or_else(|| Failure(format!("no node `{from}`")))?;
            let (tree, proj) = unravel(&lg.graph, v, depth).map_err(|e| Failure(e.to_string()))?;
            let mut out = LabelledGraph::new(tree);
            out.ids = proj.iter().enumerate().map(|(i, &p)| format!("{}.{i}", lg.ids[p])).collect();
            out.start = Some(0);
            write_out(&output, &out.to_string(), ctx.out)?;
            Ok(true)
        }
        Command::Compile { formula, output } => {
            let f = load_formula(&formula)?;
            let c = compile(&f.nnf()).map_err(|e| Failure(e.to_string()))?;
            write_out(&output, &c.automaton.to_string(), ctx.out)?;
            let m = &c.meta;
            if output.is_some() || ctx.json {
                ctx.say(
                    format!("{} states, {} transitions, width {}, pool {}, bound {}", m.states, m.transitions, m.width, m.pool.len(), m.bound()),
                    json!({"states": m.states, "transitions": m.transitions, "width": m.width, "pool": m.pool.len(), "size": m.size, "literals": m.literals, "constant": m.constant, "bound": m.bound()}),
                );
            }
            Ok(true)
        }
        Command::Accept { automaton, graph, from, radius } => {
            let a = AlternatingAutomaton::parse(&read(&automaton)?).map_err(in_file(&automaton))?;
            let lg = LabelledGraph::parse(&read(&graph)?).map_err(in_file(&graph))?;
            let v = match from {
                Some(id) => lg.node(&id).ok_or_else(|| Failure(format!("no node `{id}`")))?,
                None => lg.start.ok_or_else(|| Failure("no start node: pass --from".into()))?,
            };
            let yes = accepts(&a, &lg.graph, v).map_err(|e| Failure(e.to_string()))?;
            let r = if radius {
                strategy_radius(&a, &lg.graph, v).map_err(|e| Failure(e.to_string()))?
            } else {
                None
            };
            let word = if yes { "accepted" } else { "rejected" };
            let text = match (radius, r) {
                (true, Some(r)) => format!("{word}, strategy radius {r}"),
                (true, None) => format!("{word}, strategy radius unbounded"),
                _ => word.to_string(),
            };
            ctx.say(text, json!({"accepted": yes, "radius": r}));
            Ok(yes)
        }
        Command::Finsat { formula, max_size, mode } => {
            let f = load_formula(&formula)?;
            let mode = match mode {
                SatMode::Direct => FinSatMode::Direct,
                SatMode::Automaton => FinSatMode::ViaAutomaton,
            };
            let v = finsat_bounded(&f, max_size, mode).map_err(|e| Failure(e.to_string()))?;
            let ms = v.stats.elapsed.as_secs_f64() * 1000.0;
            match &v.outcome {
                FinSatOutcome::ModelFound(a) => {
                    ctx.say(
                        format!("model found ({} elements, {} candidates, {ms:.1} ms)\n{}", a.len(), v.stats.candidates, a.to_string().trim_end()),
                        json!({"outcome": "model-found", "model": a.to_string(), "candidates": v.stats.candidates, "elapsed_ms": ms}),
                    );
                    Ok(true)
                }
                FinSatOutcome::NoneUpToBound(n) => {
                    ctx.say(
                        format!("no model with at most {n} elements ({} candidates, {ms:.1} ms); larger models are not ruled out", v.stats.candidates),
                        json!({"outcome": "none-up-to-bound", "bound": n, "candidates": v.stats.candidates, "elapsed_ms": ms}),
                    );
                    Ok(false)
                }
            }
        }
        Command::Games { command: GamesCommand::Solve { file, check } } => {
            let g = ParityGame::parse(&read(&file)?).map_err(in_file(&file))?;
            let sol = solve(&g);
            check_strategies(&g, &sol).map_err(|e| Failure(format!("internal: {e}")))?;
            if check && g.len() <= BRUTE_MAX_POSITIONS {
                let b = brute_solve(&g).map_err(|e| Failure(e.to_string()))?;
                if b.winner != sol.winner {
                    return Err(Failure("exhaustive solver disagrees".into()));
                }
            }
            for v in 0..g.len() {
                let mv = sol.strategy[v].map(|w| g.id(w).to_string());
                let text = format!("{} {}{}", g.id(v), sol.winner[v], mv.as_ref().map(|m| format!(" -> {m}")).unwrap_or_default());
                ctx.say(text, json!({"position": g.id(v), "winner": sol.winner[v].to_string(), "move": mv}));
            }
            let w = sol.winner[g.initial];
            ctx.say(format!("initial {} won by {w}", g.id(g.initial)), json!({"initial": g.id(g.initial), "winner": w.to_string()}));
            Ok(true)
        }
        Command::Corpus { seed, count, structures } => {
            let mut r = corpus::rng(seed);
            for _ in 0..count {
                if structures {
                    let s = corpus::random_structure(&mut r, 4, false);
                    ctx.say(s.to_string().trim_end().replace('\n', "; "), json!({"structure": s.to_string()}));
                } else {
                    let f = corpus::random_formula(&mut r);
                    ctx.say(f.to_string(), json!({"formula": f.to_string()}));
                }
            }
            Ok(true)
        }
    }
}

/// Runs the command line `argv` (program name first) and returns the exit status.
pub fn run(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{e}");
            return code;
        }
    };
    let mut ctx = Ctx { json: cli.json, out };
    match dispatch(cli.command, &mut ctx) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "gfx: {msg}");
            2
        }
    }
}
