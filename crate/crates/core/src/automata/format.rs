//! Text formats for automata and labelled graphs.
//!
//! ```text
//! alphabet explicit 0 1 2        | alphabet structural
//! source <sentence in NNF>       (structural only)
//! state NAME exists|forall rank N [initial]
//! trans FROM PATTERN stay|move TO
//! ```
//!
//! A pattern is `*` or requirements joined by `&`: `letter:a`, `+3(k1,k2)`,
//! `-3(k1,k2)`, `const:k1`.
//!
//! Labelled graphs use `label HASH RENDERING`, `node ID LABEL`, `edge ID ID`,
//! `start ID`. A node label naming a declared hash is a φ-type, anything else a
//! plain letter.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use super::{Alphabet, AlternatingAutomaton, AutomatonError, Direction, Letter, Requirement};
use crate::closure::{parse_const, Closure, Pair, PhiType};
use crate::game::Player;
use crate::graph::UGraph;
use crate::logic::parse_formula_inferring;

fn syntax(line: usize, msg: impl Into<String>) -> AutomatonError {
    AutomatonError::Syntax { line, msg: msg.into() }
}

fn parse_requirement(s: &str) -> Option<Requirement> {
    if let Some(n) = s.strip_prefix("letter:") {
        return (!n.is_empty()).then(|| Requirement::Letter(n.to_string()));
    }
    if let Some(c) = s.strip_prefix("const:") {
        return parse_const(c).map(Requirement::Const);
    }
    if let Some(p) = s.strip_prefix('+') {
        return Pair::parse(p).map(Requirement::Has);
    }
    if let Some(p) = s.strip_prefix('-') {
        return Pair::parse(p).map(Requirement::Lacks);
    }
    None
}

pub(super) fn parse_automaton(text: &str) -> Result<AlternatingAutomaton, AutomatonError> {
    let mut alphabet: Option<Alphabet> = None;
    let mut structural = false;
    let mut states: Vec<(String, Player, u32)> = Vec::new();
    let mut initial: Option<(usize, String)> = None;
    let mut trans: Vec<(usize, String, Vec<Requirement>, Direction, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let words: Vec<&str> = body.split_whitespace().collect();
        match words[0] {
            "alphabet" => match words.get(1) {
                Some(&"explicit") => {
                    alphabet = Some(Alphabet::Explicit(words[2..].iter().map(|s| s.to_string()).collect()));
                }
                Some(&"structural") => structural = true,
                _ => return Err(syntax(line, "expected `alphabet explicit ...` or `alphabet structural`")),
            },
            "source" => {
                let src = body["source".len()..].trim();
                let (f, _) = parse_formula_inferring(src).map_err(|e| syntax(line, e.to_string()))?;
                let cl = Closure::new(&f.nnf()).map_err(|e| syntax(line, e.to_string()))?;
                alphabet = Some(Alphabet::Structural(Arc::new(cl)));
            }
            "state" => {
                let (name, owner, rank, init) = match words[..] {
                    [_, name, owner, "rank", rank] => (name, owner, rank, false),
                    [_, name, owner, "rank", rank, "initial"] => (name, owner, rank, true),
                    _ => return Err(syntax(line, "expected `state NAME OWNER rank N [initial]`")),
                };
                let owner = match owner {
                    "exists" => Player::Exists,
                    "forall" => Player::Forall,
                    _ => return Err(syntax(line, format!("unknown owner `{owner}`"))),
                };
                let rank = rank.parse().map_err(|_| syntax(line, format!("bad rank `{rank}`")))?;
                if states.iter().any(|s| s.0 == name) {
                    return Err(syntax(line, format!("state `{name}` declared twice")));
                }
                if init {
                    if initial.is_some() {
                        return Err(syntax(line, "two initial states"));
                    }
                    initial = Some((line, name.to_string()));
                }
                states.push((name.to_string(), owner, rank));
            }
            "trans" => {
                let [_, from, pattern, dir, to] = words[..] else {
                    return Err(syntax(line, "expected `trans FROM PATTERN DIR TO`"));
                };
                let reqs = if pattern == "*" {
                    Vec::new()
                } else {
                    pattern
                        .split('&')
                        .map(|r| parse_requirement(r).ok_or_else(|| syntax(line, format!("bad requirement `{r}`"))))
                        .collect::<Result<Vec<_>, _>>()?
                };
                let dir = match dir {
                    "stay" => Direction::Stay,
                    "move" => Direction::Move,
                    _ => return Err(syntax(line, format!("unknown direction `{dir}`"))),
                };
                trans.push((line, from.to_string(), reqs, dir, to.to_string()));
            }
            other => return Err(syntax(line, format!("unknown statement `{other}`"))),
        }
    }
    let alphabet = match alphabet {
        Some(a) => a,
        None if structural => return Err(syntax(0, "structural alphabet needs a `source` line")),
        None => return Err(syntax(0, "missing `alphabet` line")),
    };
    if states.is_empty() {
        return Err(AutomatonError::NoStates);
    }
    let mut a = AlternatingAutomaton::new(alphabet);
    for (name, owner, rank) in &states {
        a.add_state(name, *owner, *rank);
    }
    let index: HashMap<String, usize> = states.iter().enumerate().map(|(i, s)| (s.0.clone(), i)).collect();
    let lookup = |line: usize, name: &str| {
        index.get(name).copied().ok_or_else(|| AutomatonError::UnknownState {
            line,
            name: name.to_string(),
        })
    };
    a.initial = match initial {
        Some((line, name)) => lookup(line, &name)?,
        None => 0,
    };
    for (line, from, reqs, dir, to) in trans {
        let from = lookup(line, &from)?;
        let to = lookup(line, &to)?;
        a.add_transition(from, reqs, dir, to);
    }
    Ok(a)
}

pub(super) fn write_automaton(a: &AlternatingAutomaton, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match &a.alphabet {
        Alphabet::Explicit(names) => {
            write!(f, "alphabet explicit")?;
            for n in names {
                write!(f, " {n}")?;
            }
            writeln!(f)?;
        }
        Alphabet::Structural(cl) => {
            writeln!(f, "alphabet structural")?;
            writeln!(f, "source {}", cl.formula)?;
        }
    }
    for (q, s) in a.states.iter().enumerate() {
        let init = if q == a.initial { " initial" } else { "" };
        writeln!(f, "state {} {} rank {}{init}", s.name, s.owner, s.rank)?;
    }
    for (q, ts) in a.transitions.iter().enumerate() {
        for t in ts {
            let pattern = if t.pattern.is_empty() {
                "*".to_string()
            } else {
                t.pattern.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("&")
            };
            writeln!(f, "trans {} {} {} {}", a.states[q].name, pattern, t.dir, a.states[t.to].name)?;
        }
    }
    Ok(())
}

/// A labelled graph with node identifiers and an optional start node.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledGraph {
    pub graph: UGraph<Letter>,
    pub ids: Vec<String>,
    pub start: Option<usize>,
}

impl LabelledGraph {
    pub fn new(graph: UGraph<Letter>) -> Self {
        let ids = (0..graph.len()).map(|v| format!("v{v}")).collect();
        LabelledGraph { graph, ids, start: None }
    }

    pub fn from_phi(graph: &UGraph<PhiType>) -> Self {
        Self::new(graph.map_labels(|t| Letter::Phi(t.clone())))
    }

    pub fn node(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn parse(text: &str) -> Result<LabelledGraph, AutomatonError> {
        let mut labels: HashMap<String, PhiType> = HashMap::new();
        let mut g = UGraph::new();
        let mut ids: Vec<String> = Vec::new();
        let mut start = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let words: Vec<&str> = body.split_whitespace().collect();
            let node = |ids: &[String], id: &str| {
                ids.iter()
                    .position(|x| x == id)
                    .ok_or_else(|| syntax(line, format!("unknown node `{id}`")))
            };
            match words[0] {
                "label" if words.len() >= 3 => {
                    let rendering = body.splitn(3, char::is_whitespace).nth(2).unwrap_or("").trim();
                    let t = PhiType::parse(rendering).ok_or_else(|| syntax(line, "bad φ-type rendering"))?;
                    if t.hash_hex() != words[1] {
                        return Err(syntax(line, format!("hash {} does not match the rendering", words[1])));
                    }
                    labels.insert(words[1].to_string(), t);
                }
                "node" if words.len() == 3 => {
                    if ids.iter().any(|x| x == words[1]) {
                        return Err(syntax(line, format!("node `{}` declared twice", words[1])));
                    }
                    let letter = match labels.get(words[2]) {
                        Some(t) => Letter::Phi(t.clone()),
                        None => Letter::name(words[2]),
                    };
                    g.add_node(letter);
                    ids.push(words[1].to_string());
                }
                "edge" if words.len() == 3 => {
                    let u = node(&ids, words[1])?;
                    let w = node(&ids, words[2])?;
                    g.add_edge(u, w).map_err(|e| syntax(line, e.to_string()))?;
                }
                "start" if words.len() == 2 => start = Some(node(&ids, words[1])?),
                other => return Err(syntax(line, format!("cannot read `{other}` statement"))),
            }
        }
        Ok(LabelledGraph { graph: g, ids, start })
    }
}

impl fmt::Display for LabelledGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut declared: BTreeMap<String, String> = BTreeMap::new();
        for l in self.graph.labels() {
            if let Letter::Phi(t) = l {
                declared.entry(t.hash_hex()).or_insert_with(|| t.render());
            }
        }
        for (h, r) in &declared {
            writeln!(f, "label {h} {r}")?;
        }
        for (v, id) in self.ids.iter().enumerate() {
            writeln!(f, "node {id} {}", self.graph.label(v))?;
        }
        for (u, w) in self.graph.edges() {
            writeln!(f, "edge {} {}", self.ids[u], self.ids[w])?;
        }
        if let Some(s) = self.start {
            writeln!(f, "start {}", self.ids[s])?;
        }
        Ok(())
    }
}
