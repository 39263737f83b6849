//! Tabloids: graphs whose nodes carry a set of constants and an atomic type over them.
//! Tree tabloids decode into structures; finite models encode into tabloids.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::closure::{assignments, const_name, parse_const, Closure, Const, Pair, PhiType};
use crate::graph::{GraphError, UGraph};
use crate::logic::Signature;
use crate::structure::{atomic_type, evaluate, guarded_sets, Elem, EvalError, Structure, Valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TabloidError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown node `{id}`")]
    UnknownNode { line: usize, id: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("tabloid is not a tree")]
    NotATree,
    #[error("invalid tabloid: {0}")]
    Invalid(String),
    #[error("structure has no atoms")]
    Atomless,
    #[error("structure has an atom with more than {0} distinct components")]
    NotNormalized(usize),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeLabel {
    pub constants: BTreeSet<Const>,
    pub facts: BTreeSet<(String, Vec<Const>)>,
}

impl NodeLabel {
    fn facts_within(&self, within: &BTreeSet<Const>) -> BTreeSet<(String, Vec<Const>)> {
        self.facts
            .iter()
            .filter(|(_, t)| t.iter().all(|c| within.contains(c)))
            .cloned()
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tabloid {
    pub sig: Signature,
    pub pool: usize,
    pub graph: UGraph<NodeLabel>,
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TabloidReport {
    pub problems: Vec<String>,
}

impl TabloidReport {
    pub fn is_ok(&self) -> bool {
        self.problems.is_empty()
    }
}

impl fmt::Display for TabloidReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        write!(f, "failed")?;
        for p in &self.problems {
            write!(f, "\n  {p}")?;
        }
        Ok(())
    }
}

impl Tabloid {
    pub fn new(sig: Signature, pool: usize) -> Self {
        Tabloid {
            sig,
            pool,
            graph: UGraph::new(),
            ids: Vec::new(),
        }
    }

    pub fn add_node(&mut self, constants: &[Const], facts: &[(&str, &[Const])]) -> usize {
        let label = NodeLabel {
            constants: constants.iter().copied().collect(),
            facts: facts.iter().map(|(r, t)| (r.to_string(), t.to_vec())).collect(),
        };
        self.ids.push(format!("n{}", self.ids.len()));
        self.graph.add_node(label)
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn label(&self, v: usize) -> &NodeLabel {
        self.graph.label(v)
    }

    /// Parses `sig R N`, `const k1 k2 ...`, `node ID k1,k2`, `fact ID R k1 k2`,
    /// `edge ID ID`. Relations without a `sig` line get the arity of their first fact.
    pub fn parse(text: &str) -> Result<Tabloid, TabloidError> {
        let mut t = Tabloid::new(Signature::new(), 0);
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut declared_pool: Option<usize> = None;
        let mut facts = Vec::new();
        let mut edges = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let words: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
            let syntax = |msg: String| TabloidError::Syntax { line, msg };
            let konst = |s: &str| parse_const(s).ok_or_else(|| syntax(format!("bad constant `{s}`")));
            match words.as_slice() {
                [] => {}
                ["sig", name, arity] => {
                    let arity: usize = arity.parse().map_err(|_| syntax(format!("bad arity `{arity}`")))?;
                    t.sig.declare(name, arity).map_err(|e| syntax(e.to_string()))?;
                }
                ["const", rest @ ..] => {
                    let rest = if rest.first() == Some(&"POOL") { &rest[1..] } else { rest };
                    let consts = rest.iter().map(|s| konst(s)).collect::<Result<Vec<_>, _>>()?;
                    declared_pool = Some(consts.iter().map(|&c| c as usize + 1).max().unwrap_or(0));
                }
                ["node", id, rest @ ..] => {
                    let consts = match rest {
                        [] => Vec::new(),
                        [list] => list.split(',').map(konst).collect::<Result<Vec<_>, _>>()?,
                        _ => return Err(syntax("expected `node ID k1,k2,...`".into())),
                    };
                    if index.contains_key(*id) {
                        return Err(syntax(format!("node `{id}` declared twice")));
                    }
                    let v = t.graph.add_node(NodeLabel {
                        constants: consts.into_iter().collect(),
                        facts: BTreeSet::new(),
                    });
                    t.ids.push(id.to_string());
                    index.insert(id.to_string(), v);
                }
                ["fact", id, rel, args @ ..] => {
                    let args = args.iter().map(|s| konst(s)).collect::<Result<Vec<_>, _>>()?;
                    facts.push((line, id.to_string(), rel.to_string(), args));
                }
                ["edge", a, b] => edges.push((line, a.to_string(), b.to_string())),
                _ => return Err(syntax(format!("unrecognised line `{}`", raw.trim()))),
            }
        }
        let find = |line: usize, id: &str| {
            index.get(id).copied().ok_or_else(|| TabloidError::UnknownNode { line, id: id.to_string() })
        };
        for (line, id, rel, args) in facts {
            let v = find(line, &id)?;
            t.sig
                .observe(&rel, args.len())
                .map_err(|e| TabloidError::Syntax { line, msg: e.to_string() })?;
            let mut label = t.graph.label(v).clone();
            label.facts.insert((rel, args));
            t.graph.set_label(v, label);
        }
        for (line, a, b) in edges {
            let (a, b) = (find(line, &a)?, find(line, &b)?);
            t.graph.add_edge(a, b)?;
        }
        let used = (0..t.len())
            .flat_map(|v| t.label(v).constants.iter().map(|&c| c as usize + 1).collect::<Vec<_>>())
            .max()
            .unwrap_or(0);
        t.pool = declared_pool.unwrap_or(used).max(used);
        Ok(t)
    }
}

impl fmt::Display for Tabloid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (r, a) in self.sig.iter() {
            writeln!(f, "sig {r} {a}")?;
        }
        let pool: Vec<String> = (0..self.pool as Const).map(const_name).collect();
        writeln!(f, "const {}", pool.join(" "))?;
        for v in 0..self.len() {
            let consts: Vec<String> = self.label(v).constants.iter().map(|&c| const_name(c)).collect();
            writeln!(f, "node {} {}", self.ids[v], consts.join(",")).map(|_| ())?;
        }
        for v in 0..self.len() {
            for (r, args) in &self.label(v).facts {
                let args: Vec<String> = args.iter().map(|&c| const_name(c)).collect();
                writeln!(f, "fact {} {r} {}", self.ids[v], args.join(" "))?;
            }
        }
        for (u, w) in self.graph.edges() {
            writeln!(f, "edge {} {}", self.ids[u], self.ids[w])?;
        }
        Ok(())
    }
}

/// Checks that each type lives on its node's constants, respects the signature, and
/// that adjacent types agree on shared constants.
pub fn validate_tabloid(t: &Tabloid) -> TabloidReport {
    let mut report = TabloidReport::default();
    for v in 0..t.len() {
        let label = t.label(v);
        for c in &label.constants {
            if *c as usize >= t.pool {
                report.problems.push(format!("node {}: constant {} outside the pool", t.ids[v], const_name(*c)));
            }
        }
        for (r, args) in &label.facts {
            if t.sig.arity(r) != Some(args.len()) {
                report.problems.push(format!("node {}: fact {r} does not match the signature", t.ids[v]));
            }
            if let Some(c) = args.iter().find(|c| !label.constants.contains(c)) {
                report.problems.push(format!("node {}: fact {r} mentions {} outside the node", t.ids[v], const_name(*c)));
            }
        }
    }
    for (u, w) in t.graph.edges() {
        let shared: BTreeSet<Const> = t.label(u).constants.intersection(&t.label(w).constants).copied().collect();
        if t.label(u).facts_within(&shared) != t.label(w).facts_within(&shared) {
            report
                .problems
                .push(format!("edge {} {}: types disagree on shared constants", t.ids[u], t.ids[w]));
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeTabloid {
    pub tabloid: Tabloid,
    pub root: usize,
}

impl TreeTabloid {
    pub fn new(tabloid: Tabloid, root: usize) -> Result<Self, TabloidError> {
        if !tabloid.graph.is_tree() || root >= tabloid.len() {
            return Err(TabloidError::NotATree);
        }
        Ok(TreeTabloid { tabloid, root })
    }
}

/// Depth-bounded unraveling of a tabloid from `v`, with the projection to `t`.
pub fn unravel_tabloid(t: &Tabloid, v: usize, depth: usize) -> Result<(TreeTabloid, Vec<usize>), TabloidError> {
    let (graph, proj) = crate::graph::unravel(&t.graph, v, depth)?;
    let ids = (0..graph.len()).map(|i| format!("p{i}")).collect();
    let tabloid = Tabloid {
        sig: t.sig.clone(),
        pool: t.pool,
        graph,
        ids,
    };
    Ok((TreeTabloid { tabloid, root: 0 }, proj))
}

/// A decoded structure together with the element denoted by each `(node, constant)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub structure: Structure,
    pub classes: Vec<BTreeMap<Const, Elem>>,
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

/// The structure described by a tree tabloid: elements are classes of node-constant
/// pairs joined along edges that keep the constant; a fact holds if some node's type
/// implies it.
pub fn decode(t: &TreeTabloid) -> Result<Decoded, TabloidError> {
    let tab = &t.tabloid;
    let report = validate_tabloid(tab);
    if !report.is_ok() {
        return Err(TabloidError::Invalid(report.problems.join("; ")));
    }
    let mut slots: Vec<(usize, Const)> = Vec::new();
    let mut slot_of: HashMap<(usize, Const), usize> = HashMap::new();
    for v in 0..tab.len() {
        for &c in &tab.label(v).constants {
            slot_of.insert((v, c), slots.len());
            slots.push((v, c));
        }
    }
    let mut parent: Vec<usize> = (0..slots.len()).collect();
    for (u, w) in tab.graph.edges() {
        for c in tab.label(u).constants.intersection(&tab.label(w).constants) {
            let (a, b) = (find(&mut parent, slot_of[&(u, *c)]), find(&mut parent, slot_of[&(w, *c)]));
            parent[a] = b;
        }
    }
    let mut structure = Structure::new(tab.sig.clone());
    let mut elem_of_root: HashMap<usize, Elem> = HashMap::new();
    let mut classes = vec![BTreeMap::new(); tab.len()];
    for (i, &(v, c)) in slots.iter().enumerate() {
        let r = find(&mut parent, i);
        let e = *elem_of_root
            .entry(r)
            .or_insert_with(|| structure.add_element(&format!("{}.{}", tab.ids[v], const_name(c))));
        classes[v].insert(c, e);
    }
    for (v, class) in classes.iter().enumerate() {
        for (r, args) in &tab.label(v).facts {
            let tuple: Vec<Elem> = args.iter().map(|c| class[c]).collect();
            structure.add_atom(r, &tuple).map_err(|e| TabloidError::Invalid(e.to_string()))?;
        }
    }
    Ok(Decoded { structure, classes })
}

/// Tabloid of a finite model: one node per injection of a guarded set into the pool,
/// adjacent when the two injections together still form an injective function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelTabloid {
    pub tabloid: Tabloid,
    /// Sorted `(element, constant)` pairs of each node's injection.
    pub injections: Vec<Vec<(Elem, Const)>>,
}

fn injections_into(domain: &[Elem], pool: usize) -> Vec<Vec<(Elem, Const)>> {
    let mut out = vec![Vec::new()];
    for &e in domain {
        let mut next = Vec::new();
        for partial in out {
            for c in 0..pool as Const {
                if partial.iter().all(|&(_, d)| d != c) {
                    let mut p: Vec<(Elem, Const)> = partial.clone();
                    p.push((e, c));
                    next.push(p);
                }
            }
        }
        out = next;
    }
    out
}

fn compatible(a: &[(Elem, Const)], b: &[(Elem, Const)]) -> bool {
    a.iter().all(|&(e, c)| b.iter().all(|&(f, d)| (e == f) == (c == d)))
}

pub fn tabloid_of_model(a: &Structure, n: usize) -> Result<ModelTabloid, TabloidError> {
    if a.atom_count() == 0 {
        return Err(TabloidError::Atomless);
    }
    if a.atoms().any(|(_, t)| t.iter().collect::<BTreeSet<_>>().len() > n) {
        return Err(TabloidError::NotNormalized(n));
    }
    let pool = 2 * n;
    let mut tabloid = Tabloid::new(a.signature().clone(), pool);
    let mut injections = Vec::new();
    for set in guarded_sets(a) {
        let ty = atomic_type(a, &set).expect("guarded sets have distinct elements");
        for chi in injections_into(&set, pool) {
            let consts: Vec<Const> = chi.iter().map(|p| p.1).collect();
            let label = NodeLabel {
                constants: consts.iter().copied().collect(),
                facts: ty
                    .facts
                    .iter()
                    .map(|(r, pos)| (r.clone(), pos.iter().map(|&i| consts[i]).collect()))
                    .collect(),
            };
            let names: Vec<String> = chi.iter().map(|&(e, c)| format!("{}{}", a.name(e), const_name(c))).collect();
            tabloid.ids.push(names.join("_"));
            tabloid.graph.add_node(label);
            injections.push(chi);
        }
    }
    for i in 0..injections.len() {
        for j in i + 1..injections.len() {
            if compatible(&injections[i], &injections[j]) {
                tabloid.graph.add_edge(i, j)?;
            }
        }
    }
    Ok(ModelTabloid { tabloid, injections })
}

/// Labels every node of a model tabloid with its φ-type: the pairs `(item, η)` over the
/// node's constants whose item holds in `a` under the pulled-back valuation.
pub fn phi_label(a: &Structure, cl: &Closure, g: &ModelTabloid) -> Result<UGraph<PhiType>, EvalError> {
    let mut memo: HashMap<(usize, Vec<Elem>), bool> = HashMap::new();
    let mut out = g.tabloid.graph.map_labels(|_| PhiType::default());
    for (v, chi) in g.injections.iter().enumerate() {
        let consts: Vec<Const> = chi.iter().map(|p| p.1).collect();
        let elem_of = |c: Const| chi.iter().find(|p| p.1 == c).map(|p| p.0).expect("constant in range");
        let mut label = PhiType {
            carrier: consts.iter().copied().collect(),
            pairs: BTreeSet::new(),
        };
        for (i, item) in cl.items.iter().enumerate() {
            for eta in assignments(item.free.len(), &consts) {
                let elems: Vec<Elem> = eta.iter().map(|&c| elem_of(c)).collect();
                let key = (i, elems);
                let holds = match memo.get(&key) {
                    Some(&b) => b,
                    None => {
                        let val: Valuation = item.free.iter().cloned().zip(key.1.iter().copied()).collect();
                        let b = evaluate(a, &item.expanded, &val)?;
                        memo.insert(key, b);
                        b
                    }
                };
                if holds {
                    label.pairs.insert(Pair::new(i, eta));
                }
            }
        }
        out.set_label(v, label);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bisim::guarded_bisimilar;

    fn e2() -> Signature {
        Signature::new().with("E", 2)
    }

    fn two_node_path() -> Tabloid {
        let mut t = Tabloid::new(e2(), 3);
        t.add_node(&[0, 1], &[("E", &[0, 1])]);
        t.add_node(&[1, 2], &[("E", &[1, 2])]);
        t.graph.add_edge(0, 1).unwrap();
        t
    }

    #[test]
    fn validation_examples() {
        assert!(validate_tabloid(&two_node_path()).is_ok());
        let mut bad = two_node_path();
        let mut label = bad.label(1).clone();
        label.facts.insert(("E".into(), vec![1, 1]));
        bad.graph.set_label(1, label);
        assert!(!validate_tabloid(&bad).is_ok());
        let mut single = Tabloid::new(e2(), 2);
        single.add_node(&[0, 1], &[("E", &[0, 1])]);
        assert!(validate_tabloid(&single).is_ok());
    }

    #[test]
    fn decode_single_node() {
        let mut t = Tabloid::new(e2(), 2);
        t.add_node(&[0, 1], &[("E", &[0, 1])]);
        let d = decode(&TreeTabloid::new(t, 0).unwrap()).unwrap();
        assert_eq!(d.structure.len(), 2);
        assert_eq!(d.structure.atom_count(), 1);
        assert!(d.structure.holds("E", &[d.classes[0][&0], d.classes[0][&1]]));
    }

    #[test]
    fn decode_shares_constant_along_edge() {
        let d = decode(&TreeTabloid::new(two_node_path(), 0).unwrap()).unwrap();
        let s = &d.structure;
        assert_eq!(s.len(), 3);
        assert_eq!(d.classes[0][&1], d.classes[1][&1]);
        let (e1, e2, e3) = (d.classes[0][&0], d.classes[0][&1], d.classes[1][&2]);
        assert!(s.holds("E", &[e1, e2]) && s.holds("E", &[e2, e3]));
        assert_eq!(s.atom_count(), 2);
    }

    #[test]
    fn decode_breaks_class_when_constant_is_dropped() {
        let mut t = Tabloid::new(e2(), 3);
        t.add_node(&[0], &[]);
        t.add_node(&[1], &[]);
        t.add_node(&[0], &[]);
        t.graph.add_edge(0, 1).unwrap();
        t.graph.add_edge(1, 2).unwrap();
        let d = decode(&TreeTabloid::new(t, 0).unwrap()).unwrap();
        assert_eq!(d.structure.len(), 3);
        assert_ne!(d.classes[0][&0], d.classes[2][&0]);
    }

    #[test]
    fn model_tabloid_counts() {
        let a = Structure::new(e2()).fact("E", &["a", "b"]);
        let g = tabloid_of_model(&a, 2).unwrap();
        assert_eq!(g.tabloid.len(), 4 + 4 + 4 * 3);
        assert!(validate_tabloid(&g.tabloid).is_ok());
        let looped = Structure::new(e2()).fact("E", &["a", "a"]);
        let g = tabloid_of_model(&looped, 2).unwrap();
        assert_eq!(g.tabloid.len(), 4);
        assert_eq!(g.tabloid.graph.edge_count(), 0);
        assert_eq!(tabloid_of_model(&Structure::with_elements(e2(), 1), 2), Err(TabloidError::Atomless));
    }

    #[test]
    fn file_round_trip() {
        let t = two_node_path();
        let parsed = Tabloid::parse(&t.to_string()).unwrap();
        assert_eq!(parsed.graph, t.graph);
        assert_eq!(parsed.pool, 3);
        assert!(Tabloid::parse("node a k1\nedge a b").is_err());
    }

    #[test]
    fn unraveling_decodes_to_bisimilar_structure() {
        // a single edge: every node of the model tabloid has full domain after one step
        let a = Structure::new(e2()).fact("E", &["a", "b"]);
        let g = tabloid_of_model(&a, 2).unwrap();
        let root = (0..g.tabloid.len()).find(|&v| g.injections[v].len() == 2).unwrap();
        let (tree, _) = unravel_tabloid(&g.tabloid, root, 2).unwrap();
        let d = decode(&tree).unwrap();
        let at_root: Vec<Elem> = g.injections[root].iter().map(|&(_, c)| d.classes[0][&c]).collect();
        let orig: Vec<Elem> = g.injections[root].iter().map(|&(e, _)| e).collect();
        assert!(guarded_bisimilar(&a, &orig, &d.structure, &at_root).unwrap());
    }
}
