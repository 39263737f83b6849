//! Finite relational structures and the fixpoint-iteration model checker.

mod enumerate;
mod eval;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::logic::Signature;

pub use enumerate::{count_structures, enumerate_structures, EnumerateError, StructureEnumerator};
pub use eval::{evaluate, fixpoint_step, EvalError, Valuation};

/// Element of a structure's universe, by position.
pub type Elem = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown relation `{name}`")]
    UnknownRelation { line: usize, name: String },
    #[error("line {line}: relation `{name}` has arity {expected}, atom has {found} component(s)")]
    ArityMismatch {
        line: usize,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: element `{name}` used before declaration")]
    UndeclaredElement { line: usize, name: String },
    #[error("line {line}: element `{name}` declared twice")]
    DuplicateElement { line: usize, name: String },
    #[error("structure has an empty universe")]
    EmptyUniverse,
    #[error("carrier lists element `{0}` more than once")]
    DuplicateCarrier(String),
    #[error("element index {0} is outside the universe")]
    NoSuchElement(Elem),
    #[error("signatures differ: {0} vs {1}")]
    SignatureMismatch(String, String),
}

/// A finite structure: universe plus one table of tuples per relation (closed world).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Structure {
    sig: Signature,
    names: Vec<String>,
    tables: BTreeMap<String, BTreeSet<Vec<Elem>>>,
}

impl Structure {
    pub fn new(sig: Signature) -> Self {
        let tables = sig.iter().map(|(r, _)| (r.to_string(), BTreeSet::new())).collect();
        Structure {
            sig,
            names: Vec::new(),
            tables,
        }
    }

    /// Structure with elements named `e1..en` and no atoms.
    pub fn with_elements(sig: Signature, n: usize) -> Self {
        let mut s = Structure::new(sig);
        for i in 1..=n {
            s.names.push(format!("e{i}"));
        }
        s
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, e: Elem) -> &str {
        &self.names[e]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn element(&self, name: &str) -> Option<Elem> {
        self.names.iter().position(|n| n == name)
    }

    pub fn add_element(&mut self, name: &str) -> Elem {
        self.names.push(name.to_string());
        self.names.len() - 1
    }

    pub fn add_atom(&mut self, rel: &str, args: &[Elem]) -> Result<bool, StructureError> {
        let arity = self.sig.arity(rel).ok_or_else(|| StructureError::UnknownRelation {
            line: 0,
            name: rel.to_string(),
        })?;
        if arity != args.len() {
            return Err(StructureError::ArityMismatch {
                line: 0,
                name: rel.to_string(),
                expected: arity,
                found: args.len(),
            });
        }
        if let Some(&bad) = args.iter().find(|&&e| e >= self.names.len()) {
            return Err(StructureError::NoSuchElement(bad));
        }
        Ok(self.tables.get_mut(rel).expect("declared").insert(args.to_vec()))
    }

    /// Test helper: adds an atom over element names, creating elements as needed.
    pub fn fact(mut self, rel: &str, args: &[&str]) -> Self {
        let ids: Vec<Elem> = args
            .iter()
            .map(|n| self.element(n).unwrap_or_else(|| self.add_element(n)))
            .collect();
        self.add_atom(rel, &ids).expect("well-formed fact");
        self
    }

    pub fn holds(&self, rel: &str, args: &[Elem]) -> bool {
        self.tables.get(rel).is_some_and(|t| t.contains(args))
    }

    pub fn table(&self, rel: &str) -> impl Iterator<Item = &Vec<Elem>> + '_ {
        self.tables.get(rel).into_iter().flatten()
    }

    /// All atoms, ordered by relation name then tuple.
    pub fn atoms(&self) -> impl Iterator<Item = (&str, &[Elem])> + '_ {
        self.tables
            .iter()
            .flat_map(|(r, t)| t.iter().map(move |tuple| (r.as_str(), tuple.as_slice())))
    }

    pub fn atom_count(&self) -> usize {
        self.tables.values().map(BTreeSet::len).sum()
    }

    /// Image of the structure under a permutation of the universe; names move along.
    pub fn permute(&self, perm: &[Elem]) -> Structure {
        let mut names = vec![String::new(); self.names.len()];
        for (i, n) in self.names.iter().enumerate() {
            names[perm[i]] = n.clone();
        }
        let tables = self
            .tables
            .iter()
            .map(|(r, t)| (r.clone(), t.iter().map(|tu| tu.iter().map(|&e| perm[e]).collect()).collect()))
            .collect();
        Structure {
            sig: self.sig.clone(),
            names,
            tables,
        }
    }

    /// Disjoint union; elements of `other` are appended and their names suffixed with `'`.
    pub fn disjoint_union(&self, other: &Structure) -> Result<Structure, StructureError> {
        if self.sig != other.sig {
            return Err(StructureError::SignatureMismatch(self.sig.to_string(), other.sig.to_string()));
        }
        let offset = self.names.len();
        let mut out = self.clone();
        for n in &other.names {
            out.names.push(format!("{n}'"));
        }
        for (r, tuple) in other.atoms() {
            let shifted: Vec<Elem> = tuple.iter().map(|e| e + offset).collect();
            out.tables.get_mut(r).expect("same signature").insert(shifted);
        }
        Ok(out)
    }

    /// Parses the line-oriented structure format; `;` also separates statements.
    pub fn parse(text: &str) -> Result<Structure, StructureError> {
        let mut sig = Signature::new();
        let mut names: Vec<String> = Vec::new();
        let mut atoms: Vec<(usize, String, Vec<Elem>)> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let content = raw.split('#').next().unwrap_or("");
            for stmt in content.split(';') {
                let words: Vec<&str> = stmt.split_whitespace().collect();
                let Some((&head, rest)) = words.split_first() else { continue };
                match head {
                    "sig" => {
                        let [name, arity] = rest else {
                            return Err(StructureError::Syntax { line, msg: "expected `sig NAME ARITY`".into() });
                        };
                        let arity: usize = arity.parse().map_err(|_| StructureError::Syntax {
                            line,
                            msg: format!("bad arity `{arity}`"),
                        })?;
                        sig.declare(name, arity)
                            .map_err(|e| StructureError::Syntax { line, msg: e.to_string() })?;
                    }
                    "elem" => {
                        if rest.is_empty() {
                            return Err(StructureError::Syntax { line, msg: "expected `elem NAME`".into() });
                        }
                        for name in rest {
                            if names.iter().any(|n| n == name) {
                                return Err(StructureError::DuplicateElement { line, name: name.to_string() });
                            }
                            names.push(name.to_string());
                        }
                    }
                    "atom" => {
                        let Some((&rel, args)) = rest.split_first() else {
                            return Err(StructureError::Syntax { line, msg: "expected `atom REL e1 ...`".into() });
                        };
                        let arity = sig.arity(rel).ok_or_else(|| StructureError::UnknownRelation {
                            line,
                            name: rel.to_string(),
                        })?;
                        if arity != args.len() {
                            return Err(StructureError::ArityMismatch {
                                line,
                                name: rel.to_string(),
                                expected: arity,
                                found: args.len(),
                            });
                        }
                        let ids = args
                            .iter()
                            .map(|a| {
                                names.iter().position(|n| n == a).ok_or_else(|| StructureError::UndeclaredElement {
                                    line,
                                    name: a.to_string(),
                                })
                            })
                            .collect::<Result<Vec<_>, _>>()?;
                        atoms.push((line, rel.to_string(), ids));
                    }
                    other => {
                        return Err(StructureError::Syntax {
                            line,
                            msg: format!("unknown statement `{other}`"),
                        })
                    }
                }
            }
        }
        if names.is_empty() {
            return Err(StructureError::EmptyUniverse);
        }
        let mut s = Structure::new(sig);
        s.names = names;
        for (_, rel, ids) in atoms {
            s.add_atom(&rel, &ids)?;
        }
        Ok(s)
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (r, a) in self.sig.iter() {
            writeln!(f, "sig {r} {a}")?;
        }
        for n in &self.names {
            writeln!(f, "elem {n}")?;
        }
        for (r, tuple) in self.atoms() {
            let args: Vec<&str> = tuple.iter().map(|&e| self.names[e].as_str()).collect();
            writeln!(f, "atom {r} {}", args.join(" "))?;
        }
        Ok(())
    }
}

/// Sets of elements occurring together in a single atom, closed under non-empty
/// subsets. Sorted by size, then lexicographically.
pub fn guarded_sets(s: &Structure) -> Vec<Vec<Elem>> {
    let mut out: BTreeSet<(usize, Vec<Elem>)> = BTreeSet::new();
    for (_, tuple) in s.atoms() {
        let comps: Vec<Elem> = tuple.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        for mask in 1u64..(1 << comps.len()) {
            let subset: Vec<Elem> = comps
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &e)| e)
                .collect();
            out.insert((subset.len(), subset));
        }
    }
    out.into_iter().map(|(_, s)| s).collect()
}

pub fn is_guarded(s: &Structure, set: &BTreeSet<Elem>) -> bool {
    !set.is_empty() && s.atoms().any(|(_, tuple)| set.iter().all(|e| tuple.contains(e)))
}

/// Positive atoms over a carrier sequence, with components replaced by positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomicType {
    pub size: usize,
    pub facts: BTreeSet<(String, Vec<usize>)>,
}

pub fn atomic_type(s: &Structure, carrier: &[Elem]) -> Result<AtomicType, StructureError> {
    for (i, e) in carrier.iter().enumerate() {
        if *e >= s.len() {
            return Err(StructureError::NoSuchElement(*e));
        }
        if carrier[..i].contains(e) {
            return Err(StructureError::DuplicateCarrier(s.name(*e).to_string()));
        }
    }
    let pos = |e: &Elem| carrier.iter().position(|c| c == e);
    let facts = s
        .atoms()
        .filter_map(|(r, tuple)| {
            let mapped: Option<Vec<usize>> = tuple.iter().map(pos).collect();
            mapped.map(|m| (r.to_string(), m))
        })
        .collect();
    Ok(AtomicType {
        size: carrier.len(),
        facts,
    })
}

/// Drops every atom with more than `n` distinct components.
pub fn normalize_width(s: &Structure, n: usize) -> Structure {
    let mut out = s.clone();
    for table in out.tables.values_mut() {
        table.retain(|t| t.iter().collect::<BTreeSet<_>>().len() <= n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e2() -> Signature {
        Signature::new().with("E", 2)
    }

    #[test]
    fn parse_one_edge() {
        let s = Structure::parse("sig E 2; elem a; elem b; atom E a b").unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.holds("E", &[0, 1]));
        assert_eq!(s.atom_count(), 1);
    }

    #[test]
    fn parse_empty_atom_section_and_errors() {
        let s = Structure::parse("sig E 2\nelem a\n").unwrap();
        assert_eq!(s.atom_count(), 0);
        assert!(matches!(
            Structure::parse("sig E 2; elem a; elem b; atom E a c"),
            Err(StructureError::UndeclaredElement { .. })
        ));
        assert!(matches!(
            Structure::parse("sig E 2; elem a; atom F a a"),
            Err(StructureError::UnknownRelation { .. })
        ));
        assert!(matches!(
            Structure::parse("sig E 2; elem a; atom E a"),
            Err(StructureError::ArityMismatch { .. })
        ));
        assert_eq!(Structure::parse("sig E 2"), Err(StructureError::EmptyUniverse));
    }

    #[test]
    fn print_parse_round_trip() {
        let s = Structure::new(e2()).fact("E", &["a", "b"]).fact("E", &["b", "b"]);
        assert_eq!(Structure::parse(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn guarded_sets_examples() {
        let s = Structure::new(e2()).fact("E", &["a", "b"]);
        assert_eq!(guarded_sets(&s), vec![vec![0], vec![1], vec![0, 1]]);
        let s = Structure::new(e2()).fact("E", &["a", "a"]);
        assert_eq!(guarded_sets(&s), vec![vec![0]]);
        let s = Structure::new(e2()).fact("E", &["a", "b"]).fact("E", &["b", "c"]);
        assert_eq!(guarded_sets(&s), vec![vec![0], vec![1], vec![2], vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn atomic_type_examples() {
        let s = Structure::new(e2()).fact("E", &["a", "b"]);
        let t = atomic_type(&s, &[0, 1]).unwrap();
        assert_eq!(t.facts, BTreeSet::from([("E".to_string(), vec![0, 1])]));
        let t = atomic_type(&s, &[1, 0]).unwrap();
        assert_eq!(t.facts, BTreeSet::from([("E".to_string(), vec![1, 0])]));
        assert!(atomic_type(&s, &[0]).unwrap().facts.is_empty());
        assert!(matches!(atomic_type(&s, &[0, 0]), Err(StructureError::DuplicateCarrier(_))));
    }

    #[test]
    fn normalize_counts_distinct_components() {
        let sig = Signature::new().with("E", 2).with("R", 3);
        let s = Structure::new(sig)
            .fact("E", &["a", "b"])
            .fact("R", &["a", "b", "c"])
            .fact("R", &["a", "a", "b"]);
        let n = normalize_width(&s, 2);
        assert!(!n.holds("R", &[0, 1, 2]));
        assert!(n.holds("R", &[0, 0, 1]));
        assert!(n.holds("E", &[0, 1]));
        let only_binary = Structure::new(e2()).fact("E", &["a", "b"]);
        assert_eq!(normalize_width(&only_binary, 2), only_binary);
    }
}
