//! The closure of a sentence in negation normal form: its subformula occurrences and
//! signature literals as indexed items, and φ-types over a pool of constants.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::logic::{equality_patterns, FixKind, Formula, Predicate};

/// Constant of the pool `k1..k{2n}`, zero-based.
pub type Const = u8;

pub fn const_name(c: Const) -> String {
    format!("k{}", c + 1)
}

pub fn parse_const(s: &str) -> Option<Const> {
    let n: usize = s.strip_prefix('k')?.parse().ok()?;
    (1..=255).contains(&n).then(|| (n - 1) as Const)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClosureError {
    #[error("formula is not in negation normal form")]
    NotNnf,
    #[error("relation `{0}` is used with inconsistent arities")]
    Signature(String),
    #[error("fixpoint variable `{0}` is unbound")]
    UnboundFixpoint(String),
    #[error("fixpoint `{0}` has free variables besides its parameters")]
    OpenFixpointBody(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ItemKind {
    Literal { rel: String, args: Vec<String>, positive: bool },
    Const(bool),
    And(usize, usize),
    Or(usize, usize),
    Exists { vars: Vec<String>, guard: usize, body: usize },
    Forall { vars: Vec<String>, guard: usize, body: usize },
    Fix { kind: FixKind, params: Vec<String>, args: Vec<String>, body: usize },
    FixApp { binder: usize, args: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub formula: Formula,
    /// Free first-order variables in name order; valuations are aligned with them.
    pub free: Vec<String>,
    pub kind: ItemKind,
    /// The item with free fixpoint variables replaced by their binders.
    pub expanded: Formula,
}

/// An item under a valuation of its free variables into constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pair {
    pub item: usize,
    pub eta: Vec<Const>,
}

impl Pair {
    pub fn new(item: usize, eta: Vec<Const>) -> Self {
        Pair { item, eta }
    }

    pub fn parse(s: &str) -> Option<Pair> {
        let (item, rest) = s.split_once('(')?;
        let inner = rest.strip_suffix(')')?;
        let eta = if inner.is_empty() {
            Vec::new()
        } else {
            inner.split(',').map(parse_const).collect::<Option<Vec<_>>>()?
        };
        Some(Pair {
            item: item.parse().ok()?,
            eta,
        })
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let eta: Vec<String> = self.eta.iter().map(|&c| const_name(c)).collect();
        write!(f, "{}({})", self.item, eta.join(","))
    }
}

/// Every function from `k` variables into `from`, lexicographically.
pub fn assignments(k: usize, from: &[Const]) -> Vec<Vec<Const>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|p| {
                from.iter().map(move |&c| {
                    let mut p = p.clone();
                    p.push(c);
                    p
                })
            })
            .collect();
    }
    out
}

#[derive(Debug, Clone)]
pub struct Closure {
    pub formula: Formula,
    pub items: Vec<Item>,
    /// Items `0..tree_len` are subformula occurrences; the rest are signature literals.
    pub tree_len: usize,
    pub width: usize,
    /// Size of the constant pool, `2 * max(width, 1)`.
    pub pool: usize,
    vars: Vec<String>,
    literal_index: HashMap<(String, Vec<usize>, bool), usize>,
}

struct Builder {
    items: Vec<Item>,
    binders: Vec<(String, usize)>,
}

impl Builder {
    fn push(&mut self, formula: &Formula, kind: ItemKind) -> usize {
        self.items.push(Item {
            formula: formula.clone(),
            free: formula.free_vars().into_iter().collect(),
            kind,
            expanded: formula.clone(),
        });
        self.items.len() - 1
    }

    fn literal(&mut self, formula: &Formula, rel: &str, args: &[String], positive: bool) -> usize {
        let kind = ItemKind::Literal {
            rel: rel.to_string(),
            args: args.to_vec(),
            positive,
        };
        self.push(formula, kind)
    }

    fn go(&mut self, f: &Formula) -> Result<usize, ClosureError> {
        let placeholder = ItemKind::Const(true);
        match f {
            Formula::Atom(a) => match &a.pred {
                Predicate::Rel(r) => Ok(self.literal(f, r, &a.args, true)),
                Predicate::Fix(z) => {
                    let binder = self
                        .binders
                        .iter()
                        .rev()
                        .find(|b| b.0 == *z)
                        .map(|b| b.1)
                        .ok_or_else(|| ClosureError::UnboundFixpoint(z.clone()))?;
                    Ok(self.push(f, ItemKind::FixApp { binder, args: a.args.clone() }))
                }
            },
            Formula::Not(inner) => match &**inner {
                Formula::Atom(a) if a.is_relational() => {
                    let id = self.literal(f, a.pred.name(), &a.args, false);
                    self.go(inner)?;
                    Ok(id)
                }
                _ => Err(ClosureError::NotNnf),
            },
            Formula::Const(b) => Ok(self.push(f, ItemKind::Const(*b))),
            Formula::And(a, b) | Formula::Or(a, b) => {
                let id = self.push(f, placeholder);
                let l = self.go(a)?;
                let r = self.go(b)?;
                self.items[id].kind = if matches!(f, Formula::And(..)) { ItemKind::And(l, r) } else { ItemKind::Or(l, r) };
                Ok(id)
            }
            Formula::Exists(q) | Formula::Forall(q) => {
                let id = self.push(f, placeholder);
                let guard_formula = Formula::Atom(q.guard.clone());
                let guard = match &q.guard.pred {
                    Predicate::Rel(r) => self.literal(&guard_formula, r, &q.guard.args, true),
                    Predicate::Fix(z) => return Err(ClosureError::UnboundFixpoint(z.clone())),
                };
                let body = self.go(&q.body)?;
                let vars = q.vars.clone();
                self.items[id].kind = if matches!(f, Formula::Exists(_)) {
                    ItemKind::Exists { vars, guard, body }
                } else {
                    ItemKind::Forall { vars, guard, body }
                };
                Ok(id)
            }
            Formula::Fix(fp) => {
                if fp.body.free_vars().iter().any(|v| !fp.params.contains(v)) {
                    return Err(ClosureError::OpenFixpointBody(fp.var.clone()));
                }
                let id = self.push(f, placeholder);
                self.binders.push((fp.var.clone(), id));
                let body = self.go(&fp.body)?;
                self.binders.pop();
                self.items[id].kind = ItemKind::Fix {
                    kind: fp.kind,
                    params: fp.params.clone(),
                    args: fp.args.clone(),
                    body,
                };
                Ok(id)
            }
        }
    }
}

impl Closure {
    pub fn new(f: &Formula) -> Result<Closure, ClosureError> {
        if !f.is_nnf() {
            return Err(ClosureError::NotNnf);
        }
        let sig = f.signature().map_err(|e| ClosureError::Signature(e.to_string()))?;
        let mut b = Builder {
            items: Vec::new(),
            binders: Vec::new(),
        };
        b.go(f)?;
        let tree_len = b.items.len();
        let vars: Vec<String> = f.variables().into_iter().collect();
        let width = f.width();
        let blocks = width.min(vars.len());
        let mut literal_index = HashMap::new();
        for (rel, arity) in sig.iter() {
            for pattern in equality_patterns(arity, blocks) {
                let args: Vec<String> = pattern.iter().map(|&k| vars[k].clone()).collect();
                let atom = Formula::Atom(crate::logic::Atom {
                    pred: Predicate::Rel(rel.to_string()),
                    args: args.clone(),
                });
                let pos = b.literal(&atom, rel, &args, true);
                let neg = b.literal(&Formula::not(atom), rel, &args, false);
                literal_index.insert((rel.to_string(), pattern.clone(), true), pos);
                literal_index.insert((rel.to_string(), pattern, false), neg);
            }
        }
        let mut items = b.items;
        // expansion: substitute enclosing binders, innermost first
        let mut chains: Vec<Vec<usize>> = vec![Vec::new(); tree_len];
        fn chain(items: &[Item], i: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            out[i] = stack.clone();
            let children: Vec<usize> = match &items[i].kind {
                ItemKind::And(l, r) | ItemKind::Or(l, r) => vec![*l, *r],
                ItemKind::Exists { guard, body, .. } | ItemKind::Forall { guard, body, .. } => vec![*guard, *body],
                ItemKind::Fix { body, .. } => {
                    stack.push(i);
                    chain(items, *body, stack, out);
                    stack.pop();
                    vec![]
                }
                ItemKind::Literal { positive: false, .. } => {
                    if i + 1 < items.len() {
                        vec![i + 1]
                    } else {
                        vec![]
                    }
                }
                _ => vec![],
            };
            for c in children {
                chain(items, c, stack, out);
            }
        }
        chain(&items, 0, &mut Vec::new(), &mut chains);
        for (i, binders) in chains.iter().enumerate() {
            let mut e = items[i].formula.clone();
            for &bi in binders.iter().rev() {
                if let Formula::Fix(fp) = &items[bi].formula {
                    e = e.substitute_fixvar(&fp.var, fp);
                }
            }
            items[i].expanded = e;
        }
        let pool = 2 * width.max(1);
        Ok(Closure {
            formula: f.clone(),
            items,
            tree_len,
            width,
            pool,
            vars,
            literal_index,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Width used for constant budgets: at least 1.
    pub fn n(&self) -> usize {
        self.width.max(1)
    }

    pub fn pool_consts(&self) -> Vec<Const> {
        (0..self.pool as Const).collect()
    }

    pub fn signature_literal_count(&self) -> usize {
        self.items.len() - self.tree_len
    }

    /// Valuation of item `to` obtained from `(vars, eta)`; `None` if some variable is
    /// missing.
    pub fn project(&self, vars: &[String], eta: &[Const], to: usize) -> Option<Vec<Const>> {
        self.items[to]
            .free
            .iter()
            .map(|v| vars.iter().position(|w| w == v).map(|i| eta[i]))
            .collect()
    }

    /// Ground atom denoted by a literal item under `eta`, with the literal's sign.
    pub fn ground(&self, item: usize, eta: &[Const]) -> Option<(String, Vec<Const>, bool)> {
        match &self.items[item].kind {
            ItemKind::Literal { rel, args, positive } => {
                let tuple = args
                    .iter()
                    .map(|a| self.items[item].free.iter().position(|v| v == a).map(|i| eta[i]))
                    .collect::<Option<Vec<_>>>()?;
                Some((rel.clone(), tuple, *positive))
            }
            _ => None,
        }
    }

    /// The signature-literal pair expressing `R(tuple)` (or its negation).
    pub fn canonical_literal(&self, rel: &str, tuple: &[Const], positive: bool) -> Option<Pair> {
        let mut distinct: Vec<Const> = Vec::new();
        let pattern: Vec<usize> = tuple
            .iter()
            .map(|c| match distinct.iter().position(|d| d == c) {
                Some(i) => i,
                None => {
                    distinct.push(*c);
                    distinct.len() - 1
                }
            })
            .collect();
        let item = *self.literal_index.get(&(rel.to_string(), pattern, positive))?;
        Some(Pair { item, eta: distinct })
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }
}

/// A φ-type: a carrier of constants and the pairs it claims true.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhiType {
    pub carrier: BTreeSet<Const>,
    pub pairs: BTreeSet<Pair>,
}

impl PhiType {
    pub fn contains(&self, p: &Pair) -> bool {
        self.pairs.contains(p)
    }

    /// Canonical text: carrier, then pairs in (item, valuation) order.
    pub fn render(&self) -> String {
        let carrier: Vec<String> = self.carrier.iter().map(|&c| const_name(c)).collect();
        let mut out = format!("{{{}}}", carrier.join(","));
        for p in &self.pairs {
            out.push(' ');
            out.push_str(&p.to_string());
        }
        out
    }

    pub fn parse(text: &str) -> Option<PhiType> {
        let mut words = text.split_whitespace();
        let head = words.next()?;
        let inner = head.strip_prefix('{')?.strip_suffix('}')?;
        let carrier = if inner.is_empty() {
            BTreeSet::new()
        } else {
            inner.split(',').map(parse_const).collect::<Option<BTreeSet<_>>>()?
        };
        let pairs = words.map(Pair::parse).collect::<Option<BTreeSet<_>>>()?;
        Some(PhiType { carrier, pairs })
    }

    /// First 16 hex digits of the SHA-256 of the rendering.
    pub fn hash_hex(&self) -> String {
        let digest = Sha256::digest(self.render().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Local coherence of a candidate letter; `Err` names the first violated rule.
pub fn letter_check(cl: &Closure, t: &PhiType) -> Result<(), String> {
    if t.carrier.len() > cl.n() {
        return Err(format!("carrier has {} constants, more than {}", t.carrier.len(), cl.n()));
    }
    if let Some(c) = t.carrier.iter().find(|&&c| c as usize >= cl.pool) {
        return Err(format!("constant {} is outside the pool", const_name(*c)));
    }
    for p in &t.pairs {
        if p.item >= cl.items.len() || p.eta.len() != cl.items[p.item].free.len() {
            return Err(format!("pair {p} does not fit the closure"));
        }
        if let Some(c) = p.eta.iter().find(|c| !t.carrier.contains(c)) {
            return Err(format!("pair {p} uses {} outside the carrier", const_name(*c)));
        }
    }
    let carrier: Vec<Const> = t.carrier.iter().copied().collect();
    let has = |item: usize, eta: Vec<Const>| t.contains(&Pair { item, eta });

    // literals: one truth value per ground atom
    let mut truth: HashMap<(String, Vec<Const>), (bool, Pair)> = HashMap::new();
    for (i, item) in cl.items.iter().enumerate() {
        if !matches!(item.kind, ItemKind::Literal { .. }) {
            continue;
        }
        for eta in assignments(item.free.len(), &carrier) {
            let (rel, tuple, positive) = cl.ground(i, &eta).expect("literal");
            let present = has(i, eta.clone());
            let value = present == positive;
            let pair = Pair::new(i, eta);
            match truth.get(&(rel.clone(), tuple.clone())) {
                Some((v, other)) if *v != value => {
                    return Err(format!("literal pairs {other} and {pair} disagree"));
                }
                Some(_) => {}
                None => {
                    truth.insert((rel, tuple), (value, pair));
                }
            }
        }
    }
    let mentioned: BTreeSet<Const> = truth.keys().flat_map(|(_, tuple)| tuple.iter().copied()).collect();
    if cl.signature_literal_count() > 0 && mentioned != t.carrier {
        return Err("carrier differs from the constants of the literal pairs".into());
    }

    for (i, item) in cl.items.iter().enumerate().take(cl.tree_len) {
        for eta in assignments(item.free.len(), &carrier) {
            let present = has(i, eta.clone());
            let at = |j: usize| cl.project(&item.free, &eta, j).expect("child variables are free in parent");
            let fail = |rule: &str| Err(format!("{rule} violated at {}", Pair::new(i, eta.clone())));
            match &item.kind {
                ItemKind::Literal { .. } => {}
                ItemKind::Const(b) => {
                    if present != *b {
                        return fail("constant");
                    }
                }
                ItemKind::And(l, r) => {
                    if present != (has(*l, at(*l)) && has(*r, at(*r))) {
                        return fail("conjunction");
                    }
                }
                ItemKind::Or(l, r) => {
                    if present != (has(*l, at(*l)) || has(*r, at(*r))) {
                        return fail("disjunction");
                    }
                }
                ItemKind::Fix { params, args, body, .. } => {
                    let vals: Vec<Const> = args.iter().map(|a| eta[item.free.iter().position(|v| v == a).unwrap()]).collect();
                    if cl.project(params, &vals, *body).map(|e| has(*body, e)) != Some(present) {
                        return fail("fixpoint unfolding");
                    }
                }
                ItemKind::FixApp { binder, args } => {
                    let ItemKind::Fix { params, body, .. } = &cl.items[*binder].kind else { unreachable!() };
                    let vals: Vec<Const> = args.iter().map(|a| eta[item.free.iter().position(|v| v == a).unwrap()]).collect();
                    if cl.project(params, &vals, *body).map(|e| has(*body, e)) != Some(present) {
                        return fail("fixpoint variable unfolding");
                    }
                }
                ItemKind::Exists { vars, guard, body } | ItemKind::Forall { vars, guard, body } => {
                    let exists = matches!(item.kind, ItemKind::Exists { .. });
                    let mut scope: Vec<String> = item.free.iter().filter(|v| !vars.contains(v)).cloned().collect();
                    let base: Vec<Const> = item
                        .free
                        .iter()
                        .zip(&eta)
                        .filter(|(v, _)| !vars.contains(v))
                        .map(|(_, &c)| c)
                        .collect();
                    scope.extend(vars.iter().cloned());
                    for ext in assignments(vars.len(), &carrier) {
                        let mut full = base.clone();
                        full.extend(ext);
                        let (Some(g), Some(b)) = (cl.project(&scope, &full, *guard), cl.project(&scope, &full, *body)) else {
                            continue;
                        };
                        if !has(*guard, g) {
                            continue;
                        }
                        let body_true = has(*body, b);
                        if exists && body_true && !present {
                            return fail("local witness");
                        }
                        if !exists && !body_true && present {
                            return fail("local counterexample");
                        }
                    }
                }
            }
        }
    }
    Ok(())
}
