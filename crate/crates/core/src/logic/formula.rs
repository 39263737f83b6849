use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::signature::{Signature, SignatureError};

/// What an atom is applied to: a relation of the signature or a fixpoint variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predicate {
    Rel(String),
    Fix(String),
}

impl Predicate {
    pub fn name(&self) -> &str {
        match self {
            Predicate::Rel(n) | Predicate::Fix(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: Predicate,
    pub args: Vec<String>,
}

impl Atom {
    pub fn rel(name: &str, args: &[&str]) -> Self {
        Atom {
            pred: Predicate::Rel(name.to_string()),
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn fix(name: &str, args: &[&str]) -> Self {
        Atom {
            pred: Predicate::Fix(name.to_string()),
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn is_relational(&self) -> bool {
        matches!(self.pred, Predicate::Rel(_))
    }
}

/// A guarded quantifier block: `exists ys . (guard & body)` or `forall ys . (guard -> body)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quantifier {
    pub vars: Vec<String>,
    pub guard: Atom,
    pub body: Box<Formula>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FixKind {
    Lfp,
    Gfp,
}

impl FixKind {
    pub fn dual(self) -> Self {
        match self {
            FixKind::Lfp => FixKind::Gfp,
            FixKind::Gfp => FixKind::Lfp,
        }
    }
}

/// `[lfp Z(params) . body](args)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fixpoint {
    pub kind: FixKind,
    pub var: String,
    pub params: Vec<String>,
    pub body: Box<Formula>,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Atom),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    Const(bool),
    Exists(Quantifier),
    Forall(Quantifier),
    Fix(Fixpoint),
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    pub fn exists(vars: &[&str], guard: Atom, body: Formula) -> Formula {
        Formula::Exists(Quantifier {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            guard,
            body: Box::new(body),
        })
    }

    pub fn forall(vars: &[&str], guard: Atom, body: Formula) -> Formula {
        Formula::Forall(Quantifier {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            guard,
            body: Box::new(body),
        })
    }

    pub fn fixpoint(kind: FixKind, var: &str, params: &[&str], body: Formula, args: &[&str]) -> Formula {
        Formula::Fix(Fixpoint {
            kind,
            var: var.to_string(),
            params: params.iter().map(|s| s.to_string()).collect(),
            body: Box::new(body),
            args: args.iter().map(|s| s.to_string()).collect(),
        })
    }

    /// Immediate subformulas, guards included, in left-to-right order.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) | Formula::Const(_) => vec![],
            Formula::And(a, b) | Formula::Or(a, b) => vec![a, b],
            Formula::Not(a) => vec![a],
            Formula::Exists(q) | Formula::Forall(q) => vec![&q.body],
            Formula::Fix(fp) => vec![&fp.body],
        }
    }

    /// Number of AST nodes; a quantifier's guard atom counts as one node.
    pub fn size(&self) -> usize {
        match self {
            Formula::Exists(q) | Formula::Forall(q) => 2 + q.body.size(),
            _ => 1 + self.children().iter().map(|c| c.size()).sum::<usize>(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a) => out.extend(a.args.iter().cloned()),
            Formula::Const(_) => {}
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Formula::Not(a) => a.collect_free(out),
            Formula::Exists(q) | Formula::Forall(q) => {
                let mut inner: BTreeSet<String> = q.guard.args.iter().cloned().collect();
                q.body.collect_free(&mut inner);
                for v in &q.vars {
                    inner.remove(v);
                }
                out.extend(inner);
            }
            Formula::Fix(fp) => {
                let mut inner = fp.body.free_vars();
                for p in &fp.params {
                    inner.remove(p);
                }
                out.extend(inner);
                out.extend(fp.args.iter().cloned());
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// All first-order variable names occurring anywhere, bound or free.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Atom(a) => out.extend(a.args.iter().cloned()),
            Formula::Exists(q) | Formula::Forall(q) => {
                out.extend(q.vars.iter().cloned());
                out.extend(q.guard.args.iter().cloned());
            }
            Formula::Fix(fp) => {
                out.extend(fp.params.iter().cloned());
                out.extend(fp.args.iter().cloned());
            }
            _ => {}
        });
        out
    }

    /// Relations used in the formula, with the arity they are used at.
    pub fn signature(&self) -> Result<Signature, SignatureError> {
        let mut sig = Signature::new();
        let mut err = None;
        let mut note = |a: &Atom| {
            if let Predicate::Rel(name) = &a.pred {
                if let Err(e) = sig.observe(name, a.args.len()) {
                    err.get_or_insert(e);
                }
            }
        };
        self.visit(&mut |f| match f {
            Formula::Atom(a) => note(a),
            Formula::Exists(q) | Formula::Forall(q) => note(&q.guard),
            _ => {}
        });
        match err {
            Some(e) => Err(e),
            None => Ok(sig),
        }
    }

    /// Pre-order traversal of subformula occurrences (guards are visited inside their quantifier).
    pub fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Maximum number of free variables over all subformulas, guard atoms included.
    pub fn width(&self) -> usize {
        let mut w = 0;
        self.visit(&mut |g| {
            w = w.max(g.free_vars().len());
            if let Formula::Exists(q) | Formula::Forall(q) = g {
                let guard_vars: BTreeSet<&String> = q.guard.args.iter().collect();
                w = w.max(guard_vars.len());
            }
        });
        w
    }

    /// Negation normal form: negations only in front of relational atoms.
    pub fn nnf(&self) -> Formula {
        push_negation(self, true)
    }

    pub fn is_nnf(&self) -> bool {
        match self {
            Formula::Not(a) => matches!(&**a, Formula::Atom(at) if at.is_relational()),
            _ => self.children().iter().all(|c| c.is_nnf()),
        }
    }

    /// Replaces free occurrences of fixpoint variable `var` by `binder` applied to the
    /// occurrence's arguments. `binder` must be a fixpoint whose body has no free
    /// first-order variables besides its parameters.
    pub fn substitute_fixvar(&self, var: &str, binder: &Fixpoint) -> Formula {
        match self {
            Formula::Atom(a) => match &a.pred {
                Predicate::Fix(z) if z == var => {
                    let mut fp = binder.clone();
                    fp.args = a.args.clone();
                    Formula::Fix(fp)
                }
                _ => self.clone(),
            },
            Formula::Const(_) => self.clone(),
            Formula::And(a, b) => Formula::and(a.substitute_fixvar(var, binder), b.substitute_fixvar(var, binder)),
            Formula::Or(a, b) => Formula::or(a.substitute_fixvar(var, binder), b.substitute_fixvar(var, binder)),
            Formula::Not(a) => Formula::not(a.substitute_fixvar(var, binder)),
            Formula::Exists(q) => Formula::Exists(Quantifier {
                vars: q.vars.clone(),
                guard: q.guard.clone(),
                body: Box::new(q.body.substitute_fixvar(var, binder)),
            }),
            Formula::Forall(q) => Formula::Forall(Quantifier {
                vars: q.vars.clone(),
                guard: q.guard.clone(),
                body: Box::new(q.body.substitute_fixvar(var, binder)),
            }),
            Formula::Fix(fp) if fp.var == var => self.clone(),
            Formula::Fix(fp) => Formula::Fix(Fixpoint {
                kind: fp.kind,
                var: fp.var.clone(),
                params: fp.params.clone(),
                body: Box::new(fp.body.substitute_fixvar(var, binder)),
                args: fp.args.clone(),
            }),
        }
    }

    /// Renames free first-order variables according to `map`; bound names are untouched.
    pub fn rename_free(&self, map: &BTreeMap<String, String>) -> Formula {
        let ren = |v: &String, bound: &BTreeSet<String>| -> String {
            if bound.contains(v) {
                v.clone()
            } else {
                map.get(v).cloned().unwrap_or_else(|| v.clone())
            }
        };
        fn go(
            f: &Formula,
            bound: &mut BTreeSet<String>,
            ren: &dyn Fn(&String, &BTreeSet<String>) -> String,
        ) -> Formula {
            let atom = |a: &Atom, bound: &BTreeSet<String>| Atom {
                pred: a.pred.clone(),
                args: a.args.iter().map(|v| ren(v, bound)).collect(),
            };
            match f {
                Formula::Atom(a) => Formula::Atom(atom(a, bound)),
                Formula::Const(b) => Formula::Const(*b),
                Formula::And(a, b) => Formula::and(go(a, bound, ren), go(b, bound, ren)),
                Formula::Or(a, b) => Formula::or(go(a, bound, ren), go(b, bound, ren)),
                Formula::Not(a) => Formula::not(go(a, bound, ren)),
                Formula::Exists(q) | Formula::Forall(q) => {
                    let mut inner = bound.clone();
                    inner.extend(q.vars.iter().cloned());
                    let nq = Quantifier {
                        vars: q.vars.clone(),
                        guard: atom(&q.guard, &inner),
                        body: Box::new(go(&q.body, &mut inner, ren)),
                    };
                    if matches!(f, Formula::Exists(_)) {
                        Formula::Exists(nq)
                    } else {
                        Formula::Forall(nq)
                    }
                }
                Formula::Fix(fp) => {
                    let mut inner = bound.clone();
                    inner.extend(fp.params.iter().cloned());
                    Formula::Fix(Fixpoint {
                        kind: fp.kind,
                        var: fp.var.clone(),
                        params: fp.params.clone(),
                        body: Box::new(go(&fp.body, &mut inner, ren)),
                        args: fp.args.iter().map(|v| ren(v, bound)).collect(),
                    })
                }
            }
        }
        go(self, &mut BTreeSet::new(), &ren)
    }
}

fn push_negation(f: &Formula, positive: bool) -> Formula {
    match f {
        Formula::Not(a) => push_negation(a, !positive),
        Formula::Atom(a) => match a.pred {
            // Fixpoint variables occur positively relative to their binder, and the
            // binder has already been dualised when we arrive here negatively.
            Predicate::Fix(_) => f.clone(),
            Predicate::Rel(_) if positive => f.clone(),
            Predicate::Rel(_) => Formula::not(f.clone()),
        },
        Formula::Const(b) => Formula::Const(*b == positive),
        Formula::And(a, b) => {
            let (a, b) = (push_negation(a, positive), push_negation(b, positive));
            if positive {
                Formula::and(a, b)
            } else {
                Formula::or(a, b)
            }
        }
        Formula::Or(a, b) => {
            let (a, b) = (push_negation(a, positive), push_negation(b, positive));
            if positive {
                Formula::or(a, b)
            } else {
                Formula::and(a, b)
            }
        }
        Formula::Exists(q) | Formula::Forall(q) => {
            let nq = Quantifier {
                vars: q.vars.clone(),
                guard: q.guard.clone(),
                body: Box::new(push_negation(&q.body, positive)),
            };
            match (f, positive) {
                (Formula::Exists(_), true) | (Formula::Forall(_), false) => Formula::Exists(nq),
                _ => Formula::Forall(nq),
            }
        }
        Formula::Fix(fp) => Formula::Fix(Fixpoint {
            kind: if positive { fp.kind } else { fp.kind.dual() },
            var: fp.var.clone(),
            params: fp.params.clone(),
            body: Box::new(push_negation(&fp.body, positive)),
            args: fp.args.clone(),
        }),
    }
}

// Printing. Precedence: `|` < `&` < `!`; both binary operators associate to the left.

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Level {
    Or,
    And,
    Unary,
}

fn level_of(f: &Formula) -> Level {
    match f {
        Formula::Or(..) => Level::Or,
        Formula::And(..) => Level::And,
        _ => Level::Unary,
    }
}

fn write_at(f: &Formula, min: Level, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if level_of(f) < min {
        write!(out, "(")?;
        write_at(f, Level::Or, out)?;
        return write!(out, ")");
    }
    match f {
        Formula::Or(a, b) => {
            write_at(a, Level::Or, out)?;
            write!(out, " | ")?;
            write_at(b, Level::And, out)
        }
        Formula::And(a, b) => {
            write_at(a, Level::And, out)?;
            write!(out, " & ")?;
            write_at(b, Level::Unary, out)
        }
        Formula::Not(a) => {
            write!(out, "!")?;
            write_at(a, Level::Unary, out)
        }
        Formula::Atom(a) => write!(out, "{a}"),
        Formula::Const(true) => write!(out, "true"),
        Formula::Const(false) => write!(out, "false"),
        Formula::Exists(q) => {
            write!(out, "exists {} . ({} & ", q.vars.join(" "), q.guard)?;
            write_at(&q.body, Level::Or, out)?;
            write!(out, ")")
        }
        Formula::Forall(q) => {
            write!(out, "forall {} . ({} -> ", q.vars.join(" "), q.guard)?;
            write_at(&q.body, Level::Or, out)?;
            write!(out, ")")
        }
        Formula::Fix(fp) => {
            let kw = match fp.kind {
                FixKind::Lfp => "lfp",
                FixKind::Gfp => "gfp",
            };
            write!(out, "[{kw} {}({}) . ", fp.var, fp.params.join(","))?;
            write_at(&fp.body, Level::Or, out)?;
            write!(out, "]({})", fp.args.join(","))
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.pred.name(), self.args.join(","))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(self, Level::Or, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(a: &str, b: &str) -> Atom {
        Atom::rel("E", &[a, b])
    }

    #[test]
    fn free_vars_binder_rule() {
        // [lfp Z(z). E(z,y) & Z(z)](x) has free vars {x, y}
        let body = Formula::and(Formula::Atom(edge("z", "y")), Formula::Atom(Atom::fix("Z", &["z"])));
        let f = Formula::fixpoint(FixKind::Lfp, "Z", &["z"], body, &["x"]);
        let fv: Vec<String> = f.free_vars().into_iter().collect();
        assert_eq!(fv, vec!["x".to_string(), "y".to_string()]);
    }

    #[test]
    fn width_counts_guards() {
        let f = Formula::exists(&["x", "y", "z"], Atom::rel("R", &["x", "y", "z"]), Formula::Const(true));
        assert_eq!(f.width(), 3);
        assert_eq!(f.size(), 3);
    }

    #[test]
    fn nnf_dualises_quantifiers_and_fixpoints() {
        let psi = Formula::Atom(Atom::rel("P", &["y"]));
        let f = Formula::not(Formula::exists(&["x", "y"], edge("x", "y"), psi.clone()));
        let expected = Formula::forall(&["x", "y"], edge("x", "y"), Formula::not(psi));
        assert_eq!(f.nnf(), expected);

        let body = Formula::forall(&["v"], edge("v", "z"), Formula::Atom(Atom::fix("Z", &["v"])));
        let lfp = Formula::fixpoint(FixKind::Lfp, "Z", &["z"], body, &["x"]);
        let negated = Formula::not(lfp).nnf();
        let dual_body = Formula::exists(&["v"], edge("v", "z"), Formula::Atom(Atom::fix("Z", &["v"])));
        assert_eq!(negated, Formula::fixpoint(FixKind::Gfp, "Z", &["z"], dual_body, &["x"]));
        assert!(negated.is_nnf());
    }

    #[test]
    fn printing_keeps_associativity() {
        let a = Formula::Atom(Atom::rel("P", &["x"]));
        let f = Formula::and(a.clone(), Formula::and(a.clone(), a.clone()));
        assert_eq!(f.to_string(), "P(x) & (P(x) & P(x))");
        let g = Formula::not(Formula::or(a.clone(), a));
        assert_eq!(g.to_string(), "!(P(x) | P(x))");
    }
}
