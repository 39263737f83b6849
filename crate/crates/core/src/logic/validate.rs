use std::collections::BTreeSet;
use std::fmt;

use super::formula::{Atom, Formula, Predicate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Syntactic invariants only; what the model checker needs.
    Relaxed,
    /// Additionally every fixpoint body guards its parameters explicitly and has no
    /// free variables besides them; what the compiler needs.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    FixpointGuard,
    Positivity,
    UncoveredFreeVariable,
    UnguardedBoundVariable,
    UnboundFixpoint,
    FixpointArity,
    RepeatedParameter,
    ImplicitParameterGuard,
    ExtraFixpointParameter,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::FixpointGuard => "fixpoint-guard",
            ViolationKind::Positivity => "positivity",
            ViolationKind::UncoveredFreeVariable => "uncovered-free-variable",
            ViolationKind::UnguardedBoundVariable => "unguarded-bound-variable",
            ViolationKind::UnboundFixpoint => "unbound-fixpoint",
            ViolationKind::FixpointArity => "fixpoint-arity",
            ViolationKind::RepeatedParameter => "repeated-parameter",
            ViolationKind::ImplicitParameterGuard => "implicit-parameter-guard",
            ViolationKind::ExtraFixpointParameter => "extra-fixpoint-parameter",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: ViolationKind,
    /// Child indices from the root (see [`Formula::children`]).
    pub path: Vec<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.diagnostics.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.diagnostics.iter().any(|d| d.kind == kind)
    }

    pub fn push(&mut self, kind: ViolationKind, path: &[usize], message: String) {
        self.diagnostics.push(Diagnostic {
            kind,
            path: path.to_vec(),
            message,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        write!(f, "failed")?;
        for d in &self.diagnostics {
            let path: Vec<String> = d.path.iter().map(|i| i.to_string()).collect();
            write!(f, "\n  [{}] at /{}: {}", d.kind, path.join("/"), d.message)?;
        }
        Ok(())
    }
}

struct Binder {
    name: String,
    params: usize,
    parity: bool,
}

struct Walker {
    mode: Mode,
    report: ValidationReport,
    binders: Vec<Binder>,
    path: Vec<usize>,
}

impl Walker {
    fn atom(&mut self, a: &Atom, negated: bool) {
        if let Predicate::Fix(z) = &a.pred {
            match self.binders.iter().rev().find(|b| b.name == *z) {
                None => self.report.push(
                    ViolationKind::UnboundFixpoint,
                    &self.path,
                    format!("`{z}` is not bound by an enclosing fixpoint"),
                ),
                Some(b) => {
                    if b.params != a.args.len() {
                        let msg = format!("`{z}` takes {} argument(s), given {}", b.params, a.args.len());
                        self.report.push(ViolationKind::FixpointArity, &self.path, msg);
                    }
                    if b.parity != negated {
                        let msg = format!("`{z}` occurs under an odd number of negations");
                        self.report.push(ViolationKind::Positivity, &self.path, msg);
                    }
                }
            }
        }
    }

    fn walk(&mut self, f: &Formula, negated: bool) {
        match f {
            Formula::Atom(a) => self.atom(a, negated),
            Formula::Const(_) => {}
            Formula::Not(a) => self.child(0, a, !negated),
            Formula::And(a, b) | Formula::Or(a, b) => {
                self.child(0, a, negated);
                self.child(1, b, negated);
            }
            Formula::Exists(q) | Formula::Forall(q) => {
                if !q.guard.is_relational() {
                    let msg = format!("guard `{}` is a fixpoint variable", q.guard);
                    self.report.push(ViolationKind::FixpointGuard, &self.path, msg);
                }
                let guard_vars: BTreeSet<&String> = q.guard.args.iter().collect();
                for v in q.body.free_vars() {
                    if !guard_vars.contains(&v) {
                        let msg = format!("free variable `{v}` of the body is not covered by guard `{}`", q.guard);
                        self.report.push(ViolationKind::UncoveredFreeVariable, &self.path, msg);
                    }
                }
                for v in &q.vars {
                    if !guard_vars.contains(v) {
                        let msg = format!("quantified variable `{v}` does not occur in guard `{}`", q.guard);
                        self.report.push(ViolationKind::UnguardedBoundVariable, &self.path, msg);
                    }
                }
                self.child(0, &q.body, negated);
            }
            Formula::Fix(fp) => {
                let distinct: BTreeSet<&String> = fp.params.iter().collect();
                if distinct.len() != fp.params.len() {
                    let msg = format!("parameters of `{}` are not pairwise distinct", fp.var);
                    self.report.push(ViolationKind::RepeatedParameter, &self.path, msg);
                }
                if fp.args.len() != fp.params.len() {
                    let msg = format!("`{}` has {} parameter(s) but {} argument(s)", fp.var, fp.params.len(), fp.args.len());
                    self.report.push(ViolationKind::FixpointArity, &self.path, msg);
                }
                if self.mode == Mode::Strict {
                    let extra: Vec<String> = fp
                        .body
                        .free_vars()
                        .into_iter()
                        .filter(|v| !fp.params.contains(v))
                        .collect();
                    if !extra.is_empty() {
                        let msg = format!("body of `{}` has free variables {extra:?} besides its parameters", fp.var);
                        self.report.push(ViolationKind::ExtraFixpointParameter, &self.path, msg);
                    }
                    if !explicitly_guarded(&fp.body, &fp.params) {
                        let msg = format!("parameters of `{}` are not explicitly guarded in every branch", fp.var);
                        self.report.push(ViolationKind::ImplicitParameterGuard, &self.path, msg);
                    }
                }
                self.binders.push(Binder {
                    name: fp.var.clone(),
                    params: fp.params.len(),
                    parity: negated,
                });
                self.child(0, &fp.body, negated);
                self.binders.pop();
            }
        }
    }

    fn child(&mut self, idx: usize, f: &Formula, negated: bool) {
        self.path.push(idx);
        self.walk(f, negated);
        self.path.pop();
    }
}

/// Whether every top-level branch of `body` carries a positive relational atom
/// mentioning all of `params` as free variables. Conjunctions need one guarded
/// side, disjunctions need both; a guarded quantifier counts through its guard.
pub fn explicitly_guarded(body: &Formula, params: &[String]) -> bool {
    let covers = |a: &Atom, bound: &[String]| {
        a.is_relational() && params.iter().all(|p| a.args.contains(p) && !bound.contains(p))
    };
    match body {
        Formula::Atom(a) => covers(a, &[]),
        Formula::And(a, b) => explicitly_guarded(a, params) || explicitly_guarded(b, params),
        Formula::Or(a, b) => explicitly_guarded(a, params) && explicitly_guarded(b, params),
        Formula::Exists(q) | Formula::Forall(q) => covers(&q.guard, &q.vars),
        Formula::Const(_) | Formula::Not(_) | Formula::Fix(_) => params.is_empty(),
    }
}

/// Checks the guarded-syntax invariants of `f`; failures are reported, never thrown.
pub fn validate_guarded(f: &Formula, mode: Mode) -> ValidationReport {
    let mut w = Walker {
        mode,
        report: ValidationReport::default(),
        binders: Vec::new(),
        path: Vec::new(),
    };
    w.walk(f, false);
    w.report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::formula::FixKind;

    #[test]
    fn fixpoint_guard_rejected() {
        let inner = Formula::exists(&["x", "y"], Atom::fix("Z", &["x", "y"]), Formula::Const(true));
        let f = Formula::fixpoint(FixKind::Lfp, "Z", &["x", "y"], inner, &["u", "v"]);
        let r = validate_guarded(&f, Mode::Relaxed);
        assert!(r.has(ViolationKind::FixpointGuard), "{r}");
    }

    #[test]
    fn odd_negation_rejected() {
        let body = Formula::not(Formula::Atom(Atom::fix("Z", &["z"])));
        let f = Formula::fixpoint(FixKind::Lfp, "Z", &["z"], body, &["x"]);
        let r = validate_guarded(&f, Mode::Relaxed);
        assert!(r.has(ViolationKind::Positivity));
        assert_eq!(r.diagnostics[0].path, vec![0, 0]);
    }

    #[test]
    fn double_negation_is_positive() {
        let body = Formula::and(
            Formula::Atom(Atom::rel("P", &["z"])),
            Formula::not(Formula::not(Formula::Atom(Atom::fix("Z", &["z"])))),
        );
        let f = Formula::fixpoint(FixKind::Gfp, "Z", &["z"], body, &["x"]);
        assert!(validate_guarded(&f, Mode::Strict).is_ok());
    }

    #[test]
    fn uncovered_body_variable() {
        let f = Formula::exists(&["x"], Atom::rel("P", &["x"]), Formula::Atom(Atom::rel("E", &["x", "y"])));
        let r = validate_guarded(&f, Mode::Relaxed);
        assert!(r.has(ViolationKind::UncoveredFreeVariable));
        assert!(!r.is_ok());
    }

    #[test]
    fn strict_mode_requires_guarded_parameters() {
        // [lfp Z(z) . Z(z) | P(z)](x): the left disjunct has no guard for z
        let body = Formula::or(Formula::Atom(Atom::fix("Z", &["z"])), Formula::Atom(Atom::rel("P", &["z"])));
        let f = Formula::fixpoint(FixKind::Lfp, "Z", &["z"], body, &["x"]);
        assert!(validate_guarded(&f, Mode::Relaxed).is_ok());
        assert!(validate_guarded(&f, Mode::Strict).has(ViolationKind::ImplicitParameterGuard));
    }
}
