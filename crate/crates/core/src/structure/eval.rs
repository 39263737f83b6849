use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use super::{Elem, Structure};
use crate::logic::{Atom, FixKind, Fixpoint, Formula, Predicate, Quantifier};

pub type Valuation = BTreeMap<String, Elem>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("valuation does not cover free variable `{0}`")]
    IncompleteValuation(String),
    #[error("valuation maps `{0}` outside the universe")]
    OutOfUniverse(String),
    #[error("fixpoint variable `{0}` is unbound")]
    UnboundFixpoint(String),
}

/// Interpretation of the fixpoint variables in scope.
type FixEnv = HashMap<String, BTreeSet<Vec<Elem>>>;

/// Truth of `f` in `s` under `v`. Fixpoints are computed by Knaster–Tarski iteration,
/// inner fixpoints recomputed from scratch at each outer round.
pub fn evaluate(s: &Structure, f: &Formula, v: &Valuation) -> Result<bool, EvalError> {
    check_valuation(s, f, v)?;
    let mut val = v.clone();
    Evaluator { s }.eval(f, &mut val, &FixEnv::new())
}

/// One application of the operator of `fp` to `current`, with other free variables
/// of the body taken from `v`.
pub fn fixpoint_step(
    s: &Structure,
    fp: &Fixpoint,
    v: &Valuation,
    current: &BTreeSet<Vec<Elem>>,
) -> Result<BTreeSet<Vec<Elem>>, EvalError> {
    let mut env = FixEnv::new();
    env.insert(fp.var.clone(), current.clone());
    let mut val = v.clone();
    Evaluator { s }.step(fp, &mut val, &env)
}

fn check_valuation(s: &Structure, f: &Formula, v: &Valuation) -> Result<(), EvalError> {
    for x in f.free_vars() {
        match v.get(&x) {
            None => return Err(EvalError::IncompleteValuation(x)),
            Some(&e) if e >= s.len() => return Err(EvalError::OutOfUniverse(x)),
            _ => {}
        }
    }
    Ok(())
}

struct Evaluator<'a> {
    s: &'a Structure,
}

impl Evaluator<'_> {
    fn lookup(&self, val: &Valuation, x: &str) -> Result<Elem, EvalError> {
        val.get(x).copied().ok_or_else(|| EvalError::IncompleteValuation(x.to_string()))
    }

    fn atom(&self, a: &Atom, val: &Valuation, env: &FixEnv) -> Result<bool, EvalError> {
        let tuple = a.args.iter().map(|x| self.lookup(val, x)).collect::<Result<Vec<_>, _>>()?;
        match &a.pred {
            Predicate::Rel(r) => Ok(self.s.holds(r, &tuple)),
            Predicate::Fix(z) => env
                .get(z)
                .map(|set| set.contains(&tuple))
                .ok_or_else(|| EvalError::UnboundFixpoint(z.clone())),
        }
    }

    fn eval(&self, f: &Formula, val: &mut Valuation, env: &FixEnv) -> Result<bool, EvalError> {
        match f {
            Formula::Atom(a) => self.atom(a, val, env),
            Formula::Const(b) => Ok(*b),
            Formula::Not(a) => Ok(!self.eval(a, val, env)?),
            Formula::And(a, b) => Ok(self.eval(a, val, env)? && self.eval(b, val, env)?),
            Formula::Or(a, b) => Ok(self.eval(a, val, env)? || self.eval(b, val, env)?),
            Formula::Exists(q) => self.quantify(q, val, env, true),
            Formula::Forall(q) => self.quantify(q, val, env, false),
            Formula::Fix(fp) => {
                let set = self.solve(fp, val, env)?;
                let tuple = fp.args.iter().map(|x| self.lookup(val, x)).collect::<Result<Vec<_>, _>>()?;
                Ok(set.contains(&tuple))
            }
        }
    }

    /// `exists`: some guard instance satisfies the body; `forall`: all do.
    fn quantify(&self, q: &Quantifier, val: &mut Valuation, env: &FixEnv, exists: bool) -> Result<bool, EvalError> {
        let saved: Vec<(String, Option<Elem>)> = q.vars.iter().map(|x| (x.clone(), val.get(x).copied())).collect();
        for x in &q.vars {
            val.remove(x);
        }
        let mut result = !exists;
        'outer: for binding in self.guard_instances(q, val, env)? {
            for (x, e) in q.vars.iter().zip(&binding) {
                val.insert(x.clone(), *e);
            }
            if self.eval(&q.body, val, env)? == exists {
                result = exists;
                break 'outer;
            }
        }
        for (x, old) in saved {
            match old {
                Some(e) => val.insert(x, e),
                None => val.remove(&x),
            };
        }
        Ok(result)
    }

    /// Assignments to the quantified variables that make the guard true. Quantified
    /// variables missing from the guard range over the whole universe.
    fn guard_instances(&self, q: &Quantifier, val: &Valuation, env: &FixEnv) -> Result<Vec<Vec<Elem>>, EvalError> {
        let tuples: Vec<Vec<Elem>> = match &q.guard.pred {
            Predicate::Rel(r) => self.s.table(r).cloned().collect(),
            Predicate::Fix(z) => env
                .get(z)
                .ok_or_else(|| EvalError::UnboundFixpoint(z.clone()))?
                .iter()
                .cloned()
                .collect(),
        };
        let mut out = BTreeSet::new();
        for tuple in tuples {
            let mut binding: Vec<Option<Elem>> = vec![None; q.vars.len()];
            let mut ok = true;
            for (x, &e) in q.guard.args.iter().zip(&tuple) {
                if let Some(i) = q.vars.iter().position(|y| y == x) {
                    match binding[i] {
                        Some(prev) if prev != e => ok = false,
                        _ => binding[i] = Some(e),
                    }
                } else if self.lookup(val, x)? != e {
                    ok = false;
                }
                if !ok {
                    break;
                }
            }
            if ok {
                let mut partial = vec![Vec::new()];
                for slot in binding {
                    let choices: Vec<Elem> = match slot {
                        Some(e) => vec![e],
                        None => (0..self.s.len()).collect(),
                    };
                    partial = partial
                        .into_iter()
                        .flat_map(|p| {
                            choices.iter().map(move |&c| {
                                let mut p = p.clone();
                                p.push(c);
                                p
                            })
                        })
                        .collect();
                }
                out.extend(partial);
            }
        }
        Ok(out.into_iter().collect())
    }

    fn all_tuples(&self, k: usize) -> Vec<Vec<Elem>> {
        let mut out = vec![Vec::new()];
        for _ in 0..k {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..self.s.len()).map(move |e| {
                        let mut p = p.clone();
                        p.push(e);
                        p
                    })
                })
                .collect();
        }
        out
    }

    fn step(&self, fp: &Fixpoint, val: &mut Valuation, env: &FixEnv) -> Result<BTreeSet<Vec<Elem>>, EvalError> {
        let saved: Vec<(String, Option<Elem>)> = fp.params.iter().map(|x| (x.clone(), val.get(x).copied())).collect();
        let mut next = BTreeSet::new();
        for tuple in self.all_tuples(fp.params.len()) {
            for (p, e) in fp.params.iter().zip(&tuple) {
                val.insert(p.clone(), *e);
            }
            if self.eval(&fp.body, val, env)? {
                next.insert(tuple);
            }
        }
        for (x, old) in saved {
            match old {
                Some(e) => val.insert(x, e),
                None => val.remove(&x),
            };
        }
        Ok(next)
    }

    fn solve(&self, fp: &Fixpoint, val: &mut Valuation, env: &FixEnv) -> Result<BTreeSet<Vec<Elem>>, EvalError> {
        let mut current: BTreeSet<Vec<Elem>> = match fp.kind {
            FixKind::Lfp => BTreeSet::new(),
            FixKind::Gfp => self.all_tuples(fp.params.len()).into_iter().collect(),
        };
        let mut env = env.clone();
        loop {
            env.insert(fp.var.clone(), current.clone());
            let next = self.step(fp, val, &env)?;
            if next == current {
                return Ok(current);
            }
            current = next;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, Signature, F_INF};

    fn e2() -> Signature {
        Signature::new().with("E", 2)
    }

    fn holds(s: &Structure, text: &str, v: &[(&str, Elem)]) -> bool {
        let f = parse_formula(text, s.signature()).unwrap();
        let val = v.iter().map(|(x, e)| (x.to_string(), *e)).collect();
        evaluate(s, &f, &val).unwrap()
    }

    #[test]
    fn guarded_existence_on_loop() {
        let s = Structure::new(e2()).fact("E", &["a", "a"]);
        assert!(holds(&s, "exists x y . (E(x,y) & true)", &[]));
    }

    #[test]
    fn infinity_axiom_fails_on_loop() {
        // Z_0 = {}, Z_1 = {z : every E-predecessor of z is in {}} = {} since a is its own predecessor
        let s = Structure::new(e2()).fact("E", &["a", "a"]);
        assert!(!holds(&s, F_INF, &[]));
    }

    #[test]
    fn well_foundedness_on_chain() {
        // Z_1 = {a} (no predecessor), Z_2 = {a, b}
        let s = Structure::new(e2()).fact("E", &["a", "b"]);
        let text = "[lfp Z(z) . forall v . (E(v,z) -> Z(v))](x)";
        assert!(holds(&s, text, &[("x", 0)]));
        assert!(holds(&s, text, &[("x", 1)]));
        let cyc = s.clone().fact("E", &["b", "a"]);
        assert!(!holds(&cyc, text, &[("x", 0)]));
    }

    #[test]
    fn gfp_of_successor_existence() {
        // largest Z with every member having an E-successor in Z: the cycle, not the tail
        let s = Structure::new(e2()).fact("E", &["a", "b"]).fact("E", &["b", "b"]).fact("E", &["c", "a"]);
        let s = s.fact("E", &["d", "d"]);
        let text = "[gfp Z(z) . exists w . (E(z,w) & Z(w))](x)";
        for e in 0..s.len() {
            assert!(holds(&s, text, &[("x", e)]));
        }
        let tail = Structure::new(e2()).fact("E", &["a", "b"]);
        assert!(!holds(&tail, text, &[("x", 0)]));
    }

    #[test]
    fn incomplete_valuation_is_an_error() {
        let s = Structure::new(e2()).fact("E", &["a", "b"]);
        let f = parse_formula("E(x,y)", &e2()).unwrap();
        let v = Valuation::from([("x".to_string(), 0)]);
        assert_eq!(evaluate(&s, &f, &v), Err(EvalError::IncompleteValuation("y".into())));
    }

    #[test]
    fn step_is_monotone_on_example() {
        let s = Structure::new(e2()).fact("E", &["a", "b"]).fact("E", &["b", "c"]);
        let f = parse_formula("[lfp Z(z) . forall v . (E(v,z) -> Z(v))](x)", &e2()).unwrap();
        let Formula::Fix(fp) = f else { unreachable!() };
        let small = BTreeSet::from([vec![0]]);
        let big = BTreeSet::from([vec![0], vec![1]]);
        let a = fixpoint_step(&s, &fp, &Valuation::new(), &small).unwrap();
        let b = fixpoint_step(&s, &fp, &Valuation::new(), &big).unwrap();
        assert!(a.is_subset(&b));
        assert_eq!(b, BTreeSet::from([vec![0], vec![1], vec![2]]));
    }
}
