//! Seeded generators of strict guarded sentences and small structures over
//! `E/2, P/1`, plus the hand-written corpus.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::logic::{parse_formula, validate_guarded, Atom, FixKind, Formula, Mode, Signature, F_INF};
use crate::structure::Structure;

pub const MAX_FORMULA_SIZE: usize = 25;

pub fn signature() -> Signature {
    Signature::new().with("E", 2).with("P", 1)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sentences used throughout the tests, all strict and of width at most 2.
pub const HAND_FORMULAS: &[&str] = &[
    F_INF,
    "exists x y . (E(x,y) & true) & forall x y . (E(x,y) -> exists w . (E(y,w) & true))",
    "exists x y . (E(x,y) & true)",
    "exists x . (P(x) & true)",
    "forall x . (P(x) -> exists y . (E(x,y) & !P(y)))",
    "exists x . (P(x) & [lfp Z(z) . P(z) & (exists y . (E(z,y) & Z(y)) | forall y . (E(z,y) -> false))](x))",
    "forall x y . (E(x,y) -> [gfp Z(z) . exists w . (E(z,w) & Z(w))](y))",
    "exists x y . (E(x,y) & [lfp Z(u,v) . E(u,v) & (P(v) | exists w . (E(v,w) & Z(v,w)))](x,y))",
    "forall x y . (E(x,y) -> E(y,x))",
    "exists x . (P(x) & [gfp Y(y) . P(y) & [lfp Z(z) . P(z) & (Y(z) | exists w . (E(z,w) & Z(w)))](y)](x))",
    "!(exists x . (P(x) & !(exists y . (E(y,x) & true))))",
    "exists x . (P(x) & !P(x))",
    "true",
];

pub fn hand_formulas() -> Vec<Formula> {
    let sig = signature();
    HAND_FORMULAS
        .iter()
        .map(|t| parse_formula(t, &sig).expect("hand corpus parses"))
        .collect()
}

/// Structures used throughout the tests.
pub fn hand_structures() -> Vec<Structure> {
    let sig = signature();
    let s = || Structure::new(sig.clone());
    vec![
        s().fact("E", &["a", "b"]),
        s().fact("E", &["a", "a"]),
        s().fact("P", &["a"]),
        s().fact("E", &["a", "b"]).fact("E", &["b", "a"]).fact("P", &["a"]),
        s().fact("E", &["a", "b"]).fact("E", &["b", "c"]).fact("E", &["c", "a"]),
        s().fact("E", &["a", "b"]).fact("E", &["b", "c"]).fact("P", &["c"]),
        s().fact("P", &["a"]).fact("E", &["a", "b"]).fact("E", &["b", "b"]),
        s().fact("E", &["a", "b"]).fact("E", &["c", "d"]).fact("P", &["b"]).fact("P", &["c"]),
    ]
}

struct Gen<'a, R: Rng> {
    rng: &'a mut R,
    fixvars: Vec<(String, usize)>,
    next_fix: usize,
}

const VARS: [&str; 2] = ["x", "y"];

impl<R: Rng> Gen<'_, R> {
    fn var(&mut self, scope: &[String]) -> String {
        scope.choose(self.rng).expect("non-empty scope").clone()
    }

    fn atom(&mut self, scope: &[String]) -> Formula {
        if self.rng.gen_bool(0.5) {
            Formula::Atom(Atom::rel("P", &[&self.var(scope)]))
        } else {
            let (u, v) = (self.var(scope), self.var(scope));
            Formula::Atom(Atom::rel("E", &[&u, &v]))
        }
    }

    fn leaf(&mut self, scope: &[String]) -> Formula {
        let fixes: Vec<(String, usize)> = self.fixvars.iter().filter(|f| f.1 <= scope.len().max(1)).cloned().collect();
        if scope.is_empty() {
            return Formula::Const(self.rng.gen_bool(0.5));
        }
        match self.rng.gen_range(0..10) {
            0 => Formula::Const(self.rng.gen_bool(0.5)),
            1..=3 if !fixes.is_empty() => {
                let (z, arity) = fixes.choose(self.rng).expect("non-empty").clone();
                let args: Vec<String> = (0..arity).map(|_| self.var(scope)).collect();
                let args: Vec<&str> = args.iter().map(String::as_str).collect();
                Formula::Atom(Atom::fix(&z, &args))
            }
            4..=6 => Formula::not(self.atom(scope)),
            _ => self.atom(scope),
        }
    }

    fn formula(&mut self, scope: &[String], budget: usize) -> Formula {
        if budget <= 2 {
            return self.leaf(scope);
        }
        match self.rng.gen_range(0..10) {
            0..=1 => {
                let l = self.formula(scope, budget / 2);
                let r = self.formula(scope, budget / 2);
                if self.rng.gen_bool(0.5) {
                    Formula::and(l, r)
                } else {
                    Formula::or(l, r)
                }
            }
            2..=6 => self.quantifier(scope, budget),
            7..=8 if !scope.is_empty() => self.fixpoint(scope, budget),
            _ => self.leaf(scope),
        }
    }

    /// `exists/forall B . (guard & body)` with free variables inside `scope`.
    fn quantifier(&mut self, scope: &[String], budget: usize) -> Formula {
        let bound: Vec<String> = if self.rng.gen_bool(0.4) {
            VARS.iter().map(|s| s.to_string()).collect()
        } else {
            vec![VARS.choose(self.rng).expect("two vars").to_string()]
        };
        let outside: Vec<String> = scope.iter().filter(|v| !bound.contains(v)).cloned().collect();
        let guard = if bound.len() == 2 {
            Atom::rel("E", &[&bound[0], &bound[1]])
        } else if !outside.is_empty() && self.rng.gen_bool(0.7) {
            let o = outside.choose(self.rng).expect("non-empty").clone();
            if self.rng.gen_bool(0.5) {
                Atom::rel("E", &[&o, &bound[0]])
            } else {
                Atom::rel("E", &[&bound[0], &o])
            }
        } else if self.rng.gen_bool(0.5) {
            Atom::rel("P", &[&bound[0]])
        } else {
            Atom::rel("E", &[&bound[0], &bound[0]])
        };
        let mut inner: Vec<String> = guard.args.clone();
        inner.sort();
        inner.dedup();
        let body = self.formula(&inner, budget.saturating_sub(3));
        let vars: Vec<&str> = bound.iter().map(String::as_str).collect();
        if self.rng.gen_bool(0.5) {
            Formula::exists(&vars, guard, body)
        } else {
            Formula::forall(&vars, guard, body)
        }
    }

    /// `[lfp/gfp Z(p) . body](arg)` whose body guards its parameters explicitly.
    fn fixpoint(&mut self, scope: &[String], budget: usize) -> Formula {
        let binary = scope.len() == 2 && self.rng.gen_bool(0.3);
        let params: Vec<String> = if binary {
            VARS.iter().map(|s| s.to_string()).collect()
        } else {
            vec![VARS.choose(self.rng).expect("two vars").to_string()]
        };
        let name = format!("Z{}", self.next_fix);
        self.next_fix += 1;
        self.fixvars.push((name.clone(), params.len()));
        let body = self.guarded_body(&params, budget.saturating_sub(2));
        self.fixvars.pop();
        let kind = if self.rng.gen_bool(0.5) { FixKind::Lfp } else { FixKind::Gfp };
        let args: Vec<String> = (0..params.len()).map(|_| self.var(scope)).collect();
        let p: Vec<&str> = params.iter().map(String::as_str).collect();
        let a: Vec<&str> = args.iter().map(String::as_str).collect();
        Formula::fixpoint(kind, &name, &p, body, &a)
    }

    fn guarded_body(&mut self, params: &[String], budget: usize) -> Formula {
        let guard = if params.len() == 2 {
            Formula::Atom(Atom::rel("E", &[&params[0], &params[1]]))
        } else if self.rng.gen_bool(0.5) {
            Formula::Atom(Atom::rel("P", &[&params[0]]))
        } else {
            let p = &params[0];
            let other = VARS.iter().find(|v| *v != p).expect("two vars");
            let body = self.formula(&[p.clone(), other.to_string()], budget.saturating_sub(3));
            let guard = if self.rng.gen_bool(0.5) {
                Atom::rel("E", &[p, other])
            } else {
                Atom::rel("E", &[other, p])
            };
            return if self.rng.gen_bool(0.6) {
                Formula::exists(&[other], guard, body)
            } else {
                Formula::forall(&[other], guard, body)
            };
        };
        let rest = self.formula(params, budget.saturating_sub(2));
        Formula::and(guard, rest)
    }
}

/// A strict guarded sentence of width at most 2 and size at most 25.
pub fn random_formula<R: Rng>(rng: &mut R) -> Formula {
    loop {
        let budget = rng.gen_range(4..=MAX_FORMULA_SIZE);
        let mut g = Gen {
            rng: &mut *rng,
            fixvars: Vec::new(),
            next_fix: 0,
        };
        let f = g.formula(&[], budget);
        if f.size() <= MAX_FORMULA_SIZE
            && f.size() >= 4
            && f.is_sentence()
            && f.width() <= 2
            && validate_guarded(&f, Mode::Strict).is_ok()
        {
            return f;
        }
    }
}

/// The k-th member of the nested family used for state counts: `k` alternating
/// guarded quantifier steps, every other one under a least fixpoint.
pub fn nested_family(k: usize) -> Formula {
    let var = |i: usize| VARS[i % 2];
    let mut inner = Formula::Atom(Atom::rel("P", &[var(k)]));
    for i in (0..k).rev() {
        let (u, v) = (var(i), var(i + 1));
        let guard = Atom::rel("E", &[u, v]);
        let step = if i % 2 == 0 {
            Formula::exists(&[v], guard, inner)
        } else {
            Formula::forall(&[v], guard, inner)
        };
        inner = if i % 3 == 2 {
            let body = Formula::and(Formula::Atom(Atom::rel("P", &[u])), step);
            let name = format!("Z{i}");
            Formula::fixpoint(FixKind::Lfp, &name, &[u], body, &[u])
        } else {
            Formula::and(Formula::Atom(Atom::rel("P", &[u])), step)
        };
    }
    Formula::exists(&["x"], Atom::rel("P", &["x"]), inner)
}

/// Wraps a random subformula in a double negation pushed one level in, so that
/// `nnf` has something to do.
pub fn denormalize<R: Rng>(f: &Formula, rng: &mut R) -> Formula {
    if rng.gen_bool(0.3) {
        return Formula::not(Formula::not(f.clone()).nnf());
    }
    match f {
        Formula::And(a, b) => Formula::and(denormalize(a, rng), denormalize(b, rng)),
        Formula::Or(a, b) => Formula::or(denormalize(a, rng), denormalize(b, rng)),
        _ => f.clone(),
    }
}

/// A structure with `1..=max_size` elements; with `need_atom` at least one atom.
pub fn random_structure<R: Rng>(rng: &mut R, max_size: usize, need_atom: bool) -> Structure {
    let sig = signature();
    loop {
        let n = rng.gen_range(1..=max_size);
        let mut s = Structure::with_elements(sig.clone(), n);
        let density = rng.gen_range(0.1..0.6);
        for a in 0..n {
            if rng.gen_bool(density) {
                s.add_atom("P", &[a]).expect("in range");
            }
            for b in 0..n {
                if rng.gen_bool(density * 0.7) {
                    s.add_atom("E", &[a, b]).expect("in range");
                }
            }
        }
        if !need_atom || s.atom_count() > 0 {
            return s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_corpus_is_strict() {
        for (t, f) in HAND_FORMULAS.iter().zip(hand_formulas()) {
            assert!(validate_guarded(&f, Mode::Strict).is_ok(), "{t}");
            assert!(f.is_sentence() && f.width() <= 2, "{t}");
        }
    }

    #[test]
    fn generator_respects_bounds_and_seed() {
        let mut r = rng(7);
        let fs: Vec<Formula> = (0..200).map(|_| random_formula(&mut r)).collect();
        for f in &fs {
            assert!(f.size() <= MAX_FORMULA_SIZE);
        }
        let again: Vec<Formula> = {
            let mut r = rng(7);
            (0..200).map(|_| random_formula(&mut r)).collect()
        };
        assert_eq!(fs, again);
        // the generator produces fixpoints and both quantifiers
        let text: String = fs.iter().map(|f| f.to_string()).collect();
        for needle in ["lfp", "gfp", "exists", "forall", "!"] {
            assert!(text.contains(needle), "{needle}");
        }
    }

    #[test]
    fn denormalize_round_trips_through_nnf() {
        let mut r = rng(3);
        for _ in 0..100 {
            let f = random_formula(&mut r);
            let g = denormalize(&f, &mut r);
            assert_eq!(g.nnf(), f.nnf());
        }
    }
}
