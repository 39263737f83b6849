//! Guarded fixpoint formulas: syntax, parsing, validation and structural queries.

mod formula;
mod parser;
mod signature;
mod validate;

use std::collections::BTreeSet;

pub use formula::{Atom, FixKind, Fixpoint, Formula, Predicate, Quantifier};
pub use parser::{parse_formula, parse_formula_inferring, ParseError};
pub use signature::{Signature, SignatureError};
pub use validate::{explicitly_guarded, validate_guarded, Diagnostic, Mode, ValidationReport, ViolationKind};

/// The infinity axiom: well-founded directed graphs without sinks.
pub const F_INF: &str = "exists x y . (E(x,y) & true) & forall x y . (E(x,y) -> ([lfp Z(z) . forall v . (E(v,z) -> Z(v))](x) & exists w . (E(y,w) & true)))";

/// Equality patterns for a tuple of length `len` with at most `max_blocks` distinct
/// entries, as restricted growth strings in lexicographic order.
pub fn equality_patterns(len: usize, max_blocks: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, len: usize, max_blocks: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == len {
            out.push(prefix.clone());
            return;
        }
        let used = prefix.iter().map(|&b| b + 1).max().unwrap_or(0);
        for b in 0..=used.min(max_blocks.saturating_sub(1)) {
            prefix.push(b);
            go(prefix, len, max_blocks, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if max_blocks == 0 && len > 0 {
        return out;
    }
    go(&mut Vec::new(), len, max_blocks, &mut out);
    out
}

/// Signature literals of `f`: for every relation used in `f` and every equality
/// pattern of its argument positions with at most `width(f)` blocks, the atom over
/// the first variables of `f` (in name order), positive then negative.
pub fn signature_literals(f: &Formula) -> Vec<Formula> {
    let vars: Vec<String> = f.variables().into_iter().collect();
    let sig = match f.signature() {
        Ok(s) => s,
        Err(_) => return Vec::new(),
    };
    let blocks = f.width().min(vars.len());
    let mut out = Vec::new();
    for (rel, arity) in sig.iter() {
        for pattern in equality_patterns(arity, blocks) {
            let atom = Formula::Atom(Atom {
                pred: Predicate::Rel(rel.to_string()),
                args: pattern.iter().map(|&b| vars[b].clone()).collect(),
            });
            out.push(atom.clone());
            out.push(Formula::not(atom));
        }
    }
    out
}

/// Subformula occurrences of `f` in pre-order (a quantifier is followed by its guard
/// atom, then its body), followed by the signature literals of `f`.
pub fn subformulas(f: &Formula) -> Vec<Formula> {
    fn go(f: &Formula, out: &mut Vec<Formula>) {
        out.push(f.clone());
        if let Formula::Exists(q) | Formula::Forall(q) = f {
            out.push(Formula::Atom(q.guard.clone()));
        }
        for c in f.children() {
            go(c, out);
        }
    }
    let mut out = Vec::new();
    go(f, &mut out);
    out.extend(signature_literals(f));
    out
}

/// Free variables, as a set.
pub fn free_vars(f: &Formula) -> BTreeSet<String> {
    f.free_vars()
}

/// Width: the largest number of free variables of any subformula.
pub fn width(f: &Formula) -> usize {
    f.width()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f_inf() -> Formula {
        parse_formula(F_INF, &Signature::new().with("E", 2)).unwrap()
    }

    #[test]
    fn infinity_axiom_shape() {
        let f = f_inf();
        let mut lfps = 0;
        f.visit(&mut |g| {
            if matches!(g, Formula::Fix(fp) if fp.kind == FixKind::Lfp) {
                lfps += 1;
            }
        });
        assert_eq!(lfps, 1);
        assert!(f.is_sentence());
        assert!(validate_guarded(&f, Mode::Strict).is_ok());
    }

    #[test]
    fn infinity_axiom_width_by_enumeration() {
        // independent scan: free variables of every occurrence listed by subformulas()
        let f = f_inf();
        let max = subformulas(&f).iter().map(|g| g.free_vars().len()).max().unwrap();
        assert_eq!(max, 2);
        assert_eq!(width(&f), 2);
    }

    #[test]
    fn subformulas_of_true() {
        assert_eq!(subformulas(&Formula::Const(true)), vec![Formula::Const(true)]);
    }

    #[test]
    fn subformulas_of_guarded_existence() {
        let f = parse_formula("exists x y . (E(x,y) & true)", &Signature::new().with("E", 2)).unwrap();
        let subs = subformulas(&f);
        let exy = Formula::Atom(Atom::rel("E", &["x", "y"]));
        assert!(subs.contains(&f));
        assert!(subs.contains(&exy));
        assert!(subs.contains(&Formula::Const(true)));
        assert!(subs.contains(&Formula::not(exy)));
        assert!(subs.contains(&Formula::Atom(Atom::rel("E", &["x", "x"]))));
        assert_eq!(subs.len(), 3 + 4);
    }

    #[test]
    fn infinity_axiom_subformula_count_is_stable() {
        // occurrences: 14 (counted by hand from the parse tree, guards included),
        // literals: E(v,v), E(v,w) and their negations
        let subs = subformulas(&f_inf());
        assert_eq!(subs.len(), 14 + 4);
        assert_eq!(subs, subformulas(&f_inf()));
    }

    #[test]
    fn equality_patterns_are_restricted_growth_strings() {
        assert_eq!(equality_patterns(2, 2), vec![vec![0, 0], vec![0, 1]]);
        assert_eq!(equality_patterns(3, 2).len(), 4);
        assert_eq!(equality_patterns(3, 3).len(), 5);
        assert_eq!(equality_patterns(2, 1), vec![vec![0, 0]]);
    }
}
