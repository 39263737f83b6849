//! Bounded finite satisfiability: search structures up to a size, checking each one
//! either with the model checker or through the compiled automaton.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::automata::{accepts, Letter};
use crate::compiler::{compile, CompileError, CompiledAutomaton};
use crate::logic::{validate_guarded, Formula, Mode};
use crate::structure::{evaluate, normalize_width, EnumerateError, EvalError, Structure, StructureEnumerator, Valuation};
use crate::tabloid::{phi_label, tabloid_of_model};
use crate::threads;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinSatMode {
    Direct,
    ViaAutomaton,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FinSatOutcome {
    ModelFound(Structure),
    /// No model with at most this many elements; larger ones may exist.
    NoneUpToBound(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FinSatStats {
    pub candidates: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinSatVerdict {
    pub outcome: FinSatOutcome,
    pub stats: FinSatStats,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FinSatError {
    #[error("invalid formula: {0}")]
    Invalid(String),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Acceptance of `A_φ` on `G_φ(a)` from its first node; atomless structures have no
/// tabloid and are evaluated directly.
pub fn accepts_model(c: &CompiledAutomaton, a: &Structure) -> Result<bool, EvalError> {
    let cl = c.closure();
    let model = normalize_width(a, cl.n());
    let Ok(t) = tabloid_of_model(&model, cl.n()) else {
        return evaluate(a, &c.meta.source, &Valuation::new());
    };
    let g = phi_label(&model, cl, &t)?.map_labels(|l| Letter::Phi(l.clone()));
    Ok(accepts(&c.automaton, &g, 0).expect("φ-labels are letters"))
}

pub fn finsat_bounded(f: &Formula, max_size: usize, mode: FinSatMode) -> Result<FinSatVerdict, FinSatError> {
    let start = Instant::now();
    let report = validate_guarded(f, Mode::Strict);
    if !report.is_ok() {
        return Err(FinSatError::Invalid(report.to_string()));
    }
    if !f.is_sentence() {
        return Err(FinSatError::Invalid("not a sentence".into()));
    }
    let sig = f.signature().map_err(|e| FinSatError::Invalid(e.to_string()))?;
    let compiled = match mode {
        FinSatMode::Direct => None,
        FinSatMode::ViaAutomaton => Some(compile(&f.nnf())?),
    };
    let check = |a: &Structure| -> Result<bool, EvalError> {
        match &compiled {
            None => evaluate(a, f, &Valuation::new()),
            Some(c) => accepts_model(c, a),
        }
    };
    let candidates: Vec<Structure> = StructureEnumerator::new(&sig, max_size, true)?.collect();
    let hit = threads::run(|| {
        candidates
            .par_iter()
            .enumerate()
            .find_map_first(|(i, a)| match check(a) {
                Ok(false) => None,
                Ok(true) => Some(Ok(i)),
                Err(e) => Some(Err(e)),
            })
    });
    let stats = |candidates: usize| FinSatStats {
        candidates,
        elapsed: start.elapsed(),
    };
    match hit {
        None => Ok(FinSatVerdict {
            outcome: FinSatOutcome::NoneUpToBound(max_size),
            stats: stats(candidates.len()),
        }),
        Some(Err(e)) => Err(e.into()),
        Some(Ok(i)) => {
            let a = candidates[i].clone();
            // the automaton route is only trusted once the model checker agrees
            if !evaluate(&a, f, &Valuation::new())? {
                return Err(FinSatError::Invalid(format!("candidate {i} accepted but not a model")));
            }
            Ok(FinSatVerdict {
                outcome: FinSatOutcome::ModelFound(a),
                stats: stats(i + 1),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula_inferring;

    fn formula(text: &str) -> Formula {
        parse_formula_inferring(text).unwrap().0
    }

    #[test]
    fn smallest_edge_model_is_a_loop() {
        for mode in [FinSatMode::Direct, FinSatMode::ViaAutomaton] {
            let v = finsat_bounded(&formula("exists x y . (E(x,y) & true)"), 3, mode).unwrap();
            let FinSatOutcome::ModelFound(a) = v.outcome else { panic!("{mode:?}") };
            assert_eq!(a.len(), 1);
            assert!(a.holds("E", &[0, 0]));
        }
    }

    #[test]
    fn unsatisfiable_reports_bound() {
        let f = formula("exists x . (P(x) & !P(x))");
        for mode in [FinSatMode::Direct, FinSatMode::ViaAutomaton] {
            let v = finsat_bounded(&f, 2, mode).unwrap();
            assert_eq!(v.outcome, FinSatOutcome::NoneUpToBound(2));
            assert_eq!(v.stats.candidates, 2 + 3);
        }
    }

    #[test]
    fn open_formula_is_invalid() {
        let err = finsat_bounded(&formula("P(x)"), 2, FinSatMode::Direct).unwrap_err();
        assert!(matches!(err, FinSatError::Invalid(_)));
    }
}
