//! C ABI over the workbench. Objects are opaque handles created by `*_parse` or
//! `gfx_compile` and released with the matching `*_free`. Every fallible call returns
//! a [`GfxStatus`]; on failure `gfx_last_error` describes the cause. Strings handed out
//! by the library are released with `gfx_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gfx::compiler::{compile, CompiledAutomaton};
use gfx::finsat::{accepts_model, finsat_bounded, FinSatError, FinSatMode, FinSatOutcome};
use gfx::logic::{parse_formula_inferring, validate_guarded, Formula, Mode};
use gfx::structure::{evaluate, Structure, Valuation};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfxStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidFormula = 4,
    EvalError = 5,
    CompileError = 6,
    SearchError = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfxFinSatMode {
    Direct = 0,
    ViaAutomaton = 1,
}

/// Opaque parsed formula.
pub struct GfxFormula(Formula);

/// Opaque finite structure.
pub struct GfxStructure(Structure);

/// Opaque compiled automaton.
pub struct GfxAutomaton(CompiledAutomaton);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

type Failure = (GfxStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GfxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GfxStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GfxStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    (GfxStatus::NullArgument, format!("{what} is null"))
}

unsafe fn c_text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (GfxStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread; empty if none. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gfx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn gfx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must come from this library and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gfx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a formula, inferring relation arities from their uses.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gfx_formula_parse(text: *const c_char, out: *mut *mut GfxFormula) -> GfxStatus {
    guard(|| {
        let t = c_text(text, "text")?;
        let (f, _) = parse_formula_inferring(t).map_err(|e| (GfxStatus::ParseError, e.to_string()))?;
        put(out, Box::into_raw(Box::new(GfxFormula(f))), "out")
    })
}

/// # Safety
/// `f` must come from `gfx_formula_parse` and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gfx_formula_free(f: *mut GfxFormula) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Writes the formula's canonical rendering to `out`; free it with `gfx_string_free`.
///
/// # Safety
/// `f` must be a live formula handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfx_formula_to_string(f: *const GfxFormula, out: *mut *mut c_char) -> GfxStatus {
    guard(|| {
        let f = get(f, "formula")?;
        put(out, owned_string(f.0.to_string()), "out")
    })
}

/// # Safety
/// `f` must be a live formula handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfx_formula_width(f: *const GfxFormula, out: *mut usize) -> GfxStatus {
    guard(|| {
        let f = get(f, "formula")?;
        put(out, f.0.width(), "out")
    })
}

/// Checks guardedness (strict or relaxed). `out` receives whether the formula passes;
/// the diagnostics of a failing formula are left in `gfx_last_error`.
///
/// # Safety
/// `f` must be a live formula handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfx_formula_validate(f: *const GfxFormula, strict: bool, out: *mut bool) -> GfxStatus {
    guard(|| {
        let f = get(f, "formula")?;
        let report = validate_guarded(&f.0, if strict { Mode::Strict } else { Mode::Relaxed });
        if !report.is_ok() {
            set_error(&report.to_string());
        }
        put(out, report.is_ok(), "out")
    })
}

/// Parses a structure (`sig R 2`, `elem a b`, `atom R a b` lines).
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gfx_structure_parse(text: *const c_char, out: *mut *mut GfxStructure) -> GfxStatus {
    guard(|| {
        let t = c_text(text, "text")?;
        let s = Structure::parse(t).map_err(|e| (GfxStatus::ParseError, e.to_string()))?;
        put(out, Box::into_raw(Box::new(GfxStructure(s))), "out")
    })
}

/// # Safety
/// `s` must come from this library and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gfx_structure_free(s: *mut GfxStructure) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live structure handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfx_structure_size(s: *const GfxStructure, out: *mut usize) -> GfxStatus {
    guard(|| {
        let s = get(s, "structure")?;
        put(out, s.0.len(), "out")
    })
}

/// Writes the structure in its text format; free it with `gfx_string_free`.
///
/// # Safety
/// `s` must be a live structure handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfx_structure_to_string(s: *const GfxStructure, out: *mut *mut c_char) -> GfxStatus {
    guard(|| {
        let s = get(s, "structure")?;
        put(out, owned_string(s.0.to_string()), "out")
    })
}

/// Evaluates a sentence on a structure.
///
/// # Safety
/// `s` and `f` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfx_evaluate(s: *const GfxStructure, f: *const GfxFormula, out: *mut bool) -> GfxStatus {
    guard(|| {
        let (s, f) = (get(s, "structure")?, get(f, "formula")?);
        let b = evaluate(&s.0, &f.0, &Valuation::new()).map_err(|e| (GfxStatus::EvalError, e.to_string()))?;
        put(out, b, "out")
    })
}

/// Bounded finite satisfiability. `found` tells whether a model with at most
/// `max_size` elements exists; if so and `model` is not null, it receives the model.
///
/// # Safety
/// `f` must be a live handle, `found` writable, `model` null or writable.
#[no_mangle]
pub unsafe extern "C" fn gfx_finsat(
    f: *const GfxFormula,
    max_size: usize,
    mode: GfxFinSatMode,
    found: *mut bool,
    model: *mut *mut GfxStructure,
) -> GfxStatus {
    guard(|| {
        let f = get(f, "formula")?;
        let mode = match mode {
            GfxFinSatMode::Direct => FinSatMode::Direct,
            GfxFinSatMode::ViaAutomaton => FinSatMode::ViaAutomaton,
        };
        let v = finsat_bounded(&f.0, max_size, mode).map_err(|e| {
            let status = match e {
                FinSatError::Invalid(_) => GfxStatus::InvalidFormula,
                FinSatError::Compile(_) => GfxStatus::CompileError,
                FinSatError::Enumerate(_) => GfxStatus::SearchError,
                FinSatError::Eval(_) => GfxStatus::EvalError,
            };
            (status, e.to_string())
        })?;
        match v.outcome {
            FinSatOutcome::ModelFound(a) => {
                if !model.is_null() {
                    model.write(Box::into_raw(Box::new(GfxStructure(a))));
                }
                put(found, true, "found")
            }
            FinSatOutcome::NoneUpToBound(_) => {
                if !model.is_null() {
                    model.write(ptr::null_mut());
                }
                put(found, false, "found")
            }
        }
    })
}

/// Compiles a strict guarded sentence (after negation normal form) into an alternating
/// automaton over its φ-types.
///
/// # Safety
/// `f` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfx_compile(f: *const GfxFormula, out: *mut *mut GfxAutomaton) -> GfxStatus {
    guard(|| {
        let f = get(f, "formula")?;
        let c = compile(&f.0.nnf()).map_err(|e| (GfxStatus::CompileError, e.to_string()))?;
        put(out, Box::into_raw(Box::new(GfxAutomaton(c))), "out")
    })
}

/// # Safety
/// `a` must come from `gfx_compile` and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gfx_automaton_free(a: *mut GfxAutomaton) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// # Safety
/// `a` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfx_automaton_state_count(a: *const GfxAutomaton, out: *mut usize) -> GfxStatus {
    guard(|| {
        let a = get(a, "automaton")?;
        put(out, a.0.meta.states, "out")
    })
}

/// The state bound `C * |φ| * (2n+1)^n * max(L, 1)` the automaton is guaranteed to meet.
///
/// # Safety
/// `a` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfx_automaton_state_bound(a: *const GfxAutomaton, out: *mut usize) -> GfxStatus {
    guard(|| {
        let a = get(a, "automaton")?;
        put(out, a.0.meta.bound(), "out")
    })
}

/// Runs the automaton on the φ-labelled model graph of `s`; `out` receives acceptance,
/// which coincides with the compiled sentence holding in `s`.
///
/// # Safety
/// `a` and `s` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfx_automaton_accepts(a: *const GfxAutomaton, s: *const GfxStructure, out: *mut bool) -> GfxStatus {
    guard(|| {
        let (a, s) = (get(a, "automaton")?, get(s, "structure")?);
        let b = accepts_model(&a.0, &s.0).map_err(|e| (GfxStatus::EvalError, e.to_string()))?;
        put(out, b, "out")
    })
}

/// Writes the automaton in its text format; free it with `gfx_string_free`.
///
/// # Safety
/// `a` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfx_automaton_to_string(a: *const GfxAutomaton, out: *mut *mut c_char) -> GfxStatus {
    guard(|| {
        let a = get(a, "automaton")?;
        put(out, owned_string(a.0.automaton.to_string()), "out")
    })
}
