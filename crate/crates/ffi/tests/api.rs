use std::ffi::{c_char, CStr, CString};
use std::ptr;

use gfx_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(gfx_last_error()) }.to_string_lossy().into_owned()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_string_lossy().into_owned();
    gfx_string_free(s);
    out
}

unsafe fn formula(text: &str) -> *mut GfxFormula {
    let mut f = ptr::null_mut();
    assert_eq!(gfx_formula_parse(c(text).as_ptr(), &mut f), GfxStatus::Ok, "{}", last_error());
    f
}

#[test]
fn parse_print_and_width() {
    unsafe {
        let f = formula("exists x y . (E(x,y) & P(y))");
        let mut w = 0;
        assert_eq!(gfx_formula_width(f, &mut w), GfxStatus::Ok);
        assert_eq!(w, 2);
        let mut s = ptr::null_mut();
        assert_eq!(gfx_formula_to_string(f, &mut s), GfxStatus::Ok);
        assert_eq!(take(s), "exists x y . (E(x,y) & P(y))");
        let mut ok = false;
        assert_eq!(gfx_formula_validate(f, true, &mut ok), GfxStatus::Ok);
        assert!(ok);
        gfx_formula_free(f);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(gfx_formula_parse(c("exists x . (").as_ptr(), &mut f), GfxStatus::ParseError);
        assert!(f.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(gfx_formula_parse(ptr::null(), &mut f), GfxStatus::NullArgument);
        assert_eq!(last_error(), "text is null");
        let bad = [0xffu8, 0];
        assert_eq!(gfx_formula_parse(bad.as_ptr().cast(), &mut f), GfxStatus::InvalidUtf8);
        let mut w = 0;
        assert_eq!(gfx_formula_width(ptr::null(), &mut w), GfxStatus::NullArgument);

        let open = formula("P(x)");
        let mut a = ptr::null_mut();
        assert_eq!(gfx_compile(open, &mut a), GfxStatus::CompileError);
        let mut found = false;
        assert_eq!(
            gfx_finsat(open, 2, GfxFinSatMode::Direct, &mut found, ptr::null_mut()),
            GfxStatus::InvalidFormula
        );
        gfx_formula_free(open);

        let unguarded = formula("exists x y . (P(x) & E(x,y))");
        let mut ok = true;
        assert_eq!(gfx_formula_validate(unguarded, true, &mut ok), GfxStatus::Ok);
        assert!(!ok);
        assert!(!last_error().is_empty());
        gfx_formula_free(unguarded);
    }
}

#[test]
fn evaluate_compile_and_accept() {
    unsafe {
        let mut s = ptr::null_mut();
        let text = c("sig E 2\nsig P 1\nelem a b\natom E a b\natom P b\n");
        assert_eq!(gfx_structure_parse(text.as_ptr(), &mut s), GfxStatus::Ok);
        let mut n = 0;
        assert_eq!(gfx_structure_size(s, &mut n), GfxStatus::Ok);
        assert_eq!(n, 2);
        for (src, expected) in [("exists x y . (E(x,y) & P(y))", true), ("exists x y . (E(x,y) & P(x))", false)] {
            let f = formula(src);
            let mut holds = !expected;
            assert_eq!(gfx_evaluate(s, f, &mut holds), GfxStatus::Ok);
            assert_eq!(holds, expected);
            let mut a = ptr::null_mut();
            assert_eq!(gfx_compile(f, &mut a), GfxStatus::Ok, "{}", last_error());
            let (mut states, mut bound) = (0, 0);
            assert_eq!(gfx_automaton_state_count(a, &mut states), GfxStatus::Ok);
            assert_eq!(gfx_automaton_state_bound(a, &mut bound), GfxStatus::Ok);
            assert!(states > 4 && states <= bound);
            let mut accepted = !expected;
            assert_eq!(gfx_automaton_accepts(a, s, &mut accepted), GfxStatus::Ok);
            assert_eq!(accepted, expected);
            let mut out = ptr::null_mut();
            assert_eq!(gfx_automaton_to_string(a, &mut out), GfxStatus::Ok);
            assert!(take(out).starts_with("alphabet structural"));
            gfx_automaton_free(a);
            gfx_formula_free(f);
        }
        gfx_structure_free(s);
    }
}

#[test]
fn finsat_returns_model_handle() {
    unsafe {
        let f = formula("exists x y . (E(x,y) & true)");
        for mode in [GfxFinSatMode::Direct, GfxFinSatMode::ViaAutomaton] {
            let mut found = false;
            let mut m = ptr::null_mut();
            assert_eq!(gfx_finsat(f, 3, mode, &mut found, &mut m), GfxStatus::Ok);
            assert!(found && !m.is_null());
            let mut out = ptr::null_mut();
            assert_eq!(gfx_structure_to_string(m, &mut out), GfxStatus::Ok);
            assert!(take(out).contains("atom E"));
            gfx_structure_free(m);
        }
        gfx_formula_free(f);
        let none = formula("exists x . (P(x) & !P(x))");
        let mut found = true;
        let mut m = ptr::null_mut();
        assert_eq!(gfx_finsat(none, 2, GfxFinSatMode::Direct, &mut found, &mut m), GfxStatus::Ok);
        assert!(!found && m.is_null());
        gfx_formula_free(none);
    }
}

#[test]
fn frees_accept_null_and_version_is_static() {
    unsafe {
        gfx_formula_free(ptr::null_mut());
        gfx_structure_free(ptr::null_mut());
        gfx_automaton_free(ptr::null_mut());
        gfx_string_free(ptr::null_mut());
        assert_eq!(CStr::from_ptr(gfx_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/gfx.h");
    for name in [
        "gfx_last_error",
        "gfx_version",
        "gfx_string_free",
        "gfx_formula_parse",
        "gfx_formula_free",
        "gfx_formula_to_string",
        "gfx_formula_width",
        "gfx_formula_validate",
        "gfx_structure_parse",
        "gfx_structure_free",
        "gfx_structure_size",
        "gfx_structure_to_string",
        "gfx_evaluate",
        "gfx_finsat",
        "gfx_compile",
        "gfx_automaton_free",
        "gfx_automaton_state_count",
        "gfx_automaton_state_bound",
        "gfx_automaton_accepts",
        "gfx_automaton_to_string",
        "typedef struct GfxFormula GfxFormula;",
        "GFX_STATUS_OK = 0",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
