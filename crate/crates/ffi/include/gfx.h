/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef GFX_H
#define GFX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  GFX_FIN_SAT_MODE_DIRECT = 0,
  GFX_FIN_SAT_MODE_VIA_AUTOMATON = 1,
} GfxFinSatMode;

typedef enum {
  GFX_STATUS_OK = 0,
  GFX_STATUS_NULL_ARGUMENT = 1,
  GFX_STATUS_INVALID_UTF8 = 2,
  GFX_STATUS_PARSE_ERROR = 3,
  GFX_STATUS_INVALID_FORMULA = 4,
  GFX_STATUS_EVAL_ERROR = 5,
  GFX_STATUS_COMPILE_ERROR = 6,
  GFX_STATUS_SEARCH_ERROR = 7,
  GFX_STATUS_PANIC = 8,
} GfxStatus;

/**
 * Opaque compiled automaton.
 */
typedef struct GfxAutomaton GfxAutomaton;

/**
 * Opaque parsed formula.
 */
typedef struct GfxFormula GfxFormula;

/**
 * Opaque finite structure.
 */
typedef struct GfxStructure GfxStructure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *gfx_last_error(void);

/**
 * Library version as a static string.
 */
const char *gfx_version(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed; null is ignored.
 */
void gfx_string_free(char *s);

/**
 * Parses a formula, inferring relation arities from their uses.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a writable pointer.
 */
GfxStatus gfx_formula_parse(const char *text, GfxFormula **out);

/**
 * # Safety
 * `f` must come from `gfx_formula_parse` and not have been freed; null is ignored.
 */
void gfx_formula_free(GfxFormula *f);

/**
 * Writes the formula's canonical rendering to `out`; free it with `gfx_string_free`.
 *
 * # Safety
 * `f` must be a live formula handle and `out` writable.
 */
GfxStatus gfx_formula_to_string(const GfxFormula *f, char **out);

/**
 * # Safety
 * `f` must be a live formula handle and `out` writable.
 */
GfxStatus gfx_formula_width(const GfxFormula *f, uintptr_t *out);

/**
 * Checks guardedness (strict or relaxed). `out` receives whether the formula passes;
 * the diagnostics of a failing formula are left in `gfx_last_error`.
 *
 * # Safety
 * `f` must be a live formula handle and `out` writable.
 */
GfxStatus gfx_formula_validate(const GfxFormula *f, bool strict, bool *out);

/**
 * Parses a structure (`sig R 2`, `elem a b`, `atom R a b` lines).
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a writable pointer.
 */
GfxStatus gfx_structure_parse(const char *text, GfxStructure **out);

/**
 * # Safety
 * `s` must come from this library and not have been freed; null is ignored.
 */
void gfx_structure_free(GfxStructure *s);

/**
 * # Safety
 * `s` must be a live structure handle and `out` writable.
 */
GfxStatus gfx_structure_size(const GfxStructure *s, uintptr_t *out);

/**
 * Writes the structure in its text format; free it with `gfx_string_free`.
 *
 * # Safety
 * `s` must be a live structure handle and `out` writable.
 */
GfxStatus gfx_structure_to_string(const GfxStructure *s, char **out);

/**
 * Evaluates a sentence on a structure.
 *
 * # Safety
 * `s` and `f` must be live handles and `out` writable.
 */
GfxStatus gfx_evaluate(const GfxStructure *s, const GfxFormula *f, bool *out);

/**
 * Bounded finite satisfiability. `found` tells whether a model with at most
 * `max_size` elements exists; if so and `model` is not null, it receives the model.
 *
 * # Safety
 * `f` must be a live handle, `found` writable, `model` null or writable.
 */
GfxStatus gfx_finsat(const GfxFormula *f,
                     uintptr_t max_size,
                     GfxFinSatMode mode,
                     bool *found,
                     GfxStructure **model);

/**
 * Compiles a strict guarded sentence (after negation normal form) into an alternating
 * automaton over its φ-types.
 *
 * # Safety
 * `f` must be a live handle and `out` writable.
 */
GfxStatus gfx_compile(const GfxFormula *f, GfxAutomaton **out);

/**
 * # Safety
 * `a` must come from `gfx_compile` and not have been freed; null is ignored.
 */
void gfx_automaton_free(GfxAutomaton *a);

/**
 * # Safety
 * `a` must be a live handle and `out` writable.
 */
GfxStatus gfx_automaton_state_count(const GfxAutomaton *a, uintptr_t *out);

/**
 * The state bound `C * |φ| * (2n+1)^n * max(L, 1)` the automaton is guaranteed to meet.
 *
 * # Safety
 * `a` must be a live handle and `out` writable.
 */
GfxStatus gfx_automaton_state_bound(const GfxAutomaton *a, uintptr_t *out);

/**
 * Runs the automaton on the φ-labelled model graph of `s`; `out` receives acceptance,
 * which coincides with the compiled sentence holding in `s`.
 *
 * # Safety
 * `a` and `s` must be live handles and `out` writable.
 */
GfxStatus gfx_automaton_accepts(const GfxAutomaton *a, const GfxStructure *s, bool *out);

/**
 * Writes the automaton in its text format; free it with `gfx_string_free`.
 *
 * # Safety
 * `a` must be a live handle and `out` writable.
 */
GfxStatus gfx_automaton_to_string(const GfxAutomaton *a, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GFX_H */
