#ifndef A11YMETER_H
#define A11YMETER_H

/* Generated by cbindgen from the a11ymeter-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Report rendering format.
typedef enum {
  AM_FORMAT_JSON = 0,
  AM_FORMAT_MARKDOWN = 1,
} AmFormat;

// Status of an API call.
typedef enum {
  AM_STATUS_OK = 0,
  // A required pointer argument was null.
  AM_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  AM_STATUS_INVALID_UTF8 = 2,
  // A JSON document did not parse.
  AM_STATUS_INVALID_JSON = 3,
  // The configuration was rejected (weights, breakpoints, ids).
  AM_STATUS_INVALID_CONFIG = 4,
  // A page could not be parsed as HTML.
  AM_STATUS_PARSE_FAILED = 5,
  // Unexpected internal failure.
  AM_STATUS_INTERNAL = 6,
} AmStatus;

// An audit session: configuration plus the pages added so far. Opaque to
// C callers; create with [`am_audit_new`], release with [`am_audit_free`].
typedef struct AmAudit AmAudit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread. Empty when
// the last call succeeded. The pointer stays valid until the next library
// call on the same thread.
const char *am_last_error(void);

// Library version as a static NUL-terminated string.
const char *am_version(void);

// Create a session with the default configuration. Never null.
AmAudit *am_audit_new(void);

// Release a session. Null is ignored.
//
// # Safety
// `session` must be a pointer returned by [`am_audit_new`] that has not
// been freed already.
void am_audit_free(AmAudit *session);

// Configure a session from one JSON document with optional fields:
// `weights` (map of id to weight), `annotations`, `languages`,
// `contrast_mode` ("paper" or "simple"), `breakpoints` (four ascending
// reals), `deep_pages` (bool), `heuristics`, `per_page` (bool).
//
// # Safety
// `session` must be a live session pointer; `config_json` must be a valid
// NUL-terminated string or null (null resets to defaults).
AmStatus am_audit_set_config_json(AmAudit *session, const char *config_json);

// Add one page to the session. `html` is raw document bytes (any
// encoding; non-UTF-8 is decoded lossily and flagged in the report).
// `path_depth` is the page's URL path depth; pass 0 for top-level pages.
//
// # Safety
// `session` must be live, `origin` NUL-terminated, and `html` must point
// to `html_len` readable bytes.
AmStatus am_audit_add_page(AmAudit *session,
                           const char *origin,
                           const uint8_t *html,
                           size_t html_len,
                           uint32_t path_depth);

// Run the audit over every added page and hand back the rendered report.
// The session keeps its pages, so a session can be run repeatedly (e.g.
// once per format).
//
// # Safety
// `session` must be live and `out` must point to writable pointer storage.
AmStatus am_audit_run(AmAudit *session, AmFormat format, char **out);

// Pure-math mode: evaluate directly supplied attribute values without any
// HTML. `scores_json` maps attribute ids to values in [0, 1]; missing
// attributes are treated as not applicable with a warning in the report;
// `config_json` is as for [`am_audit_set_config_json`] and may be null.
//
// # Safety
// `scores_json` must be NUL-terminated; `config_json` may be null; `out`
// must point to writable pointer storage.
AmStatus am_score_report(const char *scores_json,
                         const char *config_json,
                         AmFormat format,
                         char **out);

// Extract the facts dump (counts plus element references) for one page.
//
// # Safety
// `origin` must be NUL-terminated, `html` must point to `html_len`
// readable bytes, and `out` must point to writable pointer storage.
AmStatus am_facts_json(const char *origin,
                       const uint8_t *html,
                       size_t html_len,
                       uint32_t path_depth,
                       char **out);

// WCAG contrast ratio between two sRGB colors, in [1, 21].
double am_contrast_ratio(uint8_t fg_r,
                         uint8_t fg_g,
                         uint8_t fg_b,
                         uint8_t bg_r,
                         uint8_t bg_g,
                         uint8_t bg_b);

// WCAG relative luminance of an sRGB color, in [0, 1].
double am_relative_luminance(uint8_t r, uint8_t g, uint8_t b);

// Classify a score on the default level scale. Returns the band index
// (0 = very poor .. 4 = excellent) or -1 when `x` is outside [0, 1].
int am_classify(double x);

// Static name of a level band index from [`am_classify`]; null for
// invalid indices.
const char *am_level_name(int level);

// Release a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be a pointer produced by this library's out-parameters and not
// yet freed.
void am_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* A11YMETER_H */
