//! C ABI for the a11ymeter accessibility auditor.
//!
//! The surface is a small handle-based API: create an [`AmAudit`] session,
//! configure it with one JSON document, add pages, and run it to get the
//! report as JSON or Markdown. Strings returned through out-parameters are
//! owned by the caller and must be released with [`am_string_free`]; every
//! failing call leaves a message retrievable via [`am_last_error`].
//!
//! The generated header lives at `include/a11ymeter.h`.

use a11ymeter::audit::audit_documents;
use a11ymeter::config::{AuditConfig, AuditConfigDoc};
use a11ymeter::facts::{extract_page, ExternalCss, FactsDump, SourceDocument, Warning};
use a11ymeter::metrics::{AttributeId, AttributeScore, NotApplicable};
use a11ymeter::report::{build_report, render_report, ReportFormat};
use a11ymeter::rollup::evaluate_tree;
use libc::{c_char, c_double, c_int};
use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status of an API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A JSON document did not parse.
    InvalidJson = 3,
    /// The configuration was rejected (weights, breakpoints, ids).
    InvalidConfig = 4,
    /// A page could not be parsed as HTML.
    ParseFailed = 5,
    /// Unexpected internal failure.
    Internal = 6,
}

/// Report rendering format.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmFormat {
    Json = 0,
    Markdown = 1,
}

/// An audit session: configuration plus the pages added so far. Opaque to
/// C callers; create with [`am_audit_new`], release with [`am_audit_free`].
pub struct AmAudit {
    config: AuditConfig,
    pages: Vec<SourceDocument>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl std::fmt::Display) {
    let text = message.to_string().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).unwrap_or_default();
    });
}

fn clear_error() {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::default();
    });
}

/// Message describing the most recent failure on this thread. Empty when
/// the last call succeeded. The pointer stays valid until the next library
/// call on the same thread.
#[no_mangle]
pub extern "C" fn am_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn am_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Create a session with the default configuration. Never null.
#[no_mangle]
pub extern "C" fn am_audit_new() -> *mut AmAudit {
    clear_error();
    Box::into_raw(Box::new(AmAudit {
        config: AuditConfig::default(),
        pages: Vec::new(),
    }))
}

/// Release a session. Null is ignored.
///
/// # Safety
/// `session` must be a pointer returned by [`am_audit_new`] that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn am_audit_free(session: *mut AmAudit) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

unsafe fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, AmStatus> {
    if ptr.is_null() {
        set_error("null argument");
        return Err(AmStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|e| {
        set_error(format!("invalid UTF-8: {e}"));
        AmStatus::InvalidUtf8
    })
}

/// Configure a session from one JSON document with optional fields:
/// `weights` (map of id to weight), `annotations`, `languages`,
/// `contrast_mode` ("paper" or "simple"), `breakpoints` (four ascending
/// reals), `deep_pages` (bool), `heuristics`, `per_page` (bool).
///
/// # Safety
/// `session` must be a live session pointer; `config_json` must be a valid
/// NUL-terminated string or null (null resets to defaults).
#[no_mangle]
pub unsafe extern "C" fn am_audit_set_config_json(
    session: *mut AmAudit,
    config_json: *const c_char,
) -> AmStatus {
    clear_error();
    let Some(session) = session.as_mut() else {
        set_error("null session");
        return AmStatus::NullArgument;
    };
    if config_json.is_null() {
        session.config = AuditConfig::default();
        return AmStatus::Ok;
    }
    let text = match utf8_arg(config_json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    let doc: AuditConfigDoc = match serde_json::from_str(text) {
        Ok(doc) => doc,
        Err(e) => {
            set_error(format!("config JSON: {e}"));
            return AmStatus::InvalidJson;
        }
    };
    match doc.build() {
        Ok(config) => {
            session.config = config;
            AmStatus::Ok
        }
        Err(e) => {
            set_error(e);
            AmStatus::InvalidConfig
        }
    }
}

/// Add one page to the session. `html` is raw document bytes (any
/// encoding; non-UTF-8 is decoded lossily and flagged in the report).
/// `path_depth` is the page's URL path depth; pass 0 for top-level pages.
///
/// # Safety
/// `session` must be live, `origin` NUL-terminated, and `html` must point
/// to `html_len` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn am_audit_add_page(
    session: *mut AmAudit,
    origin: *const c_char,
    html: *const u8,
    html_len: usize,
    path_depth: u32,
) -> AmStatus {
    clear_error();
    let Some(session) = session.as_mut() else {
        set_error("null session");
        return AmStatus::NullArgument;
    };
    let origin = match utf8_arg(origin) {
        Ok(o) => o,
        Err(status) => return status,
    };
    if html.is_null() {
        set_error("null html");
        return AmStatus::NullArgument;
    }
    let bytes = std::slice::from_raw_parts(html, html_len).to_vec();
    session
        .pages
        .push(SourceDocument::new(origin, bytes, path_depth));
    AmStatus::Ok
}

fn render_out(bytes: Vec<u8>, out: *mut *mut c_char) -> AmStatus {
    match CString::new(bytes) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            AmStatus::Ok
        }
        Err(e) => {
            set_error(format!("report contains NUL: {e}"));
            AmStatus::Internal
        }
    }
}

/// Run the audit over every added page and hand back the rendered report.
/// The session keeps its pages, so a session can be run repeatedly (e.g.
/// once per format).
///
/// # Safety
/// `session` must be live and `out` must point to writable pointer storage.
#[no_mangle]
pub unsafe extern "C" fn am_audit_run(
    session: *mut AmAudit,
    format: AmFormat,
    out: *mut *mut c_char,
) -> AmStatus {
    clear_error();
    if out.is_null() {
        set_error("null out pointer");
        return AmStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let Some(session) = session.as_ref() else {
        set_error("null session");
        return AmStatus::NullArgument;
    };
    let result = catch_unwind(AssertUnwindSafe(|| {
        let documents: Vec<(SourceDocument, ExternalCss)> = session
            .pages
            .iter()
            .map(|p| (p.clone(), ExternalCss::none()))
            .collect();
        audit_documents(&documents, &session.config)
    }));
    match result {
        Ok(Ok(report)) => {
            let rendered = render_report(
                &report,
                match format {
                    AmFormat::Json => ReportFormat::Json,
                    AmFormat::Markdown => ReportFormat::Markdown,
                },
            );
            render_out(rendered, out)
        }
        Ok(Err(run_error)) => {
            set_error(
                run_error
                    .failures
                    .iter()
                    .map(|f| f.to_string())
                    .collect::<Vec<_>>()
                    .join("; "),
            );
            AmStatus::ParseFailed
        }
        Err(_) => {
            set_error("internal panic");
            AmStatus::Internal
        }
    }
}

/// Pure-math mode: evaluate directly supplied attribute values without any
/// HTML. `scores_json` maps attribute ids to values in [0, 1]; missing
/// attributes are treated as not applicable with a warning in the report;
/// `config_json` is as for [`am_audit_set_config_json`] and may be null.
///
/// # Safety
/// `scores_json` must be NUL-terminated; `config_json` may be null; `out`
/// must point to writable pointer storage.
#[no_mangle]
pub unsafe extern "C" fn am_score_report(
    scores_json: *const c_char,
    config_json: *const c_char,
    format: AmFormat,
    out: *mut *mut c_char,
) -> AmStatus {
    clear_error();
    if out.is_null() {
        set_error("null out pointer");
        return AmStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let scores_text = match utf8_arg(scores_json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    let config = if config_json.is_null() {
        AuditConfig::default()
    } else {
        let text = match utf8_arg(config_json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let doc: AuditConfigDoc = match serde_json::from_str(text) {
            Ok(doc) => doc,
            Err(e) => {
                set_error(format!("config JSON: {e}"));
                return AmStatus::InvalidJson;
            }
        };
        match doc.build() {
            Ok(config) => config,
            Err(e) => {
                set_error(e);
                return AmStatus::InvalidConfig;
            }
        }
    };
    let values: BTreeMap<String, f64> = match serde_json::from_str(scores_text) {
        Ok(v) => v,
        Err(e) => {
            set_error(format!("scores JSON: {e}"));
            return AmStatus::InvalidJson;
        }
    };

    let mut warnings = Vec::new();
    let mut scores = Vec::new();
    for id in AttributeId::ALL {
        match values.get(id.code()) {
            Some(&value) if (0.0..=1.0).contains(&value) => {
                scores.push(AttributeScore::direct(id, value));
            }
            Some(&value) => {
                set_error(format!("score for {id} must be in [0, 1], got {value}"));
                return AmStatus::InvalidConfig;
            }
            None => {
                warnings.push(Warning::MissingAttribute {
                    attribute: id.to_string(),
                });
                scores.push(AttributeScore::not_applicable(
                    id,
                    NotApplicable::NoEvidence,
                ));
            }
        }
    }
    for key in values.keys() {
        if key.parse::<AttributeId>().is_err() {
            warnings.push(Warning::UnknownAttribute { id: key.clone() });
        }
    }

    let tree = match evaluate_tree(&scores, &config.weights, &config.scale, &mut warnings) {
        Ok(tree) => tree,
        Err(e) => {
            set_error(e);
            return AmStatus::InvalidConfig;
        }
    };
    let report = build_report(
        &tree,
        &config.weights,
        &config.scale,
        Vec::new(),
        warnings,
        None,
    );
    let rendered = render_report(
        &report,
        match format {
            AmFormat::Json => ReportFormat::Json,
            AmFormat::Markdown => ReportFormat::Markdown,
        },
    );
    render_out(rendered, out)
}

/// Extract the facts dump (counts plus element references) for one page.
///
/// # Safety
/// `origin` must be NUL-terminated, `html` must point to `html_len`
/// readable bytes, and `out` must point to writable pointer storage.
#[no_mangle]
pub unsafe extern "C" fn am_facts_json(
    origin: *const c_char,
    html: *const u8,
    html_len: usize,
    path_depth: u32,
    out: *mut *mut c_char,
) -> AmStatus {
    clear_error();
    if out.is_null() {
        set_error("null out pointer");
        return AmStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let origin = match utf8_arg(origin) {
        Ok(o) => o,
        Err(status) => return status,
    };
    if html.is_null() {
        set_error("null html");
        return AmStatus::NullArgument;
    }
    let bytes = std::slice::from_raw_parts(html, html_len).to_vec();
    let document = SourceDocument::new(origin, bytes, path_depth);
    match extract_page(&document, &Default::default(), &ExternalCss::none()) {
        Ok(page) => {
            let dump = FactsDump::from(&page);
            let mut rendered = serde_json::to_vec_pretty(&dump).expect("dump serializes");
            rendered.push(b'\n');
            render_out(rendered, out)
        }
        Err(e) => {
            set_error(e);
            AmStatus::ParseFailed
        }
    }
}

/// WCAG contrast ratio between two sRGB colors, in [1, 21].
#[no_mangle]
pub extern "C" fn am_contrast_ratio(
    fg_r: u8,
    fg_g: u8,
    fg_b: u8,
    bg_r: u8,
    bg_g: u8,
    bg_b: u8,
) -> c_double {
    a11ymeter::contrast_ratio(
        a11ymeter::color::Rgb::new(fg_r, fg_g, fg_b),
        a11ymeter::color::Rgb::new(bg_r, bg_g, bg_b),
    )
}

/// WCAG relative luminance of an sRGB color, in [0, 1].
#[no_mangle]
pub extern "C" fn am_relative_luminance(r: u8, g: u8, b: u8) -> c_double {
    a11ymeter::relative_luminance(a11ymeter::color::Rgb::new(r, g, b))
}

/// Classify a score on the default level scale. Returns the band index
/// (0 = very poor .. 4 = excellent) or -1 when `x` is outside [0, 1].
#[no_mangle]
pub extern "C" fn am_classify(x: c_double) -> c_int {
    match a11ymeter::classify(x) {
        Ok(level) => a11ymeter::LevelLabel::ALL
            .iter()
            .position(|&l| l == level.label)
            .map(|i| i as c_int)
            .unwrap_or(-1),
        Err(_) => -1,
    }
}

/// Static name of a level band index from [`am_classify`]; null for
/// invalid indices.
#[no_mangle]
pub extern "C" fn am_level_name(level: c_int) -> *const c_char {
    // NUL-terminated literals so the pointers are directly usable from C.
    const NAMES: [&str; 5] = [
        "very poor\0",
        "poor\0",
        "satisfactory\0",
        "good\0",
        "excellent\0",
    ];
    usize::try_from(level)
        .ok()
        .and_then(|i| NAMES.get(i))
        .map(|s| s.as_ptr() as *const c_char)
        .unwrap_or(ptr::null())
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be a pointer produced by this library's out-parameters and not
/// yet freed.
#[no_mangle]
pub unsafe extern "C" fn am_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
