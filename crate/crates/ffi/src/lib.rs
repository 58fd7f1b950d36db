//! C interface: opaque grammar and resolution handles, status codes, and
//! strings owned by the library until released with `sp_string_free`.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spalign::corpus::corpus_text;
use spalign::io::{parse_grammar, render_alignment};
use spalign::ws::{resolve_with_fallback, WsError, WsQuery};
use spalign::{build_grammar, search, Grammar, SearchConfig};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    GrammarSyntax = 3,
    GrammarInvalid = 4,
    UnknownGrammar = 5,
    EmptySentence = 6,
    PronounNotInSentence = 7,
    NoPronounInstance = 8,
    NoBridge = 9,
    AmbiguousBridge = 10,
    Internal = 11,
}

/// A built grammar.
pub struct SpGrammar(Grammar);

/// The outcome of a successful resolution.
pub struct SpResolution {
    referent: CString,
    bridge: CString,
    attribute: CString,
    confidence: f64,
    cd: f64,
}

fn guard(f: impl FnOnce() -> SpStatus) -> SpStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(SpStatus::Internal)
}

/// # Safety
/// `p` is null or a NUL-terminated string.
unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, SpStatus> {
    if p.is_null() {
        return Err(SpStatus::NullArgument);
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| SpStatus::InvalidUtf8)
}

fn status_of(e: &WsError) -> SpStatus {
    match e {
        WsError::EmptySentence => SpStatus::EmptySentence,
        WsError::PronounNotInSentence(_) => SpStatus::PronounNotInSentence,
        WsError::NoPronounInstance => SpStatus::NoPronounInstance,
        WsError::NoBridge => SpStatus::NoBridge,
        WsError::AmbiguousBridge(_) => SpStatus::AmbiguousBridge,
        _ => SpStatus::Internal,
    }
}

fn build(src: &str, out: *mut *mut SpGrammar) -> SpStatus {
    let records = match parse_grammar(src) {
        Ok(r) => r,
        Err(_) => return SpStatus::GrammarSyntax,
    };
    match build_grammar(&records) {
        Ok(g) => {
            // SAFETY: callers check `out` for null.
            unsafe { *out = Box::into_raw(Box::new(SpGrammar(g))) };
            SpStatus::Ok
        }
        Err(_) => SpStatus::GrammarInvalid,
    }
}

/// Builds a grammar from grammar-file text.
///
/// # Safety
/// `src` is a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_grammar_from_text(
    src: *const c_char,
    out: *mut *mut SpGrammar,
) -> SpStatus {
    guard(|| {
        if out.is_null() {
            return SpStatus::NullArgument;
        }
        match text(src) {
            Ok(s) => build(s, out),
            Err(e) => e,
        }
    })
}

/// Builds one of the bundled grammars, such as `fish_worm.spg`.
///
/// # Safety
/// `name` is a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_grammar_bundled(
    name: *const c_char,
    out: *mut *mut SpGrammar,
) -> SpStatus {
    guard(|| {
        if out.is_null() {
            return SpStatus::NullArgument;
        }
        match text(name) {
            Ok(n) => match corpus_text(n) {
                Some(src) => build(src, out),
                None => SpStatus::UnknownGrammar,
            },
            Err(e) => e,
        }
    })
}

/// # Safety
/// `g` is null or was returned by a grammar constructor and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_grammar_free(g: *mut SpGrammar) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of patterns in the grammar, 0 for null.
///
/// # Safety
/// `g` is null or a live grammar handle.
#[no_mangle]
pub unsafe extern "C" fn sp_grammar_len(g: *const SpGrammar) -> usize {
    g.as_ref().map_or(0, |g| g.0.len())
}

fn words(sentence: &str) -> Vec<&str> {
    sentence.split_whitespace().collect()
}

/// Parses a whitespace-separated sentence with default search settings and
/// writes the best alignment's scores. `render`, when not null, receives the
/// rendered alignment, to be released with `sp_string_free`.
///
/// # Safety
/// `g` is a live grammar handle, `sentence` a NUL-terminated string, and each
/// output pointer null or valid.
#[no_mangle]
pub unsafe extern "C" fn sp_parse(
    g: *const SpGrammar,
    sentence: *const c_char,
    bn: *mut f64,
    be: *mut f64,
    cd: *mut f64,
    render: *mut *mut c_char,
) -> SpStatus {
    guard(|| {
        let Some(g) = g.as_ref() else {
            return SpStatus::NullArgument;
        };
        let s = match text(sentence) {
            Ok(s) => s,
            Err(e) => return e,
        };
        let ws = words(s);
        if ws.is_empty() {
            return SpStatus::EmptySentence;
        }
        let results = search(&g.0.new_pattern(&ws), &g.0, &SearchConfig::default());
        let best = &results[0];
        for (p, v) in [
            (bn, best.score.bn),
            (be, best.score.be),
            (cd, best.score.cd),
        ] {
            if !p.is_null() {
                *p = v;
            }
        }
        if !render.is_null() {
            let r = render_alignment(&best.alignment, &g.0);
            *render = CString::new(r).map_or(ptr::null_mut(), CString::into_raw);
        }
        SpStatus::Ok
    })
}

/// Resolves `pronoun` in a whitespace-separated sentence, trying direct
/// links before links through class patterns.
///
/// # Safety
/// `g` is a live grammar handle, `sentence` and `pronoun` NUL-terminated
/// strings, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_resolve(
    g: *const SpGrammar,
    sentence: *const c_char,
    pronoun: *const c_char,
    out: *mut *mut SpResolution,
) -> SpStatus {
    guard(|| {
        let Some(g) = g.as_ref() else {
            return SpStatus::NullArgument;
        };
        if out.is_null() {
            return SpStatus::NullArgument;
        }
        let (s, p) = match (text(sentence), text(pronoun)) {
            (Ok(s), Ok(p)) => (s, p),
            (Err(e), _) | (_, Err(e)) => return e,
        };
        let q = match WsQuery::new(&g.0, &words(s), p) {
            Ok(q) => q,
            Err(e) => return status_of(&e),
        };
        let cfg = SearchConfig::default();
        let r = match resolve_with_fallback(&q, &cfg) {
            Ok(r) => r,
            Err(e) => return status_of(&e),
        };
        let c = |s: String| CString::new(s).unwrap_or_default();
        *out = Box::into_raw(Box::new(SpResolution {
            referent: c(r.referent_word),
            bridge: c(r.bridge_pattern_id),
            attribute: c(r.attribute_name),
            confidence: r.confidence,
            cd: r.score.cd,
        }));
        SpStatus::Ok
    })
}

/// The referent word; valid until the resolution is freed.
///
/// # Safety
/// `r` is a live resolution handle.
#[no_mangle]
pub unsafe extern "C" fn sp_resolution_referent(r: *const SpResolution) -> *const c_char {
    r.as_ref().map_or(ptr::null(), |r| r.referent.as_ptr())
}

/// The bridge pattern id; valid until the resolution is freed.
///
/// # Safety
/// `r` is a live resolution handle.
#[no_mangle]
pub unsafe extern "C" fn sp_resolution_bridge(r: *const SpResolution) -> *const c_char {
    r.as_ref().map_or(ptr::null(), |r| r.bridge.as_ptr())
}

/// The attribute symbol linking pronoun and referent; valid until the
/// resolution is freed.
///
/// # Safety
/// `r` is a live resolution handle.
#[no_mangle]
pub unsafe extern "C" fn sp_resolution_attribute(r: *const SpResolution) -> *const c_char {
    r.as_ref().map_or(ptr::null(), |r| r.attribute.as_ptr())
}

/// # Safety
/// `r` is a live resolution handle.
#[no_mangle]
pub unsafe extern "C" fn sp_resolution_confidence(r: *const SpResolution) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.confidence)
}

/// Compression difference of the alignment the resolution rests on.
///
/// # Safety
/// `r` is a live resolution handle.
#[no_mangle]
pub unsafe extern "C" fn sp_resolution_cd(r: *const SpResolution) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.cd)
}

/// # Safety
/// `r` is null or a resolution handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_resolution_free(r: *mut SpResolution) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `s` is null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn sp_status_name(s: SpStatus) -> *const c_char {
    let name: &'static CStr = match s {
        SpStatus::Ok => c"Ok",
        SpStatus::NullArgument => c"NullArgument",
        SpStatus::InvalidUtf8 => c"InvalidUtf8",
        SpStatus::GrammarSyntax => c"GrammarSyntax",
        SpStatus::GrammarInvalid => c"GrammarInvalid",
        SpStatus::UnknownGrammar => c"UnknownGrammar",
        SpStatus::EmptySentence => c"EmptySentence",
        SpStatus::PronounNotInSentence => c"PronounNotInSentence",
        SpStatus::NoPronounInstance => c"NoPronounInstance",
        SpStatus::NoBridge => c"NoBridge",
        SpStatus::AmbiguousBridge => c"AmbiguousBridge",
        SpStatus::Internal => c"Internal",
    };
    name.as_ptr()
}
