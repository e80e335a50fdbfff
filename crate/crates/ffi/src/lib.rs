//! C ABI over the `mv2h` library.
//!
//! Scores are opaque handles created by one of the `mv2h_score_from_*`
//! functions and released with [`mv2h_score_free`]. Every fallible call
//! returns an [`Mv2hStatus`]; on failure, [`mv2h_last_error`] describes the
//! problem until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mv2h::metrics::{evaluate, evaluate_auto, EvaluationReport, MatchMode};
use mv2h::report::report_json;
use mv2h::time::{ratio, to_f64, Rational, Time};
use mv2h::Score;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mv2hStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    AlignError = 4,
    InvalidArgument = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mv2hAlign {
    /// Align with DTW, then match exactly.
    Auto = 0,
    /// Scores share a timeline; match with tolerances.
    Pre = 1,
}

/// Evaluation settings. Start from [`mv2h_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct Mv2hOptions {
    pub align: Mv2hAlign,
    pub gap_penalty_numerator: i64,
    pub gap_penalty_denominator: i64,
    /// Milliseconds; negative keeps the default. Pre-aligned only.
    pub onset_tolerance_ms: i64,
    /// Milliseconds; negative keeps the default. Pre-aligned only.
    pub grouping_tolerance_ms: i64,
}

/// Component scores rounded to the nearest double.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Mv2hReport {
    pub multi_pitch: f64,
    pub voice: f64,
    pub meter: f64,
    pub value: f64,
    pub harmony: f64,
    pub mv2h: f64,
}

impl From<&EvaluationReport> for Mv2hReport {
    fn from(r: &EvaluationReport) -> Self {
        Mv2hReport {
            multi_pitch: to_f64(&r.multi_pitch),
            voice: to_f64(&r.voice),
            meter: to_f64(&r.meter),
            value: to_f64(&r.value),
            harmony: to_f64(&r.harmony),
            mv2h: to_f64(&r.mv2h),
        }
    }
}

/// Opaque parsed score.
pub struct Mv2hScore {
    inner: Score,
    warnings: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(message).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guarded(f: impl FnOnce() -> Result<(), (Mv2hStatus, String)>) -> Mv2hStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => Mv2hStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            Mv2hStatus::Panic
        }
    }
}

fn null(what: &str) -> (Mv2hStatus, String) {
    (Mv2hStatus::NullPointer, format!("{what} is null"))
}

/// Message for the last failed call on this thread, or NULL.
///
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn mv2h_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mv2h_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn mv2h_options_default() -> Mv2hOptions {
    Mv2hOptions {
        align: Mv2hAlign::Auto,
        gap_penalty_numerator: 3,
        gap_penalty_denominator: 5,
        onset_tolerance_ms: -1,
        grouping_tolerance_ms: -1,
    }
}

fn store(score: Score, warnings: usize, out: *mut *mut Mv2hScore) {
    let handle = Box::new(Mv2hScore { inner: score, warnings });
    // SAFETY: callers checked `out` for null; it points to writable storage.
    unsafe { *out = Box::into_raw(handle) };
}

/// Parse interchange text into a new score handle.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer to
/// writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn mv2h_score_from_text(text: *const c_char, out: *mut *mut Mv2hScore) -> Mv2hStatus {
    guarded(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: caller guarantees a NUL-terminated string.
        let text = unsafe { CStr::from_ptr(text) }.to_str().map_err(|e| (Mv2hStatus::InvalidUtf8, e.to_string()))?;
        let (score, warnings) =
            mv2h::parse_interchange_text(text).map_err(|e| (Mv2hStatus::ParseError, e.to_string()))?;
        store(score, warnings.len(), out);
        Ok(())
    })
}

/// Parse an uncompressed partwise MusicXML document into a new score handle.
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` to writable storage
/// for one handle.
#[no_mangle]
pub unsafe extern "C" fn mv2h_score_from_musicxml(data: *const u8, len: usize, out: *mut *mut Mv2hScore) -> Mv2hStatus {
    guarded(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: caller guarantees `len` readable bytes at `data`.
        let bytes = unsafe { std::slice::from_raw_parts(data, len) };
        let (score, warnings) = mv2h::parse_musicxml(bytes).map_err(|e| (Mv2hStatus::ParseError, e.to_string()))?;
        store(score, warnings.len(), out);
        Ok(())
    })
}

/// Number of notes in a score; 0 for NULL.
///
/// # Safety
/// `score` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mv2h_score_note_count(score: *const Mv2hScore) -> usize {
    // SAFETY: caller guarantees a live handle or NULL.
    unsafe { score.as_ref() }.map_or(0, |s| s.inner.notes().len())
}

/// Number of parse warnings recorded for a score; 0 for NULL.
///
/// # Safety
/// `score` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mv2h_score_warning_count(score: *const Mv2hScore) -> usize {
    // SAFETY: caller guarantees a live handle or NULL.
    unsafe { score.as_ref() }.map_or(0, |s| s.warnings)
}

/// Release a score handle. NULL is ignored.
///
/// # Safety
/// `score` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mv2h_score_free(score: *mut Mv2hScore) {
    if !score.is_null() {
        // SAFETY: handle came from Box::into_raw in `store`.
        drop(unsafe { Box::from_raw(score) });
    }
}

fn mode_from(options: &Mv2hOptions) -> Result<(MatchMode, Rational), (Mv2hStatus, String)> {
    let bad = |m: String| (Mv2hStatus::InvalidArgument, m);
    if options.gap_penalty_denominator <= 0 || options.gap_penalty_numerator <= 0 {
        return Err(bad("gap penalty must be a positive fraction".into()));
    }
    let gap = ratio(options.gap_penalty_numerator, options.gap_penalty_denominator);
    let mut mode = match options.align {
        Mv2hAlign::Auto => {
            if options.onset_tolerance_ms >= 0 || options.grouping_tolerance_ms >= 0 {
                return Err(bad("tolerances apply only to pre-aligned evaluation".into()));
            }
            MatchMode::auto_aligned()
        }
        Mv2hAlign::Pre => MatchMode::pre_aligned(),
    };
    if options.onset_tolerance_ms >= 0 {
        mode =
            mode.with_onset_tolerance(Time::from_millis(options.onset_tolerance_ms)).map_err(|e| bad(e.to_string()))?;
    }
    if options.grouping_tolerance_ms >= 0 {
        mode = mode
            .with_grouping_tolerance(Time::from_millis(options.grouping_tolerance_ms))
            .map_err(|e| bad(e.to_string()))?;
    }
    Ok((mode, gap))
}

fn run_evaluation(
    ground_truth: *const Mv2hScore,
    transcription: *const Mv2hScore,
    options: *const Mv2hOptions,
) -> Result<EvaluationReport, (Mv2hStatus, String)> {
    // SAFETY: callers of the extern functions guarantee live handles or NULL.
    let gt = unsafe { ground_truth.as_ref() }.ok_or_else(|| null("ground_truth"))?;
    let tr = unsafe { transcription.as_ref() }.ok_or_else(|| null("transcription"))?;
    let options = unsafe { options.as_ref() }.copied().unwrap_or_else(|| mv2h_options_default());
    let (mode, gap) = mode_from(&options)?;
    let evaluation = match options.align {
        Mv2hAlign::Auto => {
            evaluate_auto(&tr.inner, &gt.inner, &gap).map_err(|e| (Mv2hStatus::AlignError, e.to_string()))?.0
        }
        Mv2hAlign::Pre => evaluate(&tr.inner, &gt.inner, &mode),
    };
    Ok(evaluation.report)
}

/// Evaluate a transcription against a ground truth.
///
/// `options` may be NULL for the defaults (auto alignment, gap 3/5).
///
/// # Safety
/// Handles must be live; `options` NULL or valid; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn mv2h_evaluate(
    ground_truth: *const Mv2hScore,
    transcription: *const Mv2hScore,
    options: *const Mv2hOptions,
    out: *mut Mv2hReport,
) -> Mv2hStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let report = run_evaluation(ground_truth, transcription, options)?;
        // SAFETY: checked non-null; caller guarantees it is writable.
        unsafe { *out = Mv2hReport::from(&report) };
        Ok(())
    })
}

/// Evaluate and return the report as a flat JSON object. With `exact`,
/// values are `"p/q"` strings instead of 4-decimal numbers.
///
/// The returned string must be released with [`mv2h_string_free`].
///
/// # Safety
/// Same as [`mv2h_evaluate`]; `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn mv2h_evaluate_json(
    ground_truth: *const Mv2hScore,
    transcription: *const Mv2hScore,
    options: *const Mv2hOptions,
    exact: bool,
    out: *mut *mut c_char,
) -> Mv2hStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let report = run_evaluation(ground_truth, transcription, options)?;
        let json = CString::new(report_json(&report, exact)).expect("JSON has no NUL bytes");
        // SAFETY: checked non-null; caller guarantees it is writable.
        unsafe { *out = json.into_raw() };
        Ok(())
    })
}

/// Release a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string from [`mv2h_evaluate_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mv2h_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: allocated by CString::into_raw.
        drop(unsafe { CString::from_raw(s) });
    }
}
