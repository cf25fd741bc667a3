//! C interface to the textnet library.
//!
//! Every fallible function returns a [`TnStatus`]. On failure the message is
//! available from [`tn_last_error`] on the same thread until the next call.
//! Objects are opaque handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use textnet::corpus::{preprocess, tokenize, IdentityLemmatizer, StopwordList};
use textnet::graph::build_network;
use textnet::metrics::{metric_table, Metric, NodeMetricTable};
use textnet::pipeline::{export_plots, run_attribution, run_baseline, run_without_mds, RunConfig};
use textnet::similarity::{distance, rank_profile, similarity_exact, RankProfile};
use textnet::{Error, ErrorKind};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TnStatus {
    Ok = 0,
    ConfigError = 1,
    DataError = 2,
    NumericalError = 3,
    NullPointer = 4,
    InvalidArgument = 5,
    Panic = 6,
}

/// Metric selector, passed as `uint32_t`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TnMetric {
    Degree = 0,
    AvgShortestPath = 1,
    Betweenness = 2,
    Intermittency = 3,
}

/// Command selector for [`tn_run_config`], passed as `uint32_t`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TnRunMode {
    /// Network method with and without MDS.
    Attribution = 0,
    WithoutMds = 1,
    Baseline = 2,
    ExportPlots = 3,
}

/// A preprocessed document with its metric table.
pub struct TnDocument {
    table: NodeMetricTable,
}

/// Top-ranked words of one document under one metric.
pub struct TnProfile {
    profile: RankProfile,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TnStatus {
    if matches!(e, Error::InvalidArgument(_)) {
        return TnStatus::InvalidArgument;
    }
    match e.kind() {
        ErrorKind::Config => TnStatus::ConfigError,
        ErrorKind::Data => TnStatus::DataError,
        ErrorKind::Numerical => TnStatus::NumericalError,
    }
}

/// Runs `f`, recording any error or panic for [`tn_last_error`].
fn guard(f: impl FnOnce() -> Result<(), (TnStatus, String)>) -> TnStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TnStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TnStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (TnStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (TnStatus, String) {
    (TnStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> (TnStatus, String) {
    (TnStatus::InvalidArgument, msg.into())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (TnStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, (TnStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

fn metric_arg(m: u32) -> Result<Metric, (TnStatus, String)> {
    Metric::ALL
        .get(m as usize)
        .copied()
        .ok_or_else(|| invalid(format!("unknown metric {m}")))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn tn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Tokenizes `text`, removes the default English stopwords, builds the
/// co-occurrence network and computes every word's metrics.
///
/// # Safety
/// `id` and `text` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_document_from_text(
    id: *const c_char,
    text: *const c_char,
    out: *mut *mut TnDocument,
) -> TnStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let id = str_arg(id, "id")?;
        let text = str_arg(text, "text")?;
        let stream = preprocess(id, &tokenize(text), &StopwordList::english(), &IdentityLemmatizer);
        let net = build_network(&stream);
        let table = metric_table(&net, &stream).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(TnDocument { table }));
        Ok(())
    })
}

/// # Safety
/// `doc` must come from [`tn_document_from_text`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tn_document_free(doc: *mut TnDocument) {
    if !doc.is_null() {
        drop(Box::from_raw(doc));
    }
}

/// Number of distinct words (network nodes).
///
/// # Safety
/// `doc` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_document_node_count(doc: *const TnDocument, out: *mut usize) -> TnStatus {
    guard(|| {
        let doc = ref_arg(doc, "doc")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = doc.table.rows.len();
        Ok(())
    })
}

/// Value of `metric` for `lemma`. `*defined` is set to 0 when the value is
/// undefined (unreachable average path, or a word seen once for
/// intermittency), in which case `*out` is NaN.
///
/// # Safety
/// `doc` must be a live handle, `lemma` a NUL-terminated string, `out` and
/// `defined` writable.
#[no_mangle]
pub unsafe extern "C" fn tn_document_metric(
    doc: *const TnDocument,
    lemma: *const c_char,
    metric: u32,
    out: *mut f64,
    defined: *mut i32,
) -> TnStatus {
    guard(|| {
        let doc = ref_arg(doc, "doc")?;
        let lemma = str_arg(lemma, "lemma")?;
        let metric = metric_arg(metric)?;
        if out.is_null() || defined.is_null() {
            return Err(null("out"));
        }
        let row = doc.table.row(lemma).ok_or_else(|| lib_err(Error::UnknownNode(lemma.to_string())))?;
        match metric.value(row) {
            Some(v) => {
                *out = v;
                *defined = 1;
            }
            None => {
                *out = f64::NAN;
                *defined = 0;
            }
        }
        Ok(())
    })
}

/// Top-`n` rank profile of a document under `metric`, default direction.
///
/// # Safety
/// `doc` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_profile_new(
    doc: *const TnDocument,
    metric: u32,
    n: usize,
    out: *mut *mut TnProfile,
) -> TnStatus {
    guard(|| {
        let doc = ref_arg(doc, "doc")?;
        let metric = metric_arg(metric)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let profile = rank_profile(&doc.table, metric, n).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(TnProfile { profile }));
        Ok(())
    })
}

/// # Safety
/// `profile` must come from [`tn_profile_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tn_profile_free(profile: *mut TnProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Sum over shared words of the product of their ranks.
///
/// # Safety
/// Both profiles must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_profile_similarity(a: *const TnProfile, b: *const TnProfile, out: *mut u64) -> TnStatus {
    guard(|| {
        let (a, b) = (ref_arg(a, "a")?, ref_arg(b, "b")?);
        if out.is_null() {
            return Err(null("out"));
        }
        *out = similarity_exact(&a.profile, &b.profile).map_err(lib_err)?;
        Ok(())
    })
}

/// `1 - similarity / (n(n+1)(2n+1)/6)`.
///
/// # Safety
/// Both profiles must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_profile_distance(a: *const TnProfile, b: *const TnProfile, out: *mut f64) -> TnStatus {
    guard(|| {
        let (a, b) = (ref_arg(a, "a")?, ref_arg(b, "b")?);
        if out.is_null() {
            return Err(null("out"));
        }
        *out = distance(&a.profile, &b.profile).map_err(lib_err)?;
        Ok(())
    })
}

/// Fills `out` (row-major, `count * count` doubles) with pairwise profile
/// distances; the diagonal is 0.
///
/// # Safety
/// `profiles` must point to `count` live handles and `out` to
/// `count * count` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tn_distance_matrix(
    profiles: *const *const TnProfile,
    count: usize,
    out: *mut f64,
) -> TnStatus {
    guard(|| {
        if count == 0 {
            return Ok(());
        }
        if profiles.is_null() || out.is_null() {
            return Err(null("profiles or out"));
        }
        let handles = std::slice::from_raw_parts(profiles, count);
        let list: Vec<RankProfile> = handles
            .iter()
            .map(|&p| ref_arg(p, "profile").map(|p| p.profile.clone()))
            .collect::<Result<_, _>>()?;
        let m = textnet::similarity::distance_matrix(&list).map_err(lib_err)?;
        std::slice::from_raw_parts_mut(out, count * count).copy_from_slice(m.values());
        Ok(())
    })
}

/// Runs a pipeline command with the config file at `config_path`.
///
/// # Safety
/// `config_path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tn_run_config(config_path: *const c_char, mode: u32) -> TnStatus {
    guard(|| {
        let path = PathBuf::from(str_arg(config_path, "config_path")?);
        let cfg = RunConfig::from_path(&path).map_err(lib_err)?;
        let result = match mode {
            0 => run_attribution(&cfg).map(drop),
            1 => run_without_mds(&cfg).map(drop),
            2 => run_baseline(&cfg).map(drop),
            3 => export_plots(&cfg).map(drop),
            _ => return Err(invalid(format!("unknown run mode {mode}"))),
        };
        result.map_err(lib_err)
    })
}
