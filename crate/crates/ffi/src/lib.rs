//! C interface to `fidelity-core`.
//!
//! Every function returns a [`FidelityStatus`]; on failure a message is
//! available from [`fidelity_last_error`] on the same thread. Strings
//! returned through out-pointers are owned by the caller and released with
//! [`fidelity_string_free`]. Handles are released with their `_free`
//! function; passing NULL to any `_free` function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use fidelity_core::agreement::{fleiss_kappa, AnnotationMatrix};
use fidelity_core::corpus::{load_corpus, tokenize, Corpus, CorpusFormat};
use fidelity_core::fightin::log_odds_arrays;
use fidelity_core::lexicon::Lexicon;
use fidelity_core::semsim::{topic_similarity, EmbeddingTable, OovPolicy};
use fidelity_core::Error;

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FidelityStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    Io = 4,
    Malformed = 5,
    NonPositiveDenominator = 6,
    OutOfVocabulary = 7,
    Panic = 8,
    Other = 9,
}

/// A loaded corpus.
pub struct FidelityCorpus(Corpus);

/// A loaded category lexicon.
pub struct FidelityLexicon(Lexicon);

/// A loaded word-embedding table.
pub struct FidelityEmbeddings(EmbeddingTable);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(FidelityStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => FidelityStatus::Io,
            Error::Malformed { .. } | Error::Json(_) | Error::Csv(_) => FidelityStatus::Malformed,
            Error::NonPositiveDenominator(_) => FidelityStatus::NonPositiveDenominator,
            Error::OutOfVocabulary(_) | Error::AllOutOfVocabulary => FidelityStatus::OutOfVocabulary,
            Error::InvalidInput(_)
            | Error::DuplicateId(_)
            | Error::EmptyGroup(_)
            | Error::ZeroNorm
            | Error::Config(_)
            | Error::UnresolvedSlot(_) => FidelityStatus::InvalidInput,
            _ => FidelityStatus::Other,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: FidelityStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

type Outcome = Result<(), Failure>;

fn guard(f: impl FnOnce() -> Outcome) -> FidelityStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FidelityStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FidelityStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(FidelityStatus::NullPointer, format!("`{name}` is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(FidelityStatus::InvalidUtf8, format!("`{name}` is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(FidelityStatus::NullPointer, format!("`{name}` is NULL")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| fail(FidelityStatus::NullPointer, format!("`{name}` is NULL")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(FidelityStatus::NullPointer, format!("`{name}` is NULL")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| fail(FidelityStatus::Other, "output contains a NUL byte"))
}

fn json_out(out: &mut *mut c_char, v: &impl serde::Serialize) -> Outcome {
    let s = serde_json::to_string(v).map_err(|e| fail(FidelityStatus::Other, e.to_string()))?;
    *out = into_c_string(s)?;
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn fidelity_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fidelity_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a string returned through an out-pointer of this
/// library that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn fidelity_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Log-odds with an informative Dirichlet prior over `n` categories.
/// Writes delta, variance and z-score per category into the three output
/// arrays, each of length `n`.
///
/// # Safety
/// Input arrays must hold `n` readable values and output arrays `n`
/// writable values.
#[no_mangle]
pub unsafe extern "C" fn fidelity_log_odds(
    y_i: *const f64,
    y_j: *const f64,
    alpha: *const f64,
    n: usize,
    out_delta: *mut f64,
    out_variance: *mut f64,
    out_zscore: *mut f64,
) -> FidelityStatus {
    guard(|| {
        let yi = slice_arg(y_i, n, "y_i")?;
        let yj = slice_arg(y_j, n, "y_j")?;
        let a = slice_arg(alpha, n, "alpha")?;
        if n > 0 && (out_delta.is_null() || out_variance.is_null() || out_zscore.is_null()) {
            return Err(fail(FidelityStatus::NullPointer, "an output array is NULL"));
        }
        if yi.iter().chain(yj).any(|&y| !(y >= 0.0) || !y.is_finite()) {
            return Err(fail(FidelityStatus::InvalidInput, "counts must be finite and non-negative"));
        }
        if a.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(fail(FidelityStatus::InvalidInput, "prior values must be finite and positive"));
        }
        let rows = log_odds_arrays(yi, yj, a).map_err(|c| {
            fail(
                FidelityStatus::NonPositiveDenominator,
                format!("denominator is not positive for category {c}"),
            )
        })?;
        for (k, r) in rows.iter().enumerate() {
            *out_delta.add(k) = r.delta;
            *out_variance.add(k) = r.variance;
            *out_zscore.add(k) = r.zscore;
        }
        Ok(())
    })
}

/// Fleiss' kappa of a row-major `items` x `labels` matrix of rater counts.
/// A matrix where every rating used a single label yields 1.
///
/// # Safety
/// `counts` must hold `items * labels` readable values.
#[no_mangle]
pub unsafe extern "C" fn fidelity_fleiss_kappa(
    counts: *const u32,
    items: usize,
    labels: usize,
    out_kappa: *mut f64,
) -> FidelityStatus {
    guard(|| {
        let len = items
            .checked_mul(labels)
            .ok_or_else(|| fail(FidelityStatus::InvalidInput, "matrix size overflows"))?;
        let data = slice_arg(counts, len, "counts")?;
        let out = out_arg(out_kappa, "out_kappa")?;
        if labels == 0 {
            return Err(fail(FidelityStatus::InvalidInput, "no label categories"));
        }
        let rows = data.chunks(labels).map(<[u32]>::to_vec).collect();
        let m = AnnotationMatrix::from_rows(rows)?;
        *out = fleiss_kappa(&m).kappa;
        Ok(())
    })
}

/// Tokenizes `text` into `{"tokens": [...], "stems": [...]}`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fidelity_tokenize_json(text: *const c_char, out_json: *mut *mut c_char) -> FidelityStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let out = out_arg(out_json, "out_json")?;
        let ts = tokenize(text);
        json_out(
            out,
            &serde_json::json!({ "tokens": ts.tokens(), "stems": ts.stems() }),
        )
    })
}

/// Loads a JSONL or CSV corpus (chosen by extension).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fidelity_corpus_load(path: *const c_char, out: *mut *mut FidelityCorpus) -> FidelityStatus {
    guard(|| {
        let path = Path::new(str_arg(path, "path")?);
        let out = out_arg(out, "out")?;
        let c = load_corpus(path, CorpusFormat::from_path(path))?;
        *out = Box::into_raw(Box::new(FidelityCorpus(c)));
        Ok(())
    })
}

/// Number of documents, or 0 for NULL.
///
/// # Safety
/// `corpus` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fidelity_corpus_len(corpus: *const FidelityCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.0.len())
}

/// Demographic margins as `{"total": n, "margins": {...}}`.
///
/// # Safety
/// `corpus` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fidelity_corpus_stats_json(
    corpus: *const FidelityCorpus,
    out_json: *mut *mut c_char,
) -> FidelityStatus {
    guard(|| {
        let c = ref_arg(corpus, "corpus")?;
        let out = out_arg(out_json, "out_json")?;
        let s = c.0.stats();
        json_out(out, &serde_json::json!({ "total": s.total, "margins": s.margins() }))
    })
}

/// # Safety
/// `corpus` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fidelity_corpus_free(corpus: *mut FidelityCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Loads a `.dic` category lexicon.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fidelity_lexicon_load(path: *const c_char, out: *mut *mut FidelityLexicon) -> FidelityStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let lex = Lexicon::load(path)?;
        *out = Box::into_raw(Box::new(FidelityLexicon(lex)));
        Ok(())
    })
}

/// Category counts over a whole corpus as `{"counts": {...}, "total_tokens": n}`.
///
/// # Safety
/// Both handles must be live; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fidelity_lexicon_count_json(
    lexicon: *const FidelityLexicon,
    corpus: *const FidelityCorpus,
    out_json: *mut *mut c_char,
) -> FidelityStatus {
    guard(|| {
        let lex = ref_arg(lexicon, "lexicon")?;
        let c = ref_arg(corpus, "corpus")?;
        let out = out_arg(out_json, "out_json")?;
        json_out(out, &lex.0.count_categories(&c.0))
    })
}

/// # Safety
/// `lexicon` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fidelity_lexicon_free(lexicon: *mut FidelityLexicon) {
    if !lexicon.is_null() {
        drop(Box::from_raw(lexicon));
    }
}

/// Loads a GloVe-format text file of `dim`-dimensional vectors.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fidelity_embeddings_load(
    path: *const c_char,
    dim: usize,
    out: *mut *mut FidelityEmbeddings,
) -> FidelityStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let t = EmbeddingTable::load(path, dim)?;
        *out = Box::into_raw(Box::new(FidelityEmbeddings(t)));
        Ok(())
    })
}

/// Number of words, or 0 for NULL.
///
/// # Safety
/// `emb` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fidelity_embeddings_len(emb: *const FidelityEmbeddings) -> usize {
    emb.as_ref().map_or(0, |e| e.0.len())
}

/// Cosine between the mean vectors of two whitespace-separated keyword
/// lists. Keywords missing from the table are skipped.
///
/// # Safety
/// `emb` must be a live handle, the keyword lists NUL-terminated strings and
/// `out_cosine` writable.
#[no_mangle]
pub unsafe extern "C" fn fidelity_topic_similarity(
    emb: *const FidelityEmbeddings,
    keywords_a: *const c_char,
    keywords_b: *const c_char,
    out_cosine: *mut f64,
) -> FidelityStatus {
    guard(|| {
        let e = ref_arg(emb, "emb")?;
        let split = |s: &str| s.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>();
        let a = split(str_arg(keywords_a, "keywords_a")?);
        let b = split(str_arg(keywords_b, "keywords_b")?);
        let out = out_arg(out_cosine, "out_cosine")?;
        *out = topic_similarity(&e.0, &a, &b, OovPolicy::Skip, None)?.cosine;
        Ok(())
    })
}

/// # Safety
/// `emb` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fidelity_embeddings_free(emb: *mut FidelityEmbeddings) {
    if !emb.is_null() {
        drop(Box::from_raw(emb));
    }
}
