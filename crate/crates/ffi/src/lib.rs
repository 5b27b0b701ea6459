//! C ABI over the `onconer` core.
//!
//! Conventions: every fallible function returns an [`OncStatus`]; results
//! go through out-pointers; on failure [`onc_last_error`] describes what
//! went wrong on the calling thread. Strings returned to the caller are
//! owned by the caller and must be released with [`onc_string_free`].
//! Handles are released with their `_free` function. Panics never cross
//! the boundary; they surface as [`OncStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use onconer::corpus::{cohen_kappa, parse_corpus};
use onconer::encoder::{load_checkpoint, predict, Checkpoint};
use onconer::eval::score;
use onconer::tokenizer::{load_vocab, tokenize, Vocabulary};

/// Status codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OncStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    InvalidInput = 4,
    Model = 5,
    Panic = 6,
}

/// Opaque vocabulary handle.
pub struct OncVocab(Vocabulary);

/// Opaque model handle: a checkpoint with its vocabulary.
pub struct OncModel {
    ckpt: Checkpoint,
    vocab: Vocabulary,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(OncStatus, String);

impl Failure {
    fn io(e: impl std::fmt::Display) -> Self {
        Failure(OncStatus::Io, e.to_string())
    }
    fn input(e: impl std::fmt::Display) -> Self {
        Failure(OncStatus::InvalidInput, e.to_string())
    }
    fn model(e: impl std::fmt::Display) -> Self {
        Failure(OncStatus::Model, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> OncStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OncStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            OncStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(OncStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(OncStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(OncStatus::NullPointer, format!("{name} is null")))
}

unsafe fn put<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(OncStatus::NullPointer, format!("{name} is null")));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(Failure::input)?;
    put(out, c.into_raw(), "out")
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn onc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn onc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn onc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The built-in base vocabulary.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn onc_vocab_builtin(out: *mut *mut OncVocab) -> OncStatus {
    guard(|| put(out, Box::into_raw(Box::new(OncVocab(Vocabulary::builtin_base()))), "out"))
}

/// Loads a one-token-per-line vocabulary file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn onc_vocab_load(path: *const c_char, out: *mut *mut OncVocab) -> OncStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let v = load_vocab(path).map_err(|e| match e {
            onconer::tokenizer::TokenizerError::Io(e) => Failure::io(e),
            e => Failure::input(e),
        })?;
        put(out, Box::into_raw(Box::new(OncVocab(v))), "out")
    })
}

/// # Safety
/// `v` must be null or a handle from this library, not freed already.
#[no_mangle]
pub unsafe extern "C" fn onc_vocab_free(v: *mut OncVocab) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// # Safety
/// `v` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn onc_vocab_len(v: *const OncVocab, out: *mut usize) -> OncStatus {
    guard(|| {
        let v = ref_arg(v, "vocab")?;
        put(out, v.0.len(), "out")
    })
}

/// Tokenizes `text`; writes `{"pieces":[...],"ids":[...],"offsets":[[s,e],...]}`.
/// Offsets are character positions in `text`.
///
/// # Safety
/// `v` must be a live handle, `text` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn onc_tokenize_json(
    v: *const OncVocab,
    text: *const c_char,
    out: *mut *mut c_char,
) -> OncStatus {
    guard(|| {
        let v = ref_arg(v, "vocab")?;
        let text = str_arg(text, "text")?;
        let t = tokenize(text, &v.0);
        let json = serde_json::json!({ "pieces": t.pieces, "ids": t.ids, "offsets": t.offsets });
        put_string(out, json.to_string())
    })
}

/// Loads a checkpoint and pairs it with a copy of `vocab`. Fails when the
/// checkpoint was trained against a different vocabulary.
///
/// # Safety
/// `path` NUL-terminated, `vocab` a live handle, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn onc_model_load(
    path: *const c_char,
    vocab: *const OncVocab,
    out: *mut *mut OncModel,
) -> OncStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let vocab = ref_arg(vocab, "vocab")?.0.clone();
        let ckpt = load_checkpoint(path).map_err(|e| match e {
            onconer::encoder::EncoderError::Io(e) => Failure::io(e),
            e => Failure::model(e),
        })?;
        ckpt.check_vocab(&vocab).map_err(Failure::model)?;
        put(out, Box::into_raw(Box::new(OncModel { ckpt, vocab })), "out")
    })
}

/// # Safety
/// `m` must be null or a handle from this library, not freed already.
#[no_mangle]
pub unsafe extern "C" fn onc_model_free(m: *mut OncModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Predicts entity spans; writes a JSON array of
/// `{"start":s,"end":e,"label":"..."}` with character offsets.
/// `max_len` 0 means the model's position limit.
///
/// # Safety
/// `m` a live handle, `text` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn onc_predict_json(
    m: *const OncModel,
    text: *const c_char,
    max_len: usize,
    out: *mut *mut c_char,
) -> OncStatus {
    guard(|| {
        let m = ref_arg(m, "model")?;
        let text = str_arg(text, "text")?;
        let max_len = if max_len == 0 { m.ckpt.config.max_positions } else { max_len };
        let spans = predict(&m.ckpt, text, &m.vocab, max_len).map_err(Failure::model)?;
        put_string(out, serde_json::to_string(&spans).map_err(Failure::model)?)
    })
}

/// Scores two JSONL corpora given as strings; writes the exact and
/// lenient report as JSON.
///
/// # Safety
/// Both inputs NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn onc_score_json(
    gold_jsonl: *const c_char,
    pred_jsonl: *const c_char,
    out: *mut *mut c_char,
) -> OncStatus {
    guard(|| {
        let gold = parse_corpus(str_arg(gold_jsonl, "gold")?.as_bytes()).map_err(Failure::input)?;
        let pred = parse_corpus(str_arg(pred_jsonl, "pred")?.as_bytes()).map_err(Failure::input)?;
        let report = score(&gold, &pred).map_err(Failure::input)?;
        put_string(out, serde_json::to_string(&report).map_err(Failure::model)?)
    })
}

/// Cohen's kappa between two label sequences of length `n`.
///
/// # Safety
/// `a` and `b` must point to `n` readable values; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn onc_cohen_kappa(
    a: *const i32,
    b: *const i32,
    n: usize,
    out: *mut f64,
) -> OncStatus {
    guard(|| {
        if n > 0 && (a.is_null() || b.is_null()) {
            return Err(Failure(OncStatus::NullPointer, "label array is null".into()));
        }
        let (a, b) = if n == 0 {
            (&[][..], &[][..])
        } else {
            (std::slice::from_raw_parts(a, n), std::slice::from_raw_parts(b, n))
        };
        let k = cohen_kappa(a, b).map_err(Failure::input)?;
        put(out, k, "out")
    })
}
