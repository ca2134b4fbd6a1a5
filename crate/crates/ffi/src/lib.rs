//! C ABI over `wic-core`.
//!
//! A checkpoint is loaded into an opaque [`WicModel`] handle. Every function
//! returns a [`WicStatus`]; on failure a description is available from
//! [`wic_last_error_message`] on the same thread. Handles are immutable after
//! loading and may be shared between threads.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wic::corpus::{sentence_to_ids, Vocabulary};
use wic::train::{load_checkpoint, LabelSpace};
use wic::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WicStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    /// Not a checkpoint, or an unsupported version.
    Format = 4,
    /// Truncated or damaged checkpoint.
    Corrupt = 5,
    InvalidArgument = 6,
    /// The output buffer is too short; the required length was written.
    BufferTooSmall = 7,
    /// A Rust panic was caught at the boundary.
    Panic = 8,
}

/// Loaded checkpoint.
pub struct WicModel {
    model: wic::model::Model,
    source_vocab: Vocabulary,
    labels: LabelSpace,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: impl AsRef<str>) {
    LAST_ERROR.with(|e| {
        let mut buf = e.borrow_mut();
        buf.clear();
        buf.extend(msg.as_ref().bytes().filter(|&b| b != 0));
        buf.push(0);
    });
}

fn fail(status: WicStatus, msg: impl AsRef<str>) -> WicStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> WicStatus) -> WicStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(WicStatus::Panic, format!("internal error: {msg}"))
        }
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, WicStatus> {
    if p.is_null() {
        return Err(fail(WicStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(WicStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn model_ref<'a>(model: *const WicModel) -> Result<&'a WicModel, WicStatus> {
    model.as_ref().ok_or_else(|| fail(WicStatus::NullPointer, "model handle is null"))
}

fn tokens_and_position(sentence: &str, position: usize) -> Result<Vec<String>, WicStatus> {
    let tokens = wic::corpus::tokenize(sentence);
    if position >= tokens.len() {
        return Err(fail(
            WicStatus::InvalidArgument,
            format!("position {position} outside sentence of {} tokens", tokens.len()),
        ));
    }
    Ok(tokens)
}

fn error_status(e: &Error) -> WicStatus {
    match e {
        Error::Format(_) => WicStatus::Format,
        Error::Corrupt(_) => WicStatus::Corrupt,
        Error::File { .. } | Error::Io(_) => WicStatus::Io,
        _ => WicStatus::InvalidArgument,
    }
}

/// Copies `values` into `out` (capacity `out_len`); always stores the
/// required length in `*written` when it is not null.
unsafe fn copy_out(values: &[f64], out: *mut f64, out_len: usize, written: *mut usize) -> WicStatus {
    if !written.is_null() {
        *written = values.len();
    }
    if out_len < values.len() {
        return fail(
            WicStatus::BufferTooSmall,
            format!("buffer holds {out_len} values, {} needed", values.len()),
        );
    }
    if out.is_null() {
        return fail(WicStatus::NullPointer, "output buffer is null");
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    WicStatus::Ok
}

/// Loads a checkpoint file. On success `*out` owns a handle that must be
/// released with [`wic_model_free`].
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wic_model_load(path: *const c_char, out: *mut *mut WicModel) -> WicStatus {
    guard(|| {
        if out.is_null() {
            return fail(WicStatus::NullPointer, "output handle pointer is null");
        }
        *out = ptr::null_mut();
        let path = match c_str(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match load_checkpoint(path) {
            Ok(ck) => {
                let handle = WicModel { model: ck.model, source_vocab: ck.meta.source_vocab, labels: ck.meta.labels };
                *out = Box::into_raw(Box::new(handle));
                WicStatus::Ok
            }
            Err(e) => fail(error_status(&e), e.to_string()),
        }
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `model` must come from [`wic_model_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wic_model_free(model: *mut WicModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Width of the context vectors.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn wic_model_context_dim(model: *const WicModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.encoder.output_dim())
}

/// Number of labels of the output head.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn wic_model_num_labels(model: *const WicModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.num_labels())
}

/// Context vector of the token at `position` of a whitespace-tokenized
/// sentence.
///
/// # Safety
/// `sentence` must be NUL-terminated; `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wic_model_encode(
    model: *const WicModel,
    sentence: *const c_char,
    position: usize,
    out: *mut f64,
    out_len: usize,
    written: *mut usize,
) -> WicStatus {
    guard(|| {
        let run = || -> Result<WicStatus, WicStatus> {
            let m = model_ref(model)?;
            let tokens = tokens_and_position(c_str(sentence, "sentence")?, position)?;
            let ids = sentence_to_ids(&tokens, &m.source_vocab);
            Ok(copy_out(&m.model.context_at(&ids, position), out, out_len, written))
        };
        run().unwrap_or_else(|s| s)
    })
}

/// Output-head distribution for the token at `position`.
///
/// # Safety
/// As for [`wic_model_encode`].
#[no_mangle]
pub unsafe extern "C" fn wic_model_label_distribution(
    model: *const WicModel,
    sentence: *const c_char,
    position: usize,
    out: *mut f64,
    out_len: usize,
    written: *mut usize,
) -> WicStatus {
    guard(|| {
        let run = || -> Result<WicStatus, WicStatus> {
            let m = model_ref(model)?;
            let tokens = tokens_and_position(c_str(sentence, "sentence")?, position)?;
            let ids = sentence_to_ids(&tokens, &m.source_vocab);
            Ok(copy_out(&m.model.distribution(&ids, position), out, out_len, written))
        };
        run().unwrap_or_else(|s| s)
    })
}

/// Probability of translating the token at `position` as `target_word`.
/// `*target_oov` is set to 1 when the word is out of vocabulary, in which
/// case the unknown token's probability is returned.
///
/// # Safety
/// String arguments must be NUL-terminated; `prob` must be valid;
/// `target_oov` may be null.
#[no_mangle]
pub unsafe extern "C" fn wic_model_translation_prob(
    model: *const WicModel,
    sentence: *const c_char,
    position: usize,
    target_word: *const c_char,
    prob: *mut f64,
    target_oov: *mut i32,
) -> WicStatus {
    guard(|| {
        let run = || -> Result<WicStatus, WicStatus> {
            let m = model_ref(model)?;
            let LabelSpace::Translation(tgt) = &m.labels else {
                return Err(fail(WicStatus::InvalidArgument, "checkpoint has no lexical translation head"));
            };
            if prob.is_null() {
                return Err(fail(WicStatus::NullPointer, "prob is null"));
            }
            let tokens = tokens_and_position(c_str(sentence, "sentence")?, position)?;
            let word = c_str(target_word, "target_word")?;
            let ids = sentence_to_ids(&tokens, &m.source_vocab);
            let label = tgt.get(word);
            let dist = m.model.distribution(&ids, position);
            *prob = dist[label.unwrap_or(tgt.unk_id()) as usize];
            if !target_oov.is_null() {
                *target_oov = i32::from(label.is_none());
            }
            Ok(WicStatus::Ok)
        };
        run().unwrap_or_else(|s| s)
    })
}

/// Message for the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn wic_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| {
        let mut buf = e.borrow_mut();
        if buf.is_empty() {
            buf.push(0);
        }
        buf.as_ptr() as *const c_char
    })
}

/// Library version, NUL-terminated and static.
#[no_mangle]
pub extern "C" fn wic_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
