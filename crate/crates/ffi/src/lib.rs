//! C ABI for the disambiguation toolkit.
//!
//! Handles are opaque pointers owned by this library; every `*_free`
//! function accepts NULL. Functions returning `char**` allocate the string
//! with this library's allocator, and the caller must release it with
//! [`nd_string_free`]. Error details for the most recent failing call on
//! the current thread are available via [`nd_last_error_message`].
//!
//! The matching header is maintained by hand at `include/namedis.h`.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use namedis::corpus::{self, PaperId, PaperStore};
use namedis::embed::{self, EmbeddingTable};
use namedis::error::{Error, ErrorClass};
use namedis::eval;
use namedis::snd::{self, SndPipelineConfig};
use namedis::textnorm::{normalize_name, Stoplist};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NdStatus {
    Ok = 0,
    Usage = 1,
    Data = 2,
    Internal = 3,
    NullArgument = 4,
    InvalidUtf8 = 5,
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', "?"))
        .unwrap_or_else(|_| CString::new("error message unavailable").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> NdStatus {
    match err.class() {
        ErrorClass::Usage => NdStatus::Usage,
        ErrorClass::Data => NdStatus::Data,
        ErrorClass::Internal => NdStatus::Internal,
    }
}

fn fail(err: Error) -> NdStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// # Safety
/// `ptr` must be NULL or a valid NUL-terminated string.
unsafe fn utf8_arg<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, NdStatus> {
    if ptr.is_null() {
        set_error(format!("{what} is NULL"));
        return Err(NdStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        NdStatus::InvalidUtf8
    })
}

fn out_string(ptr: *mut *mut c_char, value: String) -> NdStatus {
    if ptr.is_null() {
        set_error("output pointer is NULL".into());
        return NdStatus::NullArgument;
    }
    let c = match CString::new(value) {
        Ok(c) => c,
        Err(_) => {
            set_error("output contains an interior NUL byte".into());
            return NdStatus::Internal;
        }
    };
    unsafe { *ptr = c.into_raw() };
    NdStatus::Ok
}

fn guarded<F: FnOnce() -> NdStatus>(f: F) -> NdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic".into());
            NdStatus::Panic
        }
    }
}

/// Opaque paper store handle.
pub struct NdStore {
    store: PaperStore,
}

/// Opaque embedding table handle.
pub struct NdTable {
    table: EmbeddingTable,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the most recent error on this thread, or NULL. The returned
/// string is owned by the library and valid until the next failing call.
#[no_mangle]
pub extern "C" fn nd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |c| c.as_ptr())
    })
}

/// Releases a string returned through a `char**` output parameter.
///
/// # Safety
/// `s` must be NULL or a pointer previously returned by this library and
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a paper-id → record JSON file into a new store handle.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn nd_store_load(path: *const c_char, out: *mut *mut NdStore) -> NdStatus {
    guarded(|| {
        let path = match utf8_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        if out.is_null() {
            set_error("output pointer is NULL".into());
            return NdStatus::NullArgument;
        }
        match corpus::load_papers(Path::new(path)) {
            Ok(store) => {
                *out = Box::into_raw(Box::new(NdStore { store }));
                NdStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of papers in a store; 0 for NULL.
///
/// # Safety
/// `store` must be NULL or an unfreed pointer from [`nd_store_load`].
#[no_mangle]
pub unsafe extern "C" fn nd_store_len(store: *const NdStore) -> usize {
    if store.is_null() {
        return 0;
    }
    (*store).store.len()
}

/// # Safety
/// `store` must be NULL or an unfreed pointer from [`nd_store_load`].
#[no_mangle]
pub unsafe extern "C" fn nd_store_free(store: *mut NdStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

/// Loads a text-format embedding table into a new handle.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nd_table_load(path: *const c_char, out: *mut *mut NdTable) -> NdStatus {
    guarded(|| {
        let path = match utf8_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        if out.is_null() {
            set_error("output pointer is NULL".into());
            return NdStatus::NullArgument;
        }
        match EmbeddingTable::load(Path::new(path)) {
            Ok(table) => {
                *out = Box::into_raw(Box::new(NdTable { table }));
                NdStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Trains a skip-gram table over every paper of the store.
///
/// `config_json` may be NULL for defaults; otherwise it is a JSON object
/// with any of: dim, window, negative, min_count, epochs, learning_rate,
/// seed.
///
/// # Safety
/// Pointer arguments must be valid (or NULL where documented).
#[no_mangle]
pub unsafe extern "C" fn nd_table_train(
    store: *const NdStore,
    config_json: *const c_char,
    out: *mut *mut NdTable,
) -> NdStatus {
    guarded(|| {
        if store.is_null() {
            set_error("store is NULL".into());
            return NdStatus::NullArgument;
        }
        if out.is_null() {
            set_error("output pointer is NULL".into());
            return NdStatus::NullArgument;
        }
        let config = if config_json.is_null() {
            embed::EmbedConfig::default()
        } else {
            let text = match utf8_arg(config_json, "config_json") {
                Ok(t) => t,
                Err(s) => return s,
            };
            match serde_json::from_str(text) {
                Ok(c) => c,
                Err(e) => {
                    set_error(format!("invalid embedding config: {e}"));
                    return NdStatus::Usage;
                }
            }
        };
        let store = &(*store).store;
        let stoplist = Stoplist::default();
        let sequences = embed::train_sequences(store.iter().map(|(_, p)| p), &stoplist);
        match embed::train_skipgram(&sequences, &config) {
            Ok(table) => {
                *out = Box::into_raw(Box::new(NdTable { table }));
                NdStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `table` must be NULL or an unfreed pointer from a table constructor.
#[no_mangle]
pub unsafe extern "C" fn nd_table_free(table: *mut NdTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Clusters name blocks from scratch.
///
/// `blocks_json` maps each name to a flat list of paper ids;
/// `config_json` may be NULL or a pipeline-config JSON object. On success
/// `out_json` receives a JSON object mapping each name to its list of
/// clusters (lists of paper ids).
///
/// # Safety
/// Pointer arguments must be valid (or NULL where documented).
#[no_mangle]
pub unsafe extern "C" fn nd_snd_run(
    store: *const NdStore,
    table: *const NdTable,
    blocks_json: *const c_char,
    config_json: *const c_char,
    out_json: *mut *mut c_char,
) -> NdStatus {
    guarded(|| {
        if store.is_null() || table.is_null() {
            set_error("store or table is NULL".into());
            return NdStatus::NullArgument;
        }
        let blocks_text = match utf8_arg(blocks_json, "blocks_json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let blocks: BTreeMap<String, Vec<PaperId>> = match serde_json::from_str(blocks_text) {
            Ok(b) => b,
            Err(e) => {
                set_error(format!("invalid blocks JSON: {e}"));
                return NdStatus::Data;
            }
        };
        let config: SndPipelineConfig = if config_json.is_null() {
            SndPipelineConfig::default()
        } else {
            let text = match utf8_arg(config_json, "config_json") {
                Ok(t) => t,
                Err(s) => return s,
            };
            match serde_json::from_str(text) {
                Ok(c) => c,
                Err(e) => {
                    set_error(format!("invalid pipeline config: {e}"));
                    return NdStatus::Usage;
                }
            }
        };
        let store = &(*store).store;
        let table = &(*table).table;
        let stoplist = Stoplist::default();
        let mut result: BTreeMap<String, Vec<Vec<PaperId>>> = BTreeMap::new();
        for (raw_name, ids) in &blocks {
            let name = match normalize_name(raw_name) {
                Ok(n) => n,
                Err(e) => return fail(e),
            };
            match snd::snd_pipeline(&name, ids, store, table, &config, &stoplist) {
                Ok(clustering) => {
                    result.insert(name.to_string(), clustering.to_clusters());
                }
                Err(e) => return fail(e),
            }
        }
        let json = serde_json::to_string(&result).expect("clusters serialize");
        out_string(out_json, json)
    })
}

/// Pairwise precision/recall/F1 of a predicted clustering against truth,
/// both given as JSON lists of clusters (lists of paper ids).
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn nd_eval_pairwise(
    pred_json: *const c_char,
    truth_json: *const c_char,
    precision: *mut f64,
    recall: *mut f64,
    f1: *mut f64,
) -> NdStatus {
    guarded(|| {
        let pred_text = match utf8_arg(pred_json, "pred_json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let truth_text = match utf8_arg(truth_json, "truth_json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let parse = |text: &str, what: &str| -> Result<Vec<Vec<PaperId>>, NdStatus> {
            serde_json::from_str(text).map_err(|e| {
                set_error(format!("invalid {what} JSON: {e}"));
                NdStatus::Data
            })
        };
        let pred = match parse(pred_text, "prediction") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let truth = match parse(truth_text, "truth") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match eval::pairwise_prf(&pred, &truth) {
            Ok(prf) => {
                if precision.is_null() || recall.is_null() || f1.is_null() {
                    set_error("output pointer is NULL".into());
                    return NdStatus::NullArgument;
                }
                *precision = prf.precision;
                *recall = prf.recall;
                *f1 = prf.f1;
                NdStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn cstr(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    #[test]
    fn version_is_non_empty() {
        let v = unsafe { CStr::from_ptr(nd_version()) };
        assert!(!v.to_str().unwrap().is_empty());
    }

    #[test]
    fn store_round_trip_and_errors() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(
            f,
            r#"{{"p1": {{"id": "p1", "title": "alpha beta", "authors": [{{"name": "Wei Chen"}}], "year": 2001}}}}"#
        )
        .unwrap();
        let path = cstr(f.path().to_str().unwrap());
        let mut store: *mut NdStore = std::ptr::null_mut();
        let status = unsafe { nd_store_load(path.as_ptr(), &mut store) };
        assert_eq!(status, NdStatus::Ok);
        assert_eq!(unsafe { nd_store_len(store) }, 1);
        unsafe { nd_store_free(store) };

        let missing = cstr("/definitely/not/here.json");
        let mut out: *mut NdStore = std::ptr::null_mut();
        let status = unsafe { nd_store_load(missing.as_ptr(), &mut out) };
        assert_eq!(status, NdStatus::Data);
        let msg = unsafe { CStr::from_ptr(nd_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("not/here.json"));

        let status = unsafe { nd_store_load(std::ptr::null(), &mut out) };
        assert_eq!(status, NdStatus::NullArgument);
    }

    fn synth_store_file() -> tempfile::NamedTempFile {
        let data = namedis::synth::generate(&namedis::synth::SynthConfig {
            seed: 9,
            ..namedis::synth::SynthConfig::default()
        })
        .unwrap();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        let json = serde_json::to_string(&data.store).unwrap();
        f.write_all(json.as_bytes()).unwrap();
        f
    }

    #[test]
    fn train_and_cluster_through_the_abi() {
        let store_file = synth_store_file();
        let path = cstr(store_file.path().to_str().unwrap());
        let mut store: *mut NdStore = std::ptr::null_mut();
        assert_eq!(unsafe { nd_store_load(path.as_ptr(), &mut store) }, NdStatus::Ok);

        let config = cstr(r#"{"epochs": 25, "seed": 9}"#);
        let mut table: *mut NdTable = std::ptr::null_mut();
        assert_eq!(
            unsafe { nd_table_train(store, config.as_ptr(), &mut table) },
            NdStatus::Ok
        );

        // All papers of the generated block under its name.
        let data = namedis::synth::generate(&namedis::synth::SynthConfig {
            seed: 9,
            ..namedis::synth::SynthConfig::default()
        })
        .unwrap();
        let flat = data.blocks.flatten();
        let blocks_json = serde_json::to_string(
            &flat
                .iter()
                .map(|(n, ids)| (n.to_string(), ids.clone()))
                .collect::<BTreeMap<String, Vec<String>>>(),
        )
        .unwrap();
        let blocks = cstr(&blocks_json);
        let mut out: *mut c_char = std::ptr::null_mut();
        let status = unsafe {
            nd_snd_run(store, table, blocks.as_ptr(), std::ptr::null(), &mut out)
        };
        assert_eq!(status, NdStatus::Ok);
        let clusters_text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
        unsafe { nd_string_free(out) };
        let clusters: BTreeMap<String, Vec<Vec<String>>> =
            serde_json::from_str(&clusters_text).unwrap();
        assert_eq!(clusters.len(), 1);
        let pred = clusters.values().next().unwrap();
        assert_eq!(pred.len(), 4, "four authors should give four clusters");

        // Score the prediction against truth through the ABI as well.
        let truth: Vec<Vec<String>> = data
            .blocks
            .iter()
            .flat_map(|(_, authors)| authors.values().cloned())
            .collect();
        let pred_json = cstr(&serde_json::to_string(pred).unwrap());
        let truth_json = cstr(&serde_json::to_string(&truth).unwrap());
        let (mut p, mut r, mut f1) = (0.0f64, 0.0f64, 0.0f64);
        let status = unsafe {
            nd_eval_pairwise(pred_json.as_ptr(), truth_json.as_ptr(), &mut p, &mut r, &mut f1)
        };
        assert_eq!(status, NdStatus::Ok);
        assert_eq!((p, r, f1), (1.0, 1.0, 1.0));

        unsafe {
            nd_table_free(table);
            nd_store_free(store);
        }
    }

    #[test]
    fn bad_config_is_a_usage_error() {
        let store_file = synth_store_file();
        let path = cstr(store_file.path().to_str().unwrap());
        let mut store: *mut NdStore = std::ptr::null_mut();
        assert_eq!(unsafe { nd_store_load(path.as_ptr(), &mut store) }, NdStatus::Ok);
        let bad = cstr("{\"epochs\": \"many\"}");
        let mut table: *mut NdTable = std::ptr::null_mut();
        assert_eq!(
            unsafe { nd_table_train(store, bad.as_ptr(), &mut table) },
            NdStatus::Usage
        );
        unsafe { nd_store_free(store) };
    }

    #[test]
    fn string_free_accepts_null() {
        unsafe { nd_string_free(std::ptr::null_mut()) };
    }
}
