//! C interface to the brtpf crate.
//!
//! Objects cross the boundary as opaque pointers created by `*_new`/`*_load`
//! style functions and released with the matching `*_free`/`*_stop`.
//! Every fallible function returns a [`BrtpfStatus`]; on failure a message
//! is available from [`brtpf_last_error`] on the same thread.
//! Strings returned by the library are owned by the caller and must be
//! released with [`brtpf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;
use std::time::Duration;

use brtpf::client::{parse_queries, ClientError, Engine, ExecOptions, HttpEndpoint};
use brtpf::rdf::SolutionMapping;
use brtpf::server::{serve_dataset, HttpHandle, ServerConfig};
use brtpf::store::Dataset;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BrtpfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Io = 4,
    Transport = 5,
    Rejected = 6,
    Timeout = 7,
    InvalidArgument = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BrtpfEngine {
    Tpf = 0,
    Brtpf = 1,
}

/// Counters of one query execution.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BrtpfMetrics {
    pub num_requests: u64,
    pub data_recv: u64,
    pub wall_time_ms: f64,
    pub result_count: u64,
    pub timed_out: bool,
}

/// An immutable, loaded dataset.
pub struct BrtpfDataset(Arc<Dataset>);

/// A running fragment server.
pub struct BrtpfServer(HttpHandle);

/// Solutions and metrics of an executed query.
pub struct BrtpfResult {
    solutions: Vec<String>,
    metrics: BrtpfMetrics,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

type FfiResult<T> = Result<T, (BrtpfStatus, String)>;

/// Runs `f`, converting errors and panics to a status code.
fn guard(f: impl FnOnce() -> FfiResult<()>) -> BrtpfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BrtpfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BrtpfStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err((BrtpfStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (BrtpfStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

fn out_arg<T>(p: *mut *mut T) -> FfiResult<()> {
    if p.is_null() {
        Err((BrtpfStatus::NullArgument, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

fn to_c_string(s: &str) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior NUL").into_raw()
}

fn client_status(e: &ClientError) -> BrtpfStatus {
    match e {
        ClientError::Transport(_) => BrtpfStatus::Transport,
        ClientError::Rejected { .. } => BrtpfStatus::Rejected,
        ClientError::Protocol(_) => BrtpfStatus::Parse,
        ClientError::Timeout => BrtpfStatus::Timeout,
        ClientError::Config(_) => BrtpfStatus::InvalidArgument,
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn brtpf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn brtpf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads an N-Triples file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brtpf_dataset_load(path: *const c_char, out: *mut *mut BrtpfDataset) -> BrtpfStatus {
    guard(|| {
        out_arg(out)?;
        let path = str_arg(path, "path")?;
        let ds = Dataset::load_file(path).map_err(|e| {
            let status = if matches!(e, brtpf::store::LoadError::Io(_)) { BrtpfStatus::Io } else { BrtpfStatus::Parse };
            (status, e.to_string())
        })?;
        *out = Box::into_raw(Box::new(BrtpfDataset(Arc::new(ds))));
        Ok(())
    })
}

/// Parses N-Triples text held in memory.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brtpf_dataset_parse(text: *const c_char, out: *mut *mut BrtpfDataset) -> BrtpfStatus {
    guard(|| {
        out_arg(out)?;
        let text = str_arg(text, "text")?;
        let ds = Dataset::load(text.as_bytes()).map_err(|e| (BrtpfStatus::Parse, e.to_string()))?;
        *out = Box::into_raw(Box::new(BrtpfDataset(Arc::new(ds))));
        Ok(())
    })
}

/// Number of triples, or 0 for null.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn brtpf_dataset_len(ds: *const BrtpfDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `ds` must be null or a dataset handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn brtpf_dataset_free(ds: *mut BrtpfDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Starts serving `ds` on 127.0.0.1. Port 0 picks a free port. The server
/// keeps its own reference to the dataset.
///
/// # Safety
/// `ds` must be a live dataset handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brtpf_server_start(
    ds: *const BrtpfDataset,
    page_size: usize,
    max_mpr: usize,
    port: u16,
    out: *mut *mut BrtpfServer,
) -> BrtpfStatus {
    guard(|| {
        out_arg(out)?;
        let ds = ds.as_ref().ok_or((BrtpfStatus::NullArgument, "dataset is null".to_owned()))?;
        let config = ServerConfig { page_size, max_mpr, port, ..ServerConfig::default() };
        let handle = serve_dataset(ds.0.clone(), &config).map_err(|e| {
            let status =
                if matches!(e, brtpf::server::ServerError::Invalid(_)) { BrtpfStatus::InvalidArgument } else { BrtpfStatus::Io };
            (status, e.to_string())
        })?;
        *out = Box::into_raw(Box::new(BrtpfServer(handle)));
        Ok(())
    })
}

/// Base URL of a running server, e.g. `http://127.0.0.1:8080`; free with
/// [`brtpf_string_free`]. Null for a null handle.
///
/// # Safety
/// `server` must be null or a live server handle.
#[no_mangle]
pub unsafe extern "C" fn brtpf_server_url(server: *const BrtpfServer) -> *mut c_char {
    server.as_ref().map_or(ptr::null_mut(), |s| to_c_string(&s.0.url()))
}

/// Stops the server and releases the handle.
///
/// # Safety
/// `server` must be null or a server handle not stopped before.
#[no_mangle]
pub unsafe extern "C" fn brtpf_server_stop(server: *mut BrtpfServer) -> BrtpfStatus {
    if server.is_null() {
        return BrtpfStatus::Ok;
    }
    let server = Box::from_raw(server);
    guard(move || server.0.shutdown().map_err(|e| (BrtpfStatus::Io, e.to_string())))
}

fn format_solution(mu: &SolutionMapping) -> String {
    mu.iter().map(|(v, t)| format!("{v}={t}")).collect::<Vec<_>>().join(" ")
}

/// Evaluates the first query in `query_text` (query file syntax) against
/// the server at `endpoint`. `max_mpr` is ignored for TPF; `timeout_ms` 0
/// means no timeout. On timeout the status is `Timeout` and no result is
/// produced.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brtpf_query_execute(
    endpoint: *const c_char,
    query_text: *const c_char,
    engine: BrtpfEngine,
    max_mpr: usize,
    timeout_ms: u64,
    out: *mut *mut BrtpfResult,
) -> BrtpfStatus {
    guard(|| {
        out_arg(out)?;
        let endpoint = str_arg(endpoint, "endpoint")?;
        let text = str_arg(query_text, "query")?;
        let query = parse_queries(text)
            .map_err(|e| (BrtpfStatus::Parse, e.to_string()))?
            .into_iter()
            .next()
            .ok_or((BrtpfStatus::Parse, "no query given".to_owned()))?;
        let engine = match engine {
            BrtpfEngine::Tpf => Engine::Tpf,
            BrtpfEngine::Brtpf => Engine::Brtpf { max_mpr },
        };
        let http = HttpEndpoint::new(endpoint).map_err(|e| (client_status(&e), e.to_string()))?;
        let mut options = ExecOptions::default();
        if timeout_ms > 0 {
            options = options.with_timeout(Duration::from_millis(timeout_ms));
        }
        let exec = engine.execute(&query, &http, &options).map_err(|f| (client_status(&f.error), f.error.to_string()))?;
        let mut solutions: Vec<SolutionMapping> = exec.solutions;
        solutions.sort();
        let m = &exec.metrics;
        let result = BrtpfResult {
            solutions: solutions.iter().map(format_solution).collect(),
            metrics: BrtpfMetrics {
                num_requests: m.num_requests,
                data_recv: m.data_recv,
                wall_time_ms: m.wall_time_ms(),
                result_count: m.result_count,
                timed_out: m.timed_out,
            },
        };
        *out = Box::into_raw(Box::new(result));
        Ok(())
    })
}

/// Number of solutions, or 0 for null.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn brtpf_result_len(result: *const BrtpfResult) -> usize {
    result.as_ref().map_or(0, |r| r.solutions.len())
}

/// Solution `index` as `?x=<term> ?y=<term>` with variables in order; free
/// with [`brtpf_string_free`]. Null when out of range.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn brtpf_result_solution(result: *const BrtpfResult, index: usize) -> *mut c_char {
    match result.as_ref().and_then(|r| r.solutions.get(index)) {
        Some(s) => to_c_string(s),
        None => ptr::null_mut(),
    }
}

/// Copies the execution metrics into `out`.
///
/// # Safety
/// `result` must be a live result handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brtpf_result_metrics(result: *const BrtpfResult, out: *mut BrtpfMetrics) -> BrtpfStatus {
    guard(|| {
        let r = result.as_ref().ok_or((BrtpfStatus::NullArgument, "result is null".to_owned()))?;
        let out = out.as_mut().ok_or((BrtpfStatus::NullArgument, "output pointer is null".to_owned()))?;
        *out = r.metrics;
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a result handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn brtpf_result_free(result: *mut BrtpfResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
