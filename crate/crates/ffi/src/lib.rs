//! C ABI over the wbp-active decoder.
//!
//! Objects are opaque handles created by `wbp_*_new`/`_load`-style calls and
//! released with the matching `_free`. Every fallible call returns a
//! [`WbpStatus`]; on failure a message is available from [`wbp_last_error`]
//! on the same thread until the next failing call. Panics never cross the
//! boundary; they surface as `WBP_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use wbp_active::codes::{fixtures, parse_alist, CodeSpec};
use wbp_active::decoder::{wbp_forward, Decoder, TannerGraph, WeightSet};
use wbp_active::eval::{monte_carlo_errors, Budget, StopReason};
use wbp_active::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WbpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    Dimension = 5,
    Runtime = 6,
    Panic = 7,
}

/// A parity-check code with its Tanner graph.
pub struct WbpCode {
    spec: CodeSpec,
    graph: TannerGraph,
}

/// Decoder weights for one code and layer count.
pub struct WbpWeights {
    weights: WeightSet,
}

/// Monte Carlo result at one SNR point.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct WbpErrorStats {
    pub snr_db: f64,
    pub blocks: u64,
    pub block_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub ber: f64,
    /// Nonzero when the block-error target was reached before the block budget.
    pub converged: u8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> WbpStatus {
    match err {
        Error::Alist(_) | Error::Format { .. } | Error::Config { .. } => WbpStatus::Parse,
        Error::Io { .. } => WbpStatus::Io,
        Error::Dimension { .. } => WbpStatus::Dimension,
        Error::NoConvergence(_) | Error::DegenerateTilt => WbpStatus::Runtime,
        _ => WbpStatus::InvalidArgument,
    }
}

struct Fail(WbpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(WbpStatus::NullPointer, format!("{what} is NULL"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> WbpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WbpStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            WbpStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(WbpStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn make_code(text: &str) -> Result<Box<WbpCode>, Fail> {
    let pcm = parse_alist(text)?;
    let graph = TannerGraph::new(&pcm);
    Ok(Box::new(WbpCode { spec: CodeSpec::new(pcm, None)?, graph }))
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wbp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wbp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses alist text into a new code handle.
///
/// # Safety
/// `alist` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wbp_code_from_alist(alist: *const c_char, out: *mut *mut WbpCode) -> WbpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(make_code(str_arg(alist, "alist")?)?);
        Ok(())
    })
}

/// Opens a built-in code by name (`hamming_7_4`, `bch_15_7`, ...).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wbp_code_fixture(name: *const c_char, out: *mut *mut WbpCode) -> WbpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let name = str_arg(name, "name")?;
        let text = fixtures::by_name(name)
            .ok_or_else(|| Fail(WbpStatus::InvalidArgument, format!("unknown code `{name}`")))?;
        *out = Box::into_raw(make_code(text)?);
        Ok(())
    })
}

/// # Safety
/// `code` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn wbp_code_free(code: *mut WbpCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Block length `n`, number of checks `m`, dimension `k`, and edge count.
/// Any output pointer may be NULL.
///
/// # Safety
/// `code` must be a live handle; non-NULL outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn wbp_code_dims(
    code: *const WbpCode,
    n: *mut usize,
    m: *mut usize,
    k: *mut usize,
    edges: *mut usize,
) -> WbpStatus {
    guard(|| {
        let code = ref_arg(code, "code")?;
        for (p, v) in
            [(n, code.spec.n()), (m, code.graph.n_checks()), (k, code.spec.k), (edges, code.graph.n_edges())]
        {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// All-ones weights (plain BP) with `layers` iterations.
///
/// # Safety
/// `code` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wbp_weights_unit(
    code: *const WbpCode,
    layers: usize,
    out: *mut *mut WbpWeights,
) -> WbpStatus {
    guard(|| {
        let code = ref_arg(code, "code")?;
        let out = out_arg(out, "out")?;
        if layers == 0 {
            return Err(Fail(WbpStatus::InvalidArgument, "layers must be at least 1".into()));
        }
        *out = Box::into_raw(Box::new(WbpWeights { weights: WeightSet::unit(&code.graph, layers) }));
        Ok(())
    })
}

/// Reads a weight file written by the `train` command.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wbp_weights_load(path: *const c_char, out: *mut *mut WbpWeights) -> WbpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let weights = WeightSet::load(&PathBuf::from(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(WbpWeights { weights }));
        Ok(())
    })
}

/// # Safety
/// `weights` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn wbp_weights_save(weights: *const WbpWeights, path: *const c_char) -> WbpStatus {
    guard(|| {
        let w = ref_arg(weights, "weights")?;
        w.weights.save(&PathBuf::from(str_arg(path, "path")?))?;
        Ok(())
    })
}

/// Decoder iterations the weights were built for, or 0 for NULL.
///
/// # Safety
/// `weights` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wbp_weights_layers(weights: *const WbpWeights) -> usize {
    weights.as_ref().map_or(0, |w| w.weights.layers())
}

/// # Safety
/// `weights` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn wbp_weights_free(weights: *mut WbpWeights) {
    if !weights.is_null() {
        drop(Box::from_raw(weights));
    }
}

/// Decodes one block of `n` channel LLRs. `soft_out` receives the final-layer
/// estimates of P(bit = 1) and `hard_out` the 0/1 decisions; either may be NULL.
///
/// # Safety
/// `llr` must point to `n` doubles; non-NULL outputs must have room for `n` values.
#[no_mangle]
pub unsafe extern "C" fn wbp_decode(
    code: *const WbpCode,
    weights: *const WbpWeights,
    llr: *const f64,
    n: usize,
    clip: f64,
    soft_out: *mut f64,
    hard_out: *mut u8,
) -> WbpStatus {
    guard(|| {
        let code = ref_arg(code, "code")?;
        let w = ref_arg(weights, "weights")?;
        if llr.is_null() {
            return Err(null("llr"));
        }
        if n != code.spec.n() {
            return Err(Error::Dimension { what: "LLR length", expected: code.spec.n(), got: n }.into());
        }
        Decoder::new(&code.graph, &w.weights, clip)?;
        let lambda = std::slice::from_raw_parts(llr, n);
        let trace = wbp_forward(&code.graph, &w.weights, lambda, clip)?;
        let soft = trace.final_output();
        if !soft_out.is_null() {
            std::slice::from_raw_parts_mut(soft_out, n).copy_from_slice(soft);
        }
        if !hard_out.is_null() {
            let hard = std::slice::from_raw_parts_mut(hard_out, n);
            for (h, &x) in hard.iter_mut().zip(soft) {
                *h = u8::from(x > 0.5);
            }
        }
        Ok(())
    })
}

/// Noise standard deviation for Eb/N0 `snr_db` at code rate `rate`.
///
/// # Safety
/// `sigma` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wbp_snr_to_sigma(snr_db: f64, rate: f64, sigma: *mut f64) -> WbpStatus {
    guard(|| {
        let out = out_arg(sigma, "sigma")?;
        *out = wbp_active::channel::snr_to_sigma(snr_db, rate)?;
        Ok(())
    })
}

/// All-zero-codeword Monte Carlo at one SNR, stopping at `min_block_errors`
/// or `max_blocks`. Results depend only on the arguments, not on thread count.
///
/// # Safety
/// `code` and `weights` must be live handles and `stats` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wbp_eval(
    code: *const WbpCode,
    weights: *const WbpWeights,
    clip: f64,
    snr_db: f64,
    min_block_errors: u64,
    max_blocks: u64,
    seed: u64,
    stats: *mut WbpErrorStats,
) -> WbpStatus {
    guard(|| {
        let code = ref_arg(code, "code")?;
        let w = ref_arg(weights, "weights")?;
        let out = out_arg(stats, "stats")?;
        let dec = Decoder::new(&code.graph, &w.weights, clip)?;
        let budget = Budget { min_block_errors, max_blocks };
        let s = monte_carlo_errors(&dec, code.spec.rate(), snr_db, budget, seed)?;
        *out = WbpErrorStats {
            snr_db: s.snr_db,
            blocks: s.blocks,
            block_errors: s.block_errors,
            bit_errors: s.bit_errors,
            fer: s.fer(),
            ber: s.ber(),
            converged: u8::from(s.stop == StopReason::Converged),
        };
        Ok(())
    })
}
