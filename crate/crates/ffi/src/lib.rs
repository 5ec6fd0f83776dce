//! C ABI over the `ans-rdh` codec.
//!
//! Every fallible call returns an [`ArdhStatus`]; on failure
//! [`ardh_last_error_message`] describes what went wrong on the calling
//! thread. Results come back as opaque handles that the caller releases with
//! the matching `_free` function. Buffers borrowed from a handle stay valid
//! until that handle is freed.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ans_rdh::{BfiConfig, CodecParams, Error, GrayImage, Host, Mode, Sidecar};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArdhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidParams = 3,
    BitIo = 4,
    ZeroFrequency = 5,
    InvalidTable = 6,
    Infeasible = 7,
    InvalidDistribution = 8,
    Desync = 9,
    DimensionMismatch = 10,
    Format = 11,
    Io = 12,
    Panic = 13,
}

pub const ARDH_MODE_STATIC: u32 = 0;
pub const ARDH_MODE_DYNAMIC: u32 = 1;

/// Embedding knobs. Start from [`ardh_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArdhOptions {
    /// Tradeoff, `>= 1`; `INFINITY` embeds nothing.
    pub alpha: f64,
    /// Optimizer tolerance.
    pub epsilon: f64,
    /// State exponent `T`.
    pub state_bits: u32,
    /// Slot width `n`.
    pub slot_bits: u32,
    /// Renormalization multiplier `v`.
    pub renorm_mult: u32,
}

/// Stego symbols and the serialized sidecar.
pub struct ArdhEmbedding {
    stego: Vec<u8>,
    sidecar: Vec<u8>,
    net_bits: i64,
    message_bits: u64,
}

/// Recovered host symbols and message.
pub struct ArdhRecovered {
    host: Vec<u8>,
    message: Vec<u8>,
    message_bits: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Failure(ArdhStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::BitIo(_) => ArdhStatus::BitIo,
            Error::InvalidParams(_) => ArdhStatus::InvalidParams,
            Error::ZeroFrequency { .. } => ArdhStatus::ZeroFrequency,
            Error::InvalidTable(_) => ArdhStatus::InvalidTable,
            Error::Infeasible { .. } => ArdhStatus::Infeasible,
            Error::InvalidDistribution(_) => ArdhStatus::InvalidDistribution,
            Error::Desync { .. } => ArdhStatus::Desync,
            Error::DimensionMismatch(_) => ArdhStatus::DimensionMismatch,
            Error::Format(_) => ArdhStatus::Format,
            Error::Io(_) => ArdhStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ArdhStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ArdhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(String::new());
            ArdhStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            ArdhStatus::Panic
        }
    }
}

/// Borrows `len` bytes at `data`; a null pointer is fine when `len` is 0.
unsafe fn bytes<'a>(data: *const u8, len: usize, what: &str) -> Result<&'a [u8], Failure> {
    if len == 0 {
        Ok(&[])
    } else if data.is_null() {
        Err(null(what))
    } else {
        Ok(std::slice::from_raw_parts(data, len))
    }
}

fn mode_of(mode: u32) -> Result<Mode, Failure> {
    match mode {
        ARDH_MODE_STATIC => Ok(Mode::Static),
        ARDH_MODE_DYNAMIC => Ok(Mode::Dynamic),
        m => Err(Failure(ArdhStatus::InvalidArgument, format!("unknown mode {m}"))),
    }
}

fn settings(opts: *const ArdhOptions) -> Result<(BfiConfig, CodecParams), Failure> {
    let o = if opts.is_null() {
        ardh_options_default()
    } else {
        unsafe { *opts }
    };
    let cfg = BfiConfig {
        alpha: o.alpha,
        epsilon: o.epsilon,
        ..BfiConfig::default()
    };
    cfg.validate()?;
    let params = CodecParams::new(256, o.state_bits, o.slot_bits, o.renorm_mult)?;
    Ok((cfg, params))
}

fn finish_embed(host: Host<'_>, msg: &[u8], mode: u32, opts: *const ArdhOptions, out: *mut *mut ArdhEmbedding) -> Result<(), Failure> {
    let (cfg, params) = settings(opts)?;
    let e = ans_rdh::embed(host, msg, mode_of(mode)?, &cfg, &params)?;
    let handle = ArdhEmbedding {
        sidecar: e.sidecar.to_bytes(),
        net_bits: e.sidecar.side.net_bits(),
        message_bits: e.sidecar.side.message_bits,
        stego: e.stego,
    };
    unsafe { *out = Box::into_raw(Box::new(handle)) };
    Ok(())
}

/// `T = 16`, `n = 16`, `v = 1`, `alpha = 1.001`, `epsilon = 1e-9`.
#[no_mangle]
pub extern "C" fn ardh_options_default() -> ArdhOptions {
    let cfg = BfiConfig::default();
    let params = CodecParams::default();
    ArdhOptions {
        alpha: cfg.alpha,
        epsilon: cfg.epsilon,
        state_bits: params.state_bits(),
        slot_bits: params.slot_bits(),
        renorm_mult: params.renorm_mult(),
    }
}

/// Hides `msg` (bytes, most significant bit first) in a raw 8-bit sequence.
/// `opts` may be null for defaults. On success `*out` owns a new handle.
///
/// # Safety
/// Pointers must be valid for the given lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ardh_embed_raw(
    host: *const u8,
    host_len: usize,
    msg: *const u8,
    msg_len: usize,
    mode: u32,
    opts: *const ArdhOptions,
    out: *mut *mut ArdhEmbedding,
) -> ArdhStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let host = bytes(host, host_len, "host")?;
        let msg = bytes(msg, msg_len, "msg")?;
        finish_embed(Host::Raw(host), msg, mode, opts, out)
    })
}

/// Hides `msg` in a row-major 8-bit gray-scale raster of `width * height`
/// pixels. The stego buffer has the same layout.
///
/// # Safety
/// Pointers must be valid for the given sizes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ardh_embed_image(
    pixels: *const u8,
    width: u32,
    height: u32,
    msg: *const u8,
    msg_len: usize,
    mode: u32,
    opts: *const ArdhOptions,
    out: *mut *mut ArdhEmbedding,
) -> ArdhStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let (w, h) = (width as usize, height as usize);
        let area = w.checked_mul(h).ok_or_else(|| Failure(ArdhStatus::InvalidArgument, "image too large".into()))?;
        let img = GrayImage::new(w, h, bytes(pixels, area, "pixels")?.to_vec())?;
        let msg = bytes(msg, msg_len, "msg")?;
        finish_embed(Host::Image(&img), msg, mode, opts, out)
    })
}

unsafe fn view(buf: &[u8], data: *mut *const u8, len: *mut usize) -> ArdhStatus {
    if data.is_null() || len.is_null() {
        set_last_error("output pointer is null".into());
        return ArdhStatus::NullPointer;
    }
    *data = buf.as_ptr();
    *len = buf.len();
    ArdhStatus::Ok
}

/// Borrows the stego symbols.
///
/// # Safety
/// `e` must be a live handle; `data` and `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ardh_embedding_stego(e: *const ArdhEmbedding, data: *mut *const u8, len: *mut usize) -> ArdhStatus {
    match e.as_ref() {
        Some(e) => view(&e.stego, data, len),
        None => ArdhStatus::NullPointer,
    }
}

/// Borrows the serialized sidecar.
///
/// # Safety
/// `e` must be a live handle; `data` and `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ardh_embedding_sidecar(e: *const ArdhEmbedding, data: *mut *const u8, len: *mut usize) -> ArdhStatus {
    match e.as_ref() {
        Some(e) => view(&e.sidecar, data, len),
        None => ArdhStatus::NullPointer,
    }
}

/// Net embedded bits: message bits drawn plus padding, minus the bits the
/// sidecar has to carry back. Zero for a null handle.
///
/// # Safety
/// `e` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ardh_embedding_net_bits(e: *const ArdhEmbedding) -> i64 {
    e.as_ref().map_or(0, |e| e.net_bits)
}

/// Message bits consumed; extraction returns exactly this prefix.
///
/// # Safety
/// `e` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ardh_embedding_message_bits(e: *const ArdhEmbedding) -> u64 {
    e.as_ref().map_or(0, |e| e.message_bits)
}

/// Releases a handle from `ardh_embed_*`. Null is ignored.
///
/// # Safety
/// `e` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ardh_embedding_free(e: *mut ArdhEmbedding) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Recovers host symbols and message from stego symbols plus the sidecar
/// bytes produced at embedding time.
///
/// # Safety
/// Pointers must be valid for the given lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ardh_extract(
    stego: *const u8,
    stego_len: usize,
    sidecar: *const u8,
    sidecar_len: usize,
    out: *mut *mut ArdhRecovered,
) -> ArdhStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let sidecar = Sidecar::from_bytes(bytes(sidecar, sidecar_len, "sidecar")?)?;
        let r = ans_rdh::extract(bytes(stego, stego_len, "stego")?, &sidecar)?;
        let handle = ArdhRecovered {
            message_bits: r.message.len() as u64,
            message: r.message.to_bytes(),
            host: r.host,
        };
        *out = Box::into_raw(Box::new(handle));
        Ok(())
    })
}

/// Borrows the recovered host symbols.
///
/// # Safety
/// `r` must be a live handle; `data` and `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ardh_recovered_host(r: *const ArdhRecovered, data: *mut *const u8, len: *mut usize) -> ArdhStatus {
    match r.as_ref() {
        Some(r) => view(&r.host, data, len),
        None => ArdhStatus::NullPointer,
    }
}

/// Borrows the recovered message, packed most significant bit first; the
/// last byte is zero-filled when the bit count is not a multiple of 8.
///
/// # Safety
/// `r` must be a live handle; all output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ardh_recovered_message(
    r: *const ArdhRecovered,
    data: *mut *const u8,
    len: *mut usize,
    bits: *mut u64,
) -> ArdhStatus {
    let Some(r) = r.as_ref() else {
        return ArdhStatus::NullPointer;
    };
    if bits.is_null() {
        return ArdhStatus::NullPointer;
    }
    *bits = r.message_bits;
    view(&r.message, data, len)
}

/// Releases a handle from [`ardh_extract`]. Null is ignored.
///
/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ardh_recovered_free(r: *mut ArdhRecovered) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Description of the last failure on this thread; empty after a success.
/// The string lives until the next call into this library on the thread.
#[no_mangle]
pub extern "C" fn ardh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn ardh_status_name(status: ArdhStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        ArdhStatus::Ok => b"ok\0",
        ArdhStatus::NullPointer => b"null pointer\0",
        ArdhStatus::InvalidArgument => b"invalid argument\0",
        ArdhStatus::InvalidParams => b"invalid parameters\0",
        ArdhStatus::BitIo => b"bit i/o\0",
        ArdhStatus::ZeroFrequency => b"zero frequency\0",
        ArdhStatus::InvalidTable => b"invalid table\0",
        ArdhStatus::Infeasible => b"infeasible quantization\0",
        ArdhStatus::InvalidDistribution => b"invalid distribution\0",
        ArdhStatus::Desync => b"desynchronized\0",
        ArdhStatus::DimensionMismatch => b"dimension mismatch\0",
        ArdhStatus::Format => b"malformed data\0",
        ArdhStatus::Io => b"i/o\0",
        ArdhStatus::Panic => b"panic\0",
    };
    s.as_ptr().cast()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    fn last_error() -> String {
        unsafe { CStr::from_ptr(ardh_last_error_message()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn status_names_are_distinct() {
        use ArdhStatus::*;
        let all = [
            Ok, NullPointer, InvalidArgument, InvalidParams, BitIo, ZeroFrequency, InvalidTable,
            Infeasible, InvalidDistribution, Desync, DimensionMismatch, Format, Io, Panic,
        ];
        let names: std::collections::HashSet<_> = all
            .iter()
            .map(|&s| unsafe { CStr::from_ptr(ardh_status_name(s)) }.to_owned())
            .collect();
        assert_eq!(names.len(), 14);
    }

    #[test]
    fn errors_map_to_codes() {
        assert_eq!(Failure::from(Error::Format("x".into())).0, ArdhStatus::Format);
        assert_eq!(Failure::from(Error::Desync { position: 0, reason: "x".into() }).0, ArdhStatus::Desync);
        assert_eq!(mode_of(7).err().map(|f| f.0), Some(ArdhStatus::InvalidArgument));
    }

    #[test]
    fn bad_options_are_reported() {
        let opts = ArdhOptions { alpha: 0.5, ..ardh_options_default() };
        let mut out = ptr::null_mut();
        let st = unsafe { ardh_embed_raw([1u8, 2].as_ptr(), 2, ptr::null(), 0, 0, &opts, &mut out) };
        assert_eq!(st, ArdhStatus::InvalidParams);
        assert!(out.is_null());
        assert!(last_error().contains("alpha"));
    }
}
