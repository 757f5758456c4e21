//! C interface to the cqpolar library.
//!
//! Channels and reports are opaque handles created by `cqp_*_new` functions
//! and released with the matching `cqp_*_free`. Every fallible call returns a
//! [`CqpStatus`]; the message of the last failure on the calling thread is
//! available through [`cqp_last_error`].

use cqpolar::bosonic;
use cqpolar::channel::{helstrom_povm, holevo_information, quantum_fidelity, two_outcome_error, CqChannel};
use cqpolar::decoder::{exact_error, CodeSpec, DecoderVariant, FrozenMode, ScDecoder};
use cqpolar::fuchs_caves::{fc_error_prob, fc_measurement};
use cqpolar::linalg::{CMat, DensityOperator, C64};
use cqpolar::polar::{build_report, ChannelReport, Synthesizer};
use cqpolar::{Error, ErrorCategory};
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CqpStatus {
    Ok = 0,
    Other = 1,
    Parse = 2,
    Guard = 3,
    Invariant = 4,
    NullPointer = 5,
    Panic = 6,
}

/// Measurement used by [`cqp_exact_error`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CqpVariant {
    Helstrom = 0,
    SqrtHelstrom = 1,
    FuchsCaves = 2,
    Hybrid = 3,
}

/// Opaque binary-input channel with density-operator outputs.
pub struct CqpChannel(CqChannel);

/// Opaque per-index report at one (N, β).
pub struct CqpReport(ChannelReport);

/// One row of a report.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CqpIndexRecord {
    pub index: usize,
    pub fidelity: f64,
    pub holevo: f64,
    pub z_fc: f64,
    pub z_hel: f64,
    pub good_w: bool,
    pub good_wfc: bool,
}

/// Closed-form BPSK quantities at one energy.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CqpBpskPoint {
    pub energy: f64,
    pub chi: f64,
    pub i_hel: f64,
    pub fraction: f64,
    pub g_capacity: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> CqpStatus {
    match e.category() {
        ErrorCategory::Parse => CqpStatus::Parse,
        ErrorCategory::Guard => CqpStatus::Guard,
        ErrorCategory::InvariantAlarm => CqpStatus::Invariant,
        ErrorCategory::Other => CqpStatus::Other,
    }
}

fn guarded(f: impl FnOnce() -> Result<(), CqpStatus>) -> CqpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CqpStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            CqpStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, CqpStatus>;
}

impl<T> OrStatus<T> for cqpolar::Result<T> {
    fn or_status(self) -> Result<T, CqpStatus> {
        self.map_err(|e| {
            set_error(e.to_string());
            status_of(&e)
        })
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), CqpStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        Err(CqpStatus::NullPointer)
    } else {
        Ok(())
    }
}

unsafe fn channel_ref<'a>(ch: *const CqpChannel) -> Result<&'a CqChannel, CqpStatus> {
    non_null(ch, "channel")?;
    Ok(&(*ch).0)
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), CqpStatus> {
    non_null(out, "output pointer")?;
    out.write(value);
    Ok(())
}

unsafe fn matrix_from(dim: usize, re: *const f64, im: *const f64) -> Result<CMat, CqpStatus> {
    non_null(re, "real part")?;
    let n = dim.checked_mul(dim).ok_or(CqpStatus::Other)?;
    let re = std::slice::from_raw_parts(re, n);
    let im = if im.is_null() { None } else { Some(std::slice::from_raw_parts(im, n)) };
    Ok(CMat::from_fn(dim, |r, c| C64::new(re[r * dim + c], im.map_or(0.0, |v| v[r * dim + c]))))
}

/// Copies the last error message of this thread, NUL-terminated, into `buf`
/// (truncated to `len` bytes) and returns the full message length without the
/// terminator. `buf` may be null to query the length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn cqp_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = CString::new(e.borrow().replace('\0', " ")).unwrap_or_default();
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len() - 1
    })
}

/// Builds a channel from two row-major `dim` × `dim` matrices. The imaginary
/// parts may be null for real matrices.
///
/// # Safety
/// Non-null pointers must be valid for `dim * dim` doubles; `out` must be
/// valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn cqp_channel_new(
    dim: usize,
    rho0_re: *const f64,
    rho0_im: *const f64,
    rho1_re: *const f64,
    rho1_im: *const f64,
    out: *mut *mut CqpChannel,
) -> CqpStatus {
    guarded(|| {
        non_null(out, "output pointer")?;
        if dim == 0 {
            set_error("dimension must be at least 1".into());
            return Err(CqpStatus::Other);
        }
        let r0 = DensityOperator::from_matrix(matrix_from(dim, rho0_re, rho0_im)?).or_status()?;
        let r1 = DensityOperator::from_matrix(matrix_from(dim, rho1_re, rho1_im)?).or_status()?;
        let ch = CqChannel::new(r0, r1).or_status()?;
        write_out(out, Box::into_raw(Box::new(CqpChannel(ch))))
    })
}

/// The coherent-state pair |±α⟩ with mean photon number `energy`.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn cqp_channel_new_bpsk(energy: f64, out: *mut *mut CqpChannel) -> CqpStatus {
    guarded(|| {
        let ch = bosonic::bpsk_channel(energy).or_status()?;
        write_out(out, Box::into_raw(Box::new(CqpChannel(ch))))
    })
}

/// # Safety
/// `ch` must be null or a handle from `cqp_channel_new*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cqp_channel_free(ch: *mut CqpChannel) {
    if !ch.is_null() {
        drop(Box::from_raw(ch));
    }
}

/// # Safety
/// `ch` must be a live channel handle.
#[no_mangle]
pub unsafe extern "C" fn cqp_channel_dim(ch: *const CqpChannel) -> usize {
    if ch.is_null() {
        0
    } else {
        (*ch).0.dim()
    }
}

/// Symmetric Holevo information in bits.
///
/// # Safety
/// `ch` must be a live channel handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cqp_holevo(ch: *const CqpChannel, out: *mut f64) -> CqpStatus {
    guarded(|| write_out(out, holevo_information(channel_ref(ch)?).or_status()?))
}

/// Fidelity F = ‖√ρ0 √ρ1‖₁.
///
/// # Safety
/// `ch` must be a live channel handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cqp_fidelity(ch: *const CqpChannel, out: *mut f64) -> CqpStatus {
    guarded(|| write_out(out, quantum_fidelity(channel_ref(ch)?).or_status()?))
}

/// Bhattacharyya parameter of the channel induced by the Fuchs-Caves
/// measurement.
///
/// # Safety
/// `ch` must be a live channel handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cqp_fc_bhattacharyya(ch: *const CqpChannel, out: *mut f64) -> CqpStatus {
    guarded(|| {
        let w = channel_ref(ch)?;
        let c = fc_measurement(w).or_status()?.induced(w).or_status()?;
        write_out(out, cqpolar::channel::bhattacharyya(&c))
    })
}

/// Error probabilities of the Helstrom and Fuchs-Caves decisions.
///
/// # Safety
/// `ch` must be a live channel handle; outputs valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn cqp_error_probabilities(ch: *const CqpChannel, helstrom: *mut f64, fuchs_caves: *mut f64) -> CqpStatus {
    guarded(|| {
        let w = channel_ref(ch)?;
        let hel = helstrom_povm(w).or_status()?;
        write_out(helstrom, two_outcome_error(w, &hel.elements()[0]))?;
        write_out(fuchs_caves, fc_error_prob(w).or_status()?)
    })
}

/// Synthesizes all N channels and classifies them at threshold 2^(−N^β).
///
/// # Safety
/// `ch` must be a live channel handle and `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn cqp_report_new(ch: *const CqpChannel, n: usize, beta: f64, out: *mut *mut CqpReport) -> CqpStatus {
    guarded(|| {
        let w = channel_ref(ch)?;
        let synth = Synthesizer::new(w, n).or_status()?;
        let report = build_report(&synth, beta).or_status()?;
        write_out(out, Box::into_raw(Box::new(CqpReport(report))))
    })
}

/// # Safety
/// `r` must be null or a handle from `cqp_report_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cqp_report_free(r: *mut CqpReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Number of rows (N).
///
/// # Safety
/// `r` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn cqp_report_len(r: *const CqpReport) -> usize {
    if r.is_null() {
        0
    } else {
        (*r).0.records.len()
    }
}

/// Row for the 1-based index `i`.
///
/// # Safety
/// `r` must be a live report handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cqp_report_get(r: *const CqpReport, i: usize, out: *mut CqpIndexRecord) -> CqpStatus {
    guarded(|| {
        non_null(r, "report")?;
        let rep = &(*r).0;
        let Some(rec) = i.checked_sub(1).and_then(|k| rep.records.get(k)) else {
            set_error(format!("index {i} outside 1..={}", rep.records.len()));
            return Err(CqpStatus::Other);
        };
        write_out(
            out,
            CqpIndexRecord {
                index: rec.i,
                fidelity: rec.fidelity,
                holevo: rec.holevo,
                z_fc: rec.z_fc,
                z_hel: rec.z_hel,
                good_w: rec.good_w,
                good_wfc: rec.good_wfc,
            },
        )
    })
}

/// Exact block error of successive-cancellation decoding with all frozen bits
/// zero. `info_set` holds `k` 1-based indices; `beta` is read only by the
/// hybrid variant.
///
/// # Safety
/// `ch` must be a live channel handle, `info_set` valid for `k` reads (or
/// null when `k` = 0) and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cqp_exact_error(
    ch: *const CqpChannel,
    n: usize,
    info_set: *const usize,
    k: usize,
    variant: CqpVariant,
    beta: f64,
    out: *mut f64,
) -> CqpStatus {
    guarded(|| {
        let w = channel_ref(ch)?;
        let set = if k == 0 {
            Vec::new()
        } else {
            non_null(info_set, "information set")?;
            std::slice::from_raw_parts(info_set, k).to_vec()
        };
        let variant = match variant {
            CqpVariant::Helstrom => DecoderVariant::Helstrom,
            CqpVariant::SqrtHelstrom => DecoderVariant::SqrtHelstrom,
            CqpVariant::FuchsCaves => DecoderVariant::FuchsCaves,
            CqpVariant::Hybrid => DecoderVariant::Hybrid { beta },
        };
        let code = CodeSpec::with_zeros(n, &set, FrozenMode::Fixed).or_status()?;
        let synth = Arc::new(Synthesizer::new(w, n).or_status()?);
        let mut dec = ScDecoder::new(synth, variant).or_status()?;
        write_out(out, exact_error(&mut dec, &code).or_status()?)
    })
}

/// χ, I_Hel, collective fraction and g(E) of BPSK at energy `energy` > 0.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cqp_bpsk_point(energy: f64, out: *mut CqpBpskPoint) -> CqpStatus {
    guarded(|| {
        let p = bosonic::bpsk_point(energy).or_status()?;
        write_out(out, CqpBpskPoint { energy: p.e, chi: p.chi, i_hel: p.i_hel, fraction: p.fraction, g_capacity: p.g_capacity })
    })
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cqp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
