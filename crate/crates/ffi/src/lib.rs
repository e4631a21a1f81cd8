//! C ABI over the `ringsim` core.
//!
//! Every function returns a [`RingsimStatus`]. On failure the message of the
//! most recent error on the calling thread is available through
//! [`ringsim_last_error_message`]. Handles are opaque and must be released
//! with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use ringsim::cnot::{build_cnot, verify_coherence, verify_truth_table, CnotNetwork};
use ringsim::fock::{simulate_nlpsg, NlpsgInput};
use ringsim::network::{scattering_matrix, NetworkParams};
use ringsim::nlpsg::{verdict, OptimalPoint, T_MIDDLE, T_OUTER};
use ringsim::ring::RingCoupler;
use ringsim::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingsimStatus {
    Ok = 0,
    NullPointer = 1,
    /// A parameter lies outside its physical range.
    Domain = 2,
    Pole = 3,
    SingularPivot = 4,
    NonUnitary = 5,
    Dimension = 6,
    /// A sign gate fails the success constraints.
    InvalidNlpsg = 7,
    Other = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingsimComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for RingsimComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<RingsimComplex> for Complex64 {
    fn from(z: RingsimComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// One ring resonator. A NaN `phi` selects the default round-trip
/// partition.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingsimRing {
    pub tau: f64,
    pub eta: f64,
    pub theta: f64,
    pub phi: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingsimVerdict {
    pub beta: [RingsimComplex; 3],
    pub s11: RingsimComplex,
    pub residual: f64,
    pub s11_residual: f64,
    pub success_probability: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingsimTruthRow {
    pub control: u8,
    pub target: u8,
    pub output_control: u8,
    pub output_target: u8,
    pub probability: f64,
    pub fidelity: f64,
    pub leakage: f64,
}

/// Three-ring sign gate.
pub struct RingsimNetwork(NetworkParams);

/// Heralded CNOT built from two sign gates.
pub struct RingsimCnot(CnotNetwork);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> RingsimStatus {
    match e {
        Error::Domain { .. } => RingsimStatus::Domain,
        Error::Pole(_) => RingsimStatus::Pole,
        Error::SingularPivot { .. } => RingsimStatus::SingularPivot,
        Error::NonUnitary(_) => RingsimStatus::NonUnitary,
        Error::Dimension { .. } => RingsimStatus::Dimension,
        Error::InvalidNlpsg { .. } => RingsimStatus::InvalidNlpsg,
        _ => RingsimStatus::Other,
    }
}

fn guard<F>(f: F) -> RingsimStatus
where
    F: FnOnce() -> Result<(), RingsimStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RingsimStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside ringsim".to_owned());
            RingsimStatus::Panic
        }
    }
}

fn fail(e: Error) -> RingsimStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(name: &str) -> RingsimStatus {
    set_error(format!("{name} is null"));
    RingsimStatus::NullPointer
}

unsafe fn as_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, RingsimStatus> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn as_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, RingsimStatus> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn as_slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], RingsimStatus> {
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn as_slice_mut<'a, T>(
    p: *mut T,
    len: usize,
    name: &str,
) -> Result<&'a mut [T], RingsimStatus> {
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn ringsim_status_string(status: RingsimStatus) -> *const c_char {
    let s: &'static CStr = match status {
        RingsimStatus::Ok => c"ok",
        RingsimStatus::NullPointer => c"null pointer",
        RingsimStatus::Domain => c"parameter out of range",
        RingsimStatus::Pole => c"pole",
        RingsimStatus::SingularPivot => c"singular pivot",
        RingsimStatus::NonUnitary => c"non-unitary matrix",
        RingsimStatus::Dimension => c"dimension mismatch",
        RingsimStatus::InvalidNlpsg => c"sign gate violates its constraints",
        RingsimStatus::Other => c"error",
        RingsimStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes) and returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ringsim_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds a network from three rings and three in-line phases.
///
/// # Safety
/// `rings` and `deltas` must point to 3 elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ringsim_network_new(
    rings: *const RingsimRing,
    deltas: *const f64,
    out: *mut *mut RingsimNetwork,
) -> RingsimStatus {
    guard(|| {
        let rings = as_slice(rings, 3, "rings")?;
        let deltas = as_slice(deltas, 3, "deltas")?;
        let out = as_mut(out, "out")?;
        let mut built = [RingCoupler::resonant(0.0, 0.0).map_err(fail)?; 3];
        for (slot, r) in built.iter_mut().zip(rings) {
            let phi = if r.phi.is_nan() { None } else { Some(r.phi) };
            *slot = RingCoupler::new(r.tau, r.eta, r.theta, phi).map_err(fail)?;
        }
        let params = NetworkParams::new(built, [deltas[0], deltas[1], deltas[2]]);
        *out = Box::into_raw(Box::new(RingsimNetwork(params)));
        Ok(())
    })
}

/// The optimal resonant gate with lower couplers at `tau = 0`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ringsim_network_optimal(out: *mut *mut RingsimNetwork) -> RingsimStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        let params =
            NetworkParams::resonant([T_OUTER, T_MIDDLE, T_OUTER], [0.0; 3]).map_err(fail)?;
        *out = Box::into_raw(Box::new(RingsimNetwork(params)));
        Ok(())
    })
}

/// # Safety
/// `net` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ringsim_network_free(net: *mut RingsimNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Writes the 3x3 scattering matrix in row-major order.
///
/// # Safety
/// `net` must be a live handle; `out` must have room for 9 elements.
#[no_mangle]
pub unsafe extern "C" fn ringsim_network_scattering(
    net: *const RingsimNetwork,
    out: *mut RingsimComplex,
) -> RingsimStatus {
    guard(|| {
        let net = as_ref(net, "net")?;
        let out = as_slice_mut(out, 9, "out")?;
        let s = scattering_matrix(&net.0).map_err(fail)?;
        for i in 0..3 {
            for j in 0..3 {
                out[3 * i + j] = s.get(i, j).into();
            }
        }
        Ok(())
    })
}

/// # Safety
/// `net` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ringsim_network_verdict(
    net: *const RingsimNetwork,
    out: *mut RingsimVerdict,
) -> RingsimStatus {
    guard(|| {
        let net = as_ref(net, "net")?;
        let out = as_mut(out, "out")?;
        let s = scattering_matrix(&net.0).map_err(fail)?;
        let v = verdict(&s).map_err(fail)?;
        *out = RingsimVerdict {
            beta: v.betas().map(Into::into),
            s11: v.s11.into(),
            residual: v.residual,
            s11_residual: v.s11_residual,
            success_probability: v.success_probability,
        };
        Ok(())
    })
}

/// Runs the sign gate on `alpha[0]|0> + alpha[1]|1> + alpha[2]|2>` (which
/// must be normalized) and writes the heralding probability. When `amplitudes`
/// is non-null it receives the three unnormalized heralded amplitudes.
///
/// # Safety
/// `alpha` must point to 3 elements; `amplitudes` must be null or have room
/// for 3.
#[no_mangle]
pub unsafe extern "C" fn ringsim_nlpsg_success(
    net: *const RingsimNetwork,
    alpha: *const RingsimComplex,
    probability: *mut f64,
    amplitudes: *mut RingsimComplex,
) -> RingsimStatus {
    guard(|| {
        let net = as_ref(net, "net")?;
        let alpha = as_slice(alpha, 3, "alpha")?;
        let probability = as_mut(probability, "probability")?;
        let input = NlpsgInput::new([0, 1, 2].map(|i| alpha[i].into())).map_err(fail)?;
        let s = scattering_matrix(&net.0).map_err(fail)?;
        let proj = simulate_nlpsg(&s, &input).map_err(fail)?;
        *probability = proj.probability;
        if !amplitudes.is_null() {
            let out = std::slice::from_raw_parts_mut(amplitudes, 3);
            for n in 0..3u8 {
                out[n as usize] = proj.unnormalized.amplitude(&[n]).into();
            }
        }
        Ok(())
    })
}

/// Writes the closed-form optimal transmissions `t1, t2, t3`.
///
/// # Safety
/// `out` must have room for 3 elements.
#[no_mangle]
pub unsafe extern "C" fn ringsim_optimal_point(out: *mut f64) -> RingsimStatus {
    guard(|| {
        let out = as_slice_mut(out, 3, "out")?;
        let p = OptimalPoint::closed_form();
        out.copy_from_slice(&[p.t1, p.t2, p.t3]);
        Ok(())
    })
}

/// Builds a CNOT from two sign gates. Fails with
/// `RingsimStatus_InvalidNlpsg` when either gate violates its constraints.
///
/// # Safety
/// `nlpsg1` and `nlpsg2` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ringsim_cnot_new(
    nlpsg1: *const RingsimNetwork,
    nlpsg2: *const RingsimNetwork,
    out: *mut *mut RingsimCnot,
) -> RingsimStatus {
    guard(|| {
        let g1 = as_ref(nlpsg1, "nlpsg1")?;
        let g2 = as_ref(nlpsg2, "nlpsg2")?;
        let out = as_mut(out, "out")?;
        let net = build_cnot(&g1.0, &g2.0).map_err(fail)?;
        *out = Box::into_raw(Box::new(RingsimCnot(net)));
        Ok(())
    })
}

/// # Safety
/// `cnot` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ringsim_cnot_free(cnot: *mut RingsimCnot) {
    if !cnot.is_null() {
        drop(Box::from_raw(cnot));
    }
}

/// Writes the four truth-table rows, inputs ordered 00, 01, 10, 11.
///
/// # Safety
/// `cnot` must be a live handle; `out` must have room for 4 rows.
#[no_mangle]
pub unsafe extern "C" fn ringsim_cnot_truth_table(
    cnot: *const RingsimCnot,
    out: *mut RingsimTruthRow,
) -> RingsimStatus {
    guard(|| {
        let cnot = as_ref(cnot, "cnot")?;
        let out = as_slice_mut(out, 4, "out")?;
        let rows = verify_truth_table(&cnot.0).map_err(fail)?;
        for (dst, r) in out.iter_mut().zip(rows) {
            *dst = RingsimTruthRow {
                control: r.control,
                target: r.target,
                output_control: r.output.0,
                output_target: r.output.1,
                probability: r.probability,
                fidelity: r.fidelity,
                leakage: r.leakage,
            };
        }
        Ok(())
    })
}

/// Overlap of the heralded output of `(|0>+|1>)|0>/sqrt(2)` with the Bell
/// state `(|00>+|11>)/sqrt(2)`.
///
/// # Safety
/// `cnot` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ringsim_cnot_bell_overlap(
    cnot: *const RingsimCnot,
    out: *mut f64,
) -> RingsimStatus {
    guard(|| {
        let cnot = as_ref(cnot, "cnot")?;
        let out = as_mut(out, "out")?;
        *out = verify_coherence(&cnot.0).map_err(fail)?.bell_overlap;
        Ok(())
    })
}
