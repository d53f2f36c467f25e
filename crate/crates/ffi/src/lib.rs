//! C ABI over `prefix-adder`.
//!
//! Objects are opaque handles released with the matching `*_free`. Every
//! fallible call returns a [`PaStatus`]; on failure the message is available
//! from [`pa_last_error_message`] on the same thread. Strings returned through
//! out-parameters are owned by the caller and freed with [`pa_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use prefix_adder::cost::{estimate_area, estimate_delay, AreaWeights, DelayModel};
use prefix_adder::eval::{verify_exhaustive, verify_random, Evaluator, PAPER_TESTBENCH};
use prefix_adder::netlist::{
    emit_testbench, emit_verilog, expand_to_gates, EmitOptions, EmitStyle, GateNetlist,
};
use prefix_adder::{
    build_network, max_fanout, network_depth, operator_counts, Error, PrefixNetwork, TopologyKind,
};

/// Opaque prefix network.
pub struct PaNetwork(PrefixNetwork);

/// Opaque gate netlist.
pub struct PaNetlist(GateNetlist);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidNetwork = 3,
    Structural = 4,
    Parse = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaTopology {
    BrentKung = 0,
    KoggeStone = 1,
    Sklansky = 2,
    HanCarlson = 3,
    RippleSerial = 4,
}

impl From<PaTopology> for TopologyKind {
    fn from(t: PaTopology) -> Self {
        match t {
            PaTopology::BrentKung => TopologyKind::BrentKung,
            PaTopology::KoggeStone => TopologyKind::KoggeStone,
            PaTopology::Sklansky => TopologyKind::Sklansky,
            PaTopology::HanCarlson => TopologyKind::HanCarlson,
            PaTopology::RippleSerial => TopologyKind::RippleSerial,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaEmitStyle {
    Flat = 0,
    Hierarchical = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PaOperatorCounts {
    pub black: usize,
    pub gray: usize,
    pub buffer: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PaGateCounts {
    pub and_gates: usize,
    pub or_gates: usize,
    pub xor_gates: usize,
    pub buf_gates: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaDelayModel {
    pub xor_delay: f64,
    pub and_delay: f64,
    pub or_delay: f64,
    pub buffer_delay: f64,
    pub fanout_penalty_alpha: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaAreaWeights {
    pub and_area: f64,
    pub or_area: f64,
    pub xor_area: f64,
    pub buf_area: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn status_of(e: &Error) -> PaStatus {
    match e {
        Error::InvalidArgument(_) => PaStatus::InvalidArgument,
        Error::InvalidNetwork(_) => PaStatus::InvalidNetwork,
        Error::Structural(_) => PaStatus::Structural,
        Error::Json(_) => PaStatus::Parse,
        Error::Io(_) => PaStatus::Io,
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            PaStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_last_error(&format!("{what} is null"));
            PaStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            PaStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn read_str<'a>(s: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail::Lib(Error::InvalidArgument(format!("{what} is not UTF-8"))))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message for the last failed call on this thread; empty after success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn pa_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pa_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn pa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_network_build(
    topology: PaTopology,
    width: usize,
    out: *mut *mut PaNetwork,
) -> PaStatus {
    guard(|| {
        let net = build_network(topology.into(), width)?;
        put(out, Box::into_raw(Box::new(PaNetwork(net))), "out")
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_network_from_json(
    json: *const c_char,
    out: *mut *mut PaNetwork,
) -> PaStatus {
    guard(|| {
        let net = PrefixNetwork::from_json(read_str(json, "json")?)?;
        put(out, Box::into_raw(Box::new(PaNetwork(net))), "out")
    })
}

/// # Safety
/// `net` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pa_network_free(net: *mut PaNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// # Safety
/// `net` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_network_to_json(
    net: *const PaNetwork,
    out: *mut *mut c_char,
) -> PaStatus {
    guard(|| {
        let text = get(net, "net")?.0.to_json()?;
        put(out, into_c_string(text), "out")
    })
}

/// Width in bits, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pa_network_width(net: *const PaNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.0.width())
}

/// # Safety
/// `net` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_network_depth(net: *const PaNetwork, out: *mut usize) -> PaStatus {
    guard(|| put(out, network_depth(&get(net, "net")?.0)?, "out"))
}

/// # Safety
/// `net` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_network_counts(
    net: *const PaNetwork,
    out: *mut PaOperatorCounts,
) -> PaStatus {
    guard(|| {
        let c = operator_counts(&get(net, "net")?.0);
        put(
            out,
            PaOperatorCounts {
                black: c.black,
                gray: c.gray,
                buffer: c.buffer,
            },
            "out",
        )
    })
}

/// # Safety
/// `net` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_network_max_fanout(net: *const PaNetwork, out: *mut usize) -> PaStatus {
    guard(|| put(out, max_fanout(&get(net, "net")?.0)?, "out"))
}

/// Adds two operands of up to 64 bits through the network.
///
/// # Safety
/// `net` must be a live handle; `sum` and `cout` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_evaluate(
    net: *const PaNetwork,
    a: u64,
    b: u64,
    cin: bool,
    sum: *mut u64,
    cout: *mut bool,
) -> PaStatus {
    guard(|| {
        let net = &get(net, "net")?.0;
        if net.width() > 64 {
            return Err(Error::InvalidArgument(format!(
                "pa_evaluate supports widths up to 64, network is {}",
                net.width()
            ))
            .into());
        }
        let r = Evaluator::new(net)?.add(a.into(), b.into(), cin)?;
        // The width check above keeps the sum within 64 bits.
        put(sum, r.sum.value() as u64, "sum")?;
        put(cout, r.carry_out, "cout")
    })
}

/// Exhaustive check (widths up to 12); writes the number of wrong vectors.
///
/// # Safety
/// `net` must be a live handle; `mismatches` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_verify_exhaustive(
    net: *const PaNetwork,
    mismatches: *mut u64,
) -> PaStatus {
    guard(|| {
        let r = verify_exhaustive(&get(net, "net")?.0)?;
        put(mismatches, r.mismatch_count, "mismatches")
    })
}

/// Seeded random check; writes the number of wrong vectors.
///
/// # Safety
/// `net` must be a live handle; `mismatches` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_verify_random(
    net: *const PaNetwork,
    count: u64,
    seed: u64,
    mismatches: *mut u64,
) -> PaStatus {
    guard(|| {
        let r = verify_random(&get(net, "net")?.0, count, seed)?;
        put(mismatches, r.mismatch_count, "mismatches")
    })
}

/// Default delay model, for callers that want to tweak one field.
#[no_mangle]
pub extern "C" fn pa_delay_model_default() -> PaDelayModel {
    let d = DelayModel::default();
    PaDelayModel {
        xor_delay: d.xor_delay,
        and_delay: d.and_delay,
        or_delay: d.or_delay,
        buffer_delay: d.buffer_delay,
        fanout_penalty_alpha: d.fanout_penalty_alpha,
    }
}

#[no_mangle]
pub extern "C" fn pa_area_weights_default() -> PaAreaWeights {
    let a = AreaWeights::default();
    PaAreaWeights {
        and_area: a.and,
        or_area: a.or,
        xor_area: a.xor,
        buf_area: a.buf,
    }
}

/// `model` may be null for the default model.
///
/// # Safety
/// `net` must be a live handle; `model` null or readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pa_estimate_delay(
    net: *const PaNetwork,
    model: *const PaDelayModel,
    out: *mut f64,
) -> PaStatus {
    guard(|| {
        let m = model
            .as_ref()
            .map_or_else(DelayModel::default, |m| DelayModel {
                xor_delay: m.xor_delay,
                and_delay: m.and_delay,
                or_delay: m.or_delay,
                buffer_delay: m.buffer_delay,
                fanout_penalty_alpha: m.fanout_penalty_alpha,
            });
        put(out, estimate_delay(&get(net, "net")?.0, &m)?, "out")
    })
}

/// `weights` may be null for the default weights.
///
/// # Safety
/// `net` must be a live handle; `weights` null or readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pa_estimate_area(
    net: *const PaNetwork,
    weights: *const PaAreaWeights,
    out: *mut f64,
) -> PaStatus {
    guard(|| {
        let w = weights
            .as_ref()
            .map_or_else(AreaWeights::default, |w| AreaWeights {
                and: w.and_area,
                or: w.or_area,
                xor: w.xor_area,
                buf: w.buf_area,
            });
        put(out, estimate_area(&get(net, "net")?.0, &w)?, "out")
    })
}

/// # Safety
/// `net` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_netlist_expand(
    net: *const PaNetwork,
    out: *mut *mut PaNetlist,
) -> PaStatus {
    guard(|| {
        let nl = expand_to_gates(&get(net, "net")?.0)?;
        put(out, Box::into_raw(Box::new(PaNetlist(nl))), "out")
    })
}

/// # Safety
/// `netlist` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pa_netlist_free(netlist: *mut PaNetlist) {
    if !netlist.is_null() {
        drop(Box::from_raw(netlist));
    }
}

/// # Safety
/// `netlist` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_netlist_gate_counts(
    netlist: *const PaNetlist,
    out: *mut PaGateCounts,
) -> PaStatus {
    guard(|| {
        let c = get(netlist, "netlist")?.0.gate_counts();
        put(
            out,
            PaGateCounts {
                and_gates: c.and,
                or_gates: c.or,
                xor_gates: c.xor,
                buf_gates: c.buf,
            },
            "out",
        )
    })
}

/// Structural Verilog for the netlist as module `module_name`.
///
/// # Safety
/// `netlist` must be a live handle, `module_name` a NUL-terminated string
/// and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_emit_verilog(
    netlist: *const PaNetlist,
    style: PaEmitStyle,
    module_name: *const c_char,
    out: *mut *mut c_char,
) -> PaStatus {
    guard(|| {
        let opts = EmitOptions {
            style: match style {
                PaEmitStyle::Flat => EmitStyle::Flat,
                PaEmitStyle::Hierarchical => EmitStyle::Hierarchical,
            },
            module_name: read_str(module_name, "module_name")?.to_string(),
            ..EmitOptions::default()
        };
        let text = emit_verilog(&get(netlist, "netlist")?.0, &opts)?;
        put(out, into_c_string(text), "out")
    })
}

/// Self-checking testbench for the seven-row 32-bit reference sequence.
///
/// # Safety
/// `dut` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pa_emit_reference_testbench(
    dut: *const c_char,
    out: *mut *mut c_char,
) -> PaStatus {
    guard(|| {
        let text = emit_testbench(32, &PAPER_TESTBENCH, read_str(dut, "dut")?)?;
        put(out, into_c_string(text), "out")
    })
}
