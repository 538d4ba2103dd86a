//! C ABI over the `htarray` library.
//!
//! Objects are opaque handles created by `*_new`/`*_load` functions and
//! released with the matching `*_free`. Every fallible call returns an
//! [`HtStatus`]; on failure [`ht_last_error_message`] describes the error
//! for the calling thread. No function unwinds across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use htarray::config::RunConfig;
use htarray::farfield::{BeamMetrics, Simulator};
use htarray::{build_layout, Error, Hemisphere, PolarizationState};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Config file or curve data could not be read or parsed.
    Config = 3,
    /// The request is well formed but violates the model (illegal feed,
    /// inconsistent geometry, ...).
    Domain = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

pub const HT_STATE_X: u32 = 0;
pub const HT_STATE_Y: u32 = 1;
pub const HT_STATE_SLANT45: u32 = 2;

pub const HT_SIDE_FORWARD: u32 = 0;
pub const HT_SIDE_BACKWARD: u32 = 1;

/// Bits of the `sides` output of [`ht_simulator_run`].
pub const HT_BEAM_FORWARD: u32 = 1;
pub const HT_BEAM_BACKWARD: u32 = 2;

/// Opaque run configuration.
pub struct HtConfig {
    inner: RunConfig,
}

/// Opaque simulator with synthesized cell maps.
pub struct HtSimulator {
    inner: Simulator,
}

/// Beam metrics. Levels in dB relative to the co-polar peak; a component
/// that is identically zero reads as negative infinity.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HtBeamMetrics {
    pub peak_theta_deg: f64,
    pub peak_phi_deg: f64,
    pub peak_gain_dbi: f64,
    pub directivity_dbi: f64,
    pub sll_db: f64,
    pub beamwidth_3db_deg: f64,
    pub crosspol_peak_db: f64,
    pub crosspol_at_peak_db: f64,
    pub aperture_efficiency: f64,
}

impl From<&BeamMetrics> for HtBeamMetrics {
    fn from(m: &BeamMetrics) -> Self {
        HtBeamMetrics {
            peak_theta_deg: m.peak_theta_deg,
            peak_phi_deg: m.peak_phi_deg,
            peak_gain_dbi: m.peak_gain_dbi,
            directivity_dbi: m.directivity_dbi,
            sll_db: m.sll_db,
            beamwidth_3db_deg: m.beamwidth_3db_deg,
            crosspol_peak_db: m.crosspol_peak_db,
            crosspol_at_peak_db: m.crosspol_at_peak_db,
            aperture_efficiency: m.aperture_efficiency,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: HtStatus, msg: &str) -> HtStatus {
    set_error(msg);
    status
}

fn from_error(e: &Error) -> HtStatus {
    let status = if e.is_config_error() {
        HtStatus::Config
    } else {
        HtStatus::Domain
    };
    fail(status, &e.to_string())
}

fn guarded(f: impl FnOnce() -> HtStatus) -> HtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == HtStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => fail(HtStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, HtStatus> {
    if p.is_null() {
        return Err(fail(HtStatus::NullPointer, &format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(HtStatus::InvalidArgument, &format!("{name} is not UTF-8")))
}

fn state_arg(state: u32) -> Result<PolarizationState, HtStatus> {
    match state {
        HT_STATE_X => Ok(PolarizationState::X),
        HT_STATE_Y => Ok(PolarizationState::Y),
        HT_STATE_SLANT45 => Ok(PolarizationState::Slant45),
        other => Err(fail(HtStatus::InvalidArgument, &format!("unknown state {other}"))),
    }
}

fn side_arg(side: u32) -> Result<Hemisphere, HtStatus> {
    match side {
        HT_SIDE_FORWARD => Ok(Hemisphere::Forward),
        HT_SIDE_BACKWARD => Ok(Hemisphere::Backward),
        other => Err(fail(HtStatus::InvalidArgument, &format!("unknown side {other}"))),
    }
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into this library from the
/// same thread.
#[no_mangle]
pub extern "C" fn ht_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ht_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Built-in default configuration. Never null.
#[no_mangle]
pub extern "C" fn ht_config_default() -> *mut HtConfig {
    Box::into_raw(Box::new(HtConfig {
        inner: RunConfig::default(),
    }))
}

/// Loads a config file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ht_config_load(path: *const c_char, out: *mut *mut HtConfig) -> HtStatus {
    guarded(|| {
        if out.is_null() {
            return fail(HtStatus::NullPointer, "out is null");
        }
        let path = try_ffi!(str_arg(path, "path"));
        match RunConfig::from_path(Path::new(path)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(HtConfig { inner }));
                HtStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Parses config text; relative curve paths resolve against the working
/// directory.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ht_config_parse(text: *const c_char, out: *mut *mut HtConfig) -> HtStatus {
    guarded(|| {
        if out.is_null() {
            return fail(HtStatus::NullPointer, "out is null");
        }
        let text = try_ffi!(str_arg(text, "text"));
        match RunConfig::parse(text, None) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(HtConfig { inner }));
                HtStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Overrides the far-field grid steps, degrees.
///
/// # Safety
/// `config` must come from this library and not be freed.
#[no_mangle]
pub unsafe extern "C" fn ht_config_set_sampling(
    config: *mut HtConfig,
    theta_step_deg: f64,
    phi_step_deg: f64,
) -> HtStatus {
    guarded(|| {
        let Some(cfg) = config.as_mut() else {
            return fail(HtStatus::NullPointer, "config is null");
        };
        let mut next = cfg.inner.clone();
        next.sim.theta_step_deg = theta_step_deg;
        next.sim.phi_step_deg = phi_step_deg;
        if let Err(e) = next.check() {
            return fail(HtStatus::InvalidArgument, &e.to_string());
        }
        cfg.inner = next;
        HtStatus::Ok
    })
}

/// # Safety
/// `config` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ht_config_free(config: *mut HtConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Builds the layout and synthesizes both cell maps.
///
/// # Safety
/// `config` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ht_simulator_new(config: *const HtConfig, out: *mut *mut HtSimulator) -> HtStatus {
    guarded(|| {
        if out.is_null() {
            return fail(HtStatus::NullPointer, "out is null");
        }
        let Some(cfg) = config.as_ref() else {
            return fail(HtStatus::NullPointer, "config is null");
        };
        let built = build_layout(&cfg.inner.layout).and_then(|l| Simulator::new(l, cfg.inner.sim.clone()));
        match built {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(HtSimulator { inner }));
                HtStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `sim` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ht_simulator_free(sim: *mut HtSimulator) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Cell counts along x and y of one aperture.
///
/// # Safety
/// `sim` must come from this library; `nx` and `ny` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ht_simulator_aperture_size(
    sim: *const HtSimulator,
    side: u32,
    nx: *mut usize,
    ny: *mut usize,
) -> HtStatus {
    guarded(|| {
        let Some(sim) = sim.as_ref() else {
            return fail(HtStatus::NullPointer, "sim is null");
        };
        if nx.is_null() || ny.is_null() {
            return fail(HtStatus::NullPointer, "nx or ny is null");
        }
        let ap = &sim.inner.cells(try_ffi!(side_arg(side))).aperture;
        *nx = ap.nx;
        *ny = ap.ny;
        HtStatus::Ok
    })
}

/// Copies the compensation phases (degrees, `[0, 360)`) of one aperture
/// into `buf`, element `(i, j)` at index `i * ny + j`. `len` must be at
/// least `nx * ny`.
///
/// # Safety
/// `sim` must come from this library; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ht_simulator_phase_map(
    sim: *const HtSimulator,
    side: u32,
    buf: *mut f64,
    len: usize,
) -> HtStatus {
    guarded(|| {
        let Some(sim) = sim.as_ref() else {
            return fail(HtStatus::NullPointer, "sim is null");
        };
        if buf.is_null() {
            return fail(HtStatus::NullPointer, "buf is null");
        }
        let phases = &sim.inner.cells(try_ffi!(side_arg(side))).target_deg;
        if len < phases.len() {
            return fail(
                HtStatus::BufferTooSmall,
                &format!("buffer holds {len} values, {} needed", phases.len()),
            );
        }
        ptr::copy_nonoverlapping(phases.as_ptr(), buf, phases.len());
        HtStatus::Ok
    })
}

/// Simulates one feed in one state. `sides` receives a mask of
/// `HT_BEAM_FORWARD` / `HT_BEAM_BACKWARD`; the matching metrics are
/// written to `forward` / `backward` (either may be null if unwanted).
///
/// # Safety
/// `sim` must come from this library, `feed_id` must be NUL-terminated,
/// non-null output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ht_simulator_run(
    sim: *const HtSimulator,
    state: u32,
    feed_id: *const c_char,
    frequency_ghz: f64,
    forward: *mut HtBeamMetrics,
    backward: *mut HtBeamMetrics,
    sides: *mut u32,
) -> HtStatus {
    guarded(|| {
        let Some(sim) = sim.as_ref() else {
            return fail(HtStatus::NullPointer, "sim is null");
        };
        let state = try_ffi!(state_arg(state));
        let feed = try_ffi!(str_arg(feed_id, "feed_id"));
        let result = match sim.inner.run(state, feed, frequency_ghz) {
            Ok(r) => r,
            Err(e) => return from_error(&e),
        };
        let mut mask = 0;
        if let Some(b) = &result.forward {
            mask |= HT_BEAM_FORWARD;
            if !forward.is_null() {
                *forward = (&b.metrics).into();
            }
        }
        if let Some(b) = &result.backward {
            mask |= HT_BEAM_BACKWARD;
            if !backward.is_null() {
                *backward = (&b.metrics).into();
            }
        }
        if !sides.is_null() {
            *sides = mask;
        }
        HtStatus::Ok
    })
}
