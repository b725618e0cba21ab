//! C ABI over the `photonpress` core.
//!
//! Objects cross the boundary as opaque handles created by `pp_*_load` or
//! `pp_*_library` and released with the matching `pp_*_free`. Every fallible
//! call returns a [`PpStatus`]; on failure the message is available from
//! [`pp_last_error_message`] on the same thread. Arrays are passed as a
//! pointer plus an element count. Handles may be shared between threads for
//! read-only calls.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use photonpress::design::{library, DesignTemplate, Vec3};
use photonpress::invdesign::{Scenario, Storage};
use photonpress::proxy::ProxyParams;
use photonpress::srp::{estimate_for_design, LightingCondition, TracerConfig};
use photonpress::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Io = 4,
    Parse = 5,
    InvalidTemplate = 6,
    ProxyMismatch = 7,
    NonFinite = 8,
    BelowSurface = 9,
    NotDifferentiable = 10,
    Other = 11,
    Panic = 12,
}

impl From<&Error> for PpStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::OutOfBounds { .. } => PpStatus::InvalidArgument,
            Error::Dimension { .. } => PpStatus::Dimension,
            Error::Io { .. } => PpStatus::Io,
            Error::Parse { .. } | Error::Json(_) => PpStatus::Parse,
            Error::InvalidTemplate(_) | Error::DegenerateMesh => PpStatus::InvalidTemplate,
            Error::ProxyMismatch(_) => PpStatus::ProxyMismatch,
            Error::NonFinite { .. } | Error::TrainingDiverged { .. } => PpStatus::NonFinite,
            Error::BelowSurface { .. } => PpStatus::BelowSurface,
            Error::NotDifferentiable(_) => PpStatus::NotDifferentiable,
            Error::Singular(_) => PpStatus::Other,
        }
    }
}

/// Parametric spacecraft design.
pub struct PpTemplate(DesignTemplate);

/// Trained force and torque proxy.
pub struct PpProxy(ProxyParams);

/// Loaded optimization scenario.
pub struct PpScenario(Scenario);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(PpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(PpStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(PpStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PpStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PpStatus::Ok,
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PpStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(PpStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn slice_out<'a>(p: *mut f64, n: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if n == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<(), Fail> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { what, expected, got }.into())
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL,
/// or 0 when the last call succeeded.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            0
        }
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Built-in template by name (`box-wing`, `shape-family`, `reflectance-cube`,
/// `absorber-plate`, `cube`, `mirror-plate`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pp_template_library(name: *const c_char, out: *mut *mut PpTemplate) -> PpStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let t = library::by_name(name).ok_or_else(|| {
            Fail(
                PpStatus::InvalidArgument,
                format!("unknown template `{name}` (known: {})", library::NAMES.join(", ")),
            )
        })?;
        put(out, Box::into_raw(Box::new(PpTemplate(t))), "out")
    })
}

/// Template from a JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pp_template_load(path: *const c_char, out: *mut *mut PpTemplate) -> PpStatus {
    guard(|| {
        let t = DesignTemplate::load(str_arg(path, "path")?)?;
        put(out, Box::into_raw(Box::new(PpTemplate(t))), "out")
    })
}

/// Number of design parameters; 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live template handle.
#[no_mangle]
pub unsafe extern "C" fn pp_template_n_params(t: *const PpTemplate) -> usize {
    t.as_ref().map_or(0, |t| t.0.n_params())
}

/// Lower and upper bound of every design parameter, interleaved
/// (`lo0, hi0, lo1, hi1, ...`); `len` must be twice the parameter count.
///
/// # Safety
/// `t` must be a live template handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pp_template_bounds(t: *const PpTemplate, out: *mut f64, len: usize) -> PpStatus {
    guard(|| {
        let t = handle(t, "template")?;
        check_len("bounds buffer", 2 * t.0.n_params(), len)?;
        let out = slice_out(out, len, "out")?;
        for (k, b) in t.0.param_bounds.iter().enumerate() {
            out[2 * k] = b[0];
            out[2 * k + 1] = b[1];
        }
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pp_template_free(t: *mut PpTemplate) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Monte-Carlo force [N] and torque [N m] on the design `theta` lit from
/// body-frame direction `omega` (pointing towards the sun) at `irradiance`
/// W/m². Deterministic for a given `seed`.
///
/// # Safety
/// `t` must be a live handle; `theta` must hold `n_theta` doubles; `omega`,
/// `force` and `torque` must each hold 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn pp_estimate_force_torque(
    t: *const PpTemplate,
    theta: *const f64,
    n_theta: usize,
    omega: *const f64,
    irradiance: f64,
    samples: usize,
    seed: u64,
    force: *mut f64,
    torque: *mut f64,
) -> PpStatus {
    guard(|| {
        let t = handle(t, "template")?;
        let theta = slice_arg(theta, n_theta, "theta")?;
        let w = slice_arg(omega, 3, "omega")?;
        let light = LightingCondition::new(Vec3::new(w[0], w[1], w[2]), irradiance)?;
        let cfg = TracerConfig {
            samples,
            seed,
            ..TracerConfig::default()
        };
        let s = estimate_for_design(&t.0, theta, &light, &cfg)?;
        slice_out(force, 3, "force")?.copy_from_slice(&s.force);
        slice_out(torque, 3, "torque")?.copy_from_slice(&s.torque);
        Ok(())
    })
}

/// Proxy weights from a JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pp_proxy_load(path: *const c_char, out: *mut *mut PpProxy) -> PpStatus {
    guard(|| {
        let p = ProxyParams::load(PathBuf::from(str_arg(path, "path")?))?;
        put(out, Box::into_raw(Box::new(PpProxy(p))), "out")
    })
}

/// Fails with `ProxyMismatch` unless the proxy was trained on `t`.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn pp_proxy_check_template(p: *const PpProxy, t: *const PpTemplate) -> PpStatus {
    guard(|| Ok(handle(p, "proxy")?.0.check_template(&handle(t, "template")?.0)?))
}

/// # Safety
/// `p` must be null or a live proxy handle.
#[no_mangle]
pub unsafe extern "C" fn pp_proxy_n_params(p: *const PpProxy) -> usize {
    p.as_ref().map_or(0, |p| p.0.n_params())
}

/// Predicted body-frame force and torque at the proxy's reference irradiance.
///
/// # Safety
/// `p` must be live; `omega`, `force`, `torque` hold 3 doubles each and
/// `theta` holds `n_theta`.
#[no_mangle]
pub unsafe extern "C" fn pp_proxy_evaluate(
    p: *const PpProxy,
    omega: *const f64,
    theta: *const f64,
    n_theta: usize,
    force: *mut f64,
    torque: *mut f64,
) -> PpStatus {
    guard(|| {
        let p = handle(p, "proxy")?;
        let w = slice_arg(omega, 3, "omega")?;
        let (f, t) =
            p.0.forward(&Vec3::new(w[0], w[1], w[2]), slice_arg(theta, n_theta, "theta")?)?;
        slice_out(force, 3, "force")?.copy_from_slice(f.as_slice());
        slice_out(torque, 3, "torque")?.copy_from_slice(t.as_slice());
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pp_proxy_free(p: *mut PpProxy) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Scenario JSON; relative references resolve against the file's directory.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pp_scenario_load(path: *const c_char, out: *mut *mut PpScenario) -> PpStatus {
    guard(|| {
        let s = Scenario::load(str_arg(path, "path")?)?;
        put(out, Box::into_raw(Box::new(PpScenario(s))), "out")
    })
}

/// Number of free parameters.
///
/// # Safety
/// `s` must be null or a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn pp_scenario_n_params(s: *const PpScenario) -> usize {
    s.as_ref().map_or(0, |s| s.0.problem.dim())
}

/// The scenario's starting parameters.
///
/// # Safety
/// `s` must be live; `x` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn pp_scenario_initial(s: *const PpScenario, x: *mut f64, n: usize) -> PpStatus {
    guard(|| {
        let s = handle(s, "scenario")?;
        check_len("x", s.0.x_init.len(), n)?;
        slice_out(x, n, "x")?.copy_from_slice(&s.0.x_init);
        Ok(())
    })
}

/// Total loss over all cases at parameters `x`.
///
/// # Safety
/// `s` must be live; `x` must hold `n` doubles; `loss` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pp_scenario_loss(s: *const PpScenario, x: *const f64, n: usize, loss: *mut f64) -> PpStatus {
    guard(|| {
        let s = handle(s, "scenario")?;
        check_len("x", s.0.problem.dim(), n)?;
        let l = s.0.problem.loss(slice_arg(x, n, "x")?)?;
        put(loss, l, "loss")
    })
}

/// Loss and its adjoint gradient with respect to `x`.
///
/// # Safety
/// `s` must be live; `x` and `grad` must hold `n` doubles; `loss` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pp_scenario_gradient(
    s: *const PpScenario,
    x: *const f64,
    n: usize,
    loss: *mut f64,
    grad: *mut f64,
) -> PpStatus {
    guard(|| {
        let s = handle(s, "scenario")?;
        check_len("x", s.0.problem.dim(), n)?;
        let r = s.0.problem.gradient(slice_arg(x, n, "x")?, Storage::default())?;
        slice_out(grad, n, "grad")?.copy_from_slice(&r.gradient);
        put(loss, r.loss, "loss")
    })
}

/// Run the scenario's optimizer; writes the best parameters and loss.
///
/// # Safety
/// `s` must be live; `x_best` must hold `n` doubles; `loss` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pp_scenario_optimize(s: *const PpScenario, x_best: *mut f64, n: usize, loss: *mut f64) -> PpStatus {
    guard(|| {
        let s = handle(s, "scenario")?;
        check_len("x_best", s.0.problem.dim(), n)?;
        let r = s.0.run()?;
        slice_out(x_best, n, "x_best")?.copy_from_slice(&r.x_best);
        put(loss, r.optimization.loss, "loss")
    })
}

/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pp_scenario_free(s: *mut PpScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
