//! C interface to the atom-laser simulator.
//!
//! Every fallible call returns an [`AlStatus`]. On failure the message is
//! available from [`al_last_error`] on the same thread. Handles are opaque and
//! must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use atomlaser::config::ScenarioConfig;
use atomlaser::grids::{BandGrid, MomentumGrid};
use atomlaser::model::{default_params, opo_default_params, PhysicalParams, ReducedModel};
use atomlaser::observables::{
    build_kernels, epr_inference, flux_difference_variance, point_flux, v_of_j_from, Carrier, EprWindow, Occupation,
};
use atomlaser::opo::{initial_opo, OpoModel, OpoPropagator, OpoSolution};
use atomlaser::propagate::Integrator;
use atomlaser::scenario;
use atomlaser::single::{initial_solution, SingleModeSolution, SingleProbePropagator};
use atomlaser::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The integrator hit its stability bound or diverged.
    Numerical = 3,
    Io = 4,
    Panic = 5,
}

/// Physical parameters in SI units.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlParams {
    pub m: f64,
    pub omega_t: f64,
    pub k_kick: f64,
    pub omega: f64,
    pub omega_a: f64,
    pub chi_beta: f64,
    pub pump_detuning_matched: bool,
}

/// Momentum grid per band and time stepping.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlGrid {
    pub n: usize,
    pub k_halfwidth: f64,
    pub dt: f64,
    pub interaction_picture: bool,
}

/// Probe-state independent flux data; `v_of_j` is NaN where the flux vanishes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlPointFlux {
    pub x: f64,
    pub j_g: f64,
    pub cross: f64,
    pub v_of_j: f64,
}

/// Flux correlations of the twin beams at `x0` and `-x0`; ratios are NaN for a zero baseline.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlFluxDifference {
    pub outward_variance: f64,
    pub signed_variance: f64,
    pub baseline: f64,
    pub ratio: f64,
    pub signed_ratio: f64,
}

/// Quadrature variances of the window modes; inferred values are NaN when undefined.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlEpr {
    pub vx_minus: f64,
    pub vy_minus: f64,
    pub vx_plus: f64,
    pub vy_plus: f64,
    pub vinf_x_minus: f64,
    pub vinf_y_minus: f64,
    pub product: f64,
}

pub struct AlSingleProbe {
    prop: SingleProbePropagator,
    sol: SingleModeSolution,
    mass: f64,
}

pub struct AlTwinBeam {
    prop: OpoPropagator,
    sol: OpoSolution,
    params: PhysicalParams,
}

struct Failure(AlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            _ if e.is_numerical() => AlStatus::Numerical,
            Error::Io { .. } => AlStatus::Io,
            _ => AlStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AlStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            AlStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(AlStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(value);
    Ok(())
}

fn or_nan(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

impl From<PhysicalParams> for AlParams {
    fn from(p: PhysicalParams) -> Self {
        AlParams {
            m: p.m,
            omega_t: p.omega_t,
            k_kick: p.k_kick,
            omega: p.omega,
            omega_a: p.omega_a,
            chi_beta: p.chi_beta,
            pump_detuning_matched: p.pump_detuning_matched,
        }
    }
}

impl From<AlParams> for PhysicalParams {
    fn from(p: AlParams) -> Self {
        PhysicalParams {
            m: p.m,
            omega_t: p.omega_t,
            k_kick: p.k_kick,
            omega: p.omega,
            omega_a: p.omega_a,
            chi_beta: p.chi_beta,
            pump_detuning_matched: p.pump_detuning_matched,
        }
    }
}

impl AlGrid {
    fn integrator(&self) -> Integrator {
        if self.interaction_picture {
            Integrator::interaction(self.dt)
        } else {
            Integrator::lab(self.dt)
        }
    }
}

fn check_target(now: f64, t: f64) -> Result<(), Failure> {
    if t.is_finite() && t >= now {
        Ok(())
    } else {
        Err(Failure(
            AlStatus::InvalidArgument,
            format!("target time {t} is before the current time {now}"),
        ))
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn al_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn al_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn al_default_params(out: *mut AlParams) -> AlStatus {
    guard(|| write(out, default_params().into()))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn al_opo_default_params(out: *mut AlParams) -> AlStatus {
    guard(|| write(out, opo_default_params().into()))
}

/// Runs the scenario described by a config file and writes its CSV files.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn al_run_config(path: *const c_char) -> AlStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|e| Failure(AlStatus::InvalidArgument, format!("path is not UTF-8: {e}")))?;
        let cfg = ScenarioConfig::load(Path::new(path))?;
        scenario::run(&cfg)?;
        Ok(())
    })
}

/// Creates a single-probe system at `t = 0` on a band centred on the kick.
///
/// # Safety
/// `params` and `grid` must be readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn al_single_new(
    params: *const AlParams,
    grid: *const AlGrid,
    out: *mut *mut AlSingleProbe,
) -> AlStatus {
    guard(|| {
        let params: PhysicalParams = (*deref(params, "params")?).into();
        let g = deref(grid, "grid")?;
        let model = ReducedModel::new(params)?;
        let mgrid = MomentumGrid::new(g.n, params.k_kick, g.k_halfwidth)?;
        let prop = SingleProbePropagator::new(&model, &mgrid, g.integrator())?;
        let handle = AlSingleProbe {
            prop,
            sol: initial_solution(&mgrid),
            mass: params.m,
        };
        write(out, Box::into_raw(Box::new(handle)))
    })
}

/// # Safety
/// `handle` must come from [`al_single_new`] and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn al_single_free(handle: *mut AlSingleProbe) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Advances to time `t`, which must not precede the current time.
///
/// # Safety
/// `handle` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn al_single_advance(handle: *mut AlSingleProbe, t: f64) -> AlStatus {
    guard(|| {
        let h = deref_mut(handle, "handle")?;
        check_target(h.sol.t(), t)?;
        h.prop.advance_to(&mut h.sol, t)?;
        Ok(())
    })
}

/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn al_single_time(handle: *const AlSingleProbe, out: *mut f64) -> AlStatus {
    guard(|| write(out, deref(handle, "handle")?.sol.t()))
}

/// Fraction of the probe converted to free atoms, `int |G|^2`.
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn al_single_outcoupled_fraction(handle: *const AlSingleProbe, out: *mut f64) -> AlStatus {
    guard(|| write(out, deref(handle, "handle")?.sol.g_field().norm_sqr()))
}

/// Largest entry of `U^dagger U - I` for the mode-function matrix.
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn al_single_unitarity_error(handle: *const AlSingleProbe, out: *mut f64) -> AlStatus {
    guard(|| write(out, deref(handle, "handle")?.sol.unitarity_error()))
}

/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn al_single_point_flux(handle: *const AlSingleProbe, x: f64, out: *mut AlPointFlux) -> AlStatus {
    guard(|| {
        let h = deref(handle, "handle")?;
        let pf = point_flux(&h.sol, h.mass, x)?;
        write(
            out,
            AlPointFlux {
                x: pf.x,
                j_g: pf.j_g,
                cross: pf.cross,
                v_of_j: or_nan(v_of_j_from(&pf)),
            },
        )
    })
}

/// Creates a twin-beam system at `t = 0` with `grid.n` samples per beam.
///
/// # Safety
/// `params` and `grid` must be readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn al_twin_new(
    params: *const AlParams,
    grid: *const AlGrid,
    out: *mut *mut AlTwinBeam,
) -> AlStatus {
    guard(|| {
        let params: PhysicalParams = (*deref(params, "params")?).into();
        let g = deref(grid, "grid")?;
        let model = OpoModel::new(params)?;
        let bands = BandGrid::twin(g.n, params.k_kick, g.k_halfwidth)?;
        let prop = OpoPropagator::new(&model, &bands, g.integrator())?;
        let handle = AlTwinBeam {
            prop,
            sol: initial_opo(&bands),
            params,
        };
        write(out, Box::into_raw(Box::new(handle)))
    })
}

/// # Safety
/// `handle` must come from [`al_twin_new`] and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn al_twin_free(handle: *mut AlTwinBeam) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `handle` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn al_twin_advance(handle: *mut AlTwinBeam, t: f64) -> AlStatus {
    guard(|| {
        let h = deref_mut(handle, "handle")?;
        check_target(h.sol.t(), t)?;
        h.prop.advance_to(&mut h.sol, t)?;
        Ok(())
    })
}

/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn al_twin_time(handle: *const AlTwinBeam, out: *mut f64) -> AlStatus {
    guard(|| write(out, deref(handle, "handle")?.sol.t()))
}

/// Largest violation of the Bogoliubov identities.
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn al_twin_bogoliubov_error(handle: *const AlTwinBeam, out: *mut f64) -> AlStatus {
    guard(|| write(out, deref(handle, "handle")?.sol.bogoliubov_error()))
}

/// Flux correlations at `x0` and `-x0` for vacuum input.
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn al_twin_flux_difference(
    handle: *const AlTwinBeam,
    x0: f64,
    out: *mut AlFluxDifference,
) -> AlStatus {
    guard(|| {
        let h = deref(handle, "handle")?;
        let k = build_kernels(&h.sol, &[x0, -x0], &Occupation::vacuum(), h.params.m)?;
        let fd = flux_difference_variance(&k, x0)?;
        write(
            out,
            AlFluxDifference {
                outward_variance: fd.outward_variance,
                signed_variance: fd.signed_variance,
                baseline: fd.baseline,
                ratio: or_nan(fd.ratio),
                signed_ratio: or_nan(fd.signed_ratio),
            },
        )
    })
}

/// Quadrature correlations of the windows `[x2, x1]` and `[-x1, -x2]` for vacuum input.
/// `directional` selects the carrier `e^{+-ikx}` per beam instead of `e^{ikx}` for both.
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn al_twin_epr(
    handle: *const AlTwinBeam,
    x1: f64,
    x2: f64,
    directional: bool,
    out: *mut AlEpr,
) -> AlStatus {
    guard(|| {
        let h = deref(handle, "handle")?;
        let carrier = if directional {
            Carrier::Directional
        } else {
            Carrier::Literal
        };
        let window = EprWindow::new(x1, x2, h.params.k_kick, h.params.omega_a, carrier)?;
        let e = epr_inference(&h.sol, &window, &Occupation::vacuum())?;
        write(
            out,
            AlEpr {
                vx_minus: e.vx_minus,
                vy_minus: e.vy_minus,
                vx_plus: e.vx_plus,
                vy_plus: e.vy_plus,
                vinf_x_minus: or_nan(e.vinf_x_minus),
                vinf_y_minus: or_nan(e.vinf_y_minus),
                product: or_nan(e.product),
            },
        )
    })
}
