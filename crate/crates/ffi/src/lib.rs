//! C ABI over `clockwork`.
//!
//! Every function returns a [`CwStatus`]; results come back through out
//! pointers. On failure a message is kept per thread and can be read with
//! [`cw_last_error`]. Trajectories and measurement sets are opaque handles
//! that the caller releases with the matching `_free` function. Panics never
//! cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use clockwork::asymptotics::{self, AsymptoticSolution, Region};
use clockwork::calibration::{self, FitOptions, Measurement};
use clockwork::kinetics::{self, DimensionlessGroups, InitialConcentrations, RateConstants};
use clockwork::ode::{self, DimensionalTrajectory, DimensionlessTrajectory, OutputGrid, SolveError, SolverConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CwStatus {
    Ok = 0,
    NullPointer = 1,
    /// Parameter outside its domain, or malformed input.
    InvalidArgument = 2,
    /// The solver or optimiser did not finish. Partial results may still be
    /// returned.
    Numerical = 3,
    /// The requested event or sample does not exist.
    NotFound = 4,
    Panic = 5,
}

/// Integrated trajectory, either `(beta, gamma)` against `tau` or `(a, b, c)`
/// against seconds.
pub enum CwTrajectory {
    Dimensionless(DimensionlessTrajectory),
    Dimensional(DimensionalTrajectory),
}

/// Switchover-time measurements for fitting.
pub struct CwMeasurements(Vec<Measurement>);

/// Solver settings. Zero fields take the library defaults; `samples = 0`
/// keeps one sample per accepted step.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CwSolverOptions {
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub samples: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CwFitResult {
    pub k0: f64,
    pub phi: f64,
    pub sse: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: impl ToString) {
    let mut bytes = msg.to_string().into_bytes();
    bytes.retain(|&b| b != 0);
    bytes.push(0);
    LAST_ERROR.with(|e| *e.borrow_mut() = bytes);
}

fn fail(status: CwStatus, msg: impl ToString) -> CwStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> CwStatus) -> CwStatus {
    LAST_ERROR.with(|e| e.borrow_mut().clear());
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(CwStatus::Panic, format!("panic: {msg}"))
        }
    }
}

macro_rules! try_arg {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return fail(CwStatus::InvalidArgument, err),
        }
    };
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(CwStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length excluding the NUL.
/// Returns 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cw_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let n = msg.len().saturating_sub(1);
        if !buf.is_null() && len > 0 {
            let copy = n.min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, copy);
            *buf.add(copy) = 0;
        }
        n
    })
}

fn solver_config(opts: &CwSolverOptions) -> Result<SolverConfig, String> {
    let mut cfg = SolverConfig::new(opts.t_end);
    if opts.rel_tol != 0.0 || opts.abs_tol != 0.0 {
        let rel = if opts.rel_tol == 0.0 { ode::SolverConfig::DEFAULT_REL_TOL } else { opts.rel_tol };
        let abs = if opts.abs_tol == 0.0 { ode::SolverConfig::DEFAULT_ABS_TOL } else { opts.abs_tol };
        cfg = cfg.with_tolerances(rel, abs);
    }
    if opts.max_steps > 0 {
        cfg.max_steps = opts.max_steps;
    }
    if opts.samples > 0 {
        cfg = cfg.with_output(OutputGrid::Uniform(opts.samples));
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

/// Solver failures still hand back the partial trajectory.
fn finish<const N: usize>(
    result: Result<clockwork::ode::Trajectory<N>, SolveError<N>>,
    wrap: fn(clockwork::ode::Trajectory<N>) -> CwTrajectory,
    out: *mut *mut CwTrajectory,
) -> CwStatus {
    match result {
        Ok(tr) => {
            unsafe { *out = Box::into_raw(Box::new(wrap(tr))) };
            CwStatus::Ok
        }
        Err(SolveError::Config(e)) => fail(CwStatus::InvalidArgument, e),
        Err(err) => {
            let msg = err.to_string();
            if let Some(p) = err.partial() {
                unsafe { *out = Box::into_raw(Box::new(wrap(p.clone()))) };
            }
            fail(CwStatus::Numerical, msg)
        }
    }
}

/// Integrates the dimensionless system from `beta = phi`, `gamma = 1`.
///
/// On `CW_STATUS_NUMERICAL` `*out` holds the partial trajectory, which the
/// caller must still free.
///
/// # Safety
/// `opts` must point to a valid options struct and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cw_integrate(
    eps: f64,
    rho: f64,
    phi: f64,
    opts: *const CwSolverOptions,
    out: *mut *mut CwTrajectory,
) -> CwStatus {
    guard(|| {
        non_null!(opts, out);
        *out = ptr::null_mut();
        let groups = try_arg!(DimensionlessGroups::new(eps, rho, phi));
        let cfg = try_arg!(solver_config(&*opts));
        finish(ode::integrate(&groups, &cfg), CwTrajectory::Dimensionless, out)
    })
}

/// Integrates the full system `(a, b, c)` in seconds.
///
/// # Safety
/// As for [`cw_integrate`].
#[no_mangle]
pub unsafe extern "C" fn cw_integrate_dimensional(
    k0: f64,
    k1: f64,
    a0: f64,
    b0: f64,
    c0: f64,
    opts: *const CwSolverOptions,
    out: *mut *mut CwTrajectory,
) -> CwStatus {
    guard(|| {
        non_null!(opts, out);
        *out = ptr::null_mut();
        let rates = try_arg!(RateConstants::new(k0, k1));
        let init = try_arg!(InitialConcentrations::new(a0, b0, c0));
        let cfg = try_arg!(solver_config(&*opts));
        finish(ode::integrate_dimensional(&rates, &init, &cfg), CwTrajectory::Dimensional, out)
    })
}

/// # Safety
/// `traj` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cw_trajectory_free(traj: *mut CwTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of state components: 2 or 3.
///
/// # Safety
/// `traj` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cw_trajectory_dim(traj: *const CwTrajectory) -> usize {
    match traj.as_ref() {
        Some(CwTrajectory::Dimensionless(_)) => 2,
        Some(CwTrajectory::Dimensional(_)) => 3,
        None => 0,
    }
}

/// # Safety
/// `traj` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cw_trajectory_len(traj: *const CwTrajectory) -> usize {
    match traj.as_ref() {
        Some(CwTrajectory::Dimensionless(t)) => t.len(),
        Some(CwTrajectory::Dimensional(t)) => t.len(),
        None => 0,
    }
}

fn write_state(y: &[f64], out: *mut f64) {
    unsafe { ptr::copy_nonoverlapping(y.as_ptr(), out, y.len()) };
}

/// Sample `index`: its time in `*t` and state in `y[0..dim]`.
///
/// # Safety
/// `traj` must be a live handle, `t` writable and `y` must have room for
/// `cw_trajectory_dim(traj)` values.
#[no_mangle]
pub unsafe extern "C" fn cw_trajectory_sample(
    traj: *const CwTrajectory,
    index: usize,
    t: *mut f64,
    y: *mut f64,
) -> CwStatus {
    guard(|| {
        non_null!(traj, t, y);
        let found = match &*traj {
            CwTrajectory::Dimensionless(tr) => tr.samples().get(index).map(|s| {
                write_state(&s.y, y);
                s.t
            }),
            CwTrajectory::Dimensional(tr) => tr.samples().get(index).map(|s| {
                write_state(&s.y, y);
                s.t
            }),
        };
        match found {
            Some(time) => {
                *t = time;
                CwStatus::Ok
            }
            None => fail(CwStatus::NotFound, format!("sample {index} out of range")),
        }
    })
}

/// Dense-output state at time `t`, written to `y[0..dim]`.
///
/// # Safety
/// As for [`cw_trajectory_sample`].
#[no_mangle]
pub unsafe extern "C" fn cw_trajectory_interpolate(traj: *const CwTrajectory, t: f64, y: *mut f64) -> CwStatus {
    guard(|| {
        non_null!(traj, y);
        let ok = match &*traj {
            CwTrajectory::Dimensionless(tr) => tr.interpolate(t).map(|v| write_state(&v, y)),
            CwTrajectory::Dimensional(tr) => tr.interpolate(t).map(|v| write_state(&v, y)),
        };
        match ok {
            Some(()) => CwStatus::Ok,
            None => fail(CwStatus::NotFound, format!("t = {t} outside the trajectory")),
        }
    })
}

/// First upward crossing of `beta = threshold` (or `b = threshold m0` for a
/// dimensional trajectory). `CW_STATUS_NOT_FOUND` if there is none.
///
/// # Safety
/// `traj` must be a live handle and `time` writable.
#[no_mangle]
pub unsafe extern "C" fn cw_trajectory_switchover(
    traj: *const CwTrajectory,
    threshold: f64,
    time: *mut f64,
) -> CwStatus {
    guard(|| {
        non_null!(traj, time);
        let ev = match &*traj {
            CwTrajectory::Dimensionless(tr) => ode::detect_switchover(tr, threshold),
            CwTrajectory::Dimensional(tr) => ode::detect_switchover_dimensional(tr, threshold),
        };
        match ev {
            Some(e) => {
                *time = e.time;
                CwStatus::Ok
            }
            None => fail(CwStatus::NotFound, format!("no crossing of {threshold}")),
        }
    })
}

/// Predicted switchover time in seconds, `(c0 - b0) / (k0 m0^2)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_switchover_time(
    k0: f64,
    k1: f64,
    a0: f64,
    b0: f64,
    c0: f64,
    out: *mut f64,
) -> CwStatus {
    guard(|| {
        non_null!(out);
        let rates = try_arg!(RateConstants::new(k0, k1));
        let init = try_arg!(InitialConcentrations::new(a0, b0, c0));
        *out = try_arg!(asymptotics::switchover_time(&rates, &init));
        CwStatus::Ok
    })
}

/// Same prediction from a measurement's `c0`, `m0` and fitted `(k0, phi)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_predict(c0: f64, m0: f64, k0: f64, phi: f64, out: *mut f64) -> CwStatus {
    guard(|| {
        non_null!(out);
        if !(c0 > 0.0 && m0 > 0.0 && k0 > 0.0 && phi.is_finite()) {
            return fail(CwStatus::InvalidArgument, "c0, m0 and k0 must be positive, phi finite");
        }
        *out = calibration::predict_raw(c0, m0, k0, phi);
        CwStatus::Ok
    })
}

/// Asymptotic approximation at `tau`. `region` 0 picks the region from the
/// default classifier; 1 to 4 force region I to IV. The region used is
/// written to `*region_out` (1 to 4) when that pointer is non-null.
///
/// # Safety
/// `beta` and `gamma` must be writable; `region_out` may be null.
#[no_mangle]
pub unsafe extern "C" fn cw_asymptotic_eval(
    eps: f64,
    rho: f64,
    phi: f64,
    tau: f64,
    region: u32,
    region_out: *mut u32,
    beta: *mut f64,
    gamma: *mut f64,
) -> CwStatus {
    guard(|| {
        non_null!(beta, gamma);
        let groups = try_arg!(DimensionlessGroups::new(eps, rho, phi));
        let sol = try_arg!(AsymptoticSolution::new(groups));
        let (r, (b, g)) = match region {
            0 => {
                let p = try_arg!(sol.eval(tau));
                (p.region, (p.beta, p.gamma))
            }
            1..=4 => {
                let r = Region::ALL[region as usize - 1];
                (r, try_arg!(sol.eval_region(r, tau)))
            }
            _ => return fail(CwStatus::InvalidArgument, format!("region {region} (expected 0 to 4)")),
        };
        *beta = b;
        *gamma = g;
        if !region_out.is_null() {
            *region_out = Region::ALL.iter().position(|&x| x == r).unwrap() as u32 + 1;
        }
        CwStatus::Ok
    })
}

/// Dimensionless switchover time `(rho^-2 - phi/rho) / eps`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_dimensionless_switchover_time(eps: f64, rho: f64, phi: f64, out: *mut f64) -> CwStatus {
    guard(|| {
        non_null!(out);
        let groups = try_arg!(DimensionlessGroups::new(eps, rho, phi));
        *out = try_arg!(asymptotics::dimensionless_switchover_time(&groups));
        CwStatus::Ok
    })
}

/// Jacobian eigenvalues at the equilibrium `(1/2, 0)`, into `out[0..2]`.
///
/// # Safety
/// `out` must have room for two values.
#[no_mangle]
pub unsafe extern "C" fn cw_equilibrium_eigenvalues(eps: f64, rho: f64, phi: f64, out: *mut f64) -> CwStatus {
    guard(|| {
        non_null!(out);
        let groups = try_arg!(DimensionlessGroups::new(eps, rho, phi));
        let eq = kinetics::equilibrium_analysis(&groups);
        write_state(&[eq.modes[0].value, eq.modes[1].value], out);
        CwStatus::Ok
    })
}

/// Quasi-steady `beta` for a given `gamma` in `[0, 1]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_quasi_steady_beta(eps: f64, rho: f64, phi: f64, gamma: f64, out: *mut f64) -> CwStatus {
    guard(|| {
        non_null!(out);
        let groups = try_arg!(DimensionlessGroups::new(eps, rho, phi));
        *out = try_arg!(kinetics::quasi_steady_beta(gamma, &groups));
        CwStatus::Ok
    })
}

/// Empty measurement set.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_measurements_new(out: *mut *mut CwMeasurements) -> CwStatus {
    guard(|| {
        non_null!(out);
        *out = Box::into_raw(Box::new(CwMeasurements(Vec::new())));
        CwStatus::Ok
    })
}

/// The bundled vitamin C clock data set.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_measurements_bundled(out: *mut *mut CwMeasurements) -> CwStatus {
    guard(|| {
        non_null!(out);
        *out = Box::into_raw(Box::new(CwMeasurements(calibration::table1())));
        CwStatus::Ok
    })
}

/// Parses CSV text with header `series_id,c0_mol_l,m0_mol_l,t_sw_s`.
///
/// # Safety
/// `csv` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cw_measurements_parse(csv: *const c_char, out: *mut *mut CwMeasurements) -> CwStatus {
    guard(|| {
        non_null!(csv, out);
        *out = ptr::null_mut();
        let text = try_arg!(CStr::from_ptr(csv).to_str());
        let data = try_arg!(calibration::parse_measurements(text));
        *out = Box::into_raw(Box::new(CwMeasurements(data)));
        CwStatus::Ok
    })
}

/// Appends one measurement.
///
/// # Safety
/// `set` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cw_measurements_push(set: *mut CwMeasurements, c0: f64, m0: f64, t_sw: f64) -> CwStatus {
    guard(|| {
        non_null!(set);
        if !(c0 > 0.0 && m0 > 0.0 && t_sw.is_finite() && t_sw >= 0.0) {
            return fail(CwStatus::InvalidArgument, "c0 and m0 must be positive, t_sw finite and non-negative");
        }
        (*set).0.push(Measurement {
            series_id: String::new(),
            c0,
            m0,
            t_sw_observed: t_sw,
        });
        CwStatus::Ok
    })
}

/// # Safety
/// `set` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cw_measurements_len(set: *const CwMeasurements) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `set` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cw_measurements_free(set: *mut CwMeasurements) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Least-squares fit of `(k0, phi)`. Non-positive `k0_init` or a zero
/// `max_iterations` take the defaults. A fit that stops without converging
/// fills `*out` and returns `CW_STATUS_NUMERICAL`.
///
/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cw_fit(
    set: *const CwMeasurements,
    k0_init: f64,
    phi_init: f64,
    max_iterations: usize,
    out: *mut CwFitResult,
) -> CwStatus {
    guard(|| {
        non_null!(set, out);
        let mut opts = FitOptions::default();
        if k0_init > 0.0 {
            opts.k0_init = k0_init;
        }
        opts.phi_init = phi_init;
        if max_iterations > 0 {
            opts.max_iterations = max_iterations;
        }
        let res = try_arg!(calibration::fit(&(*set).0, &opts));
        *out = CwFitResult {
            k0: res.k0_hat,
            phi: res.phi_hat,
            sse: res.sse,
            gradient_norm: res.gradient_norm,
            iterations: res.iterations,
            converged: res.converged,
        };
        if res.converged {
            CwStatus::Ok
        } else {
            fail(CwStatus::Numerical, res.warnings.join("; "))
        }
    })
}
