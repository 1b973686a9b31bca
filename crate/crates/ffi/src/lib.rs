//! C ABI for the gsmhp simulator.
//!
//! A simulator is an opaque handle created with [`gsmhp_simulator_new`] or
//! [`gsmhp_simulator_from_config`] and released with
//! [`gsmhp_simulator_free`]. Every fallible call returns a [`GsmhpStatus`];
//! on failure [`gsmhp_last_error_message`] describes the error for the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use gsmhp_core::params::square_factorization;
use gsmhp_core::power::total_power;
use gsmhp_core::sweep::{run_sweep, write_csv};
use gsmhp_core::{evaluate_point, Error, PowerBreakdown, RfMode, Scheme, SimConfig, SweepSpec};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsmhpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Infeasible = 3,
    SingularChannel = 4,
    Domain = 5,
    ExcessiveSingularity = 6,
    Config = 7,
    Io = 8,
    Panic = 9,
}

/// Transmitter architecture.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsmhpScheme {
    GsmHp = 0,
    Fdp = 1,
}

/// Analog stage model.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsmhpRfMode {
    IdealizedZf = 0,
    EqualGain = 1,
}

/// Built-in parameter sweeps.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsmhpSweep {
    Users = 0,
    RfChains = 1,
    AntennasPerGroup = 2,
    ComputationPowerVsUsers = 3,
}

/// Power breakdown in Watts.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GsmhpPower {
    pub p_pa_w: f64,
    pub p_rf_w: f64,
    pub p_switch_w: f64,
    pub p_transmission_w: f64,
    pub p_ce_w: f64,
    pub p_cd_w: f64,
    pub p_bb_w: f64,
    pub p_lp_c_w: f64,
    pub p_computation_w: f64,
    pub p_fix_w: f64,
    pub p_total_w: f64,
}

impl From<PowerBreakdown> for GsmhpPower {
    fn from(b: PowerBreakdown) -> Self {
        Self {
            p_pa_w: b.p_pa_w,
            p_rf_w: b.p_rf_w,
            p_switch_w: b.p_switch_w,
            p_transmission_w: b.p_transmission_w,
            p_ce_w: b.p_ce_w,
            p_cd_w: b.p_cd_w,
            p_bb_w: b.p_bb_w,
            p_lp_c_w: b.p_lp_c_w,
            p_computation_w: b.p_computation_w,
            p_fix_w: b.p_fix_w,
            p_total_w: b.p_total_w,
        }
    }
}

/// Monte-Carlo estimate at one configuration.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GsmhpPointResult {
    pub n_drops: u64,
    pub r_total_bps: f64,
    pub r_total_std_err: f64,
    pub ee_bit_per_joule: f64,
    pub singular_redraws: u64,
    pub power: GsmhpPower,
}

/// Opaque simulator handle.
pub struct GsmhpSimulator {
    config: SimConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GsmhpStatus {
    match e {
        Error::Infeasible { .. } | Error::DegeneratePrecoder => GsmhpStatus::Infeasible,
        Error::SingularChannel { .. } => GsmhpStatus::SingularChannel,
        Error::Domain(_) => GsmhpStatus::Domain,
        Error::ExcessiveSingularity { .. } => GsmhpStatus::ExcessiveSingularity,
        Error::Config(_) => GsmhpStatus::Config,
        Error::Io { .. } => GsmhpStatus::Io,
        Error::IndexOutOfRange { .. } | Error::UnknownMode(_) | Error::InvalidParameter(_) => {
            GsmhpStatus::InvalidArgument
        }
    }
}

enum Failure {
    Null(&'static str),
    Invalid(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

/// Runs `f`, translating errors and panics into a status and the last-error slot.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GsmhpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            GsmhpStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("{what} is null"));
            GsmhpStatus::NullPointer
        }
        Ok(Err(Failure::Invalid(msg))) => {
            set_last_error(msg);
            GsmhpStatus::InvalidArgument
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(format!("{}: {e}", e.kind()));
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            GsmhpStatus::Panic
        }
    }
}

unsafe fn sim_ref<'a>(sim: *const GsmhpSimulator) -> Result<&'a GsmhpSimulator, Failure> {
    sim.as_ref().ok_or(Failure::Null("simulator"))
}

unsafe fn sim_mut<'a>(sim: *mut GsmhpSimulator) -> Result<&'a mut GsmhpSimulator, Failure> {
    sim.as_mut().ok_or(Failure::Null("simulator"))
}

unsafe fn path_arg(path: *const c_char) -> Result<PathBuf, Failure> {
    if path.is_null() {
        return Err(Failure::Null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| Failure::Invalid("path is not valid UTF-8".into()))
}

fn scheme_arg(v: u32) -> Result<Scheme, Failure> {
    match v {
        0 => Ok(Scheme::GsmHp),
        1 => Ok(Scheme::Fdp),
        other => Err(Failure::Invalid(format!("unknown scheme {other}"))),
    }
}

fn usize_arg(v: u64, what: &str) -> Result<usize, Failure> {
    usize::try_from(v).map_err(|_| Failure::Invalid(format!("{what} out of range")))
}

/// Message for the last failed call on this thread, or null if the last
/// call succeeded. Valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn gsmhp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// New simulator with built-in defaults. Never returns null.
#[no_mangle]
pub extern "C" fn gsmhp_simulator_new() -> *mut GsmhpSimulator {
    Box::into_raw(Box::new(GsmhpSimulator {
        config: SimConfig::default(),
    }))
}

/// Loads a TOML configuration file into a new simulator.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gsmhp_simulator_from_config(path: *const c_char, out: *mut *mut GsmhpSimulator) -> GsmhpStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let config = SimConfig::from_file(&path_arg(path)?)?;
        *out = Box::into_raw(Box::new(GsmhpSimulator { config }));
        Ok(())
    })
}

/// Releases a simulator. Null is ignored.
///
/// # Safety
/// `sim` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gsmhp_simulator_free(sim: *mut GsmhpSimulator) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Sets users, RF chains, groups and antennas per group. The array is
/// re-shaped to the most square factorization of `n_m * n_k`.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gsmhp_simulator_set_geometry(
    sim: *mut GsmhpSimulator,
    n_users: u32,
    n_rf: u32,
    n_m: u32,
    n_k: u32,
) -> GsmhpStatus {
    guard(|| {
        let s = sim_mut(sim)?;
        let g = &mut s.config.geometry;
        g.n_s = n_users as usize;
        g.n_rf = n_rf as usize;
        g.n_m = n_m as usize;
        g.n_k = n_k as usize;
        g.n_t = g.n_m * g.n_k;
        (g.rows_l, g.cols_r) = square_factorization(g.n_t);
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gsmhp_simulator_set_drops(sim: *mut GsmhpSimulator, n_drops: u64) -> GsmhpStatus {
    guard(|| {
        let n = usize_arg(n_drops, "n_drops")?;
        if n == 0 {
            return Err(Failure::Invalid("n_drops must be >= 1".into()));
        }
        sim_mut(sim)?.config.n_drops = n;
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gsmhp_simulator_set_seed(sim: *mut GsmhpSimulator, seed: u64) -> GsmhpStatus {
    guard(|| {
        sim_mut(sim)?.config.seed = seed;
        Ok(())
    })
}

/// `mode` is a [`GsmhpRfMode`] value.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gsmhp_simulator_set_mode(sim: *mut GsmhpSimulator, mode: u32) -> GsmhpStatus {
    guard(|| {
        let mode = match mode {
            0 => RfMode::IdealizedZf,
            1 => RfMode::EqualGain,
            other => return Err(Failure::Invalid(format!("unknown RF mode {other}"))),
        };
        sim_mut(sim)?.config.mode = mode;
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gsmhp_simulator_set_p_max_w(sim: *mut GsmhpSimulator, p_max_w: f64) -> GsmhpStatus {
    guard(|| {
        let s = sim_mut(sim)?;
        let mut radio = s.config.radio.clone();
        radio.p_max_w = p_max_w;
        radio.validate()?;
        s.config.radio = radio;
        Ok(())
    })
}

/// Monte-Carlo evaluation of one scheme (a [`GsmhpScheme`] value) at the
/// simulator's configuration.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gsmhp_simulator_evaluate(
    sim: *const GsmhpSimulator,
    scheme: u32,
    out: *mut GsmhpPointResult,
) -> GsmhpStatus {
    guard(|| {
        let c = &sim_ref(sim)?.config;
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        let est = evaluate_point(
            &c.geometry,
            &c.radio,
            &c.channel,
            scheme_arg(scheme)?,
            c.mode,
            c.n_drops,
            c.seed,
        )?;
        *out = GsmhpPointResult {
            n_drops: est.n_drops as u64,
            r_total_bps: est.r_total_bps,
            r_total_std_err: est.r_total_std_err,
            ee_bit_per_joule: est.ee_bit_per_joule,
            singular_redraws: est.singular_redraws,
            power: est.power.into(),
        };
        Ok(())
    })
}

/// Power breakdown of `scheme` (a [`GsmhpScheme`] value) at a given total
/// rate, without simulation.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gsmhp_simulator_power(
    sim: *const GsmhpSimulator,
    scheme: u32,
    r_total_bps: f64,
    out: *mut GsmhpPower,
) -> GsmhpStatus {
    guard(|| {
        let c = &sim_ref(sim)?.config;
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        let scheme = scheme_arg(scheme)?;
        scheme.check_geometry(&c.geometry)?;
        c.radio.validate()?;
        if !(r_total_bps.is_finite() && r_total_bps >= 0.0) {
            return Err(Failure::Invalid(format!("rate must be finite and >= 0, got {r_total_bps}")));
        }
        *out = total_power(&c.radio, &c.geometry, scheme, r_total_bps, c.geometry.n_s)?.into();
        Ok(())
    })
}

/// Runs a built-in sweep (a [`GsmhpSweep`] value) around the simulator's
/// geometry and writes CSV.
///
/// Points that cannot be evaluated are skipped; their count is stored in
/// `failed_points` when it is not null. Fails if no point succeeds.
///
/// # Safety
/// `sim` must be a live handle, `csv_path` a valid NUL-terminated string and
/// `failed_points` null or valid.
#[no_mangle]
pub unsafe extern "C" fn gsmhp_simulator_run_sweep(
    sim: *const GsmhpSimulator,
    sweep: u32,
    csv_path: *const c_char,
    failed_points: *mut u64,
) -> GsmhpStatus {
    guard(|| {
        let c = &sim_ref(sim)?.config;
        let path = path_arg(csv_path)?;
        let g = c.geometry;
        let mut spec = match sweep {
            0 => SweepSpec::users(),
            1 => SweepSpec {
                swept_values: (g.n_s..g.n_m).collect(),
                ..SweepSpec::rf_chains()
            },
            2 => SweepSpec::antennas_per_group(),
            3 => SweepSpec::computation_power_vs_users(),
            other => return Err(Failure::Invalid(format!("unknown sweep {other}"))),
        };
        spec.fixed_geometry = g;
        spec.n_drops = c.n_drops;
        spec.master_seed = c.seed;
        spec.mode = c.mode;
        let outcome = run_sweep(&spec, &c.radio, &c.channel)?;
        if let Some(n) = failed_points.as_mut() {
            *n = outcome.failures.len() as u64;
        }
        if outcome.records.is_empty() {
            return Err(match outcome.failures.into_iter().next() {
                Some(f) => Failure::Core(f.error),
                None => Failure::Invalid("sweep has no points".into()),
            });
        }
        write_csv(&outcome.records, &path)?;
        Ok(())
    })
}

/// Spatial codebook size for `n_m` groups and `n_rf` RF chains.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gsmhp_num_spatial_schemes(n_m: u32, n_rf: u32, out: *mut u64) -> GsmhpStatus {
    guard(|| {
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        *out = gsmhp_core::codebook::num_spatial_schemes(n_m as usize, n_rf as usize)?;
        Ok(())
    })
}
