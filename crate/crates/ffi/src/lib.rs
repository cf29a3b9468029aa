//! C ABI over the `superadditive` crate.
//!
//! Objects cross the boundary as opaque handles released with the matching
//! `sa_*_free`. Every fallible
//! function returns an [`SaStatus`]; on failure `sa_last_error()` describes
//! the problem until the next failing call on the same thread. Strings
//! returned by the library must be released with `sa_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use superadditive::circuit::{
    apply_plan, decompose_triangular, equalize_attenuation, AmplitudeVector,
};
use superadditive::detection::{DetectorModel, DolinarConfig};
use superadditive::hadamard::{construct, HadamardError};
use superadditive::infotheory::{self, ChannelParams, RateError};
use superadditive::simulation::{
    compare_report, Scheme, SchemeConfig, SimulationError, DEFAULT_BOOTSTRAP_RESAMPLES,
};
use superadditive::{CircuitError, CircuitPlan, HadamardMatrix};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnsupportedOrder = 3,
    Circuit = 4,
    Simulation = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaScheme {
    DirectPpm = 0,
    Hybrid = 1,
}

/// Monte Carlo run description. `num_slices` is ignored for the direct scheme.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SaSimulationConfig {
    pub scheme: SaScheme,
    pub n_bar: f64,
    pub length: usize,
    pub lambda: f64,
    pub trials: u64,
    pub seed: u64,
    pub num_slices: u32,
    pub efficiency: f64,
    pub dark_click_probability: f64,
    pub per_op_transmission: f64,
    pub stratified: bool,
}

pub struct SaHadamard(HadamardMatrix);

pub struct SaCircuitPlan(CircuitPlan);

pub struct SaRateReport {
    json: String,
    csv: String,
    analytic_rate: f64,
    empirical_rate: f64,
    empirical_stderr: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(SaStatus, String);

impl From<HadamardError> for Failure {
    fn from(e: HadamardError) -> Self {
        let status = match e {
            HadamardError::UnsupportedOrder(_)
            | HadamardError::InvalidPaleyOrder(_)
            | HadamardError::ExponentOutOfRange(_) => SaStatus::UnsupportedOrder,
            _ => SaStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<CircuitError> for Failure {
    fn from(e: CircuitError) -> Self {
        Failure(SaStatus::Circuit, e.to_string())
    }
}

impl From<RateError> for Failure {
    fn from(e: RateError) -> Self {
        Failure(SaStatus::InvalidArgument, e.to_string())
    }
}

impl From<SimulationError> for Failure {
    fn from(e: SimulationError) -> Self {
        let status = match e {
            SimulationError::Hadamard(_) => SaStatus::UnsupportedOrder,
            SimulationError::Config(_)
            | SimulationError::Rate(_)
            | SimulationError::Detection(_) => SaStatus::InvalidArgument,
            _ => SaStatus::Simulation,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SaStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SaStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SaStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SaStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failing call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sa_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Normalized Hadamard matrix of `order` (1, 2, 4, 8, 12, 16, 20, 24, 28 or 32).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sa_hadamard_construct(
    order: usize,
    out: *mut *mut SaHadamard,
) -> SaStatus {
    guard(|| {
        let h = construct(order)?;
        write(out, Box::into_raw(Box::new(SaHadamard(h))), "out")
    })
}

/// # Safety
/// `h` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sa_hadamard_free(h: *mut SaHadamard) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Order of the matrix, 0 for a null handle.
///
/// # Safety
/// `h` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sa_hadamard_order(h: *const SaHadamard) -> usize {
    h.as_ref().map_or(0, |h| h.0.order())
}

/// Entry `(row, col)`, +1 or -1.
///
/// # Safety
/// `h` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sa_hadamard_entry(
    h: *const SaHadamard,
    row: usize,
    col: usize,
    out: *mut i8,
) -> SaStatus {
    guard(|| {
        let h = &deref(h, "matrix")?.0;
        if row >= h.order() || col >= h.order() {
            return Err(Failure(
                SaStatus::InvalidArgument,
                format!("entry ({row}, {col}) outside order {}", h.order()),
            ));
        }
        write(out, h.entry(row, col), "out")
    })
}

/// Triangular beam-splitter plan of the rescaled matrix `H / sqrt(L)`.
///
/// # Safety
/// `h` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sa_plan_from_hadamard(
    h: *const SaHadamard,
    out: *mut *mut SaCircuitPlan,
) -> SaStatus {
    guard(|| {
        let plan = decompose_triangular(&deref(h, "matrix")?.0.rescaled())?;
        write(out, Box::into_raw(Box::new(SaCircuitPlan(plan))), "out")
    })
}

/// Loss-equalized copy of `plan` with every beam splitter transmitting
/// `per_op_transmission`; the overall transmission goes to `eta`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sa_plan_equalize(
    plan: *const SaCircuitPlan,
    per_op_transmission: f64,
    out: *mut *mut SaCircuitPlan,
    eta: *mut f64,
) -> SaStatus {
    guard(|| {
        let (lossy, overall) = equalize_attenuation(&deref(plan, "plan")?.0, per_op_transmission)?;
        write(eta, overall, "eta")?;
        write(out, Box::into_raw(Box::new(SaCircuitPlan(lossy))), "out")
    })
}

/// # Safety
/// `plan` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sa_plan_free(plan: *mut SaCircuitPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Number of modes, 0 for a null handle.
///
/// # Safety
/// `plan` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sa_plan_num_modes(plan: *const SaCircuitPlan) -> usize {
    plan.as_ref().map_or(0, |p| p.0.num_modes)
}

/// Number of beam splitters, 0 for a null handle.
///
/// # Safety
/// `plan` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sa_plan_num_beam_splitters(plan: *const SaCircuitPlan) -> usize {
    plan.as_ref().map_or(0, |p| p.0.num_beam_splitters())
}

/// Propagates `len` complex amplitudes, given as separate real and imaginary
/// arrays, through the plan. `len` must equal the number of modes.
///
/// # Safety
/// The four arrays must hold `len` doubles each.
#[no_mangle]
pub unsafe extern "C" fn sa_plan_apply(
    plan: *const SaCircuitPlan,
    re_in: *const f64,
    im_in: *const f64,
    len: usize,
    re_out: *mut f64,
    im_out: *mut f64,
) -> SaStatus {
    guard(|| {
        let plan = &deref(plan, "plan")?.0;
        if re_in.is_null() || im_in.is_null() || re_out.is_null() || im_out.is_null() {
            return Err(null("amplitude array"));
        }
        let (re, im) = (
            std::slice::from_raw_parts(re_in, len),
            std::slice::from_raw_parts(im_in, len),
        );
        let v = AmplitudeVector(
            re.iter()
                .zip(im)
                .map(|(&r, &i)| Complex64::new(r, i))
                .collect(),
        );
        let out = apply_plan(plan, &v)?;
        let (ro, io) = (
            std::slice::from_raw_parts_mut(re_out, len),
            std::slice::from_raw_parts_mut(im_out, len),
        );
        for (k, a) in out.0.iter().enumerate() {
            ro[k] = a.re;
            io[k] = a.im;
        }
        Ok(())
    })
}

/// Plan in its text format; release with `sa_string_free`. Null on failure.
///
/// # Safety
/// `plan` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sa_plan_to_text(plan: *const SaCircuitPlan) -> *mut c_char {
    match plan.as_ref() {
        Some(p) => into_c_string(p.0.to_text()),
        None => {
            set_error("plan is null".into());
            ptr::null_mut()
        }
    }
}

/// Minimum error probability for `±α` with `|α|² = n_eff`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sa_helstrom_error(n_eff: f64, out: *mut f64) -> SaStatus {
    guard(|| write(out, infotheory::helstrom_error(n_eff)?, "out"))
}

/// Bits per bin with optimal individual detection.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sa_rate_individual(n_bar: f64, out: *mut f64) -> SaStatus {
    guard(|| write(out, infotheory::rate_individual(n_bar)?, "out"))
}

/// Holevo quantity of the BPSK ensemble, bits per bin.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sa_holevo_bpsk(n_bar: f64, out: *mut f64) -> SaStatus {
    guard(|| write(out, infotheory::holevo_bpsk(n_bar)?, "out"))
}

/// Direct-detection PPM rate, bits per bin.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sa_rate_ppm(n_bar: f64, length: f64, out: *mut f64) -> SaStatus {
    guard(|| write(out, infotheory::rate_ppm(n_bar, length)?, "out"))
}

/// Hybrid-scheme rate at mixing weight `lambda`, bits per bin.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sa_rate_hybrid(
    n_bar: f64,
    length: usize,
    lambda: f64,
    out: *mut f64,
) -> SaStatus {
    guard(|| {
        write(
            out,
            infotheory::rate_hybrid(&ChannelParams::new(n_bar, length, lambda))?,
            "out",
        )
    })
}

/// Mixing weight maximizing the hybrid rate, and that rate.
///
/// # Safety
/// Both output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sa_optimize_lambda(
    n_bar: f64,
    length: usize,
    lambda_out: *mut f64,
    rate_out: *mut f64,
) -> SaStatus {
    guard(|| {
        let (lambda, rate) = infotheory::optimize_lambda(n_bar, length)?;
        write(lambda_out, lambda, "lambda_out")?;
        write(rate_out, rate, "rate_out")
    })
}

/// Runs a Monte Carlo simulation and compares it with the analytic rate.
///
/// # Safety
/// `config` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sa_simulate(
    config: *const SaSimulationConfig,
    out: *mut *mut SaRateReport,
) -> SaStatus {
    guard(|| {
        let c = *deref(config, "config")?;
        let scheme = match c.scheme {
            SaScheme::DirectPpm => Scheme::DirectPpm,
            SaScheme::Hybrid => Scheme::Hybrid,
        };
        let config = SchemeConfig {
            scheme,
            params: ChannelParams::new(c.n_bar, c.length, c.lambda),
            detector: DetectorModel {
                efficiency: c.efficiency,
                dark_click_probability: c.dark_click_probability,
            },
            dolinar: (scheme == Scheme::Hybrid).then_some(DolinarConfig {
                num_slices: c.num_slices,
                rng_seed: c.seed,
                ..DolinarConfig::default()
            }),
            use_decomposed_plan: false,
            per_op_transmission: c.per_op_transmission,
            trials: c.trials,
            seed: c.seed,
            stratified: c.stratified,
            bootstrap_resamples: DEFAULT_BOOTSTRAP_RESAMPLES,
        };
        let (report, cm) = compare_report(&config)?;
        let json = serde_json::to_string(&report)
            .map_err(|e| Failure(SaStatus::Simulation, e.to_string()))?;
        let handle = SaRateReport {
            json,
            csv: cm.to_csv(),
            analytic_rate: report.analytic_rate,
            empirical_rate: report.empirical_rate,
            empirical_stderr: report.empirical_stderr,
        };
        write(out, Box::into_raw(Box::new(handle)), "out")
    })
}

/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sa_report_free(report: *mut SaRateReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Analytic rate in bits per bin; NaN for a null handle.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sa_report_analytic_rate(report: *const SaRateReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.analytic_rate)
}

/// Empirical rate in bits per bin; NaN for a null handle.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sa_report_empirical_rate(report: *const SaRateReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.empirical_rate)
}

/// Bootstrap standard error of the empirical rate; NaN for a null handle.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sa_report_empirical_stderr(report: *const SaRateReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.empirical_stderr)
}

/// Full report as JSON; release with `sa_string_free`.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sa_report_json(report: *const SaRateReport) -> *mut c_char {
    report
        .as_ref()
        .map_or(ptr::null_mut(), |r| into_c_string(r.json.clone()))
}

/// Confusion matrix as CSV; release with `sa_string_free`.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sa_report_confusion_csv(report: *const SaRateReport) -> *mut c_char {
    report
        .as_ref()
        .map_or(ptr::null_mut(), |r| into_c_string(r.csv.clone()))
}
