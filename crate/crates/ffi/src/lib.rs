//! C ABI for the sepscan estimators.
//!
//! Every fallible function returns a [`SepscanStatus`]; on failure the message
//! is available from [`sepscan_last_error_message`] on the same thread.
//! Curves and jump reports are opaque handles released with their `_free`
//! functions. Results are written through caller-provided out-pointers.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};

use sepscan::estimator::{self, JumpReport, SamplerConfig, SeparabilityCurve};
use sepscan::measures::{MeasureSpec, Metric};
use sepscan::qmat::{Mat4, C64};
use sepscan::sampling::{SequenceKind, DEFAULT_MAX_REJECTS};
use sepscan::separability;
use sepscan::{DensityMatrix, Ensemble, Error, Spectrum};

pub const SEPSCAN_ENSEMBLE_REAL: u32 = 1;
pub const SEPSCAN_ENSEMBLE_COMPLEX: u32 = 2;
pub const SEPSCAN_METRIC_HS: u32 = 0;
pub const SEPSCAN_METRIC_BURES: u32 = 1;
pub const SEPSCAN_SEQUENCE_LOW_DISCREPANCY: u32 = 0;
pub const SEPSCAN_SEQUENCE_PSEUDO_RANDOM: u32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SepscanStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Config = 3,
    Infeasible = 4,
    Numerical = 5,
    Format = 6,
    Io = 7,
    NotImplemented = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SepscanSamplerConfig {
    /// One of the `SEPSCAN_SEQUENCE_*` constants.
    pub sequence: u32,
    pub seed: u64,
    /// Worker threads; 0 uses one per core.
    pub workers: u32,
    pub max_rejects: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SepscanEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
    pub effective_samples: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SepscanCurveBin {
    pub c_mid: f64,
    pub n_trials: u64,
    pub n_separable: u64,
    pub sigma_hat: f64,
    pub std_error: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SepscanJump {
    pub c_location: f64,
    pub robust_z: f64,
    pub left_mean: f64,
    pub right_mean: f64,
    pub relative_change: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SepscanLinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub intercept_stderr: f64,
    pub slope_stderr: f64,
    pub weighted_rms_residual: f64,
    pub bins_used: u64,
}

/// Opaque curve handle.
pub struct SepscanCurve {
    inner: SeparabilityCurve,
}

/// Opaque jump-report handle.
pub struct SepscanJumpReport {
    inner: JumpReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(error: &Error) -> SepscanStatus {
    match error {
        Error::InvalidInput(_) => SepscanStatus::InvalidInput,
        Error::Config(_) => SepscanStatus::Config,
        Error::InfeasibleSlice { .. } => SepscanStatus::Infeasible,
        Error::SingularWeight(_) | Error::Numerical(_) => SepscanStatus::Numerical,
        Error::Format(_) => SepscanStatus::Format,
        Error::Io(_) => SepscanStatus::Io,
        Error::NotImplemented(_) => SepscanStatus::NotImplemented,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SepscanStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            SepscanStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            SepscanStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            SepscanStatus::Panic
        }
    }
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn non_null<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    // SAFETY: the caller guarantees a non-null pointer refers to a live value.
    unsafe { p.as_ref() }.ok_or(Failure::Null(what))
}

fn write_out<T>(p: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    // SAFETY: checked non-null; the caller guarantees it is writable.
    unsafe { p.write(value) };
    Ok(())
}

fn ensemble(code: u32) -> Result<Ensemble, Error> {
    match code {
        SEPSCAN_ENSEMBLE_REAL => Ok(Ensemble::Real),
        SEPSCAN_ENSEMBLE_COMPLEX => Ok(Ensemble::Complex),
        _ => Err(Error::Config(format!("unknown ensemble code {code}"))),
    }
}

fn metric(code: u32) -> Result<Metric, Error> {
    match code {
        SEPSCAN_METRIC_HS => Ok(Metric::Hs),
        SEPSCAN_METRIC_BURES => Ok(Metric::Bures),
        _ => Err(Error::Config(format!("unknown metric code {code}"))),
    }
}

fn sampler(cfg: *const SepscanSamplerConfig) -> Result<SamplerConfig, Failure> {
    let cfg = non_null(cfg, "config")?;
    let sequence = match cfg.sequence {
        SEPSCAN_SEQUENCE_LOW_DISCREPANCY => SequenceKind::LowDiscrepancy,
        SEPSCAN_SEQUENCE_PSEUDO_RANDOM => SequenceKind::PseudoRandom,
        other => return Err(Error::Config(format!("unknown sequence code {other}")).into()),
    };
    if cfg.max_rejects == 0 {
        return Err(Error::Config("max_rejects must be positive".into()).into());
    }
    Ok(SamplerConfig { sequence, seed: cfg.seed, workers: cfg.workers as usize, max_rejects: cfg.max_rejects })
}

fn path_arg(p: *const c_char) -> Result<String, Failure> {
    if p.is_null() {
        return Err(Failure::Null("path"));
    }
    // SAFETY: checked non-null; the caller passes a NUL-terminated string.
    let s = unsafe { CStr::from_ptr(p) };
    Ok(s.to_str().map_err(|_| Error::Config("path is not valid UTF-8".into()))?.to_owned())
}

fn estimate_out(e: estimator::Estimate) -> SepscanEstimate {
    SepscanEstimate {
        estimate: e.estimate,
        std_error: e.stderr,
        samples: e.samples as u64,
        effective_samples: e.effective_samples,
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sepscan_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sepscan_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default sampler settings for `seed`.
#[no_mangle]
pub extern "C" fn sepscan_sampler_config_default(seed: u64) -> SepscanSamplerConfig {
    SepscanSamplerConfig {
        sequence: SEPSCAN_SEQUENCE_LOW_DISCREPANCY,
        seed,
        workers: 0,
        max_rejects: DEFAULT_MAX_REJECTS,
    }
}

/// Maximal concurrence of a descending, unit-sum spectrum.
///
/// # Safety
/// `lambda` must point to 4 readable doubles and `out` to a writable double.
#[no_mangle]
pub unsafe extern "C" fn sepscan_maximal_concurrence(lambda: *const f64, out: *mut f64) -> SepscanStatus {
    guard(|| {
        let values = non_null(lambda.cast::<[f64; 4]>(), "lambda")?;
        let s = Spectrum::from_ordered(*values)?;
        write_out(out, separability::maximal_concurrence(&s), "out")
    })
}

/// PPT verdict for a 4×4 density matrix given as row-major real and
/// imaginary parts (16 doubles each). `imag` may be null for a real matrix.
///
/// # Safety
/// `real` (and `imag` if non-null) must point to 16 readable doubles;
/// `separable` and `min_eigenvalue` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sepscan_is_separable(
    real: *const f64,
    imag: *const f64,
    separable: *mut c_int,
    min_eigenvalue: *mut f64,
) -> SepscanStatus {
    guard(|| {
        let re = non_null(real.cast::<[f64; 16]>(), "real")?;
        let im = if imag.is_null() { [0.0; 16] } else { *non_null(imag.cast::<[f64; 16]>(), "imag")? };
        let mut m: Mat4 = [[C64::new(0.0, 0.0); 4]; 4];
        for (k, z) in m.iter_mut().flatten().enumerate() {
            *z = C64::new(re[k], im[k]);
        }
        let ensemble = if im.iter().all(|&x| x == 0.0) { Ensemble::Real } else { Ensemble::Complex };
        let verdict = separability::is_separable(&DensityMatrix::new(m, ensemble)?)?;
        write_out(separable, c_int::from(verdict.separable), "separable")?;
        write_out(min_eigenvalue, verdict.min_pt_eigenvalue, "min_eigenvalue")
    })
}

/// Separability probability by importance-weighted Haar averaging.
///
/// # Safety
/// `config` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sepscan_separability_probability(
    metric_code: u32,
    ensemble_code: u32,
    n_lambda: u64,
    group_samples: u64,
    config: *const SepscanSamplerConfig,
    out: *mut SepscanEstimate,
) -> SepscanStatus {
    guard(|| {
        let e = ensemble(ensemble_code)?;
        let spec = MeasureSpec::two_qubit(metric(metric_code)?, e);
        let est =
            estimator::separability_probability(&spec, e, n_lambda as usize, group_samples as usize, &sampler(config)?)?;
        write_out(out, estimate_out(est), "out")
    })
}

/// Probability of a `C = 0` spectrum.
///
/// # Safety
/// `config` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sepscan_absolute_separability_probability(
    metric_code: u32,
    ensemble_code: u32,
    n_lambda: u64,
    config: *const SepscanSamplerConfig,
    out: *mut SepscanEstimate,
) -> SepscanStatus {
    guard(|| {
        let spec = MeasureSpec::two_qubit(metric(metric_code)?, ensemble(ensemble_code)?);
        let est = estimator::absolute_separability_probability(&spec, n_lambda as usize, &sampler(config)?)?;
        write_out(out, estimate_out(est), "out")
    })
}

/// Estimates σ̂ on `bins − 1` midpoints. On success `*out` owns a new curve.
///
/// # Safety
/// `config` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sepscan_curve_estimate(
    ensemble_code: u32,
    bins: u64,
    spectra_per_bin: u64,
    group_samples: u64,
    config: *const SepscanSamplerConfig,
    out: *mut *mut SepscanCurve,
) -> SepscanStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let curve = estimator::estimate_curve(
            ensemble(ensemble_code)?,
            bins as usize,
            spectra_per_bin as usize,
            group_samples as usize,
            &sampler(config)?,
        )?;
        write_out(out, Box::into_raw(Box::new(SepscanCurve { inner: curve })), "out")
    })
}

/// Reads a curve CSV. On success `*out` owns a new curve.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sepscan_curve_read_csv(path: *const c_char, out: *mut *mut SepscanCurve) -> SepscanStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let path = path_arg(path)?;
        let file = File::open(&path).map_err(|e| Error::Io(format!("cannot open {path}: {e}")))?;
        let curve = sepscan::io::read_curve_csv(BufReader::new(file))?;
        write_out(out, Box::into_raw(Box::new(SepscanCurve { inner: curve })), "out")
    })
}

/// Writes a curve as CSV.
///
/// # Safety
/// `curve` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sepscan_curve_write_csv(curve: *const SepscanCurve, path: *const c_char) -> SepscanStatus {
    guard(|| {
        let curve = non_null(curve, "curve")?;
        let path = path_arg(path)?;
        let file = File::create(&path).map_err(|e| Error::Io(format!("cannot create {path}: {e}")))?;
        let mut w = BufWriter::new(file);
        sepscan::io::write_curve_csv(&curve.inner, &mut w)?;
        w.flush().map_err(|e| Error::Io(format!("cannot write {path}: {e}")))?;
        Ok(())
    })
}

/// Number of bins in `curve`; 0 for a null handle.
///
/// # Safety
/// `curve` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sepscan_curve_len(curve: *const SepscanCurve) -> u64 {
    curve.as_ref().map_or(0, |c| c.inner.bins.len() as u64)
}

/// Copies bin `index` of `curve` into `out`.
///
/// # Safety
/// `curve` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sepscan_curve_bin(
    curve: *const SepscanCurve,
    index: u64,
    out: *mut SepscanCurveBin,
) -> SepscanStatus {
    guard(|| {
        let curve = non_null(curve, "curve")?;
        let b = curve.inner.bins.get(index as usize).ok_or_else(|| {
            Error::InvalidInput(format!("bin index {index} out of range 0..{}", curve.inner.bins.len()))
        })?;
        write_out(
            out,
            SepscanCurveBin {
                c_mid: b.c_mid,
                n_trials: b.n_trials,
                n_separable: b.n_separable,
                sigma_hat: b.sigma_hat,
                std_error: b.stderr,
            },
            "out",
        )
    })
}

/// Releases a curve. Null is ignored.
///
/// # Safety
/// `curve` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sepscan_curve_free(curve: *mut SepscanCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Separability probability with σ̂ read off `curve`.
///
/// # Safety
/// `curve` must be a live handle, `config` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sepscan_curve_based_probability(
    curve: *const SepscanCurve,
    metric_code: u32,
    ensemble_code: u32,
    n_lambda: u64,
    config: *const SepscanSamplerConfig,
    out: *mut SepscanEstimate,
) -> SepscanStatus {
    guard(|| {
        let curve = non_null(curve, "curve")?;
        let e = ensemble(ensemble_code)?;
        if curve.inner.ensemble.is_some_and(|c| c != e) {
            return Err(Error::InvalidInput(format!("curve was estimated for a different ensemble than {e}")).into());
        }
        let spec = MeasureSpec::two_qubit(metric(metric_code)?, e);
        let tagged = curve.inner.clone().with_ensemble(e);
        let est = estimator::curve_based_probability(&tagged, &spec, n_lambda as usize, &sampler(config)?)?;
        write_out(out, estimate_out(est), "out")
    })
}

/// Weighted linear fit of σ̂ on `[a, b]`, dropping the bins nearest to the
/// `n_excluded` values in `excluded`.
///
/// # Safety
/// `curve` must be a live handle, `excluded` must point to `n_excluded`
/// doubles (or be null when `n_excluded` is 0) and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sepscan_fit_segment(
    curve: *const SepscanCurve,
    a: f64,
    b: f64,
    excluded: *const f64,
    n_excluded: usize,
    out: *mut SepscanLinearFit,
) -> SepscanStatus {
    guard(|| {
        let curve = non_null(curve, "curve")?;
        let excluded: &[f64] = if n_excluded == 0 {
            &[]
        } else if excluded.is_null() {
            return Err(Failure::Null("excluded"));
        } else {
            std::slice::from_raw_parts(excluded, n_excluded)
        };
        let fit = estimator::fit_segment(&curve.inner, a, b, excluded)?;
        write_out(
            out,
            SepscanLinearFit {
                intercept: fit.intercept,
                slope: fit.slope,
                intercept_stderr: fit.intercept_stderr,
                slope_stderr: fit.slope_stderr,
                weighted_rms_residual: fit.weighted_rms_residual,
                bins_used: fit.bins_used as u64,
            },
            "out",
        )
    })
}

/// Robust jump detection. On success `*out` owns a new report.
///
/// # Safety
/// `curve` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sepscan_detect_jumps(
    curve: *const SepscanCurve,
    z_threshold: f64,
    out: *mut *mut SepscanJumpReport,
) -> SepscanStatus {
    guard(|| {
        let curve = non_null(curve, "curve")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let report = estimator::detect_jumps(&curve.inner, z_threshold)?;
        write_out(out, Box::into_raw(Box::new(SepscanJumpReport { inner: report })), "out")
    })
}

/// Number of jumps in `report`; 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sepscan_jump_report_len(report: *const SepscanJumpReport) -> u64 {
    report.as_ref().map_or(0, |r| r.inner.jumps.len() as u64)
}

/// Copies jump `index` of `report` into `out`.
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sepscan_jump_report_get(
    report: *const SepscanJumpReport,
    index: u64,
    out: *mut SepscanJump,
) -> SepscanStatus {
    guard(|| {
        let report = non_null(report, "report")?;
        let j = report.inner.jumps.get(index as usize).ok_or_else(|| {
            Error::InvalidInput(format!("jump index {index} out of range 0..{}", report.inner.jumps.len()))
        })?;
        write_out(
            out,
            SepscanJump {
                c_location: j.c_location,
                robust_z: j.robust_z,
                left_mean: j.left_mean,
                right_mean: j.right_mean,
                relative_change: j.relative_change,
            },
            "out",
        )
    })
}

/// Releases a jump report. Null is ignored.
///
/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sepscan_jump_report_free(report: *mut SepscanJumpReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn null_out_pointer_is_reported() {
        let lambda = [0.4, 0.3, 0.2, 0.1];
        let status = unsafe { sepscan_maximal_concurrence(lambda.as_ptr(), ptr::null_mut()) };
        assert_eq!(status, SepscanStatus::NullPointer);
        let msg = unsafe { CStr::from_ptr(sepscan_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("out"));
    }

    #[test]
    fn unknown_codes_are_config_errors() {
        let cfg = sepscan_sampler_config_default(1);
        let mut est = SepscanEstimate::default();
        let status = unsafe { sepscan_separability_probability(7, SEPSCAN_ENSEMBLE_REAL, 10, 10, &cfg, &mut est) };
        assert_eq!(status, SepscanStatus::Config);
    }
}
