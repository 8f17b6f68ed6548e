use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use sepscan::estimator::stats::{moving_average, sign_changes};
use sepscan::estimator::{
    absolute_separability_probability, detect_jumps, estimate_curve, fit_segment, separability_probability,
    SamplerConfig, SeparabilityCurve, DEFAULT_BINS, DEFAULT_GROUP_SAMPLES, DEFAULT_SPECTRA_PER_BIN,
    DEFAULT_Z_THRESHOLD,
};
use sepscan::measures::{normalization_closed_form, normalization_monte_carlo, normalization_oracle, MeasureSpec, Metric};
use sepscan::qmat::conjugate_spectrum;
use sepscan::sampling::{dirichlet_simplex, haar_group_element, Proposal, SequenceKind, SequenceSource};
use sepscan::separability::{is_absolutely_separable, is_separable, werner_state};
use sepscan::{Ensemble, Result};

const SEED: u64 = 42;
const N_LAMBDA: usize = 20_000;
const PROB_GROUP: usize = 100;
const ABSEP_N_LAMBDA: usize = 1_000_000;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { passed, detail: detail.into() })
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn criterion_1() -> Result<Outcome> {
    let start = Instant::now();
    let mut mismatches = 0;
    for ensemble in [Ensemble::Real, Ensemble::Complex] {
        for k in 0..=200 {
            let w = k as f64 / 200.0;
            if is_separable(&werner_state(w, ensemble)?)?.separable != (w <= 1.0 / 3.0 + 1e-9) {
                mismatches += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && elapsed < Duration::from_secs(1),
        format!("{mismatches} mismatches on the 201-point grid, {elapsed:.2?}"),
    )
}

fn criterion_2() -> Result<Outcome> {
    let mut lam = SequenceSource::new(SequenceKind::PseudoRandom, 8, SEED)?;
    let mut grp = SequenceSource::new(SequenceKind::LowDiscrepancy, 32, SEED)?;
    let (mut spectra, mut conjugations, mut entangled) = (0, 0, 0);
    while spectra < 1000 {
        let (s, _) = dirichlet_simplex(&mut lam, Proposal::Uniform)?;
        if !is_absolutely_separable(&s) {
            continue;
        }
        spectra += 1;
        let ensemble = if spectra % 2 == 0 { Ensemble::Real } else { Ensemble::Complex };
        for _ in 0..100 {
            conjugations += 1;
            if !is_separable(&conjugate_spectrum(&s, &haar_group_element(&mut grp, ensemble)?))?.separable {
                entangled += 1;
            }
        }
    }
    outcome(entangled == 0, format!("{entangled} entangled verdicts in {conjugations} conjugations of C=0 spectra"))
}

fn probability(metric: Metric, ensemble: Ensemble, target: f64, tol: f64) -> Result<Outcome> {
    let start = Instant::now();
    let spec = MeasureSpec::two_qubit(metric, ensemble);
    let est = separability_probability(&spec, ensemble, N_LAMBDA, PROB_GROUP, &SamplerConfig::new(SEED))?;
    let elapsed = start.elapsed();
    outcome(
        within(est.estimate, target, tol) && elapsed <= Duration::from_secs(600),
        format!(
            "{metric} {ensemble}: {:.5} ± {:.5} (target {target} ± {tol}), ESS {:.0}, {elapsed:.1?}",
            est.estimate, est.stderr, est.effective_samples
        ),
    )
}

fn criterion_7() -> Result<Outcome> {
    let cfg = SamplerConfig::new(SEED);
    let absep = |metric, ensemble| {
        absolute_separability_probability(&MeasureSpec::two_qubit(metric, ensemble), ABSEP_N_LAMBDA, &cfg)
    };
    let hs_c = absep(Metric::Hs, Ensemble::Complex)?;
    let hs_r = absep(Metric::Hs, Ensemble::Real)?;
    let bu_c = absep(Metric::Bures, Ensemble::Complex)?;
    let ratio = bu_c.estimate / 0.000162;
    let passed = within(hs_c.estimate, 0.00366, 0.0015)
        && within(hs_r.estimate, 0.0348, 0.006)
        && (0.5..=2.0).contains(&ratio);
    outcome(
        passed,
        format!(
            "HS complex {:.6} ± {:.6}, HS real {:.5} ± {:.5}, Bures complex {:.3e} ± {:.1e} ({ratio:.2}x of 1.62e-4)",
            hs_c.estimate, hs_c.stderr, hs_r.estimate, hs_r.stderr, bu_c.estimate, bu_c.stderr
        ),
    )
}

struct Curves {
    real: SeparabilityCurve,
    complex: SeparabilityCurve,
    real_time: Duration,
    complex_time: Duration,
}

fn production_curves() -> Result<Curves> {
    let cfg = SamplerConfig::new(SEED);
    let timed = |ensemble| -> Result<(SeparabilityCurve, Duration)> {
        let start = Instant::now();
        let curve = estimate_curve(ensemble, DEFAULT_BINS, DEFAULT_SPECTRA_PER_BIN, DEFAULT_GROUP_SAMPLES, &cfg)?;
        Ok((curve, start.elapsed()))
    };
    let (real, real_time) = timed(Ensemble::Real)?;
    let (complex, complex_time) = timed(Ensemble::Complex)?;
    Ok(Curves { real, complex, real_time, complex_time })
}

fn criterion_8(curves: &Curves) -> Result<Outcome> {
    let one_bin = 1.0 / DEFAULT_BINS as f64 + 1e-9;
    let mut passed = curves.real_time.max(curves.complex_time) <= Duration::from_secs(3600);
    let mut parts = Vec::new();
    for (label, curve) in [("real", &curves.real), ("complex", &curves.complex)] {
        let report = detect_jumps(curve, DEFAULT_Z_THRESHOLD)?;
        let listed: Vec<String> =
            report.jumps.iter().map(|j| format!("{:.3} (z {:.1})", j.c_location, j.robust_z)).collect();
        match report.near(0.5, one_bin) {
            Some(j) => {
                let ok = within(j.relative_change.abs(), 0.5, 0.1);
                passed &= ok;
                parts.push(format!(
                    "{label}: jump at {:.3}, relative change {:.3} (left {:.4}, right {:.4})",
                    j.c_location, j.relative_change, j.left_mean, j.right_mean
                ));
            }
            None => {
                passed = false;
                let sigma = curve.sigma_values();
                let k = curve.bins.iter().position(|b| b.c_mid >= 0.5 - 1e-12).unwrap_or(0);
                parts.push(format!(
                    "{label}: no jump within one bin of 0.5 (sigma {:.4} -> {:.4} across it; reported: [{}])",
                    sigma[k.saturating_sub(1)],
                    sigma[k],
                    listed.join(", ")
                ));
            }
        }
    }
    parts.push(format!("curve times {:.1?} / {:.1?}", curves.real_time, curves.complex_time));
    outcome(passed, parts.join("; "))
}

fn criterion_9(curves: &Curves) -> Result<Outcome> {
    let real = fit_segment(&curves.real, 0.204, 0.34, &[0.294])?;
    let complex = fit_segment(&curves.complex, 0.204, 0.34, &[0.294])?;
    let passed = within(real.slope, -1.99, 0.15)
        && within(real.intercept, 1.08, 0.05)
        && within(complex.slope, -2.70, 0.20)
        && within(complex.intercept, 1.20, 0.05);
    outcome(
        passed,
        format!(
            "real slope {:.3} ± {:.3} intercept {:.3} ± {:.3}; complex slope {:.3} ± {:.3} intercept {:.3} ± {:.3}",
            real.slope,
            real.slope_stderr,
            real.intercept,
            real.intercept_stderr,
            complex.slope,
            complex.slope_stderr,
            complex.intercept,
            complex.intercept_stderr
        ),
    )
}

/// Sign changes of the smoothed difference σ̂_real − σ̂_complex, ignoring the
/// tail where both curves are below 0.05.
fn criterion_10(curves: &Curves) -> Result<Outcome> {
    let c = curves.real.c_values();
    let diff: Vec<f64> = curves
        .real
        .sigma_values()
        .iter()
        .zip(curves.complex.sigma_values())
        .map(|(r, z)| r - z)
        .collect();
    let smooth = moving_average(&diff, 5);
    let live: Vec<usize> = (0..c.len())
        .filter(|&i| curves.real.bins[i].sigma_hat.max(curves.complex.bins[i].sigma_hat) >= 0.05)
        .collect();
    let xs: Vec<f64> = live.iter().map(|&i| c[i]).collect();
    let ys: Vec<f64> = live.iter().map(|&i| smooth[i]).collect();
    let crossings = sign_changes(&xs, &ys);
    let passed = crossings.len() == 1 && within(crossings[0], 0.18, 0.02);
    let shown: Vec<String> = crossings.iter().map(|x| format!("{x:.4}")).collect();
    outcome(passed, format!("{} crossing(s) at [{}] (target one near 0.18 ± 0.02)", crossings.len(), shown.join(", ")))
}

fn criterion_11() -> Result<Outcome> {
    let mut passed = true;
    let mut parts = Vec::new();
    for (metric, beta, tol) in [(Metric::Hs, 2, 1e-10), (Metric::Hs, 1, 1e-10), (Metric::Bures, 2, 1e-8), (Metric::Bures, 1, 1e-8)] {
        let spec = MeasureSpec::new(metric, beta, 1.0, 2)?;
        let exact = normalization_closed_form(metric, beta).expect("closed form");
        let quad = normalization_oracle(&spec)?;
        let mut src = SequenceSource::new(SequenceKind::PseudoRandom, 8, SEED)?;
        let (mc, se) = normalization_monte_carlo(&spec, metric.default_proposal(), 100_000, &mut src)?;
        let ok = (quad - exact).abs() <= tol && (mc - quad).abs() <= 3.0 * se;
        passed &= ok;
        parts.push(format!("{metric} b={beta}: quad err {:.1e}, mc {mc:.5} ± {se:.5} vs {quad:.5}", (quad - exact).abs()));
    }
    outcome(passed, parts.join("; "))
}

fn criterion_12() -> Result<Outcome> {
    let out = Command::new(env!("CARGO_BIN_EXE_sepscan")).arg("validate").output().expect("run sepscan validate");
    let text = String::from_utf8_lossy(&out.stdout);
    let total = text.lines().count();
    let failed: Vec<&str> = text.lines().filter(|l| !l.starts_with("PASS")).collect();
    outcome(
        out.status.success() && failed.is_empty() && total > 0,
        if failed.is_empty() { format!("sepscan validate: {total} checks passed") } else { failed.join(" | ") },
    )
}

fn report(results: &mut Vec<bool>, number: usize, result: Result<Outcome>) {
    let (passed, detail) = match result {
        Ok(o) => (o.passed, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    println!("criterion {number:>2}: {} {detail}", if passed { "PASS" } else { "FAIL" });
    results.push(passed);
}

fn main() -> ExitCode {
    let mut results = Vec::new();
    report(&mut results, 1, criterion_1());
    report(&mut results, 2, criterion_2());
    report(&mut results, 3, probability(Metric::Hs, Ensemble::Complex, 0.2424, 0.02));
    report(&mut results, 4, probability(Metric::Hs, Ensemble::Real, 0.4706, 0.03));
    report(&mut results, 5, probability(Metric::Bures, Ensemble::Complex, 0.0733, 0.015));
    report(&mut results, 6, probability(Metric::Bures, Ensemble::Real, 0.212, 0.03));
    report(&mut results, 7, criterion_7());
    match production_curves() {
        Ok(curves) => {
            report(&mut results, 8, criterion_8(&curves));
            report(&mut results, 9, criterion_9(&curves));
            report(&mut results, 10, criterion_10(&curves));
        }
        Err(e) => {
            for n in 8..=10 {
                report(&mut results, n, Err(e.clone()));
            }
        }
    }
    report(&mut results, 11, criterion_11());
    report(&mut results, 12, criterion_12());
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
