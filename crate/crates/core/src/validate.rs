//! Hermetic invariant suite behind `sepscan validate`.
//!
//! Every check uses fixed internal seeds, so pass/fail is deterministic.

use serde::Serialize;

use crate::error::Result;
use crate::estimator::{estimate_curve, separability_probability, SamplerConfig};
use crate::measures::{normalization_closed_form, normalization_monte_carlo, normalization_oracle, MeasureSpec, Metric};
use crate::qmat::{
    adjoint, conjugate_spectrum, determinant, eigenvalues_sym, kron, mul, partial_transpose_matrix, Ensemble, Spectrum,
    C64,
};
use crate::sampling::{
    box_muller, dirichlet_simplex, haar_group_element, spectrum_with_concurrence, FixedCSlice, Proposal, SequenceKind,
    SequenceSource,
};
use crate::separability::{is_absolutely_separable, is_separable, maximal_concurrence, werner_state};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Check { name, passed, detail: detail.into() }
    }
}

type CheckFn = fn() -> Result<Check>;

const CHECKS: &[CheckFn] = &[
    werner_boundary,
    partial_transpose_involution,
    spectrum_preservation,
    jacobi_two_by_two,
    haar_group_checks,
    haar_first_column_moment,
    fixed_c_identity,
    absolute_separability_sufficient,
    local_unitary_invariance,
    determinism,
    normalization_oracles,
];

/// Runs every check; a check that errors is reported as failed.
pub fn run_all() -> Vec<Check> {
    CHECKS
        .iter()
        .map(|f| f().unwrap_or_else(|e| Check::new("error", false, e.to_string())))
        .collect()
}

fn random_spectrum(src: &mut SequenceSource) -> Result<Spectrum> {
    Ok(dirichlet_simplex(src, Proposal::Uniform)?.0)
}

/// Werner family: separable exactly for w ≤ 1/3 on a 201-point grid.
pub fn werner_boundary() -> Result<Check> {
    let mut mismatches = Vec::new();
    for ensemble in [Ensemble::Real, Ensemble::Complex] {
        for k in 0..=200 {
            let w = k as f64 / 200.0;
            let verdict = is_separable(&werner_state(w, ensemble)?)?;
            if verdict.separable != (w <= 1.0 / 3.0 + 1e-9) {
                mismatches.push(w);
            }
        }
    }
    Ok(Check::new(
        "werner_ppt_boundary",
        mismatches.is_empty(),
        format!("{} grid mismatches", mismatches.len()),
    ))
}

pub fn partial_transpose_involution() -> Result<Check> {
    let mut lam = SequenceSource::new(SequenceKind::PseudoRandom, 8, 101)?;
    let mut grp = SequenceSource::new(SequenceKind::PseudoRandom, 32, 102)?;
    let mut failures = 0;
    for _ in 0..1000 {
        let rho = conjugate_spectrum(&random_spectrum(&mut lam)?, &haar_group_element(&mut grp, Ensemble::Complex)?);
        let m = rho.entries();
        let pt = partial_transpose_matrix(m);
        let twice = partial_transpose_matrix(&pt);
        let trace_ok = (0..4).all(|i| pt[i][i] == m[i][i]);
        let herm_ok = (0..4).all(|i| (0..4).all(|j| pt[j][i] == pt[i][j].conj()));
        if &twice != m || !trace_ok || !herm_ok {
            failures += 1;
        }
    }
    Ok(Check::new("partial_transpose_involution", failures == 0, format!("{failures} of 1000 states failed")))
}

pub fn spectrum_preservation() -> Result<Check> {
    let mut lam = SequenceSource::new(SequenceKind::PseudoRandom, 8, 201)?;
    let mut grp = SequenceSource::new(SequenceKind::LowDiscrepancy, 32, 202)?;
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let ensemble = if i % 2 == 0 { Ensemble::Real } else { Ensemble::Complex };
        let s = random_spectrum(&mut lam)?;
        let rho = conjugate_spectrum(&s, &haar_group_element(&mut grp, ensemble)?);
        let ev = eigenvalues_sym(rho.entries())?;
        for (a, b) in ev.iter().zip(s.values()) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(Check::new("spectrum_preservation", worst <= 1e-10, format!("max deviation {worst:.2e}")))
}

pub fn jacobi_two_by_two() -> Result<Check> {
    let mut src = SequenceSource::new(SequenceKind::PseudoRandom, 3, 301)?;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let u = src.next_point();
        let (a, b, d) = (2.0 * u[0] - 1.0, 2.0 * u[1] - 1.0, 2.0 * u[2] - 1.0);
        let m = [[C64::new(a, 0.0), C64::new(b, 0.0)], [C64::new(b, 0.0), C64::new(d, 0.0)]];
        let ev = eigenvalues_sym(&m)?;
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        worst = worst.max((ev[0] - (mean + radius)).abs()).max((ev[1] - (mean - radius)).abs());
    }
    Ok(Check::new("jacobi_2x2_closed_form", worst <= 1e-12, format!("max deviation {worst:.2e}")))
}

pub fn haar_group_checks() -> Result<Check> {
    let mut worst_unitary: f64 = 0.0;
    let mut worst_det: f64 = 0.0;
    for kind in [SequenceKind::LowDiscrepancy, SequenceKind::PseudoRandom] {
        let mut src = SequenceSource::new(kind, 32, 401)?;
        for ensemble in [Ensemble::Real, Ensemble::Complex] {
            for _ in 0..1000 {
                let u = haar_group_element(&mut src, ensemble)?;
                let p = mul(u.matrix(), &adjoint(u.matrix()));
                for (i, row) in p.iter().enumerate() {
                    for (j, z) in row.iter().enumerate() {
                        let t = if i == j { 1.0 } else { 0.0 };
                        worst_unitary = worst_unitary.max((z - C64::new(t, 0.0)).norm());
                    }
                }
                if ensemble == Ensemble::Real {
                    worst_det = worst_det.max((determinant(u.matrix()) - C64::new(1.0, 0.0)).norm());
                }
            }
        }
    }
    Ok(Check::new(
        "haar_orthonormality_determinant",
        worst_unitary <= 1e-12 && worst_det <= 1e-10,
        format!("max |UU†-I| {worst_unitary:.2e}, max |det-1| {worst_det:.2e}"),
    ))
}

/// Mean of |⟨e₁, U v⟩|² is 1/4 for Haar U.
pub fn haar_first_column_moment() -> Result<Check> {
    let v = [0.5f64.sqrt(), 0.5, 0.0, -0.5];
    let mut detail = Vec::new();
    let mut passed = true;
    for ensemble in [Ensemble::Real, Ensemble::Complex] {
        let mut src = SequenceSource::new(SequenceKind::LowDiscrepancy, 32, 451)?;
        let n = 10_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let u = haar_group_element(&mut src, ensemble)?;
            let amp: C64 = (0..4).map(|j| u.matrix()[0][j] * v[j]).sum();
            sum += amp.norm_sqr();
        }
        let mean = sum / n as f64;
        passed &= (mean - 0.25).abs() <= 0.02;
        detail.push(format!("{ensemble} {mean:.4}"));
    }
    Ok(Check::new("haar_overlap_moment", passed, detail.join(", ")))
}

pub fn fixed_c_identity() -> Result<Check> {
    let mut src = SequenceSource::new(SequenceKind::PseudoRandom, 2, 501)?;
    let mut worst: f64 = 0.0;
    for c in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let slice = FixedCSlice::with_default_budget(c)?;
        for _ in 0..200 {
            let s = spectrum_with_concurrence(&slice, &mut src)?;
            worst = worst.max((maximal_concurrence(&s) - c).abs());
        }
    }
    Ok(Check::new("fixed_c_construction_identity", worst <= 1e-10, format!("max |C - c| {worst:.2e}")))
}

/// Spectra with C = 0 never yield an entangled verdict.
pub fn absolute_separability_sufficient() -> Result<Check> {
    let mut lam = SequenceSource::new(SequenceKind::PseudoRandom, 8, 601)?;
    let mut entangled = 0;
    let mut total = 0;
    for ensemble in [Ensemble::Real, Ensemble::Complex] {
        let mut grp = SequenceSource::new(SequenceKind::LowDiscrepancy, 32, 602)?;
        let mut spectra = 0;
        while spectra < 1000 {
            let s = random_spectrum(&mut lam)?;
            if !is_absolutely_separable(&s) {
                continue;
            }
            spectra += 1;
            for _ in 0..100 {
                total += 1;
                if !is_separable(&conjugate_spectrum(&s, &haar_group_element(&mut grp, ensemble)?))?.separable {
                    entangled += 1;
                }
            }
        }
    }
    Ok(Check::new(
        "absolute_separability_sufficient",
        entangled == 0,
        format!("{entangled} entangled of {total} conjugations"),
    ))
}

fn haar_2x2(src: &mut SequenceSource) -> [[C64; 2]; 2] {
    let u = src.next_point();
    let (a, b) = box_muller(u[0], u[1]);
    let (c, d) = box_muller(u[2], u[3]);
    let (e, f) = box_muller(u[4], u[5]);
    let (g, h) = box_muller(u[6], u[7]);
    let col0 = [C64::new(a, b), C64::new(c, d)];
    let n0 = (col0[0].norm_sqr() + col0[1].norm_sqr()).sqrt();
    let q0 = [col0[0] / n0, col0[1] / n0];
    let col1 = [C64::new(e, f), C64::new(g, h)];
    let proj = q0[0].conj() * col1[0] + q0[1].conj() * col1[1];
    let r = [col1[0] - proj * q0[0], col1[1] - proj * q0[1]];
    let n1 = (r[0].norm_sqr() + r[1].norm_sqr()).sqrt();
    [[q0[0], r[0] / n1], [q0[1], r[1] / n1]]
}

pub fn local_unitary_invariance() -> Result<Check> {
    let mut lam = SequenceSource::new(SequenceKind::PseudoRandom, 8, 701)?;
    let mut grp = SequenceSource::new(SequenceKind::PseudoRandom, 32, 702)?;
    let mut local = SequenceSource::new(SequenceKind::PseudoRandom, 8, 703)?;
    let locals: Vec<_> = (0..100).map(|_| kron(&haar_2x2(&mut local), &haar_2x2(&mut local))).collect();
    let mut flips = 0;
    for _ in 0..100 {
        let rho = conjugate_spectrum(&random_spectrum(&mut lam)?, &haar_group_element(&mut grp, Ensemble::Complex)?);
        let base = is_separable(&rho)?;
        for v in &locals {
            let moved = is_separable(&rho.transform(v))?;
            // Verdicts within round-off of the boundary cannot be compared.
            if moved.separable != base.separable && base.min_pt_eigenvalue.abs() > 1e-9 {
                flips += 1;
            }
        }
    }
    Ok(Check::new("local_unitary_invariance", flips == 0, format!("{flips} verdict changes")))
}

pub fn determinism() -> Result<Check> {
    let mut problems = Vec::new();
    for kind in [SequenceKind::LowDiscrepancy, SequenceKind::PseudoRandom] {
        let cfg = SamplerConfig::new(9).with_sequence(kind);
        let a = estimate_curve(Ensemble::Real, 20, 4, 20, &cfg.with_workers(1))?;
        let b = estimate_curve(Ensemble::Real, 20, 4, 20, &cfg.with_workers(3))?;
        let c = estimate_curve(Ensemble::Real, 20, 4, 20, &SamplerConfig { seed: 10, ..cfg })?;
        if a != b {
            problems.push(format!("{kind:?} curve depends on worker count"));
        }
        if a.bins == c.bins {
            problems.push(format!("{kind:?} curve ignores the seed"));
        }
        let spec = MeasureSpec::two_qubit(Metric::Hs, Ensemble::Complex);
        let p1 = separability_probability(&spec, Ensemble::Complex, 3000, 4, &cfg.with_workers(1))?;
        let p2 = separability_probability(&spec, Ensemble::Complex, 3000, 4, &cfg.with_workers(2))?;
        if p1.estimate.to_bits() != p2.estimate.to_bits() || p1.stderr.to_bits() != p2.stderr.to_bits() {
            problems.push(format!("{kind:?} probability depends on worker count"));
        }
    }
    Ok(Check::new(
        "determinism",
        problems.is_empty(),
        if problems.is_empty() { "bit-exact across workers, seed-sensitive".to_string() } else { problems.join("; ") },
    ))
}

pub fn normalization_oracles() -> Result<Check> {
    let mut passed = true;
    let mut detail = Vec::new();
    for (metric, beta) in [(Metric::Hs, 2), (Metric::Hs, 1), (Metric::Bures, 2), (Metric::Bures, 1)] {
        let spec = MeasureSpec::new(metric, beta, 1.0, 2)?;
        let exact = normalization_closed_form(metric, beta).expect("supported pair");
        let quad = normalization_oracle(&spec)?;
        let tol = if metric == Metric::Hs { 1e-10 } else { 1e-8 };
        let mut src = SequenceSource::new(SequenceKind::PseudoRandom, 8, 801)?;
        let (mc, se) = normalization_monte_carlo(&spec, metric.default_proposal(), 100_000, &mut src)?;
        let ok = (quad - exact).abs() <= tol && (mc - quad).abs() <= 3.0 * se;
        passed &= ok;
        detail.push(format!("{metric} b={beta}: quad {quad:.10} mc {mc:.5}±{se:.5}"));
    }
    Ok(Check::new("normalization_oracles_n2", passed, detail.join("; ")))
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for check in super::run_all() {
            assert!(check.passed, "{}: {}", check.name, check.detail);
        }
    }
}
