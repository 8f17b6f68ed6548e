//! Eigenvalue densities of the Hilbert-Schmidt and Bures measures.
//!
//! Densities are given on the probability simplex (the delta constraint is the
//! sample space) and without normalization constants. All evaluation goes
//! through log-space; callers exponentiate after subtracting a running maximum.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{Ensemble, Spectrum};
use crate::sampling::{simplex_point, Proposal, SequenceSource};

/// Eigenvalues below this are treated as zero by the Bures density under a flat proposal.
pub const BURES_SINGULAR_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[serde(alias = "HS")]
    Hs,
    Bures,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Hs => "hs",
            Metric::Bures => "bures",
        }
    }

    /// Proposal whose density matches the boundary behavior of this metric.
    pub fn default_proposal(self) -> Proposal {
        match self {
            Metric::Hs => Proposal::Uniform,
            Metric::Bures => Proposal::BuresAdapted,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hs" | "hilbert-schmidt" => Ok(Metric::Hs),
            "bures" => Ok(Metric::Bures),
            other => Err(Error::Config(format!("unknown metric '{other}'"))),
        }
    }
}

/// Metric, Dyson index, α and matrix size of an eigenvalue density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub metric: Metric,
    pub beta: u8,
    pub alpha: f64,
    pub n: usize,
}

impl MeasureSpec {
    pub fn new(metric: Metric, beta: u8, alpha: f64, n: usize) -> Result<Self> {
        if beta != 1 && beta != 2 {
            return Err(Error::InvalidInput(format!("Dyson index must be 1 or 2, got {beta}")));
        }
        if !(alpha > 0.0) {
            return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
        }
        if !(2..=4).contains(&n) {
            return Err(Error::InvalidInput(format!("dimension must be 2, 3 or 4, got {n}")));
        }
        Ok(MeasureSpec { metric, beta, alpha, n })
    }

    /// Two-qubit (n = 4, α = 1) density for `ensemble`.
    pub fn two_qubit(metric: Metric, ensemble: Ensemble) -> Self {
        MeasureSpec { metric, beta: ensemble.beta(), alpha: 1.0, n: 4 }
    }

    pub fn ensemble(&self) -> Ensemble {
        if self.beta == 1 {
            Ensemble::Real
        } else {
            Ensemble::Complex
        }
    }

    /// Exponent of the single-eigenvalue factor `Π λ_i^e`.
    fn eigenvalue_exponent(&self) -> f64 {
        match self.metric {
            Metric::Hs => self.alpha - 1.0,
            Metric::Bures => self.alpha - 1.5,
        }
    }

    /// Log of the pairwise factor, without the single-eigenvalue product.
    fn log_pair_factor(&self, lambda: &[f64]) -> f64 {
        let beta = f64::from(self.beta);
        let mut acc = 0.0;
        for i in 0..lambda.len() {
            for j in (i + 1)..lambda.len() {
                let gap = (lambda[i] - lambda[j]).abs();
                acc += match self.metric {
                    Metric::Hs => beta * gap.ln(),
                    Metric::Bures => 0.5 * beta * (2.0 * gap.ln() - (lambda[i] + lambda[j]).ln()),
                };
            }
        }
        acc
    }
}

/// `ln` of the unnormalized eigenvalue density. `+∞` marks a singular Bures
/// sample (some λ = 0), `-∞` a degenerate spectrum.
pub fn log_density_weight(spec: &MeasureSpec, lambda: &[f64]) -> f64 {
    let e = spec.eigenvalue_exponent();
    let single = if e == 0.0 {
        0.0
    } else {
        lambda.iter().map(|x| e * x.ln()).sum::<f64>()
    };
    if single == f64::INFINITY {
        return f64::INFINITY;
    }
    let pair = spec.log_pair_factor(lambda);
    if pair.is_nan() {
        return f64::NEG_INFINITY;
    }
    single + pair
}

/// Unnormalized eigenvalue density of `spec` at `s`.
pub fn density_weight(spec: &MeasureSpec, s: &Spectrum) -> f64 {
    log_density_weight(spec, s.values()).exp()
}

/// `ln` of `density / proposal density` at `lambda`.
///
/// Common power factors are cancelled before taking logarithms, so the Bures
/// density under the adapted proposal stays finite at the simplex boundary.
pub fn log_importance_weight(spec: &MeasureSpec, lambda: &[f64], proposal: Proposal) -> Result<f64> {
    let a = match proposal {
        Proposal::Uniform => 1.0,
        Proposal::BuresAdapted => 0.5,
    };
    let e = spec.eigenvalue_exponent() - (a - 1.0);
    if e < 0.0 && lambda.iter().any(|&x| x < BURES_SINGULAR_TOL) {
        return Err(Error::SingularWeight(format!(
            "{} density with {proposal:?} proposal at eigenvalue below {BURES_SINGULAR_TOL:e}; use the adapted proposal",
            spec.metric
        )));
    }
    let single = if e == 0.0 {
        0.0
    } else {
        lambda.iter().map(|x| e * x.ln()).sum::<f64>()
    };
    let pair = spec.log_pair_factor(lambda);
    let pair = if pair.is_nan() { f64::NEG_INFINITY } else { pair };
    Ok(single + pair - proposal.log_normalizer(lambda.len()))
}

pub fn importance_weight(spec: &MeasureSpec, s: &Spectrum, proposal: Proposal) -> Result<f64> {
    Ok(log_importance_weight(spec, s.values(), proposal)?.exp())
}

/// `1 / C_2` for `n = 2, α = 1`, by double-exponential quadrature on `[0, 1]`.
pub fn normalization_oracle(spec: &MeasureSpec) -> Result<f64> {
    if spec.n != 2 {
        return Err(Error::NotImplemented(format!(
            "normalization constant for n = {} (only n = 2 is supported)",
            spec.n
        )));
    }
    if spec.alpha != 1.0 {
        return Err(Error::InvalidInput("normalization oracle requires alpha = 1".into()));
    }
    let f = |lo: f64, hi: f64| {
        let v = log_density_weight(spec, &[lo, hi]);
        if v == f64::NEG_INFINITY {
            0.0
        } else {
            v.exp()
        }
    };
    // Split at the midpoint, where the pairwise factor has its kink.
    let left = tanh_sinh(|x, da, _db| f(da, 1.0 - x), 0.0, 0.5, 1e-12)?;
    let right = tanh_sinh(|x, _da, db| f(x, db), 0.5, 1.0, 1e-12)?;
    Ok(left + right)
}

/// Closed forms of `1 / C_2` for the four supported (metric, β) pairs.
pub fn normalization_closed_form(metric: Metric, beta: u8) -> Option<f64> {
    match (metric, beta) {
        (Metric::Hs, 1) => Some(0.5),
        (Metric::Hs, 2) => Some(1.0 / 3.0),
        (Metric::Bures, 1) => Some(2.0),
        (Metric::Bures, 2) => Some(PI / 2.0),
        _ => None,
    }
}

/// Tanh–sinh quadrature of `f` over `[a, b]`, halving the step until two
/// successive levels agree to `tol`. `f` receives `(x, x - a, b - x)` with the
/// distances computed without cancellation.
fn tanh_sinh(f: impl Fn(f64, f64, f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    const T_MAX: f64 = 6.5;
    let half = 0.5 * (b - a);
    let node = |t: f64| -> Option<f64> {
        let u = 0.5 * PI * t.sinh();
        let cosh_u = u.cosh();
        // Distances to the endpoints: half * (1 ± tanh u) = half * e^{±u} / cosh u.
        let da = half * (-u).exp() / cosh_u;
        let db = half * u.exp() / cosh_u;
        if da <= 0.0 || db <= 0.0 || !da.is_finite() || !db.is_finite() {
            return None;
        }
        let x = if da < db { a + da } else { b - db };
        let w = half * 0.5 * PI * t.cosh() / (cosh_u * cosh_u);
        let v = f(x, da, db);
        Some(w * v)
    };
    let mut h = 1.0;
    let mut sum = node(0.0).unwrap_or(0.0);
    let mut k = 1;
    while (k as f64) * h <= T_MAX {
        sum += node(k as f64 * h).unwrap_or(0.0) + node(-(k as f64) * h).unwrap_or(0.0);
        k += 1;
    }
    let mut estimate = sum * h;
    for _level in 0..20 {
        h *= 0.5;
        // Only odd multiples of the new step are new nodes.
        let mut j = 1;
        while (j as f64) * h <= T_MAX {
            let t = j as f64 * h;
            sum += node(t).unwrap_or(0.0) + node(-t).unwrap_or(0.0);
            j += 2;
        }
        let next = sum * h;
        if !next.is_finite() {
            return Err(Error::Numerical("quadrature diverged".into()));
        }
        let converged = (next - estimate).abs() <= tol;
        estimate = next;
        if converged && h < 0.1 {
            return Ok(estimate);
        }
    }
    Err(Error::Numerical("quadrature did not reach tolerance".into()))
}

/// Monte-Carlo estimate of `1 / C_n` as the mean importance weight under `proposal`.
/// Returns `(estimate, standard error)`.
pub fn normalization_monte_carlo(
    spec: &MeasureSpec,
    proposal: Proposal,
    samples: usize,
    src: &mut SequenceSource,
) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let draw = simplex_point(src, spec.n, proposal)?;
        let w = log_importance_weight(spec, &draw.lambda, proposal)?.exp();
        sum += w;
        sum_sq += w * w;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(metric: Metric, beta: u8, n: usize) -> MeasureSpec {
        MeasureSpec::new(metric, beta, 1.0, n).unwrap()
    }

    #[test]
    fn hs_complex_pair_product() {
        let s = Spectrum::new([0.4, 0.3, 0.2, 0.1]).unwrap();
        let w = density_weight(&spec(Metric::Hs, 2, 4), &s);
        assert!((w - 1.44e-10).abs() < 1e-22, "{w:e}");
    }

    #[test]
    fn hs_real_pair_product() {
        let s = Spectrum::new([0.5, 0.3, 0.15, 0.05]).unwrap();
        let w = density_weight(&spec(Metric::Hs, 1, 4), &s);
        assert!((w - 1.18125e-4).abs() < 1e-16, "{w:e}");
    }

    #[test]
    fn degenerate_spectrum_has_zero_weight() {
        let s = Spectrum::maximally_mixed();
        for metric in [Metric::Hs, Metric::Bures] {
            for beta in [1, 2] {
                assert_eq!(density_weight(&spec(metric, beta, 4), &s), 0.0);
            }
        }
    }

    #[test]
    fn bures_with_zero_eigenvalue_is_singular() {
        let s = Spectrum::new([0.5, 0.3, 0.2, 0.0]).unwrap();
        assert_eq!(density_weight(&spec(Metric::Bures, 2, 4), &s), f64::INFINITY);
        let err = importance_weight(&spec(Metric::Bures, 2, 4), &s, Proposal::Uniform).unwrap_err();
        assert!(matches!(err, Error::SingularWeight(_)));
        let w = importance_weight(&spec(Metric::Bures, 2, 4), &s, Proposal::BuresAdapted).unwrap();
        assert!(w.is_finite() && w > 0.0);
    }

    #[test]
    fn hs_uniform_weight_is_density_over_constant() {
        let s = Spectrum::new([0.4, 0.3, 0.2, 0.1]).unwrap();
        let sp = spec(Metric::Hs, 2, 4);
        let w = importance_weight(&sp, &s, Proposal::Uniform).unwrap();
        assert!((w * 6.0 - density_weight(&sp, &s)).abs() < 1e-22);
    }

    #[test]
    fn bures_adapted_weight_cancels_root_factors() {
        let s = Spectrum::new([0.4, 0.3, 0.2, 0.1]).unwrap();
        let sp = spec(Metric::Bures, 2, 4);
        let w = importance_weight(&sp, &s, Proposal::BuresAdapted).unwrap();
        let l = s.values();
        let mut pair = 1.0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                pair *= (l[i] - l[j]).powi(2) / (l[i] + l[j]);
            }
        }
        // Dirichlet(½,…,½) normalizer on the 4-simplex is 1/π².
        assert!((w - pair * PI * PI).abs() < 1e-12 * pair * PI * PI);
    }

    #[test]
    fn quadrature_oracles() {
        let hs2 = normalization_oracle(&spec(Metric::Hs, 2, 2)).unwrap();
        assert!((hs2 - 1.0 / 3.0).abs() < 1e-10, "{hs2}");
        let hs1 = normalization_oracle(&spec(Metric::Hs, 1, 2)).unwrap();
        assert!((hs1 - 0.5).abs() < 1e-10, "{hs1}");
        let b2 = normalization_oracle(&spec(Metric::Bures, 2, 2)).unwrap();
        assert!((b2 - PI / 2.0).abs() < 1e-8, "{b2}");
        let b1 = normalization_oracle(&spec(Metric::Bures, 1, 2)).unwrap();
        assert!((b1 - 2.0).abs() < 1e-8, "{b1}");
    }

    #[test]
    fn oracle_rejects_larger_n() {
        let err = normalization_oracle(&spec(Metric::Hs, 2, 4)).unwrap_err();
        assert!(matches!(err, Error::NotImplemented(_)));
    }

    #[test]
    fn spec_validation() {
        assert!(MeasureSpec::new(Metric::Hs, 3, 1.0, 4).is_err());
        assert!(MeasureSpec::new(Metric::Hs, 2, 0.0, 4).is_err());
        assert!(MeasureSpec::new(Metric::Hs, 2, 1.0, 5).is_err());
    }
}
