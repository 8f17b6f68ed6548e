use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SamplerConfig, SeparabilityCurve, TAG_LAMBDA, TAG_LAMBDA_GROUP};
use crate::error::{Error, Result};
use crate::measures::{log_importance_weight, MeasureSpec};
use crate::qmat::{conjugate_spectrum, Ensemble, Spectrum};
use crate::sampling::{
    dirichlet_simplex, haar_dimension, haar_group_element, SequenceSource, SIMPLEX_DIMENSION,
};
use crate::separability::{is_absolutely_separable, is_separable, maximal_concurrence};

/// Eigenvalue samples per work unit.
const BLOCK: usize = 1024;

/// Self-normalized importance-sampling estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
    /// Kish effective sample size `(Σw)² / Σw²`.
    pub effective_samples: f64,
}

/// One eigenvalue sample: log importance weight and the quantity averaged.
struct Sample {
    log_weight: f64,
    value: f64,
}

/// Draws `n_lambda` proposal spectra and maps each through `f`, in index order.
///
/// Sample `k` always uses counter `k + 1` of the run's proposal stream, so the
/// partition into blocks does not affect the draws.
fn weighted_samples<F>(
    spec: &MeasureSpec,
    n_lambda: usize,
    cfg: &SamplerConfig,
    f: F,
) -> Result<Vec<Sample>>
where
    F: Fn(usize, &Spectrum) -> Result<f64> + Sync,
{
    if n_lambda < 2 {
        return Err(Error::InvalidInput("need at least two eigenvalue samples".into()));
    }
    let proposal = spec.metric.default_proposal();
    let base = SequenceSource::for_stream(cfg.sequence, SIMPLEX_DIMENSION, cfg.seed, TAG_LAMBDA)?;
    let blocks = n_lambda.div_ceil(BLOCK);
    let per_block = cfg.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut src = base.clone();
                let start = b * BLOCK;
                let end = (start + BLOCK).min(n_lambda);
                let mut out = Vec::with_capacity(end - start);
                for k in start..end {
                    src.set_counter(k as u64 + 1);
                    let (s, _) = dirichlet_simplex(&mut src, proposal)?;
                    let log_weight = log_importance_weight(spec, s.values(), proposal)?;
                    out.push(Sample { log_weight, value: f(k, &s)? });
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(per_block.into_iter().flatten().collect())
}

/// Ratio `Σ w f / Σ w` with a delta-method standard error.
fn ratio_estimate(samples: &[Sample]) -> Result<(Estimate, Vec<f64>)> {
    let max = samples
        .iter()
        .map(|s| s.log_weight)
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Numerical("all importance weights vanish".into()));
    }
    let w: Vec<f64> = samples.iter().map(|s| (s.log_weight - max).exp()).collect();
    let sum_w: f64 = w.iter().sum();
    let sum_wf: f64 = w.iter().zip(samples).map(|(w, s)| w * s.value).sum();
    let r = sum_wf / sum_w;
    let var: f64 = w
        .iter()
        .zip(samples)
        .map(|(w, s)| (w * (s.value - r)).powi(2))
        .sum::<f64>()
        / (sum_w * sum_w);
    let sum_w2: f64 = w.iter().map(|x| x * x).sum();
    let normalized = w.iter().map(|x| x / sum_w).collect();
    Ok((
        Estimate {
            estimate: r,
            stderr: var.sqrt(),
            samples: samples.len(),
            effective_samples: sum_w * sum_w / sum_w2,
        },
        normalized,
    ))
}

fn check_ensemble(spec: &MeasureSpec, ensemble: Ensemble) -> Result<()> {
    if spec.beta != ensemble.beta() {
        return Err(Error::InvalidInput(format!(
            "measure has Dyson index {} but ensemble is {ensemble}",
            spec.beta
        )));
    }
    if spec.n != 4 {
        return Err(Error::InvalidInput("two-qubit estimators need n = 4".into()));
    }
    Ok(())
}

/// Separability probability under `spec`: proposal spectra weighted by the
/// eigenvalue density, each scored by its separable fraction over `n_group`
/// Haar conjugations.
pub fn separability_probability(
    spec: &MeasureSpec,
    ensemble: Ensemble,
    n_lambda: usize,
    n_group: usize,
    cfg: &SamplerConfig,
) -> Result<Estimate> {
    check_ensemble(spec, ensemble)?;
    if n_group == 0 {
        return Err(Error::InvalidInput("group sample count must be positive".into()));
    }
    let samples = weighted_samples(spec, n_lambda, cfg, |k, s| {
        let mut group =
            SequenceSource::for_stream(cfg.sequence, haar_dimension(ensemble), cfg.seed, TAG_LAMBDA_GROUP | k as u64)?;
        let mut separable = 0usize;
        for _ in 0..n_group {
            let u = haar_group_element(&mut group, ensemble)?;
            if is_separable(&conjugate_spectrum(s, &u))?.separable {
                separable += 1;
            }
        }
        Ok(separable as f64 / n_group as f64)
    })?;
    Ok(ratio_estimate(&samples)?.0)
}

/// Separability probability with σ̂(C(λ)) read off `curve` in place of the
/// Haar average.
///
/// The standard error combines the eigenvalue-sampling error with the
/// propagated binomial error of the curve bins.
pub fn curve_based_probability(
    curve: &SeparabilityCurve,
    spec: &MeasureSpec,
    n_lambda: usize,
    cfg: &SamplerConfig,
) -> Result<Estimate> {
    if let Some(ensemble) = curve.ensemble {
        check_ensemble(spec, ensemble)?;
    }
    let samples = weighted_samples(spec, n_lambda, cfg, |_, s| {
        Ok(curve.interpolate(maximal_concurrence(s)).0)
    })?;
    let (mut est, weights) = ratio_estimate(&samples)?;
    // Recompute the interpolation coefficients to propagate the bin errors.
    let proposal = spec.metric.default_proposal();
    let mut src = SequenceSource::for_stream(cfg.sequence, SIMPLEX_DIMENSION, cfg.seed, TAG_LAMBDA)?;
    let mut sensitivity = vec![0.0; curve.bins.len()];
    for (k, w) in weights.iter().enumerate() {
        src.set_counter(k as u64 + 1);
        let (s, _) = dirichlet_simplex(&mut src, proposal)?;
        for (bin, coef) in curve.interpolate(maximal_concurrence(&s)).1 {
            sensitivity[bin] += w * coef;
        }
    }
    let curve_var: f64 = sensitivity
        .iter()
        .zip(&curve.bins)
        .map(|(d, b)| (d * b.stderr).powi(2))
        .sum();
    est.stderr = (est.stderr.powi(2) + curve_var).sqrt();
    Ok(est)
}

/// Weighted fraction of proposal spectra with `C = 0`.
pub fn absolute_separability_probability(
    spec: &MeasureSpec,
    n_lambda: usize,
    cfg: &SamplerConfig,
) -> Result<Estimate> {
    if spec.n != 4 {
        return Err(Error::InvalidInput("two-qubit estimators need n = 4".into()));
    }
    let samples = weighted_samples(spec, n_lambda, cfg, |_, s| {
        Ok(if is_absolutely_separable(s) { 1.0 } else { 0.0 })
    })?;
    Ok(ratio_estimate(&samples)?.0)
}
