use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SamplerConfig, TAG_CURVE_GROUP, TAG_CURVE_SPECTRA, TAG_DISPERSION};
use crate::error::{Error, Result};
use crate::qmat::{conjugate_spectrum, Ensemble};
use crate::sampling::{
    haar_dimension, haar_group_element, spectrum_with_concurrence, FixedCSlice, SequenceKind,
    SequenceSource,
};
use crate::separability::is_separable;

/// Separable fraction at one value of C.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveBin {
    pub c_mid: f64,
    pub n_trials: u64,
    pub n_separable: u64,
    pub sigma_hat: f64,
    pub stderr: f64,
}

impl CurveBin {
    pub fn from_counts(c_mid: f64, n_trials: u64, n_separable: u64) -> Result<Self> {
        if n_trials == 0 || n_separable > n_trials {
            return Err(Error::InvalidInput(format!(
                "bin at c = {c_mid}: {n_separable} separable out of {n_trials} trials"
            )));
        }
        let sigma_hat = n_separable as f64 / n_trials as f64;
        let stderr = (sigma_hat * (1.0 - sigma_hat) / n_trials as f64).sqrt();
        Ok(CurveBin { c_mid, n_trials, n_separable, sigma_hat, stderr })
    }
}

/// Binned estimate of σ(C) for one ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityCurve {
    pub bins: Vec<CurveBin>,
    /// Unknown for curves read back from CSV.
    pub ensemble: Option<Ensemble>,
    pub seed: Option<u64>,
    pub spectra_per_bin: Option<usize>,
    pub group_samples: Option<usize>,
}

impl SeparabilityCurve {
    /// Wraps bins that are strictly increasing in `c_mid` and lie in (0, 1).
    pub fn from_bins(bins: Vec<CurveBin>) -> Result<Self> {
        if bins.is_empty() {
            return Err(Error::InvalidInput("curve has no bins".into()));
        }
        for b in &bins {
            if !(b.c_mid > 0.0 && b.c_mid < 1.0) || !(0.0..=1.0).contains(&b.sigma_hat) {
                return Err(Error::InvalidInput(format!("bin out of range: {b:?}")));
            }
        }
        if bins.windows(2).any(|w| w[0].c_mid >= w[1].c_mid) {
            return Err(Error::InvalidInput("bins are not strictly increasing in c".into()));
        }
        Ok(SeparabilityCurve {
            bins,
            ensemble: None,
            seed: None,
            spectra_per_bin: None,
            group_samples: None,
        })
    }

    pub fn with_ensemble(mut self, ensemble: Ensemble) -> Self {
        self.ensemble = Some(ensemble);
        self
    }

    /// Number of equal subintervals of [0, 1] the bins were placed on.
    pub fn bin_count(&self) -> usize {
        self.bins.len() + 1
    }

    pub fn c_values(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.c_mid).collect()
    }

    pub fn sigma_values(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.sigma_hat).collect()
    }

    /// σ̂ at `c` by linear interpolation, anchored at σ(0) = 1 and held flat
    /// beyond the last bin. Also returns the interpolation weights as
    /// `(bin index, weight)` pairs.
    pub fn interpolate(&self, c: f64) -> (f64, [(usize, f64); 2]) {
        let first = &self.bins[0];
        if c <= 0.0 {
            return (1.0, [(0, 0.0), (0, 0.0)]);
        }
        if c < first.c_mid {
            let t = c / first.c_mid;
            return (1.0 + t * (first.sigma_hat - 1.0), [(0, t), (0, 0.0)]);
        }
        let last = self.bins.len() - 1;
        if c >= self.bins[last].c_mid {
            return (self.bins[last].sigma_hat, [(last, 1.0), (last, 0.0)]);
        }
        let hi = self.bins.partition_point(|b| b.c_mid <= c);
        let lo = hi - 1;
        let (a, b) = (&self.bins[lo], &self.bins[hi]);
        let t = (c - a.c_mid) / (b.c_mid - a.c_mid);
        (a.sigma_hat + t * (b.sigma_hat - a.sigma_hat), [(lo, 1.0 - t), (hi, t)])
    }
}

/// Per-spectrum separable counts on one slice.
fn slice_counts(
    slice: &FixedCSlice,
    ensemble: Ensemble,
    n_spectra: usize,
    n_group: usize,
    spectra_src: &mut SequenceSource,
    group_src: &mut SequenceSource,
) -> Result<Vec<u64>> {
    if n_spectra == 0 || n_group == 0 {
        return Err(Error::InvalidInput("sample counts must be positive".into()));
    }
    let mut counts = Vec::with_capacity(n_spectra);
    for _ in 0..n_spectra {
        let s = spectrum_with_concurrence(slice, spectra_src)?;
        let mut separable = 0;
        for _ in 0..n_group {
            let u = haar_group_element(group_src, ensemble)?;
            if is_separable(&conjugate_spectrum(&s, &u))?.separable {
                separable += 1;
            }
        }
        counts.push(separable);
    }
    Ok(counts)
}

pub fn estimate_sigma_on_slice(
    slice: &FixedCSlice,
    ensemble: Ensemble,
    n_spectra: usize,
    n_group: usize,
    spectra_src: &mut SequenceSource,
    group_src: &mut SequenceSource,
) -> Result<CurveBin> {
    let counts = slice_counts(slice, ensemble, n_spectra, n_group, spectra_src, group_src)?;
    CurveBin::from_counts(slice.c(), (n_spectra * n_group) as u64, counts.iter().sum())
}

/// Separable fraction over `n_spectra` fixed-C spectra × `n_group` Haar conjugations each.
pub fn estimate_sigma_at(
    c: f64,
    ensemble: Ensemble,
    n_spectra: usize,
    n_group: usize,
    spectra_src: &mut SequenceSource,
    group_src: &mut SequenceSource,
) -> Result<CurveBin> {
    let slice = FixedCSlice::with_default_budget(c)?;
    estimate_sigma_on_slice(&slice, ensemble, n_spectra, n_group, spectra_src, group_src)
}

fn unit_sources(
    cfg: &SamplerConfig,
    ensemble: Ensemble,
    spectra_tag: u64,
    group_tag: u64,
    unit: u64,
) -> Result<(SequenceSource, SequenceSource)> {
    let spectra = SequenceSource::for_stream(SequenceKind::PseudoRandom, 2, cfg.seed, spectra_tag | unit)?;
    let group = SequenceSource::for_stream(cfg.sequence, haar_dimension(ensemble), cfg.seed, group_tag | unit)?;
    Ok((spectra, group))
}

/// σ̂ at the midpoints `k / bin_count`, `k = 1 … bin_count − 1`.
pub fn estimate_curve(
    ensemble: Ensemble,
    bin_count: usize,
    n_spectra: usize,
    n_group: usize,
    cfg: &SamplerConfig,
) -> Result<SeparabilityCurve> {
    if bin_count < 2 {
        return Err(Error::InvalidInput(format!("bin count {bin_count} must be at least 2")));
    }
    let bins = cfg.install(|| {
        (1..bin_count)
            .into_par_iter()
            .map(|k| {
                let c = k as f64 / bin_count as f64;
                let slice = FixedCSlice::new(c, cfg.max_rejects)?;
                let (mut spectra, mut group) =
                    unit_sources(cfg, ensemble, TAG_CURVE_SPECTRA, TAG_CURVE_GROUP, k as u64)?;
                estimate_sigma_on_slice(&slice, ensemble, n_spectra, n_group, &mut spectra, &mut group)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut curve = SeparabilityCurve::from_bins(bins)?.with_ensemble(ensemble);
    curve.seed = Some(cfg.seed);
    curve.spectra_per_bin = Some(n_spectra);
    curve.group_samples = Some(n_group);
    Ok(curve)
}

/// Spread of per-spectrum separable fractions on one slice, against the spread
/// binomial noise alone would produce.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzDispersion {
    pub c: f64,
    pub n_spectra: usize,
    pub n_group: usize,
    pub mean_fraction: f64,
    /// Sample variance of the per-spectrum fractions.
    pub between_variance: f64,
    /// `f̄ (1 − f̄) / n_group`.
    pub binomial_variance: f64,
    /// `between / binomial`; `None` when the binomial variance is zero.
    pub excess_ratio: Option<f64>,
}

pub fn ansatz_dispersion(
    ensemble: Ensemble,
    c: f64,
    n_spectra: usize,
    n_group: usize,
    cfg: &SamplerConfig,
) -> Result<AnsatzDispersion> {
    if n_spectra < 30 || n_group < 100 {
        return Err(Error::InvalidInput(format!(
            "dispersion needs at least 30 spectra and 100 group samples, got {n_spectra} and {n_group}"
        )));
    }
    let slice = FixedCSlice::new(c, cfg.max_rejects)?;
    let spectra_tag = TAG_DISPERSION;
    let group_tag = TAG_DISPERSION | (1 << 39);
    let counts = cfg.install(|| {
        (0..n_spectra)
            .into_par_iter()
            .map(|i| {
                let (mut spectra, mut group) = unit_sources(cfg, ensemble, spectra_tag, group_tag, i as u64)?;
                Ok(slice_counts(&slice, ensemble, 1, n_group, &mut spectra, &mut group)?[0])
            })
            .collect::<Result<Vec<u64>>>()
    })??;
    let fractions: Vec<f64> = counts.iter().map(|&k| k as f64 / n_group as f64).collect();
    let n = fractions.len() as f64;
    let mean = fractions.iter().sum::<f64>() / n;
    let between = fractions.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let binomial = mean * (1.0 - mean) / n_group as f64;
    Ok(AnsatzDispersion {
        c,
        n_spectra,
        n_group,
        mean_fraction: mean,
        between_variance: between,
        binomial_variance: binomial,
        excess_ratio: (binomial > 0.0).then(|| between / binomial),
    })
}
