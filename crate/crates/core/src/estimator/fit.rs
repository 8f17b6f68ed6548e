use serde::{Deserialize, Serialize};

use super::SeparabilityCurve;
use crate::error::{Error, Result};

const MIN_BINS: usize = 5;

/// Inverse-variance weighted line `σ ≈ intercept + slope · c` over `[a, b]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub a: f64,
    pub b: f64,
    pub intercept: f64,
    pub slope: f64,
    pub intercept_stderr: f64,
    pub slope_stderr: f64,
    pub weighted_rms_residual: f64,
    pub bins_used: usize,
    /// Midpoints of the bins dropped by the exclusion list.
    pub excluded: Vec<f64>,
}

/// Fits the bins in `[a, b]`, skipping the bin nearest to each `excluded` value.
///
/// Bin variances use `p̃ = (k + ½)/(n + 1)` so that bins at σ̂ = 0 or 1 keep a
/// finite weight.
pub fn fit_segment(curve: &SeparabilityCurve, a: f64, b: f64, excluded: &[f64]) -> Result<LinearFit> {
    if !(b > a) {
        return Err(Error::InvalidInput(format!("empty fit interval [{a}, {b}]")));
    }
    let spacing = curve
        .bins
        .windows(2)
        .map(|w| w[1].c_mid - w[0].c_mid)
        .fold(f64::INFINITY, f64::min);
    let eps = 1e-9;
    let mut dropped = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for bin in curve.bins.iter().filter(|bin| bin.c_mid >= a - eps && bin.c_mid <= b + eps) {
        if excluded.iter().any(|e| (bin.c_mid - e).abs() < 0.5 * spacing) {
            dropped.push(bin.c_mid);
            continue;
        }
        let n = bin.n_trials as f64;
        let p = (bin.n_separable as f64 + 0.5) / (n + 1.0);
        xs.push(bin.c_mid);
        ys.push(bin.sigma_hat);
        ws.push(n / (p * (1.0 - p)));
    }
    if xs.len() < MIN_BINS {
        return Err(Error::InvalidInput(format!(
            "only {} usable bins in [{a}, {b}], need {MIN_BINS}",
            xs.len()
        )));
    }
    let sw: f64 = ws.iter().sum();
    let xbar = ws.iter().zip(&xs).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ybar = ws.iter().zip(&ys).map(|(w, y)| w * y).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((w, x), y) in ws.iter().zip(&xs).zip(&ys) {
        sxx += w * (x - xbar).powi(2);
        sxy += w * (x - xbar) * (y - ybar);
    }
    if !(sxx > 0.0) {
        return Err(Error::InvalidInput("fit abscissae are degenerate".into()));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let rss: f64 = ws
        .iter()
        .zip(&xs)
        .zip(&ys)
        .map(|((w, x), y)| w * (y - intercept - slope * x).powi(2))
        .sum();
    Ok(LinearFit {
        a,
        b,
        intercept,
        slope,
        intercept_stderr: (1.0 / sw + xbar * xbar / sxx).sqrt(),
        slope_stderr: (1.0 / sxx).sqrt(),
        weighted_rms_residual: (rss / sw).sqrt(),
        bins_used: xs.len(),
        excluded: dropped,
    })
}
