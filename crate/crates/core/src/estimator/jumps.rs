use serde::{Deserialize, Serialize};

use super::stats::{mad, median};
use super::{CurveBin, SeparabilityCurve};
use crate::error::{Error, Result};

pub const DEFAULT_Z_THRESHOLD: f64 = 6.0;
const MIN_BINS: usize = 50;
const SIDE_BINS: usize = 5;
/// Differences on each side of the one being scored that set its local center and scale.
const HALF_WINDOW: usize = 50;
/// Scales the MAD to a Gaussian standard deviation.
const MAD_SCALE: f64 = 1.4826;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    /// Midpoint of the first bin after the jump.
    pub c_location: f64,
    pub robust_z: f64,
    /// Mean σ̂ over up to five bins ending just before the jump.
    pub left_mean: f64,
    /// Mean σ̂ over up to five bins starting at the jump.
    pub right_mean: f64,
    /// `(left − right) / left`.
    pub relative_change: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpReport {
    pub threshold: f64,
    pub jumps: Vec<Jump>,
}

impl JumpReport {
    /// The reported jump nearest to `c`, if any lies within `tolerance`.
    pub fn near(&self, c: f64, tolerance: f64) -> Option<&Jump> {
        self.jumps
            .iter()
            .filter(|j| (j.c_location - c).abs() <= tolerance)
            .min_by(|a, b| (a.c_location - c).abs().total_cmp(&(b.c_location - c).abs()))
    }
}

fn smoothed_variance(bin: &CurveBin) -> f64 {
    let n = bin.n_trials as f64;
    let p = (bin.n_separable as f64 + 0.5) / (n + 1.0);
    p * (1.0 - p) / n
}

/// Flags outlying first differences of σ̂ by a median/MAD z-score computed
/// over a sliding window of neighbouring differences. The scale is floored at
/// the median binomial standard error of the differences in the window.
///
/// Consecutive flagged differences form one jump, reported at the difference
/// with the largest |z|.
pub fn detect_jumps(curve: &SeparabilityCurve, z_threshold: f64) -> Result<JumpReport> {
    let n = curve.bins.len();
    if n < MIN_BINS {
        return Err(Error::InvalidInput(format!(
            "jump detection needs at least {MIN_BINS} bins, got {n}"
        )));
    }
    if !(z_threshold > 0.0) {
        return Err(Error::InvalidInput(format!("z threshold {z_threshold} must be positive")));
    }
    let sigma = curve.sigma_values();
    let diffs: Vec<f64> = sigma.windows(2).map(|w| w[1] - w[0]).collect();
    let binomial: Vec<f64> = curve
        .bins
        .windows(2)
        .map(|w| (smoothed_variance(&w[0]) + smoothed_variance(&w[1])).sqrt())
        .collect();
    let z: Vec<f64> = (0..diffs.len())
        .map(|i| {
            let (lo, hi) = window(i, diffs.len());
            let local = &diffs[lo..hi];
            let scale = (MAD_SCALE * mad(local)).max(median(&binomial[lo..hi]));
            let dev = diffs[i] - median(local);
            if scale > 0.0 {
                dev / scale
            } else if dev == 0.0 {
                0.0
            } else {
                dev.signum() * f64::INFINITY
            }
        })
        .collect();

    let mut jumps = Vec::new();
    let mut k = 0;
    while k < z.len() {
        if z[k].abs() < z_threshold {
            k += 1;
            continue;
        }
        let mut best = k;
        while k < z.len() && z[k].abs() >= z_threshold {
            if z[k].abs() > z[best].abs() {
                best = k;
            }
            k += 1;
        }
        // Difference `best` lies between bins `best` and `best + 1`.
        let left = &sigma[(best + 1).saturating_sub(SIDE_BINS)..=best];
        let right = &sigma[best + 1..(best + 1 + SIDE_BINS).min(n)];
        let left_mean = left.iter().sum::<f64>() / left.len() as f64;
        let right_mean = right.iter().sum::<f64>() / right.len() as f64;
        jumps.push(Jump {
            c_location: curve.bins[best + 1].c_mid,
            robust_z: z[best],
            left_mean,
            right_mean,
            relative_change: (left_mean - right_mean) / left_mean,
        });
    }
    Ok(JumpReport { threshold: z_threshold, jumps })
}

/// Window of `2 * HALF_WINDOW + 1` differences around `i`, shifted inward at the ends.
fn window(i: usize, len: usize) -> (usize, usize) {
    let width = (2 * HALF_WINDOW + 1).min(len);
    let lo = i.saturating_sub(HALF_WINDOW).min(len - width);
    (lo, lo + width)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(values: &[f64]) -> SeparabilityCurve {
        let m = values.len() + 1;
        let bins = values
            .iter()
            .enumerate()
            .map(|(i, &s)| CurveBin::from_counts((i + 1) as f64 / m as f64, 1_000_000, (s * 1e6).round() as u64).unwrap())
            .collect();
        SeparabilityCurve::from_bins(bins).unwrap()
    }

    #[test]
    fn too_few_bins() {
        assert!(detect_jumps(&curve(&[0.5; 20]), 6.0).is_err());
    }

    #[test]
    fn noiseless_step_is_found() {
        let values: Vec<f64> = (1..100).map(|k| if k < 50 { 0.4 - 0.001 * k as f64 } else { 0.2 - 0.001 * k as f64 }).collect();
        let report = detect_jumps(&curve(&values), 6.0).unwrap();
        assert_eq!(report.jumps.len(), 1);
        let j = report.jumps[0];
        assert!((j.c_location - 0.5).abs() < 1e-12);
        assert!(j.robust_z < 0.0);
        assert!(j.relative_change > 0.0);
    }

    #[test]
    fn smooth_line_has_no_jumps() {
        let values: Vec<f64> = (1..100).map(|k| 1.0 - 0.01 * k as f64).collect();
        assert!(detect_jumps(&curve(&values), 6.0).unwrap().jumps.is_empty());
    }
}
