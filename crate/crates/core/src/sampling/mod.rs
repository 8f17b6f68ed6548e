//! Random and quasi-random sampling: sequence sources, Haar group elements,
//! simplex proposals and fixed-concurrence spectra.

mod direction_numbers;
mod sobol;

use std::f64::consts::PI;
use std::str::FromStr;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{determinant, Ensemble, GroupElement, Mat4, Spectrum, C64};

pub use sobol::Sobol;

/// Default attempt budget for [`spectrum_with_concurrence`].
pub const DEFAULT_MAX_REJECTS: u64 = 100_000;

/// Uniform coordinates consumed per Haar draw.
pub fn haar_dimension(ensemble: Ensemble) -> usize {
    match ensemble {
        Ensemble::Real => 16,
        Ensemble::Complex => 32,
    }
}

/// Uniform coordinates consumed per simplex proposal draw.
pub const SIMPLEX_DIMENSION: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceKind {
    /// Sobol sequence (Gray-code order), optionally digitally shifted by the seed.
    LowDiscrepancy,
    /// ChaCha8 keyed by the seed, one stream per counter value.
    PseudoRandom,
}

impl FromStr for SequenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sobol" | "low-discrepancy" | "qmc" => Ok(SequenceKind::LowDiscrepancy),
            "random" | "pseudo-random" | "mc" => Ok(SequenceKind::PseudoRandom),
            other => Err(Error::Config(format!("unknown sequence kind '{other}'"))),
        }
    }
}

/// Deterministic point source: `(kind, dimension, seed, counter)` fixes every point.
///
/// Counters start at 1 so the low-discrepancy origin is skipped.
#[derive(Clone, Debug)]
pub struct SequenceSource {
    kind: SequenceKind,
    dimension: usize,
    seed: u64,
    counter: u64,
    engine: Engine,
}

#[derive(Clone, Debug)]
enum Engine {
    Sobol { sobol: Sobol, shift: Vec<u32> },
    Chacha(Box<ChaCha8Rng>),
}

impl SequenceSource {
    pub fn new(kind: SequenceKind, dimension: usize, seed: u64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Config("sequence dimension must be positive".into()));
        }
        let engine = match kind {
            SequenceKind::LowDiscrepancy => {
                let sobol = Sobol::new(dimension)?;
                // Seed 0 leaves the sequence unshifted.
                let shift = (0..dimension)
                    .map(|d| {
                        if seed == 0 {
                            0
                        } else {
                            (splitmix64(seed ^ splitmix64(d as u64 + 1)) >> 32) as u32
                        }
                    })
                    .collect();
                Engine::Sobol { sobol, shift }
            }
            SequenceKind::PseudoRandom => Engine::Chacha(Box::new(ChaCha8Rng::seed_from_u64(seed))),
        };
        Ok(SequenceSource { kind, dimension, seed, counter: 1, engine })
    }

    /// Source for one work unit of a run: the seed is hashed with `stream` so
    /// that different units never share points.
    pub fn for_stream(kind: SequenceKind, dimension: usize, seed: u64, stream: u64) -> Result<Self> {
        SequenceSource::new(kind, dimension, derive_seed(seed, stream))
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn set_counter(&mut self, counter: u64) {
        self.counter = counter;
    }

    /// Writes the point at the current counter into `out` and advances the counter.
    pub fn next_into(&mut self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dimension);
        let n = self.counter;
        match &mut self.engine {
            Engine::Sobol { sobol, shift } => {
                for (d, slot) in out.iter_mut().enumerate() {
                    *slot = f64::from(sobol.coordinate(n, d) ^ shift[d]) * (1.0 / 4_294_967_296.0);
                }
            }
            Engine::Chacha(rng) => {
                rng.set_stream(n);
                rng.set_word_pos(0);
                for slot in out.iter_mut() {
                    *slot = (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0);
                }
            }
        }
        self.counter += 1;
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension];
        self.next_into(&mut out);
        out
    }
}

/// Mixes a run seed with a stream index.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_add(0x632b_e59b_d9b4_e019)))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Box–Muller pair from two uniforms in `[0, 1)`.
///
/// The angle is rotated by half a 32-bit grid cell, which keeps it uniform while
/// keeping dyadic Sobol coordinates away from the exact zeros of cos and sin.
pub fn box_muller(u1: f64, u2: f64) -> (f64, f64) {
    let r = (-2.0 * (1.0 - u1).ln()).sqrt();
    let t = (u2 + 1.0 / 8_589_934_592.0).fract();
    let (s, c) = (2.0 * PI * t).sin_cos();
    (r * c, r * s)
}

/// Draws a Haar-distributed element of U(4) (complex) or SO(4) (real).
///
/// A Ginibre matrix is orthonormalized column by column; Gram–Schmidt leaves a
/// triangular factor with positive diagonal, which makes the result exactly Haar.
pub fn haar_group_element(src: &mut SequenceSource, ensemble: Ensemble) -> Result<GroupElement> {
    let need = haar_dimension(ensemble);
    if src.dimension() < need {
        return Err(Error::Config(format!(
            "Haar sampling for the {ensemble} ensemble needs dimension >= {need}, got {}",
            src.dimension()
        )));
    }
    let mut u = vec![0.0; src.dimension()];
    loop {
        src.next_into(&mut u);
        let mut g = [[C64::new(0.0, 0.0); 4]; 4];
        match ensemble {
            Ensemble::Complex => {
                for k in 0..16 {
                    let (re, im) = box_muller(u[2 * k], u[2 * k + 1]);
                    g[k / 4][k % 4] = C64::new(re, im);
                }
            }
            Ensemble::Real => {
                for k in 0..8 {
                    let (a, b) = box_muller(u[2 * k], u[2 * k + 1]);
                    let (i, j) = (2 * k, 2 * k + 1);
                    g[i / 4][i % 4] = C64::new(a, 0.0);
                    g[j / 4][j % 4] = C64::new(b, 0.0);
                }
            }
        }
        if let Some(mut q) = orthonormalize_columns(&g) {
            if ensemble == Ensemble::Real && determinant(&q).re < 0.0 {
                for row in q.iter_mut() {
                    row[3] = -row[3];
                }
            }
            return Ok(GroupElement::from_parts_unchecked(q, ensemble));
        }
    }
}

/// Modified Gram–Schmidt with one reorthogonalization pass. `None` if the
/// columns are numerically dependent.
fn orthonormalize_columns(g: &Mat4) -> Option<Mat4> {
    let mut cols = [[C64::new(0.0, 0.0); 4]; 4];
    for (j, col) in cols.iter_mut().enumerate() {
        for i in 0..4 {
            col[i] = g[i][j];
        }
    }
    let scale = cols
        .iter()
        .flat_map(|c| c.iter())
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    for j in 0..4 {
        for _pass in 0..2 {
            for k in 0..j {
                let proj: C64 = (0..4).map(|i| cols[k][i].conj() * cols[j][i]).sum();
                for i in 0..4 {
                    let v = cols[k][i];
                    cols[j][i] -= proj * v;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 1e-12 * scale) {
            return None;
        }
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    let mut q = [[C64::new(0.0, 0.0); 4]; 4];
    for (j, col) in cols.iter().enumerate() {
        for i in 0..4 {
            q[i][j] = col[i];
        }
    }
    Some(q)
}

/// Proposal distribution on the eigenvalue simplex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Proposal {
    /// Dirichlet(1, …, 1): flat on the simplex.
    Uniform,
    /// Dirichlet(½, …, ½): matches the λ^{-1/2} factors of the Bures density.
    BuresAdapted,
}

impl Proposal {
    fn concentration(self) -> f64 {
        match self {
            Proposal::Uniform => 1.0,
            Proposal::BuresAdapted => 0.5,
        }
    }

    /// Log of the Dirichlet normalizing constant `Γ(n a) / Γ(a)^n`.
    pub fn log_normalizer(self, n: usize) -> f64 {
        let a = self.concentration();
        ln_gamma_half_integer(n as f64 * a) - n as f64 * ln_gamma_half_integer(a)
    }

    /// Exact log-density (w.r.t. Lebesgue measure on the first n-1 coordinates).
    pub fn log_density(self, lambda: &[f64]) -> f64 {
        let a = self.concentration();
        let body: f64 = if a == 1.0 {
            0.0
        } else {
            lambda.iter().map(|x| (a - 1.0) * x.ln()).sum()
        };
        self.log_normalizer(lambda.len()) + body
    }
}

/// `ln Γ(x)` for positive integers and half-integers.
fn ln_gamma_half_integer(x: f64) -> f64 {
    let twice = (2.0 * x).round();
    debug_assert!((twice - 2.0 * x).abs() < 1e-12 && twice >= 1.0);
    let mut acc = 0.0;
    let mut y = x;
    if (twice as u64).is_multiple_of(2) {
        while y > 1.0 {
            y -= 1.0;
            acc += y.ln();
        }
    } else {
        while y > 0.5 {
            y -= 1.0;
            acc += y.ln();
        }
        acc += 0.5 * PI.ln();
    }
    acc
}

/// A simplex proposal draw with its log proposal density.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexDraw {
    pub lambda: Vec<f64>,
    pub log_density: f64,
}

/// Draws an (unsorted) point on the `n`-simplex from `proposal`.
///
/// Consumes one point per attempt; the adapted proposal redraws the
/// probability-zero case of an exactly vanishing coordinate.
pub fn simplex_point(src: &mut SequenceSource, n: usize, proposal: Proposal) -> Result<SimplexDraw> {
    if n < 2 || 2 * n > src.dimension() {
        return Err(Error::Config(format!(
            "simplex sampling of size {n} needs dimension >= {}, got {}",
            2 * n,
            src.dimension()
        )));
    }
    let mut u = vec![0.0; src.dimension()];
    loop {
        src.next_into(&mut u);
        let raw: Vec<f64> = match proposal {
            Proposal::Uniform => u[..n].iter().map(|x| -(1.0 - x).ln()).collect(),
            Proposal::BuresAdapted => (0..n)
                .map(|i| {
                    let (g, _) = box_muller(u[2 * i], u[2 * i + 1]);
                    g * g
                })
                .collect(),
        };
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) {
            continue;
        }
        let lambda: Vec<f64> = raw.iter().map(|x| x / total).collect();
        if proposal == Proposal::BuresAdapted && lambda.iter().any(|&x| x <= 0.0) {
            continue;
        }
        let log_density = proposal.log_density(&lambda);
        return Ok(SimplexDraw { lambda, log_density });
    }
}

/// Draws a two-qubit spectrum from `proposal`, sorted descending, with its log
/// proposal density.
pub fn dirichlet_simplex(src: &mut SequenceSource, proposal: Proposal) -> Result<(Spectrum, f64)> {
    let draw = simplex_point(src, 4, proposal)?;
    let mut v = [0.0; 4];
    v.copy_from_slice(&draw.lambda);
    // Renormalize after division so the sum is 1 to rounding.
    let s: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= s;
    }
    Ok((Spectrum::new(v)?, draw.log_density))
}

/// Level set `C(λ) = c` of the maximal concurrence over spectral orbits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedCSlice {
    c: f64,
    max_rejects: u64,
}

impl FixedCSlice {
    pub fn new(c: f64, max_rejects: u64) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::InvalidInput(format!("concurrence {c} is outside (0, 1)")));
        }
        if max_rejects == 0 {
            return Err(Error::Config("max_rejects must be positive".into()));
        }
        Ok(FixedCSlice { c, max_rejects })
    }

    pub fn with_default_budget(c: f64) -> Result<Self> {
        FixedCSlice::new(c, DEFAULT_MAX_REJECTS)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn max_rejects(&self) -> u64 {
        self.max_rejects
    }
}

/// Solves for `(λ1, λ3)` given `(λ2, λ4)` on the slice. Returns the ordered
/// spectrum if it is admissible.
pub fn solve_slice(c: f64, lambda2: f64, lambda4: f64) -> Option<[f64; 4]> {
    let d = c + 2.0 * (lambda2 * lambda4).sqrt();
    let s = 1.0 - lambda2 - lambda4;
    let l1 = 0.5 * (s + d);
    let l3 = 0.5 * (s - d);
    let ordered = l1 >= lambda2 && lambda2 >= l3 && l3 >= lambda4 && lambda4 >= 0.0;
    ordered.then_some([l1, lambda2, l3, lambda4])
}

/// Draws a spectrum with maximal concurrence exactly `c`, uniform in `(λ2, λ4)`
/// over the admissible part of the slice.
///
/// Candidates come from the box `[0, min(½, 1-c)] × [0, min(¼, (1-c)/4)]`, which
/// contains every admissible `(λ2, λ4)`.
pub fn spectrum_with_concurrence(slice: &FixedCSlice, src: &mut SequenceSource) -> Result<Spectrum> {
    if src.dimension() < 2 {
        return Err(Error::Config("fixed-C sampling needs dimension >= 2".into()));
    }
    let c = slice.c;
    let w2 = (1.0 - c).min(0.5);
    let w4 = (0.25 * (1.0 - c)).min(0.25);
    let mut u = vec![0.0; src.dimension()];
    for _ in 0..slice.max_rejects {
        src.next_into(&mut u);
        if let Some(v) = solve_slice(c, w2 * u[0], w4 * u[1]) {
            return Spectrum::from_ordered(v);
        }
    }
    Err(Error::InfeasibleSlice { c, attempts: slice.max_rejects })
}
