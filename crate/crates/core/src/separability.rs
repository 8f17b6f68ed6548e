//! Separability verdicts (PPT), maximal concurrence over spectral orbits and
//! the Werner test family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{eigenvalues_sym, partial_transpose, DensityMatrix, Ensemble, Mat4, Spectrum, C64, PSD_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SepVerdict {
    pub separable: bool,
    /// Smallest eigenvalue of the partial transpose.
    pub min_pt_eigenvalue: f64,
}

/// PPT verdict; exact for two qubits.
pub fn is_separable(m: &DensityMatrix) -> Result<SepVerdict> {
    let pt = partial_transpose(m);
    let min = eigenvalues_sym(&pt)?[3];
    Ok(SepVerdict { separable: min >= PSD_TOL, min_pt_eigenvalue: min })
}

/// `max{0, λ1 − λ3 − 2√(λ2 λ4)}`.
pub fn maximal_concurrence(s: &Spectrum) -> f64 {
    let [l1, l2, l3, l4] = *s.values();
    (l1 - l3 - 2.0 * (l2 * l4).sqrt()).max(0.0)
}

/// [`maximal_concurrence`] for a raw eigenvalue array, which must be descending.
pub fn maximal_concurrence_of(lambda: &[f64; 4]) -> Result<f64> {
    if lambda.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput(format!(
            "eigenvalues {lambda:?} are not in descending order"
        )));
    }
    Ok(maximal_concurrence(&Spectrum::from_ordered(*lambda)?))
}

/// True when every state on the spectral orbit of `s` is separable.
pub fn is_absolutely_separable(s: &Spectrum) -> bool {
    let [l1, l2, l3, l4] = *s.values();
    l1 - l3 - 2.0 * (l2 * l4).sqrt() <= 0.0
}

/// `w |Φ⁺⟩⟨Φ⁺| + (1 − w) I/4` with `|Φ⁺⟩ = (|00⟩ + |11⟩)/√2`.
pub fn werner_state(w: f64, ensemble: Ensemble) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::InvalidInput(format!("Werner weight {w} outside [0, 1]")));
    }
    let mut m: Mat4 = [[C64::new(0.0, 0.0); 4]; 4];
    let mixed = (1.0 - w) / 4.0;
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C64::new(mixed, 0.0);
    }
    for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
        m[i][j] += C64::new(w / 2.0, 0.0);
    }
    Ok(DensityMatrix::from_parts_unchecked(m, ensemble))
}

/// Werner spectrum `((1+3w)/4, (1−w)/4, (1−w)/4, (1−w)/4)`.
pub fn werner_spectrum(w: f64) -> Result<Spectrum> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::InvalidInput(format!("Werner weight {w} outside [0, 1]")));
    }
    let low = (1.0 - w) / 4.0;
    Spectrum::new([1.0 - 3.0 * low, low, low, low])
}
