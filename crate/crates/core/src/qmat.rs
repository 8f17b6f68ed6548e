//! Fixed-size linear algebra for two-qubit density matrices.
//!
//! Everything here works on 4×4 complex arrays (real-ensemble matrices carry
//! zero imaginary parts). The eigen-solver is a cyclic complex Jacobi method,
//! generic over the matrix size so the same code also serves 2×2 checks.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense 4×4 complex matrix, row-major.
pub type Mat4 = [[C64; 4]; 4];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerance on each eigenvalue of a spectrum before it is clamped to zero.
pub const SPECTRUM_NEG_TOL: f64 = 1e-12;
/// Tolerance on the trace / eigenvalue sum.
pub const TRACE_TOL: f64 = 1e-12;
/// Entrywise tolerance for Hermiticity and unitarity of stored matrices.
pub const ENTRY_TOL: f64 = 1e-12;
/// Smallest admissible eigenvalue of a density matrix (and of a PPT partial transpose).
pub const PSD_TOL: f64 = -1e-10;
/// Hermiticity tolerance accepted by the eigen-solver.
pub const EIGEN_HERMITIAN_TOL: f64 = 1e-10;

const JACOBI_OFF_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 64;

/// Real symmetric (β = 1) or complex Hermitian (β = 2) matrix ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    Real,
    Complex,
}

impl Ensemble {
    /// Dyson index.
    pub fn beta(self) -> u8 {
        match self {
            Ensemble::Real => 1,
            Ensemble::Complex => 2,
        }
    }

    pub fn from_beta(beta: u8) -> Result<Self> {
        match beta {
            1 => Ok(Ensemble::Real),
            2 => Ok(Ensemble::Complex),
            b => Err(Error::InvalidInput(format!("unsupported Dyson index {b}"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Ensemble::Real => "real",
            Ensemble::Complex => "complex",
        }
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "real" | "1" => Ok(Ensemble::Real),
            "complex" | "2" => Ok(Ensemble::Complex),
            other => Err(Error::Config(format!("unknown ensemble '{other}'"))),
        }
    }
}

/// Four eigenvalues of a two-qubit state, nonnegative, summing to one,
/// stored in descending order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum([f64; 4]);

impl Spectrum {
    /// Validates and sorts `values`. Entries in `[-1e-12, 0)` are clamped to zero.
    pub fn new(values: [f64; 4]) -> Result<Self> {
        let mut v = values;
        for x in v.iter_mut() {
            if !x.is_finite() || *x < -SPECTRUM_NEG_TOL {
                return Err(Error::InvalidInput(format!(
                    "spectrum entry {x} is negative or not finite"
                )));
            }
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let sum: f64 = v.iter().sum();
        if (sum - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidInput(format!(
                "spectrum sums to {sum}, expected 1"
            )));
        }
        v.sort_by(|a, b| b.total_cmp(a));
        Ok(Spectrum(v))
    }

    /// Like [`Spectrum::new`], but rejects input that is not already descending.
    pub fn from_ordered(values: [f64; 4]) -> Result<Self> {
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput(format!(
                "spectrum {values:?} is not in descending order"
            )));
        }
        Spectrum::new(values)
    }

    pub fn values(&self) -> &[f64; 4] {
        &self.0
    }

    pub fn maximally_mixed() -> Self {
        Spectrum([0.25; 4])
    }

    pub fn pure() -> Self {
        Spectrum([1.0, 0.0, 0.0, 0.0])
    }
}

/// Unit-trace positive semidefinite Hermitian 4×4 matrix tagged with its ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: Mat4,
    ensemble: Ensemble,
}

impl DensityMatrix {
    pub fn new(entries: Mat4, ensemble: Ensemble) -> Result<Self> {
        check_hermitian(&entries, ENTRY_TOL)?;
        if ensemble == Ensemble::Real
            && entries.iter().flatten().any(|z| z.im.abs() > ENTRY_TOL)
        {
            return Err(Error::InvalidInput(
                "real-ensemble density matrix has imaginary entries".into(),
            ));
        }
        let tr = trace(&entries);
        if (tr.re - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidInput(format!("trace {} is not 1", tr.re)));
        }
        let min = eigenvalues_sym(&entries)?[3];
        if min < PSD_TOL {
            return Err(Error::InvalidInput(format!(
                "matrix is not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(DensityMatrix { entries, ensemble })
    }

    pub(crate) fn from_parts_unchecked(entries: Mat4, ensemble: Ensemble) -> Self {
        DensityMatrix { entries, ensemble }
    }

    pub fn entries(&self) -> &Mat4 {
        &self.entries
    }

    pub fn ensemble(&self) -> Ensemble {
        self.ensemble
    }

    /// `V ρ V†`. Used for local-unitary checks; the result keeps this ensemble tag.
    pub fn transform(&self, v: &Mat4) -> DensityMatrix {
        let mut out = mul(&mul(v, &self.entries), &adjoint(v));
        hermitize(&mut out);
        DensityMatrix { entries: out, ensemble: self.ensemble }
    }
}

/// Haar-distributed unitary (complex ensemble) or special-orthogonal (real ensemble) matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement {
    matrix: Mat4,
    ensemble: Ensemble,
}

impl GroupElement {
    pub fn new(matrix: Mat4, ensemble: Ensemble) -> Result<Self> {
        let prod = mul(&matrix, &adjoint(&matrix));
        for (i, row) in prod.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                let target = if i == j { ONE } else { ZERO };
                if (*z - target).norm() > ENTRY_TOL {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not unitary: (U U†)[{i}][{j}] = {z}"
                    )));
                }
            }
        }
        if ensemble == Ensemble::Real {
            if matrix.iter().flatten().any(|z| z.im != 0.0) {
                return Err(Error::InvalidInput("orthogonal matrix has imaginary entries".into()));
            }
            let det = determinant(&matrix);
            if (det - ONE).norm() > ENTRY_TOL {
                return Err(Error::InvalidInput(format!("orthogonal matrix has det {det}")));
            }
        }
        Ok(GroupElement { matrix, ensemble })
    }

    pub fn identity(ensemble: Ensemble) -> Self {
        GroupElement { matrix: identity(), ensemble }
    }

    pub(crate) fn from_parts_unchecked(matrix: Mat4, ensemble: Ensemble) -> Self {
        GroupElement { matrix, ensemble }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.matrix
    }

    pub fn ensemble(&self) -> Ensemble {
        self.ensemble
    }
}

/// `U diag(λ) U†` for a point on the spectral orbit of `s`.
pub fn conjugate_spectrum(s: &Spectrum, u: &GroupElement) -> DensityMatrix {
    let lam = s.values();
    let m = &u.matrix;
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in i..4 {
            let mut acc = ZERO;
            for k in 0..4 {
                acc += m[i][k] * m[j][k].conj() * lam[k];
            }
            out[i][j] = acc;
        }
    }
    for i in 0..4 {
        out[i][i].im = 0.0;
        for j in 0..i {
            out[i][j] = out[j][i].conj();
        }
    }
    DensityMatrix::from_parts_unchecked(out, u.ensemble)
}

/// Transpose on the second qubit: entry `(2a+b, 2c+d)` moves to `(2a+d, 2c+b)`.
pub fn partial_transpose(m: &DensityMatrix) -> Mat4 {
    partial_transpose_matrix(m.entries())
}

pub fn partial_transpose_matrix(m: &Mat4) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    out[2 * a + d][2 * c + b] = m[2 * a + b][2 * c + d];
                }
            }
        }
    }
    out
}

/// Eigenvalues of a Hermitian matrix in descending order, by cyclic Jacobi rotations.
pub fn eigenvalues_sym<const N: usize>(m: &[[C64; N]; N]) -> Result<[f64; N]> {
    check_hermitian(m, EIGEN_HERMITIAN_TOL)?;
    let mut a = *m;
    // Symmetrize so the rotations act on an exactly Hermitian matrix.
    for i in 0..N {
        a[i][i].im = 0.0;
        for j in 0..i {
            let avg = (a[i][j] + a[j][i].conj()) * 0.5;
            a[i][j] = avg;
            a[j][i] = avg.conj();
        }
    }
    let scale = frobenius(&a).max(1.0);
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= JACOBI_OFF_TOL * scale {
            converged = true;
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                rotate(&mut a, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > JACOBI_OFF_TOL * scale {
        return Err(Error::Numerical(
            "Jacobi iteration did not converge".to_string(),
        ));
    }
    let mut ev = [0.0; N];
    for (i, e) in ev.iter_mut().enumerate() {
        *e = a[i][i].re;
    }
    ev.sort_by(|x, y| y.total_cmp(x));
    Ok(ev)
}

/// One complex Jacobi rotation annihilating `a[p][q]`.
///
/// The rotation is `V = diag(1, conj(e)) · R(θ)` on the (p, q) plane, where `e` is
/// the phase of `a[p][q]`; `A ← V† A V`.
fn rotate<const N: usize>(a: &mut [[C64; N]; N], p: usize, q: usize) {
    let apq = a[p][q];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let phase = apq / b;
    let app = a[p][p].re;
    let aqq = a[q][q].re;
    let theta = 0.5 * (2.0 * b).atan2(aqq - app);
    let (s, c) = theta.sin_cos();
    let pc = phase.conj();
    let v_pp = C64::new(c, 0.0);
    let v_pq = C64::new(s, 0.0);
    let v_qp = -pc * s;
    let v_qq = pc * c;

    for row in a.iter_mut() {
        let akp = row[p];
        let akq = row[q];
        row[p] = akp * v_pp + akq * v_qp;
        row[q] = akp * v_pq + akq * v_qq;
    }
    for k in 0..N {
        let mpk = a[p][k];
        let mqk = a[q][k];
        a[p][k] = v_pp.conj() * mpk + v_qp.conj() * mqk;
        a[q][k] = v_pq.conj() * mpk + v_qq.conj() * mqk;
    }
    a[p][q] = ZERO;
    a[q][p] = ZERO;
    a[p][p].im = 0.0;
    a[q][q].im = 0.0;
}

fn check_hermitian<const N: usize>(m: &[[C64; N]; N], tol: f64) -> Result<()> {
    for i in 0..N {
        for j in i..N {
            let d = (m[i][j] - m[j][i].conj()).norm();
            if !d.is_finite() || d > tol {
                return Err(Error::InvalidInput(format!(
                    "matrix is not Hermitian at ({i},{j}): deviation {d:e}"
                )));
            }
        }
    }
    Ok(())
}

fn off_diagonal_norm<const N: usize>(a: &[[C64; N]; N]) -> f64 {
    let mut acc = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            if i != j {
                acc += z.norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn frobenius<const N: usize>(a: &[[C64; N]; N]) -> f64 {
    a.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn identity() -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    m
}

pub fn mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            for j in 0..4 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn adjoint(a: &Mat4) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[j][i] = a[i][j].conj();
        }
    }
    out
}

pub fn trace(a: &Mat4) -> C64 {
    (0..4).map(|i| a[i][i]).sum()
}

/// Kronecker product `a ⊗ b` of two single-qubit operators; `a` acts on the high-order bit.
pub fn kron(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(a: &Mat4) -> C64 {
    let mut m = *a;
    let mut det = ONE;
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&x, &y| m[x][col].norm().total_cmp(&m[y][col].norm()))
            .unwrap_or(col);
        if m[pivot][col].norm() == 0.0 {
            return ZERO;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col];
        det *= p;
        for r in (col + 1)..4 {
            let f = m[r][col] / p;
            for c in col..4 {
                let v = m[col][c];
                m[r][c] -= f * v;
            }
        }
    }
    det
}

fn hermitize(m: &mut Mat4) {
    for i in 0..4 {
        m[i][i].im = 0.0;
        for j in 0..i {
            let avg = (m[i][j] + m[j][i].conj()) * 0.5;
            m[i][j] = avg;
            m[j][i] = avg.conj();
        }
    }
}

pub fn diag(values: &[f64; 4]) -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    for (i, v) in values.iter().enumerate() {
        m[i][i] = C64::new(*v, 0.0);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn werner(w: f64) -> Mat4 {
        let mut m = diag(&[(1.0 - w) / 4.0; 4]);
        m[0][0] += c(w / 2.0);
        m[3][3] += c(w / 2.0);
        m[0][3] += c(w / 2.0);
        m[3][0] += c(w / 2.0);
        m
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::new([0.5, 0.5, 0.0, -1e-13]).is_ok());
        assert!(Spectrum::new([0.5, 0.5, 0.1, -1e-3]).is_err());
        assert!(Spectrum::new([0.5, 0.5, 0.1, 0.0]).is_err());
        let s = Spectrum::new([0.1, 0.4, 0.2, 0.3]).unwrap();
        assert_eq!(s.values(), &[0.4, 0.3, 0.2, 0.1]);
        assert!(Spectrum::from_ordered([0.1, 0.4, 0.2, 0.3]).is_err());
        let z = Spectrum::new([0.5, 0.5, 0.0, -1e-13]).unwrap();
        assert_eq!(z.values()[3], 0.0);
    }

    #[test]
    fn identity_conjugation_of_pure_state() {
        let rho = conjugate_spectrum(&Spectrum::pure(), &GroupElement::identity(Ensemble::Complex));
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == 0 && j == 0 { 1.0 } else { 0.0 };
                assert_eq!(rho.entries()[i][j], c(expected));
            }
        }
    }

    #[test]
    fn eigenvalues_of_diagonal_and_pauli_x() {
        let d = diag(&[0.4, 0.3, 0.2, 0.1]);
        let ev = eigenvalues_sym(&d).unwrap();
        assert_eq!(ev, [0.4, 0.3, 0.2, 0.1]);

        let x = [[c(0.0), c(1.0)], [c(1.0), c(0.0)]];
        let ev = eigenvalues_sym(&x).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-15 && (ev[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigenvalues_of_werner_matrix() {
        let ev = eigenvalues_sym(&werner(0.5)).unwrap();
        let expected = [0.625, 0.125, 0.125, 0.125];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14, "{ev:?}");
        }
    }

    #[test]
    fn complex_hermitian_eigenvalues() {
        // Pauli-Y has eigenvalues ±1.
        let y = [[C64::new(0.0, 0.0), C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), C64::new(0.0, 0.0)]];
        let ev = eigenvalues_sym(&y).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-15 && (ev[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = [[c(0.0), c(1.0)], [c(0.0), c(0.0)]];
        assert!(matches!(eigenvalues_sym(&m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn partial_transpose_fixed_points() {
        let mixed = diag(&[0.25; 4]);
        assert_eq!(partial_transpose_matrix(&mixed), mixed);
        let pure = diag(&[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(partial_transpose_matrix(&pure), pure);
    }

    #[test]
    fn partial_transpose_of_werner_matrix() {
        let pt = partial_transpose_matrix(&werner(0.5));
        let ev = eigenvalues_sym(&pt).unwrap();
        assert!((ev[3] + 0.125).abs() < 1e-14, "{ev:?}");
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(werner(0.3), Ensemble::Real).is_ok());
        assert!(DensityMatrix::new(diag(&[0.5, 0.5, 0.5, -0.5]), Ensemble::Real).is_err());
        assert!(DensityMatrix::new(diag(&[0.5, 0.5, 0.5, 0.5]), Ensemble::Real).is_err());
        let mut m = diag(&[0.25; 4]);
        m[0][1] = C64::new(0.0, 0.1);
        m[1][0] = C64::new(0.0, -0.1);
        assert!(DensityMatrix::new(m, Ensemble::Real).is_err());
        assert!(DensityMatrix::new(m, Ensemble::Complex).is_ok());
    }

    #[test]
    fn group_element_validation() {
        assert!(GroupElement::new(identity(), Ensemble::Real).is_ok());
        let mut flip = identity();
        flip[0][0] = c(-1.0);
        assert!(GroupElement::new(flip, Ensemble::Complex).is_ok());
        assert!(GroupElement::new(flip, Ensemble::Real).is_err());
        assert!(GroupElement::new(diag(&[2.0, 1.0, 1.0, 1.0]), Ensemble::Complex).is_err());
    }

    #[test]
    fn determinant_of_permutation() {
        let mut p = [[ZERO; 4]; 4];
        p[0][1] = ONE;
        p[1][0] = ONE;
        p[2][2] = ONE;
        p[3][3] = ONE;
        assert_eq!(determinant(&p), c(-1.0));
    }
}
