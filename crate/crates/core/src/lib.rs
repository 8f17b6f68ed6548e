//! Monte-Carlo estimation of two-qubit separability over spectral orbits.
//!
//! The crate estimates σ(C), the probability that a Haar-random point on the
//! spectral orbit of a two-qubit state is separable, as a function of the
//! maximal concurrence C over that orbit, for real (β = 1) and complex (β = 2)
//! density matrices. It also computes Hilbert-Schmidt and Bures separability
//! probabilities, absolute-separability probabilities, discontinuities of the
//! estimated curves and linear fits of curve segments.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimator;
pub mod io;
pub mod measures;
pub mod qmat;
pub mod sampling;
pub mod separability;
pub mod validate;

pub use error::{Error, Result};
pub use qmat::{DensityMatrix, Ensemble, GroupElement, Spectrum};
