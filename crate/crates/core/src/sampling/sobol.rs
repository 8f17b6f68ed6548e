use super::direction_numbers::{INITIAL_M, MAX_DIMENSION, POLYNOMIALS};
use crate::error::{Error, Result};

const BITS: usize = 32;

/// Unscrambled Sobol generator in Gray-code order with 32-bit resolution.
///
/// Points are computed directly from their index, so any counter can be
/// evaluated without replaying the sequence.
#[derive(Clone, Debug)]
pub struct Sobol {
    directions: Vec<[u32; BITS]>,
}

impl Sobol {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 || dimension > MAX_DIMENSION {
            return Err(Error::Config(format!(
                "low-discrepancy dimension {dimension} outside supported range 1..={MAX_DIMENSION}"
            )));
        }
        let directions = (0..dimension).map(direction_numbers).collect();
        Ok(Sobol { directions })
    }

    pub fn dimension(&self) -> usize {
        self.directions.len()
    }

    /// Coordinate `dim` of point `index`, as a 32-bit fraction. Indices wrap at 2^32.
    pub fn coordinate(&self, index: u64, dim: usize) -> u32 {
        let mut gray = (index ^ (index >> 1)) as u32;
        let v = &self.directions[dim];
        let mut x = 0u32;
        let mut k = 0;
        while gray != 0 {
            if gray & 1 == 1 {
                x ^= v[k];
            }
            gray >>= 1;
            k += 1;
        }
        x
    }

    pub fn point(&self, index: u64) -> Vec<f64> {
        (0..self.dimension())
            .map(|d| f64::from(self.coordinate(index, d)) / 4_294_967_296.0)
            .collect()
    }
}

fn direction_numbers(dim: usize) -> [u32; BITS] {
    let mut m = [0u32; BITS];
    if dim == 0 {
        m.iter_mut().for_each(|x| *x = 1);
    } else {
        let poly = POLYNOMIALS[dim];
        let degree = (31 - poly.leading_zeros()) as usize;
        let interior = (poly >> 1) & ((1 << (degree - 1)) - 1);
        m[..degree].copy_from_slice(&INITIAL_M[dim][..degree]);
        for k in degree..BITS {
            let mut next = m[k - degree] ^ (m[k - degree] << degree);
            for i in 1..degree {
                if (interior >> (degree - 1 - i)) & 1 == 1 {
                    next ^= m[k - i] << i;
                }
            }
            m[k] = next;
        }
    }
    let mut v = [0u32; BITS];
    for (k, slot) in v.iter_mut().enumerate() {
        *slot = m[k] << (BITS - 1 - k);
    }
    v
}
