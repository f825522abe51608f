use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{DisorderSample, Region};
use crate::{Error, Result};

/// Sparse real symmetric `H^(Λ)`: unit hopping between neighbouring sites of
/// `Λ` and `λ ω(x)` on the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    diagonal: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
}

impl Hamiltonian {
    pub fn new(region: &Region, lambda: f64, sample: &DisorderSample) -> Result<Self> {
        Self::assemble(region, lambda, sample, None)
    }

    /// `H^({x}) ⊕ H^(Λ\{x})`: all hopping to or from `x` removed.
    pub fn decoupled(region: &Region, lambda: f64, sample: &DisorderSample, x: usize) -> Result<Self> {
        if x >= region.len() {
            return Err(Error::OutsideRegion);
        }
        Self::assemble(region, lambda, sample, Some(x))
    }

    fn assemble(region: &Region, lambda: f64, sample: &DisorderSample, cut: Option<usize>) -> Result<Self> {
        sample.check(region)?;
        if !lambda.is_finite() {
            return Err(Error::Domain { what: "lambda", value: lambda });
        }
        let n = region.len();
        let mut diagonal = Vec::with_capacity(n);
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(2 * region.dimension() * n);
        row_ptr.push(0);
        for site in 0..n {
            diagonal.push(lambda * sample.at_cell(region.cell(site)));
            if cut != Some(site) {
                let start = cols.len();
                cols.extend(region.neighbors(site).filter(|&j| cut != Some(j)));
                cols[start..].sort_unstable();
            }
            row_ptr.push(cols.len());
        }
        Ok(Self {
            diagonal,
            row_ptr,
            cols,
        })
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Columns of the unit off-diagonal entries in row `i`.
    pub fn hopping(&self, i: usize) -> &[usize] {
        &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    /// Largest `|i - j|` over nonzero entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.len())
            .flat_map(|i| self.hopping(i).iter().map(move |&j| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    /// `(H - z) u`
    pub fn apply_shifted(&self, z: Complex64, u: &[Complex64]) -> Vec<Complex64> {
        (0..self.len())
            .map(|i| {
                let hop: Complex64 = self.hopping(i).iter().map(|&j| u[j]).sum();
                hop + (self.diagonal[i] - z) * u[i]
            })
            .collect()
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        (0..self.len()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
            let r = self.hopping(i).len() as f64;
            (lo.min(self.diagonal[i] - r), hi.max(self.diagonal[i] + r))
        })
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.len()).all(|i| self.hopping(i).iter().all(|&j| self.hopping(j).binary_search(&i).is_ok()))
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.len();
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            dense[i * n + i] = self.diagonal[i];
            for &j in self.hopping(i) {
                dense[i * n + j] = 1.0;
            }
        }
        dense
    }
}
