use alloc::vec::Vec;

use super::Region;
use crate::saw::LatticePoint;
use crate::{Error, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of substream `index` derived from `seed`.
///
/// Every random quantity is addressed by a path of indices from one top-level
/// seed: sample `k` of a Monte Carlo run with seed `s` uses
/// `substream(s, k)`.
pub fn substream(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed ^ 0xA076_1D64_78BD_642F).wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Uniform variate in `[-1, 1)` attached to `key` under `seed`: the
/// `key`-th output of a SplitMix64 stream started from `mix64(seed)`.
pub fn uniform_variate(seed: u64, key: u64) -> f64 {
    let state = mix64(seed).wrapping_add(key.wrapping_add(1).wrapping_mul(GOLDEN));
    let u = (mix64(state) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    2.0 * u - 1.0
}

/// I.i.d. uniform `[-1, 1]` potentials on the box underlying a region.
///
/// `ω(x)` depends only on `(seed, box index of x)`, so deleting sites or
/// overriding one site leaves every other value untouched.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderSample {
    dimension: usize,
    half_width: usize,
    seed: u64,
    omega: Vec<f64>,
}

impl DisorderSample {
    pub fn generate(region: &Region, seed: u64) -> Self {
        Self {
            dimension: region.dimension(),
            half_width: region.half_width(),
            seed,
            omega: (0..region.box_len() as u64)
                .map(|cell| uniform_variate(seed, cell))
                .collect(),
        }
    }

    /// Explicit potentials on the box, indexed like [`Region::box_index`].
    pub fn from_values(region: &Region, seed: u64, omega: Vec<f64>) -> Result<Self> {
        if omega.len() != region.box_len() {
            return Err(Error::InvalidInput("one potential per box site required"));
        }
        if omega.iter().any(|w| !(-1.0..=1.0).contains(w)) {
            return Err(Error::InvalidInput("potentials must lie in [-1, 1]"));
        }
        Ok(Self {
            dimension: region.dimension(),
            half_width: region.half_width(),
            seed,
            omega,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn matches(&self, region: &Region) -> bool {
        self.dimension == region.dimension() && self.half_width == region.half_width()
    }

    pub fn check(&self, region: &Region) -> Result<()> {
        if self.dimension != region.dimension() {
            return Err(Error::DimensionMismatch {
                expected: region.dimension(),
                found: self.dimension,
            });
        }
        if self.half_width != region.half_width() {
            return Err(Error::InvalidInput("sample was drawn for a different box"));
        }
        Ok(())
    }

    /// Potential at box index `cell`.
    pub fn at_cell(&self, cell: usize) -> f64 {
        self.omega[cell]
    }

    pub fn at(&self, region: &Region, point: &LatticePoint) -> Result<f64> {
        self.check(region)?;
        let cell = region.box_index(point)?.ok_or(Error::OutsideRegion)?;
        Ok(self.omega[cell])
    }

    /// Copy with `ω(point)` replaced by `value`.
    pub fn with_value(&self, region: &Region, point: &LatticePoint, value: f64) -> Result<Self> {
        self.check(region)?;
        if !(-1.0..=1.0).contains(&value) {
            return Err(Error::Domain { what: "omega", value });
        }
        let cell = region.box_index(point)?.ok_or(Error::OutsideRegion)?;
        let mut out = self.clone();
        out.omega[cell] = value;
        Ok(out)
    }

    pub fn values(&self) -> &[f64] {
        &self.omega
    }
}
