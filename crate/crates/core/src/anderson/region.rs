use alloc::vec;
use alloc::vec::Vec;

use crate::saw::LatticePoint;
use crate::{Error, Result};

const NOT_IN_REGION: u32 = u32::MAX;
/// Largest box handled (sites of `[-L, L]^d`).
pub const MAX_BOX_SITES: usize = 1 << 24;

/// The box `[-L, L]^d` minus a list of deleted sites.
///
/// Sites are numbered in increasing box index `sum_i (x_i + L) (2L+1)^i`,
/// which keeps the Hamiltonian banded with bandwidth `(2L+1)^{d-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    dimension: usize,
    half_width: usize,
    side: usize,
    deleted: Vec<usize>,
    sites: Vec<usize>,
    slots: Vec<u32>,
}

impl Region {
    pub fn cube(dimension: usize, half_width: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("dimension must be positive"));
        }
        let side = 2 * half_width + 1;
        let cells = u32::try_from(dimension)
            .ok()
            .and_then(|d| side.checked_pow(d))
            .filter(|&c| c <= MAX_BOX_SITES)
            .ok_or(Error::InvalidInput("box too large"))?;
        Ok(Self {
            dimension,
            half_width,
            side,
            deleted: Vec::new(),
            sites: (0..cells).collect(),
            slots: (0..cells as u32).collect(),
        })
    }

    /// Box `[-L, L]^d` minus `deleted`; each deleted point must lie in the
    /// box and appear once.
    pub fn with_deleted(dimension: usize, half_width: usize, deleted: &[LatticePoint]) -> Result<Self> {
        let mut region = Self::cube(dimension, half_width)?;
        let mut boxed = Vec::with_capacity(deleted.len());
        for p in deleted {
            boxed.push(region.box_index(p)?.ok_or(Error::OutsideRegion)?);
        }
        boxed.sort_unstable();
        if boxed.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate deleted site"));
        }
        region.deleted = boxed;
        region.reindex();
        Ok(region)
    }

    /// `Λ \ {point}`.
    pub fn without(&self, point: &LatticePoint) -> Result<Self> {
        let cell = self.box_index(point)?.ok_or(Error::OutsideRegion)?;
        if self.slots[cell] == NOT_IN_REGION {
            return Err(Error::InvalidInput("site already deleted"));
        }
        let mut region = self.clone();
        let at = region.deleted.binary_search(&cell).unwrap_err();
        region.deleted.insert(at, cell);
        region.reindex();
        Ok(region)
    }

    fn reindex(&mut self) {
        let cells = self.slots.len();
        self.slots = vec![NOT_IN_REGION; cells];
        self.sites.clear();
        let mut next_deleted = self.deleted.iter().peekable();
        for cell in 0..cells {
            if next_deleted.peek() == Some(&&cell) {
                next_deleted.next();
                continue;
            }
            self.slots[cell] = self.sites.len() as u32;
            self.sites.push(cell);
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Number of sites in the full box.
    pub fn box_len(&self) -> usize {
        self.slots.len()
    }

    /// `|Λ|`
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn deleted(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        self.deleted.iter().map(|&c| self.cell_point(c))
    }

    /// Box index of `point`, `None` outside the box.
    pub fn box_index(&self, point: &LatticePoint) -> Result<Option<usize>> {
        if point.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: point.dimension(),
            });
        }
        let l = self.half_width as i64;
        let mut idx = 0usize;
        let mut stride = 1usize;
        for &c in point.coords() {
            let c = c as i64;
            if c < -l || c > l {
                return Ok(None);
            }
            idx += (c + l) as usize * stride;
            stride *= self.side;
        }
        Ok(Some(idx))
    }

    /// Site index of `point` in `Λ`.
    pub fn site(&self, point: &LatticePoint) -> Option<usize> {
        let cell = self.box_index(point).ok()??;
        match self.slots[cell] {
            NOT_IN_REGION => None,
            s => Some(s as usize),
        }
    }

    pub fn contains(&self, point: &LatticePoint) -> bool {
        self.site(point).is_some()
    }

    /// Box index of site `site`.
    pub fn cell(&self, site: usize) -> usize {
        self.sites[site]
    }

    pub fn point(&self, site: usize) -> LatticePoint {
        self.cell_point(self.sites[site])
    }

    fn cell_point(&self, mut cell: usize) -> LatticePoint {
        let l = self.half_width as i32;
        let mut coords = Vec::with_capacity(self.dimension);
        for _ in 0..self.dimension {
            coords.push((cell % self.side) as i32 - l);
            cell /= self.side;
        }
        LatticePoint::new(coords)
    }

    /// Sites of `Λ` adjacent to `site`, in axis order `+e_1, -e_1, ...`.
    pub fn neighbors(&self, site: usize) -> impl Iterator<Item = usize> + '_ {
        let cell = self.sites[site];
        let side = self.side;
        (0..self.dimension).flat_map(move |axis| {
            let stride = side.pow(axis as u32);
            let coord = (cell / stride) % side;
            let up = (coord + 1 < side).then(|| cell + stride);
            let down = (coord > 0).then(|| cell - stride);
            [up, down].into_iter().flatten()
        })
        .filter_map(move |c| match self.slots[c] {
            NOT_IN_REGION => None,
            s => Some(s as usize),
        })
    }
}
